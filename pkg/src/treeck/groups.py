"""Finite groups given by multiplication tables.

Elements are the dense indices ``0 .. order - 1``.  The identity is
discovered from the table, so index 0 need not be the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .exceptions import BoundError, GroupError

MAX_ORDER = 512


class Check(NamedTuple):
    """Boolean outcome plus an optional witness; truthy iff ``ok``."""

    ok: bool
    witness: object = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A validated finite group.  Build with :func:`from_table` or :func:`make_cyclic`."""

    order: int
    table: tuple
    identity: int
    inverse: tuple
    names: tuple = field(default=())

    def mul(self, g: int, h: int) -> int:
        return self.table[g][h]

    def inv(self, g: int) -> int:
        return self.inverse[g]

    def element_order(self, g: int) -> int:
        n, x = 1, g
        while x != self.identity:
            x = self.table[x][g]
            n += 1
        return n

    def is_cyclic(self) -> bool:
        return any(self.element_order(g) == self.order for g in range(self.order))

    def is_abelian(self) -> bool:
        t = self.table
        return all(t[g][h] == t[h][g] for g in range(self.order) for h in range(g))

    def name(self, g: int) -> str:
        return self.names[g] if self.names else str(g)

    def __eq__(self, other):
        if not isinstance(other, FiniteGroup):
            return NotImplemented
        return self.table == other.table

    def __hash__(self):
        return hash(self.table)

    def __repr__(self):
        return f"FiniteGroup(order={self.order})"


def make_cyclic(n: int, max_order: int = MAX_ORDER) -> FiniteGroup:
    """Cyclic group of order ``n`` written additively, element ``i`` named ``"i"``."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise GroupError(f"cyclic group order must be a positive integer, got {n!r}")
    if n > max_order:
        raise BoundError(f"group order {n} exceeds the cap of {max_order}")
    n = int(n)
    table = tuple(tuple((i + j) % n for j in range(n)) for i in range(n))
    inverse = tuple((-i) % n for i in range(n))
    return FiniteGroup(n, table, 0, inverse, tuple(str(i) for i in range(n)))


def from_table(table: Sequence[Sequence[int]], names: Optional[Sequence[str]] = None,
               max_order: int = MAX_ORDER) -> FiniteGroup:
    """Validate a multiplication table (``table[g][h] = g*h``) and wrap it.

    Raises
    ------
    GroupError
        On a non-square table, an out-of-range entry, a repeated entry in a
        row or column, a missing identity, a non-associative triple or a
        missing inverse.  ``err.witness`` locates the failure.
    """
    rows = [list(r) for r in table]
    n = len(rows)
    if n == 0:
        raise GroupError("empty table")
    for i, r in enumerate(rows):
        if len(r) != n:
            raise GroupError(f"non-square table: row {i} has {len(r)} entries, expected {n}",
                             witness=i)
    if n > max_order:
        raise BoundError(f"group order {n} exceeds the cap of {max_order}")
    for i, r in enumerate(rows):
        for j, x in enumerate(r):
            if not isinstance(x, (int, np.integer)) or not 0 <= x < n:
                raise GroupError(f"entry table[{i}][{j}] = {x!r} out of range 0..{n - 1}",
                                 witness=(i, j))
    arr = np.asarray(rows, dtype=np.int64)

    for i in range(n):
        seen = {}
        for j in range(n):
            x = rows[i][j]
            if x in seen:
                raise GroupError(
                    f"not a Latin square: row {i} repeats {x} in columns {seen[x]} and {j}",
                    witness=(i, seen[x], j))
            seen[x] = j
    for j in range(n):
        seen = {}
        for i in range(n):
            x = rows[i][j]
            if x in seen:
                raise GroupError(
                    f"not a Latin square: column {j} repeats {x} in rows {seen[x]} and {i}",
                    witness=(seen[x], i, j))
            seen[x] = i

    ident = np.arange(n)
    candidates = [e for e in range(n)
                  if np.array_equal(arr[e], ident) and np.array_equal(arr[:, e], ident)]
    if not candidates:
        raise GroupError("no identity element")
    e = candidates[0]

    # (g*h)*k == g*(h*k), one g-slice at a time to bound memory
    for g in range(n):
        lhs = arr[arr[g]]
        rhs = arr[g][arr]
        bad = np.argwhere(lhs != rhs)
        if bad.size:
            h, k = (int(v) for v in bad[0])
            raise GroupError(f"not associative at ({g}, {h}, {k})", witness=(g, h, k))

    inverse = []
    for g in range(n):
        hits = [h for h in range(n) if rows[g][h] == e]
        if not hits or rows[hits[0]][g] != e:
            raise GroupError(f"element {g} has no inverse", witness=g)
        inverse.append(hits[0])

    if names is not None:
        names = tuple(str(s) for s in names)
        if len(names) != n:
            raise GroupError(f"expected {n} element names, got {len(names)}")
    return FiniteGroup(n, tuple(tuple(r) for r in rows), e, tuple(inverse), names or ())


def symmetric_group_3() -> FiniteGroup:
    """S3 on {0,1,2}; element 0 is the identity and element 1 is the transposition (12)."""
    perms = [(0, 1, 2), (1, 0, 2), (0, 2, 1), (2, 1, 0), (1, 2, 0), (2, 0, 1)]
    index = {p: i for i, p in enumerate(perms)}
    # (p*q)(x) = p(q(x))
    table = [[index[tuple(p[q[x]] for x in range(3))] for q in perms] for p in perms]
    names = ["e", "(12)", "(23)", "(13)", "(123)", "(132)"]
    return from_table(table, names)


@dataclass(frozen=True)
class Embedding:
    """A map ``source -> target`` given by ``image[g]`` for each source element."""

    source: FiniteGroup
    target: FiniteGroup
    image: tuple

    def __post_init__(self):
        object.__setattr__(self, "image", tuple(int(x) for x in self.image))

    def __call__(self, g: int) -> int:
        return self.image[g]

    @property
    def elements(self) -> frozenset:
        return frozenset(self.image)


def check_embedding(e: Embedding) -> Embedding:
    """Return ``e`` unchanged if it is an injective homomorphism, else raise GroupError."""
    src, tgt, img = e.source, e.target, e.image
    if len(img) != src.order:
        raise GroupError(f"embedding lists {len(img)} images for a group of order {src.order}")
    for g, x in enumerate(img):
        if not 0 <= x < tgt.order:
            raise GroupError(f"image of {g} is {x}, out of range 0..{tgt.order - 1}", witness=g)
    if img[src.identity] != tgt.identity:
        raise GroupError("identity not preserved", witness=src.identity)
    first = {}
    for g, x in enumerate(img):
        if x in first:
            raise GroupError(f"not injective: {first[x]} and {g} both map to {x}",
                             witness=(first[x], g))
        first[x] = g
    for g in range(src.order):
        for h in range(src.order):
            if img[src.mul(g, h)] != tgt.mul(img[g], img[h]):
                raise GroupError(f"not a homomorphism at ({g}, {h})", witness=(g, h))
    return e


def trivial_embedding(target: FiniteGroup) -> Embedding:
    """The trivial group included in ``target``."""
    return Embedding(make_cyclic(1), target, (target.identity,))


def subgroup_embedding(target: FiniteGroup, elements) -> Embedding:
    """Embedding of the subgroup of ``target`` formed by ``elements`` (validated)."""
    elems = sorted(set(int(x) for x in elements))
    index = {x: i for i, x in enumerate(elems)}
    try:
        table = [[index[target.mul(x, y)] for y in elems] for x in elems]
    except KeyError:
        raise GroupError("elements are not closed under multiplication") from None
    return check_embedding(Embedding(from_table(table), target, tuple(elems)))


def conjugate_embedding(e: Embedding, g: int) -> Embedding:
    """The embedding ``h -> g * e(h) * g^-1``."""
    G = e.target
    gi = G.inv(g)
    return Embedding(e.source, G, tuple(G.mul(G.mul(g, x), gi) for x in e.image))


def left_transversal(G: FiniteGroup, H: Embedding) -> tuple:
    """One representative per left coset ``gH``.

    The identity represents ``H`` itself and comes first; every other coset
    is represented by its smallest element index, in increasing order.
    """
    sub = H.image
    reps = [G.identity]
    covered = {G.mul(G.identity, h) for h in sub}
    for g in range(G.order):
        if g in covered:
            continue
        reps.append(g)
        covered.update(G.mul(g, h) for h in sub)
    return tuple(reps)


def is_malnormal(G: FiniteGroup, H: Embedding) -> Check:
    """Test ``g^-1 H g ∩ H = {1}`` for every ``g`` outside ``H``.

    On failure the witness is ``(g, h)`` with ``h != 1`` in ``H`` and
    ``g^-1 h g`` in ``H``.
    """
    sub = H.elements
    nontrivial = sorted(sub - {G.identity})
    for g in range(G.order):
        if g in sub:
            continue
        gi = G.inv(g)
        for h in nontrivial:
            if G.mul(G.mul(gi, h), g) in sub:
                return Check(False, (g, h))
    return Check(True)
