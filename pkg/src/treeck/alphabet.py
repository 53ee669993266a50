"""Orbits of directed segments: the alphabet, transition matrix and decorations."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import BoundError, HypothesisError
from .tree import (GroupElement, TreeModel, Vertex, ball_cap, segments_from,
                   verify_free_action)


@dataclass(frozen=True)
class Segment:
    """A directed segment ``(s_0, ..., s_n)``; ``len(seg)`` is the number of edges."""

    vertices: tuple

    def __len__(self):
        return len(self.vertices) - 1

    def __getitem__(self, i):
        return self.vertices[i]

    def label(self) -> str:
        return " ".join(v.label() for v in self.vertices)


@dataclass(frozen=True)
class Alphabet:
    """Canonical orbit representatives of directed segments of length ``k + 1``."""

    letters: tuple
    index: dict
    k: int

    def __len__(self):
        return len(self.letters)

    def legend(self) -> list:
        return [seg.label() for seg in self.letters]


@dataclass(frozen=True)
class TransitionMatrix:
    """``bits[b, a] = 1`` iff letter ``b`` follows letter ``a`` by a one-step shift."""

    bits: np.ndarray

    @property
    def size(self) -> int:
        return self.bits.shape[0]

    def __len__(self):
        return self.size

    def successors(self, a: int) -> list:
        return [int(b) for b in np.flatnonzero(self.bits[:, a])]

    def predecessors(self, b: int) -> list:
        return [int(a) for a in np.flatnonzero(self.bits[b])]

    def tolist(self) -> list:
        return self.bits.astype(int).tolist()


@dataclass(frozen=True)
class Decoration:
    """Segments of length ``k + 1`` from ``base`` and the letter each one lies in."""

    base: Vertex
    segments: tuple
    delta: tuple
    multiplicities: tuple

    def __len__(self):
        return len(self.segments)


def _vertex_key(v: Vertex):
    return (v.site, v.word)


def canonical_orbit(model: TreeModel, seg, length: Optional[int] = None):
    """Canonical representative of the orbit of ``seg`` and a group element mapping onto it.

    The segment is first translated so its initial vertex is fundamental,
    then the vertex sequence is minimised over the stabilizer of that
    fundamental vertex.

    Returns
    -------
    (Segment, GroupElement)
        ``g`` with ``g . seg`` equal to the canonical segment.
    """
    verts = tuple(seg.vertices if isinstance(seg, Segment) else seg)
    if length is not None and len(verts) - 1 != length:
        raise ValueError(f"expected a segment of length {length}, got {len(verts) - 1}")
    start = verts[0]
    to_base = model.inv(model.element_of(start))
    moved = tuple(model.act(to_base, v) for v in verts)
    base = moved[0]
    best, best_g = None, None
    for x in model.stabilizer(base):
        cand = tuple(model.act(x, v) for v in moved)
        key = tuple(_vertex_key(v) for v in cand)
        if best is None or key < best[0]:
            best = (key, cand)
            best_g = x
    return Segment(best[1]), model.mul(best_g, to_base)


def orbit_representatives(model: TreeModel, length: int) -> list:
    """Sorted canonical representatives of all orbits of segments of ``length``."""
    forms = set()
    for base in model.fundamental_vertices:
        for path in segments_from(model, base, length):
            forms.add(canonical_orbit(model, path)[0].vertices)
    return sorted(forms, key=lambda vs: tuple(_vertex_key(v) for v in vs))


def build_alphabet(model: TreeModel, k: Optional[int] = None) -> Alphabet:
    """Orbit representatives of length-``(k+1)`` segments, ids in lexicographic order."""
    k = model.k_min if k is None else k
    if k < model.k_min:
        raise HypothesisError(f"k = {k} is below the acylindricity constant {model.k_min}",
                              reasons=["k_below_k_min"])
    free = verify_free_action(model, k)
    if not free:
        raise HypothesisError(f"the action is not free on segments of length {k}",
                              reasons=["not_acylindrical"], witness=free.witness)
    letters = tuple(Segment(vs) for vs in orbit_representatives(model, k + 1))
    index = {seg.vertices: i for i, seg in enumerate(letters)}
    return Alphabet(letters, index, k)


def letter_of(model: TreeModel, alphabet: Alphabet, seg) -> int:
    canon, _ = canonical_orbit(model, seg, alphabet.k + 1)
    return alphabet.index[canon.vertices]


def build_transition(model: TreeModel, alphabet: Alphabet) -> TransitionMatrix:
    """Extend each representative by one step at its far end and record the letters hit."""
    size = len(alphabet)
    bits = np.zeros((size, size), dtype=np.uint8)
    for a, seg in enumerate(alphabet.letters):
        verts = seg.vertices
        for t in model.neighbors(verts[-1]):
            if t == verts[-2]:
                continue
            b = letter_of(model, alphabet, verts[1:] + (t,))
            bits[b, a] = 1
    bits.setflags(write=False)
    return TransitionMatrix(bits)


def build_decoration(model: TreeModel, alphabet: Alphabet, base: Vertex) -> Decoration:
    """Decoration set at ``base`` with its letter map and multiplicity vector."""
    if base not in model.fundamental_vertices:
        raise ValueError(f"{base!r} is not a fundamental vertex")
    segs = tuple(Segment(p) for p in segments_from(model, base, alphabet.k + 1))
    delta = tuple(letter_of(model, alphabet, s) for s in segs)
    counts = Counter(delta)
    mult = tuple(counts.get(a, 0) for a in range(len(alphabet)))
    return Decoration(base, segs, delta, mult)


def count_orbits(model: TreeModel, length: int, order=None) -> int:
    """Number of orbits of directed segments with ``length`` edges.

    ``order`` optionally permutes the fundamental vertices visited; the
    count does not depend on it.
    """
    if length > ball_cap():
        raise BoundError(f"segment length {length} exceeds the ball cap {ball_cap()}")
    bases = model.fundamental_vertices if order is None else [model.fundamental_vertices[i] for i in order]
    forms = {canonical_orbit(model, path)[0].vertices
             for base in bases for path in segments_from(model, base, length)}
    return len(forms)


def translate(model: TreeModel, g: GroupElement, seg) -> tuple:
    verts = seg.vertices if isinstance(seg, Segment) else seg
    return tuple(model.act(g, v) for v in verts)
