"""Bass-Serre trees of free products and amalgams, built locally.

Every supported group is an amalgamated product ``G_1 *_H ... *_H G_n`` of
finite groups over a common subgroup ``H`` (``H`` trivial for free
products).  Elements are kept in the normal form

    t_1 t_2 ... t_r h

where each ``t_j`` is a non-identity left coset representative of ``H`` in
``G_{f_j}``, consecutive factors differ and ``h`` lies in ``H``.

Two tree geometries are provided:

``edge``
    One fundamental edge ``P -- Q`` (two factors).  Vertices are cosets
    ``g G_i``.
``star``
    A central vertex with trivial stabilizer joined to one vertex per
    factor.  Vertices are elements ``g`` (centre) and cosets ``g G_i``.

A vertex is stored as the coset-representative word of its coset, so
equality and hashing never need the whole tree.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

from .exceptions import BoundError, HypothesisError
from .groups import (Check, Embedding, FiniteGroup, check_embedding, is_malnormal,
                     left_transversal, make_cyclic, trivial_embedding)

CENTER = -1
DEFAULT_BALL_CAP = 12


def ball_cap() -> int:
    """Radius cap for :func:`ball`; ``TREECK_BALL_CAP`` overrides the default."""
    raw = os.environ.get("TREECK_BALL_CAP")
    if raw is None:
        return DEFAULT_BALL_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise BoundError(f"TREECK_BALL_CAP must be an integer, got {raw!r}") from None
    if cap < 0:
        raise BoundError("TREECK_BALL_CAP must be nonnegative")
    return cap


# -- lattice actions ---------------------------------------------------------

@dataclass(frozen=True)
class EdgeFreeProduct:
    """``G_1 * G_2`` acting on the tree with one fundamental edge."""

    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) != 2:
            raise HypothesisError("the edge model needs exactly two factors",
                                  reasons=["edge_model_arity"])


@dataclass(frozen=True)
class StarFreeProduct:
    """``G_1 * ... * G_n`` acting on the tree with a star fundamental domain."""

    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) < 2:
            raise HypothesisError("a free product needs at least two factors",
                                  reasons=["arity"])


@dataclass(frozen=True)
class Amalgam:
    """``G_1 *_H G_2`` with ``H`` included in each factor."""

    left: FiniteGroup
    right: FiniteGroup
    sub: FiniteGroup
    embed1: Embedding
    embed2: Embedding

    @property
    def factors(self) -> tuple:
        return (self.left, self.right)


LatticeAction = Union[EdgeFreeProduct, StarFreeProduct, Amalgam]


def as_star(action: LatticeAction) -> StarFreeProduct:
    if isinstance(action, Amalgam):
        raise HypothesisError("the star model applies to free products only",
                              reasons=["star_model_amalgam"])
    return StarFreeProduct(action.factors)


def as_edge(action: LatticeAction) -> LatticeAction:
    if isinstance(action, Amalgam):
        return action
    return EdgeFreeProduct(action.factors)


def variant_name(action: LatticeAction) -> str:
    return {EdgeFreeProduct: "edge_free_product", StarFreeProduct: "star_free_product",
            Amalgam: "amalgam"}[type(action)]


# -- vertices and group elements ---------------------------------------------

class Vertex(NamedTuple):
    """Coset ``w X_site`` where ``w`` is a reduced word of ``(factor, rep)`` letters."""

    site: int
    word: tuple = ()

    def label(self) -> str:
        head = "c" if self.site == CENTER else f"v{self.site + 1}"
        letters = "".join(f"[{f + 1}:{t}]" for f, t in self.word)
        return f"{letters}{head}" if letters else head


@dataclass(frozen=True, order=True)
class GroupElement:
    """Normal form ``letters * tail`` with ``tail`` an element of ``H``."""

    letters: tuple
    tail: int

    def __len__(self):
        return len(self.letters)


@dataclass(frozen=True)
class Ball:
    center: Vertex
    radius: int
    vertices: tuple
    edges: tuple
    distance: dict = field(compare=False)


# -- the model ---------------------------------------------------------------

class TreeModel:
    """Bass-Serre tree of a lattice action plus the group acting on it.

    Attributes
    ----------
    action : LatticeAction
    geometry : {"edge", "star"}
    k_min : int
        Acylindricity constant guaranteed by the construction.
    fundamental_vertices : tuple of Vertex
    degrees : dict
        Degree per vertex site.
    """

    def __init__(self, action: LatticeAction):
        self.action = action
        if isinstance(action, Amalgam):
            self.factors = (action.left, action.right)
            self.sub = action.sub
            self.embeddings = (action.embed1, action.embed2)
            self.geometry = "edge"
            self.k_min = 2
        else:
            self.factors = tuple(action.factors)
            self.sub = make_cyclic(1)
            self.embeddings = tuple(trivial_embedding(G) for G in self.factors)
            self.geometry = "edge" if isinstance(action, EdgeFreeProduct) else "star"
            self.k_min = 1
        self.n = len(self.factors)

        self.transversals = tuple(left_transversal(G, e)
                                  for G, e in zip(self.factors, self.embeddings))
        self._preimage = tuple({x: h for h, x in enumerate(e.image)} for e in self.embeddings)
        # c = rep_of[i][c] * embed_i(h_of[i][c])
        self._rep_of, self._h_of = [], []
        for i, G in enumerate(self.factors):
            reps = set(self.transversals[i])
            rep_of, h_of = [0] * G.order, [0] * G.order
            for c in range(G.order):
                for t in reps:
                    x = G.mul(G.inv(t), c)
                    if x in self._preimage[i]:
                        rep_of[c], h_of[c] = t, self._preimage[i][x]
                        break
            self._rep_of.append(tuple(rep_of))
            self._h_of.append(tuple(h_of))

        if self.geometry == "edge":
            self.sites = tuple(range(self.n))
            self.fundamental_vertices = tuple(Vertex(i) for i in self.sites)
            self.degrees = {i: len(self.transversals[i]) for i in self.sites}
        else:
            self.sites = (CENTER,) + tuple(range(self.n))
            self.fundamental_vertices = (Vertex(CENTER),) + tuple(Vertex(i) for i in range(self.n))
            self.degrees = {CENTER: self.n}
            self.degrees.update({i: len(self.transversals[i]) for i in range(self.n)})

    def __repr__(self):
        orders = ",".join(str(G.order) for G in self.factors)
        return f"TreeModel({variant_name(self.action)}, factors=[{orders}], H={self.sub.order})"

    # group arithmetic

    def identity(self) -> GroupElement:
        return GroupElement((), self.sub.identity)

    def factor_element(self, i: int, c: int) -> GroupElement:
        """Element ``c`` of factor ``i`` as an element of the whole group."""
        t = self._rep_of[i][c]
        letters = () if t == self.factors[i].identity else ((i, t),)
        return GroupElement(letters, self._h_of[i][c])

    def sub_element(self, h: int) -> GroupElement:
        return GroupElement((), h)

    def _push(self, h: int, x: GroupElement) -> GroupElement:
        """``h * x`` for ``h`` in ``H``."""
        if h == self.sub.identity:
            return x
        letters = []
        for f, t in x.letters:
            G = self.factors[f]
            c = G.mul(self.embeddings[f](h), t)
            letters.append((f, self._rep_of[f][c]))
            h = self._h_of[f][c]
        return GroupElement(tuple(letters), self.sub.mul(h, x.tail))

    def _lmul(self, i: int, a: int, x: GroupElement) -> GroupElement:
        """``a * x`` for ``a`` in factor ``i``."""
        G = self.factors[i]
        if x.letters and x.letters[0][0] == i:
            c = G.mul(a, x.letters[0][1])
            rest = GroupElement(x.letters[1:], x.tail)
        else:
            c = a
            rest = x
        t, h = self._rep_of[i][c], self._h_of[i][c]
        y = self._push(h, rest)
        if t == G.identity:
            return y
        return GroupElement(((i, t),) + y.letters, y.tail)

    def mul(self, x: GroupElement, y: GroupElement) -> GroupElement:
        out = self._push(x.tail, y)
        for f, t in reversed(x.letters):
            out = self._lmul(f, t, out)
        return out

    def inv(self, x: GroupElement) -> GroupElement:
        out = self.identity()
        for f, t in x.letters:
            out = self._lmul(f, self.factors[f].inv(t), out)
        return self._push(self.sub.inv(x.tail), out)

    def elements_up_to(self, length: int):
        """All elements whose normal form has at most ``length`` letters."""
        nonid = [tuple(t for t in reps if t != G.identity)
                 for G, reps in zip(self.factors, self.transversals)]
        words = [()]
        frontier = [()]
        for _ in range(length):
            nxt = []
            for w in frontier:
                last = w[-1][0] if w else None
                for f in range(self.n):
                    if f == last:
                        continue
                    nxt.extend(w + ((f, t),) for t in nonid[f])
            words.extend(nxt)
            frontier = nxt
        return [GroupElement(w, h) for w in words for h in range(self.sub.order)]

    # vertices

    def element_of(self, v: Vertex) -> GroupElement:
        """The coset representative ``w`` of ``v``, so that ``v = w . base(v.site)``."""
        return GroupElement(v.word, self.sub.identity)

    def coset(self, x: GroupElement, site: int) -> Vertex:
        """The vertex ``x X_site``."""
        letters = x.letters
        if site != CENTER and letters and letters[-1][0] == site:
            letters = letters[:-1]
        return Vertex(site, letters)

    def check_vertex(self, v: Vertex) -> None:
        if v.site not in self.sites:
            raise ValueError(f"unknown vertex site {v.site!r}")
        last = None
        for letter in v.word:
            try:
                f, t = letter
            except (TypeError, ValueError):
                raise ValueError(f"malformed letter {letter!r}") from None
            if not 0 <= f < self.n or f == last:
                raise ValueError(f"letters must alternate between factors: {v.word!r}")
            if t not in self.transversals[f] or t == self.factors[f].identity:
                raise ValueError(f"{t!r} is not a non-identity coset representative of factor {f}")
            last = f
        if v.site != CENTER and last == v.site:
            raise ValueError(f"word ends in factor {last} but the vertex site is {v.site}")

    def act(self, g: GroupElement, v: Vertex) -> Vertex:
        return self.coset(self.mul(g, self.element_of(v)), v.site)

    def degree(self, v: Vertex) -> int:
        return self.degrees[v.site]

    def neighbors(self, v: Vertex) -> list:
        """Adjacent vertices in a fixed order; one per edge at ``v``."""
        self.check_vertex(v)
        w = self.element_of(v)
        if v.site == CENTER:
            return [self.coset(w, i) for i in range(self.n)]
        i = v.site
        other = CENTER if self.geometry == "star" else 1 - i
        return [self.coset(self.mul(w, self.factor_element(i, t)), other)
                for t in self.transversals[i]]

    def stabilizer(self, v: Vertex) -> list:
        """Elements fixing ``v``: conjugates of its vertex group."""
        if v.site == CENTER:
            base = [self.sub_element(h) for h in range(self.sub.order)]
        else:
            base = [self.factor_element(v.site, c) for c in range(self.factors[v.site].order)]
        if not v.word:
            return base
        w = self.element_of(v)
        wi = self.inv(w)
        return [self.mul(self.mul(w, x), wi) for x in base]


# -- construction and checks -------------------------------------------------

@dataclass
class HypothesisReport:
    """Outcome of :func:`validate_hypotheses`; ``failures`` carry reason codes."""

    checks: dict
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.passed

    def reasons(self) -> list:
        return [f["reason"] for f in self.failures]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": dict(self.checks), "failures": list(self.failures)}


def _structural_failures(action: LatticeAction) -> list:
    failures = []
    if isinstance(action, Amalgam):
        for j, (G, e) in enumerate(((action.left, action.embed1), (action.right, action.embed2)), 1):
            check_embedding(e)
            if e.source != action.sub:
                failures.append({"reason": "embedding_source_mismatch", "factor": j})
            if len(e.elements) >= G.order:
                failures.append({"reason": "subgroup_not_proper", "factor": j,
                                 "detail": f"the amalgamated subgroup is all of factor {j}"})
            mal = is_malnormal(G, e)
            if not mal:
                g, h = mal.witness
                failures.append({"reason": "not_malnormal", "factor": j, "witness": [g, h],
                                 "detail": f"in factor {j}, g={G.name(g)} conjugates "
                                           f"h={G.name(h)} back into the subgroup"})
    else:
        for j, G in enumerate(action.factors, 1):
            if G.order < 2:
                failures.append({"reason": "trivial_factor", "factor": j,
                                 "detail": f"factor {j} is the trivial group"})
    return failures


def build_model(action: LatticeAction, *, strict: bool = True) -> TreeModel:
    """Build the tree model of ``action``.

    With ``strict`` (the default) trivial factors, an improper amalgamated
    subgroup and a non-malnormal amalgamated subgroup raise
    :class:`HypothesisError`; otherwise they are left for
    :func:`validate_hypotheses` to report.
    """
    failures = _structural_failures(action)
    if strict and failures:
        first = failures[0]
        if first["reason"] == "not_malnormal":
            msg = "method hypothesis violated: Γ₀ not malnormal (" + first["detail"] + ")"
        else:
            msg = first.get("detail", first["reason"])
        raise HypothesisError(msg, reasons=[f["reason"] for f in failures],
                              witness=first.get("witness"))
    return TreeModel(action)


def validate_hypotheses(model: TreeModel) -> HypothesisReport:
    """Check the tree is infinite with more than two ends, the lattice is
    uniform and minimal, and the action is ``k_min``-acylindrical."""
    failures = _structural_failures(model.action)
    degrees = model.degrees
    checks = {
        "infinite_tree": all(d >= 2 for d in degrees.values()),
        "more_than_two_ends": all(d >= 2 for d in degrees.values())
        and any(d >= 3 for d in degrees.values()),
        # finite vertex groups and a finite quotient graph, by construction
        "uniform_lattice": True,
        # graph-of-groups actions never invert an edge
        "without_inversion": True,
        "minimal": not any(f["reason"] in ("trivial_factor", "subgroup_not_proper")
                           for f in failures),
    }
    if not checks["infinite_tree"]:
        failures.append({"reason": "finite_tree", "detail": "some vertex has degree 1"})
    elif not checks["more_than_two_ends"]:
        failures.append({"reason": "two_ends",
                         "detail": "every vertex has degree 2: the tree is a line with two ends"})
    free = verify_free_action(model, model.k_min)
    checks["acylindrical"] = free.ok
    if not free.ok and not any(f["reason"] == "not_malnormal" for f in failures):
        failures.append({"reason": "not_acylindrical",
                         "detail": f"a segment of length {model.k_min} has a nontrivial stabilizer"})
    return HypothesisReport(checks, failures)


def segments_from(model: TreeModel, start: Vertex, length: int) -> list:
    """All directed segments (non-backtracking paths) of ``length`` edges from ``start``."""
    out = []
    stack = [((start,), None)]
    while stack:
        path, prev = stack.pop()
        if len(path) == length + 1:
            out.append(path)
            continue
        for u in reversed(model.neighbors(path[-1])):
            if u != prev:
                stack.append((path + (u,), path[-1]))
    return out


def verify_free_action(model: TreeModel, k: int) -> Check:
    """Whether every directed segment of length ``k`` has trivial stabilizer.

    Only segments starting at a fundamental vertex are checked: every segment
    is a translate of one of those, and its stabilizer lies in the (finite)
    stabilizer of the initial vertex.  On failure the witness is
    ``(g, segment)``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    ident = model.identity()
    for base in model.fundamental_vertices:
        stab = [g for g in model.stabilizer(base) if g != ident]
        if not stab:
            continue
        for seg in segments_from(model, base, k):
            for g in stab:
                if all(model.act(g, v) == v for v in seg):
                    return Check(False, (g, seg))
    return Check(True)


def ball(model: TreeModel, center: Vertex, r: int, cap: Optional[int] = None) -> Ball:
    """The vertices within distance ``r`` of ``center`` with the edges between them."""
    cap = ball_cap() if cap is None else cap
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if r > cap:
        raise BoundError(f"radius {r} exceeds the ball cap {cap}")
    model.check_vertex(center)
    dist = {center: 0}
    order = [center]
    edges = []
    queue = deque([center])
    while queue:
        v = queue.popleft()
        if dist[v] == r:
            continue
        for u in model.neighbors(v):
            if u not in dist:
                dist[u] = dist[v] + 1
                order.append(u)
                edges.append((v, u))
                queue.append(u)
    return Ball(center, r, tuple(order), tuple(edges), dist)


def ball_to_dot(b: Ball) -> str:
    """Graphviz rendering of a ball, vertices labelled by their words."""
    ids = {v: i for i, v in enumerate(b.vertices)}
    lines = ["graph ball {"]
    for v, i in ids.items():
        lines.append(f'  v{i} [label="{v.label()}"];')
    for v, u in b.edges:
        lines.append(f"  v{ids[v]} -- v{ids[u]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def sphere_sizes(model: TreeModel, center: Vertex, r: int) -> list:
    """Sphere sizes from the degree table alone: |S_0| = 1, |S_1| = deg(center),
    |S_{j+1}| = sum over S_j of (deg - 1)."""
    sizes = [1]
    # (site, parent site) pairs on the current sphere
    layer = [(center.site, None)]
    for _ in range(r):
        nxt = []
        for site, parent in layer:
            nxt.extend((c, site) for c in _child_sites(model, site, parent))
        sizes.append(len(nxt))
        layer = nxt
    return sizes


def _child_sites(model: TreeModel, site: int, parent: Optional[int]) -> list:
    if model.geometry == "edge":
        count = model.degrees[site] - (parent is not None)
        return [1 - site] * count
    if site == CENTER:
        return [j for j in range(model.n) if j != parent]
    return [CENTER] * (model.degrees[site] - (parent is not None))
