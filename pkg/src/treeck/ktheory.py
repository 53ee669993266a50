"""Exact integer linear algebra and the K-theory of the boundary algebra.

The group ``G = Z^A / L`` is presented by one generator per letter and the
relations ``a = sum_b M(a, b) b``, i.e. ``L`` is spanned by the rows of
``I - M`` with ``M[b][a] = 1`` when ``b`` follows ``a``.  All arithmetic uses
Python integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import gcd, lcm, prod
from typing import Optional

from sympy import factorint

from .exceptions import BoundError
from .validation import check_int_matrix, check_transition_matrix

POINTED_BRUTE_FORCE_BOUND = 10_000
DIVISOR_SIZE_GUARD = 8


# -- Smith normal form -------------------------------------------------------

def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A, B):
    """Integer matrix product of lists of lists."""
    if not A:
        return []
    inner = len(B)
    cols = len(B[0]) if B else 0
    return [[sum(A[i][t] * B[t][j] for t in range(inner)) for j in range(cols)]
            for i in range(len(A))]


def transpose(A):
    return [list(r) for r in zip(*A)] if A else []


@dataclass(frozen=True)
class SmithDecomposition:
    """``U . A . V = D`` with ``U``, ``V`` unimodular and ``D`` diagonal.

    ``V_inv`` is kept alongside ``V``; its rows lift the coordinate
    generators of the cokernel.
    """

    U: list
    D: list
    V: list
    V_inv: list

    @property
    def diagonal(self) -> list:
        return [self.D[i][i] for i in range(min(len(self.D), len(self.D[0]) if self.D else 0))]


def smith_normal_form(A) -> SmithDecomposition:
    """Smith normal form with tracked row and column transformations.

    The pivot at each stage is the entry of smallest nonzero absolute value
    in the remaining submatrix, ties broken by row then column, which makes
    the output a function of the input alone.  The diagonal is nonnegative,
    each entry divides the next and zeros come last.
    """
    A = [list(r) for r in check_int_matrix(A)]
    m = len(A)
    n = len(A[0]) if m else 0
    U, V, Vi = _identity(m), _identity(n), _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    def add_row(dst, src, c):
        # row_dst += c * row_src
        A[dst] = [x + c * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x + c * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, c):
        # col_dst += c * col_src
        for row in A:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]
        Vi[src] = [x - c * y for x, y in zip(Vi[src], Vi[dst])]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = A[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        _, i, j = best
        if i != t:
            swap_rows(i, t)
        if j != t:
            swap_cols(j, t)
        p = A[t][t]
        clean = True
        for i in range(t + 1, m):
            if A[i][t]:
                add_row(i, t, -(A[i][t] // p))
                clean = clean and A[i][t] == 0
        for j in range(t + 1, n):
            if A[t][j]:
                add_col(j, t, -(A[t][j] // p))
                clean = clean and A[t][j] == 0
        if not clean:
            continue
        bad = next((i for i in range(t + 1, m)
                    if any(A[i][j] % p for j in range(t + 1, n))), None)
        if bad is not None:
            add_row(t, bad, 1)
            continue
        if p < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return SmithDecomposition(U, A, V, Vi)


def det_bareiss(A) -> int:
    """Exact determinant by fraction-free elimination."""
    M = [list(r) for r in A]
    n = len(M)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k]), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def determinantal_divisors(A) -> list:
    """``d_k`` = gcd of all ``k x k`` minors, ``k = 1 .. min(rows, cols)``."""
    A = check_int_matrix(A)
    m = len(A)
    n = len(A[0]) if m else 0
    if min(m, n) > DIVISOR_SIZE_GUARD:
        raise BoundError(f"minor enumeration is limited to size {DIVISOR_SIZE_GUARD}")
    out = []
    for k in range(1, min(m, n) + 1):
        g = 0
        for rows in combinations(range(m), k):
            for cols in combinations(range(n), k):
                g = gcd(g, det_bareiss([[A[i][j] for j in cols] for i in rows]))
                if g == 1:
                    break
            if g == 1:
                break
        out.append(g)
    return out


def invariant_factors_from_divisors(divisors) -> list:
    """``f_k = d_k / d_{k-1}`` (``0`` once the divisors vanish)."""
    out, prev = [], 1
    for d in divisors:
        out.append(d // prev if d else 0)
        prev = d if d else prev
    return out


# -- abelian groups ----------------------------------------------------------

@dataclass(frozen=True)
class AbelianGroup:
    """``Z_{d_1} + ... + Z_{d_r} + Z^rank`` with ``2 <= d_1 | d_2 | ...``."""

    invariant_factors: tuple = ()
    free_rank: int = 0

    def __post_init__(self):
        fs = tuple(int(d) for d in self.invariant_factors)
        if any(d < 2 for d in fs):
            raise ValueError("invariant factors must be at least 2")
        if any(b % a for a, b in zip(fs, fs[1:])):
            raise ValueError(f"invariant factors must form a divisibility chain: {fs}")
        if self.free_rank < 0:
            raise ValueError("free rank must be nonnegative")
        object.__setattr__(self, "invariant_factors", fs)

    @classmethod
    def from_orders(cls, orders) -> "AbelianGroup":
        """Normal form of a direct sum of cyclic groups (order 0 means Z)."""
        orders = [int(o) for o in orders]
        if not orders:
            return cls()
        diag = [[o if i == j else 0 for j in range(len(orders))] for i, o in enumerate(orders)]
        d = smith_normal_form(diag).diagonal
        return cls(tuple(x for x in d if x > 1), sum(1 for x in d if x == 0))

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self) -> Optional[int]:
        return prod(self.invariant_factors) if self.is_finite else None

    @property
    def is_cyclic(self) -> bool:
        return self.free_rank == 0 and len(self.invariant_factors) <= 1

    @property
    def ngens(self) -> int:
        return len(self.invariant_factors) + self.free_rank

    def reduce(self, coords) -> tuple:
        coords = tuple(int(c) for c in coords)
        if len(coords) != self.ngens:
            raise ValueError(f"expected {self.ngens} coordinates, got {len(coords)}")
        r = len(self.invariant_factors)
        return tuple(c % d for c, d in zip(coords, self.invariant_factors)) + coords[r:]

    def add(self, x, y) -> tuple:
        return self.reduce(a + b for a, b in zip(x, y))

    def scale(self, c: int, x) -> tuple:
        return self.reduce(c * a for a in x)

    def zero(self) -> tuple:
        return (0,) * self.ngens

    def element_order(self, x) -> Optional[int]:
        x = self.reduce(x)
        r = len(self.invariant_factors)
        if any(x[r:]):
            return None
        return lcm(*(d // gcd(d, c) for c, d in zip(x, self.invariant_factors))) if r else 1

    def elements(self):
        if not self.is_finite:
            raise ValueError("cannot enumerate an infinite group")
        return product(*(range(d) for d in self.invariant_factors))

    def to_dict(self) -> dict:
        return {"invariant_factors": list(self.invariant_factors), "free_rank": self.free_rank}

    def __str__(self):
        parts = [f"Z{d}" for d in self.invariant_factors]
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class PointedGroup:
    group: AbelianGroup
    point: tuple

    def __post_init__(self):
        object.__setattr__(self, "point", self.group.reduce(self.point))

    def to_dict(self) -> dict:
        return {**self.group.to_dict(), "point": list(self.point)}


# -- the relation lattice and its independent oracle -------------------------

def relation_matrix(M) -> list:
    """``I - M`` as integers; row ``a`` encodes ``a - sum_b M(a, b) b``."""
    bits = check_transition_matrix(M)
    n = bits.shape[0]
    return [[int(i == j) - int(bits[i, j]) for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class BowenFranks:
    """``G`` with the image of each generator in invariant-factor coordinates."""

    group: AbelianGroup
    projection: tuple
    snf: SmithDecomposition = field(repr=False)
    lifts: tuple = field(repr=False)

    @property
    def k1_rank(self) -> int:
        return self.group.free_rank

    def project(self, vector) -> tuple:
        vector = [int(c) for c in vector]
        if len(vector) != len(self.projection):
            raise ValueError(f"expected {len(self.projection)} letter coefficients")
        total = [0] * self.group.ngens
        for c, img in zip(vector, self.projection):
            if c:
                for i, x in enumerate(img):
                    total[i] += c * x
        return self.group.reduce(total)

    def lift(self, coords) -> list:
        """A letter vector projecting onto ``coords``."""
        n = len(self.projection)
        out = [0] * n
        for c, row in zip(coords, self.lifts):
            for j in range(n):
                out[j] += c * row[j]
        return out


def bowen_franks(M) -> BowenFranks:
    """The group ``Z^A`` modulo the rows of ``I - M``.

    The free rank of the result is the rank of the first K-group.
    """
    R = relation_matrix(M)
    n = len(R)
    snf = smith_normal_form(R)
    diag = snf.diagonal
    keep = [i for i, d in enumerate(diag) if d != 1]
    torsion = [i for i in keep if diag[i] != 0]
    free = [i for i in keep if diag[i] == 0]
    group = AbelianGroup(tuple(diag[i] for i in torsion), len(free))
    order = torsion + free
    projection = tuple(group.reduce(snf.V[a][i] for i in order) for a in range(n))
    lifts = tuple(tuple(snf.V_inv[i]) for i in order)
    return BowenFranks(group, projection, snf, lifts)


class RelationLattice:
    """Membership and exact coordinates for ``L`` = row span of ``I - M``.

    When ``L`` has full rank the map ``v -> v . adj(R) mod |det R|`` embeds
    ``Z^A / L`` into ``(Z / |det R|)^A``, computed here by rational
    Gauss-Jordan elimination without any use of the Smith form.
    """

    def __init__(self, M):
        self.R = relation_matrix(M)
        self.n = len(self.R)
        self.det = det_bareiss(self.R)
        self.modulus = abs(self.det)
        self.adj = self._adjugate() if self.det else None

    def _adjugate(self):
        n = self.n
        aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
               for i, row in enumerate(self.R)]
        for c in range(n):
            piv = next(r for r in range(c, n) if aug[r][c] != 0)
            aug[c], aug[piv] = aug[piv], aug[c]
            pv = aug[c][c]
            aug[c] = [x / pv for x in aug[c]]
            for r in range(n):
                if r != c and aug[r][c] != 0:
                    f = aug[r][c]
                    aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
        inv = [row[n:] for row in aug]
        adj = [[x * self.det for x in row] for row in inv]
        assert all(x.denominator == 1 for row in adj for x in row)
        return [[int(x) for x in row] for row in adj]

    @property
    def full_rank(self) -> bool:
        return self.det != 0

    def embed(self, vector) -> tuple:
        v = [int(c) for c in vector]
        return tuple(sum(v[i] * self.adj[i][j] for i in range(self.n)) % self.modulus
                     for j in range(self.n))

    def contains(self, vector) -> bool:
        return not any(self.embed(vector))

    def element_order(self, vector) -> int:
        u = self.embed(vector)
        return self.modulus // gcd(self.modulus, *u)

    def enumerate(self, bound: int = POINTED_BRUTE_FORCE_BOUND) -> set:
        """Every element of the quotient as an embedded vector."""
        if self.modulus > bound:
            raise BoundError(f"group order {self.modulus} exceeds {bound}")
        gens = {self.embed([int(i == j) for j in range(self.n)]) for i in range(self.n)}
        gens.discard((0,) * self.n)
        zero = (0,) * self.n
        seen = {zero}
        frontier = [zero]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = tuple((a + b) % self.modulus for a, b in zip(x, g))
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return seen

    def heights(self, vector, bound: int = POINTED_BRUTE_FORCE_BOUND) -> dict:
        """p-height sequences of ``vector`` found by enumerating ``p^h G``."""
        elems = self.enumerate(bound)
        mod = self.modulus
        x = self.embed(vector)
        out = {}
        for p, e in sorted(factorint(len(elems)).items()):
            layers = [elems]
            for _ in range(e):
                layers.append({tuple((p * a) % mod for a in y) for y in layers[-1]})
            seq = []
            y = x
            while y not in layers[e]:
                seq.append(max(h for h in range(e + 1) if y in layers[h]))
                y = tuple((p * a) % mod for a in y)
            out[p] = tuple(seq)
        return out


def ulm_invariants(group: AbelianGroup, point) -> dict:
    """p-height sequence of ``point`` for every prime dividing the group order.

    Entry ``j`` of the sequence for ``p`` is the height of ``p^j * x_p`` in the
    p-primary part; the sequence stops when that element vanishes.
    """
    if not group.is_finite:
        raise ValueError("height sequences are defined here for finite groups only")
    point = group.reduce(point)
    out = {}
    primes = sorted({p for d in group.invariant_factors for p in factorint(d)})
    for p in primes:
        parts = []
        for c, d in zip(point, group.invariant_factors):
            e = factorint(d).get(p, 0)
            if e:
                parts.append((c % p ** e, e))
        seq = []
        while any(c for c, _ in parts):
            seq.append(min(_valuation(c, p) for c, e in parts if c))
            parts = [((p * c) % p ** e, e) for c, e in parts]
        out[p] = tuple(seq)
    return out


def _valuation(c: int, p: int) -> int:
    v = 0
    while c % p == 0:
        c //= p
        v += 1
    return v


def pointed_isomorphic(first: PointedGroup, second: PointedGroup) -> bool:
    """Whether a group automorphism carries one point onto the other.

    Cyclic groups compare ``gcd(point, order)``; other finite groups compare
    the p-height sequences of the points, which classify the orbits of the
    automorphism group of a finite abelian group.
    """
    if first.group != second.group:
        return False
    G = first.group
    if not G.is_finite:
        raise BoundError("pointed comparison needs finite groups")
    if G.is_cyclic:
        N = G.order
        return gcd(first.point[0] if first.point else 0, N) == gcd(
            second.point[0] if second.point else 0, N)
    if G.order > POINTED_BRUTE_FORCE_BOUND:
        raise BoundError(f"group order {G.order} exceeds {POINTED_BRUTE_FORCE_BOUND}")
    return ulm_invariants(G, first.point) == ulm_invariants(G, second.point)


def automorphic_bruteforce(group: AbelianGroup, x, y, limit: int = 2_000_000) -> bool:
    """Search all automorphisms for one mapping ``x`` to ``y`` (small groups only)."""
    ds = group.invariant_factors
    elems = list(group.elements())
    # generator i may only go to elements killed by d_i
    choices = [[z for z in elems if not any(group.scale(d, z))] for d in ds]
    if prod(len(c) for c in choices) > limit:
        raise BoundError("too many candidate homomorphisms")
    x, y = group.reduce(x), group.reduce(y)
    order = group.order
    for images in product(*choices):
        def phi(v):
            total = group.zero()
            for c, img in zip(v, images):
                total = group.add(total, group.scale(c, img))
            return total
        if phi(x) != y:
            continue
        if len({phi(v) for v in elems}) == order:
            return True
    return False


# -- identity class ----------------------------------------------------------

@dataclass(frozen=True)
class IdentityClass:
    """Images of the all-ones vector and, when given, of a decoration multiplicity vector.

    ``unit`` is the class of the unit of the decorated algebra; ``epsilon``
    that of the algebra decorated by the alphabet itself.
    """

    epsilon: PointedGroup
    unit: Optional[PointedGroup]
    oracle: dict

    @property
    def oracle_agrees(self) -> bool:
        return bool(self.oracle.get("agrees", True))


def check_against_oracle(bf: BowenFranks, lattice: RelationLattice, vector,
                         bound: int = POINTED_BRUTE_FORCE_BOUND) -> dict:
    """Confirm the main-path image of ``vector`` with the lattice model."""
    if not lattice.full_rank:
        return {"applicable": False, "agrees": True, "reason": "infinite group"}
    G = bf.group
    coords = bf.project(vector)
    diff = [a - b for a, b in zip(vector, bf.lift(coords))]
    result = {
        "applicable": True,
        "group_order": lattice.modulus == G.order,
        "membership": lattice.contains(diff),
        "element_order": lattice.element_order(vector) == G.element_order(coords),
    }
    if lattice.modulus <= bound:
        result["heights"] = lattice.heights(vector, bound) == ulm_invariants(G, coords)
    result["agrees"] = all(v for k, v in result.items() if k != "applicable")
    return result


def identity_class(M, multiplicities=None, bf: Optional[BowenFranks] = None) -> IdentityClass:
    """Class of the unit in ``G``, checked against :class:`RelationLattice`."""
    bf = bowen_franks(M) if bf is None else bf
    n = len(bf.projection)
    lattice = RelationLattice(M)
    ones = [1] * n
    eps = PointedGroup(bf.group, bf.project(ones))
    oracle = {"epsilon": check_against_oracle(bf, lattice, ones)}
    unit = None
    if multiplicities is not None:
        mult = [int(c) for c in multiplicities]
        unit = PointedGroup(bf.group, bf.project(mult))
        oracle["unit"] = check_against_oracle(bf, lattice, mult)
    oracle["agrees"] = all(v["agrees"] for v in oracle.values())
    return IdentityClass(eps, unit, oracle)


# -- classification ----------------------------------------------------------

@dataclass(frozen=True)
class ClassificationLabel:
    stable: str
    pointed: str
    cuntz_n: Optional[int] = None
    matrix_size: Optional[int] = None

    def to_dict(self) -> dict:
        return {"stable": self.stable, "pointed": self.pointed,
                "cuntz_n": self.cuntz_n, "matrix_size": self.matrix_size}


def cuntz_label(n: int, k: int) -> str:
    return f"≅ O_{n}" if k == 1 else f"≅ M_{k} ⊗ O_{n}"


def classify(P: PointedGroup, k1_rank: int) -> ClassificationLabel:
    """Name the Cuntz algebra ``M_k ⊗ O_n`` with pointed K-theory ``P``, when there is one.

    ``(Z_N, x)`` matches ``M_k ⊗ O_{N+1}`` with ``k`` the least positive
    integer with ``gcd(k, N) = gcd(x, N)``, which is ``gcd(x, N)`` itself.
    """
    G = P.group
    if k1_rank == 0 and G.is_cyclic:
        N = G.order
        x = P.point[0] if P.point else 0
        k = gcd(x, N)
        return ClassificationLabel(f"stably ≅ O_{N + 1}", cuntz_label(N + 1, k), N + 1, k)
    k1 = "0" if k1_rank == 0 else ("Z" if k1_rank == 1 else f"Z^{k1_rank}")
    return ClassificationLabel(f"K0 ≅ {G}, K1 ≅ {k1}", "no M_k⊗O_n form")


def reference_formula_51(l: int, m: int):
    """K0 of ``Z_{l+1} * Z_{m+1}`` in closed form plus the claimed unit class ``l + m``."""
    if l < 1 or m < 1 or l * m < 2:
        raise ValueError("need l, m >= 1 with lm >= 2")
    N = l * m - 1
    group = AbelianGroup((N,) if N > 1 else ())
    return group, group.reduce(((l + m),) if N > 1 else ())


def reference_formula_52(n: int, gamma: int) -> AbelianGroup:
    """K0 of a free product of ``n`` groups of order ``gamma + 1`` in closed form."""
    if n < 2 or gamma < 1 or (n, gamma) == (2, 1):
        raise ValueError("need n >= 2, gamma >= 1 and (n, gamma) != (2, 1)")
    delta = gamma * (n - 1) - 1
    return AbelianGroup.from_orders([(gamma + 1) * delta] + [gamma + 1] * (n - 2))
