import random

import pytest
from hypothesis import assume, given, strategies as st
from sympy import Matrix

from _fixtures import GRID_51, edge, s3_amalgam, star, sympy_k0
from treeck.alphabet import build_alphabet, build_transition, letter_of
from treeck.exceptions import BoundError
from treeck.ktheory import (AbelianGroup, PointedGroup, RelationLattice, automorphic_bruteforce,
                            bowen_franks, classify, det_bareiss, determinantal_divisors,
                            identity_class, invariant_factors_from_divisors, matmul,
                            pointed_isomorphic, reference_formula_51, reference_formula_52,
                            relation_matrix, smith_normal_form, transpose, ulm_invariants)
from treeck.sft import check_h2
from treeck.tree import build_model

int_matrix = st.tuples(st.integers(1, 5), st.integers(1, 5)).flatmap(
    lambda s: st.lists(st.lists(st.integers(-9, 9), min_size=s[1], max_size=s[1]),
                       min_size=s[0], max_size=s[0]))


def transition(action, k=None):
    model = build_model(action)
    return build_transition(model, build_alphabet(model, k))


def test_snf_examples():
    assert smith_normal_form([[2, 4], [6, 8]]).diagonal == [2, 4]
    assert smith_normal_form([[1, -2], [-2, 1]]).diagonal == [1, 3]
    assert smith_normal_form([[0, 0], [0, 0]]).diagonal == [0, 0]
    assert determinantal_divisors([[2, 4], [6, 8]]) == [2, 8]
    assert invariant_factors_from_divisors([2, 8]) == [2, 4]


@given(int_matrix)
def test_snf_decomposition(A):
    snf = smith_normal_form(A)
    assert matmul(matmul(snf.U, A), snf.V) == snf.D
    n = len(snf.V)
    assert matmul(snf.V, snf.V_inv) == [[int(i == j) for j in range(n)] for i in range(n)]
    assert abs(det_bareiss(snf.U)) == 1 and abs(det_bareiss(snf.V)) == 1
    d = snf.diagonal
    for i, row in enumerate(snf.D):
        for j, x in enumerate(row):
            if i != j:
                assert x == 0
    nz = [x for x in d if x]
    assert all(x > 0 for x in nz)
    assert d[:len(nz)] == nz
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))


@given(int_matrix)
def test_snf_matches_sympy(A):
    ours = [x for x in smith_normal_form(A).diagonal if x]
    from sympy import ZZ
    from sympy.matrices.normalforms import invariant_factors
    theirs = sorted(abs(int(x)) for x in invariant_factors(Matrix(A), domain=ZZ) if x)
    assert ours == theirs


@given(st.lists(st.lists(st.integers(-9, 9), min_size=4, max_size=4), min_size=4, max_size=4))
def test_det_matches_sympy(A):
    assert det_bareiss(A) == int(Matrix(A).det())


def test_divisor_guard():
    with pytest.raises(BoundError):
        determinantal_divisors([[1] * 9 for _ in range(9)])


def test_abelian_group_normal_form():
    assert AbelianGroup.from_orders([2, 3]) == AbelianGroup((6,))
    assert AbelianGroup.from_orders([4, 2]) == AbelianGroup((2, 4))
    assert AbelianGroup.from_orders([0, 2, 1]) == AbelianGroup((2,), 1)
    assert str(AbelianGroup((2, 4), 1)) == "Z2 + Z4 + Z"
    assert str(AbelianGroup()) == "0"
    with pytest.raises(ValueError):
        AbelianGroup((2, 3))
    G = AbelianGroup((2, 4))
    assert G.element_order((1, 1)) == 4
    assert G.order == 8 and len(list(G.elements())) == 8


@pytest.mark.parametrize("l,m", GRID_51)
def test_grid_k0_against_sympy(l, m):
    M = transition(edge(l, m))
    bf = bowen_franks(M)
    assert (bf.group.invariant_factors, bf.group.free_rank) == sympy_k0(M)


def test_projection_and_lift():
    M = transition(star(2, 2, 2, 2))
    bf = bowen_franks(M)
    G = bf.group
    R = relation_matrix(M)
    for row in R:
        assert bf.project(row) == G.zero()
    for coords in G.elements():
        assert bf.project(bf.lift(coords)) == G.reduce(coords)
    with pytest.raises(ValueError):
        bf.project([1])


def test_infinite_group():
    bf = bowen_franks([[1, 1], [0, 1]])
    assert bf.k1_rank == 1
    assert not bf.group.is_finite
    label = classify(PointedGroup(bf.group, bf.project([1, 1])), bf.k1_rank)
    assert label.cuntz_n is None


def random_irreducible(rng, n):
    while True:
        M = [[int(rng.random() < 0.45) for _ in range(n)] for _ in range(n)]
        if check_h2(M):
            return M


@pytest.mark.parametrize("seed", range(40))
def test_lattice_oracle_agrees(seed):
    rng = random.Random(seed)
    M = random_irreducible(rng, rng.randint(2, 5))
    bf = bowen_franks(M)
    lattice = RelationLattice(M)
    if not lattice.full_rank:
        assert bf.k1_rank > 0
        return
    assert lattice.modulus == bf.group.order
    v = [rng.randint(-5, 5) for _ in M]
    assert lattice.element_order(v) == bf.group.element_order(bf.project(v))
    ic = identity_class(M, v, bf)
    assert ic.oracle_agrees


@pytest.mark.parametrize("seed", range(40))
def test_transpose_has_same_group(seed):
    rng = random.Random(1000 + seed)
    M = random_irreducible(rng, rng.randint(2, 5))
    assert bowen_franks(M).group == bowen_franks(transpose(M)).group


@pytest.mark.parametrize("action", [edge(1, 2), edge(2, 3), edge(3, 3), star(2, 2, 2),
                                    star(3, 3, 3), s3_amalgam()], ids=repr)
def test_reversal_conjugates_transpose(action):
    """Reversing segments turns M into its transpose, so both conventions give one pointed group."""
    model = build_model(action)
    A = build_alphabet(model)
    M = build_transition(model, A)
    rev = [letter_of(model, A, tuple(reversed(seg.vertices))) for seg in A.letters]
    assert sorted(rev) == list(range(len(A)))
    for a in range(len(A)):
        for b in range(len(A)):
            assert M.bits[b, a] == M.bits[rev[a], rev[b]]
    fwd, back = bowen_franks(M), bowen_franks(transpose(M.tolist()))
    ones = [1] * len(A)
    if fwd.group.is_finite:
        assert pointed_isomorphic(PointedGroup(fwd.group, fwd.project(ones)),
                                  PointedGroup(back.group, back.project(ones)))


small_group = st.lists(st.sampled_from([2, 3, 4, 6, 8, 9, 12]), min_size=1, max_size=3).map(
    AbelianGroup.from_orders).filter(lambda G: G.order <= 72 and G.ngens <= 2)


@given(small_group, st.data())
def test_pointed_isomorphic_matches_bruteforce(G, data):
    x = tuple(data.draw(st.integers(0, d - 1)) for d in G.invariant_factors)
    y = tuple(data.draw(st.integers(0, d - 1)) for d in G.invariant_factors)
    expected = automorphic_bruteforce(G, x, y)
    assert pointed_isomorphic(PointedGroup(G, x), PointedGroup(G, y)) == expected


def test_pointed_isomorphic_examples():
    Z8 = AbelianGroup((8,))
    assert pointed_isomorphic(PointedGroup(Z8, (2,)), PointedGroup(Z8, (6,)))
    assert not pointed_isomorphic(PointedGroup(Z8, (2,)), PointedGroup(Z8, (4,)))
    G = AbelianGroup((2, 4))
    # (1, 0) has order 2 and height 0; (0, 2) has order 2 and height 1
    assert not pointed_isomorphic(PointedGroup(G, (1, 0)), PointedGroup(G, (0, 2)))
    assert pointed_isomorphic(PointedGroup(G, (1, 2)), PointedGroup(G, (1, 0)))
    assert ulm_invariants(G, (0, 2)) == {2: (1,)}
    assert not pointed_isomorphic(PointedGroup(Z8, (0,)), PointedGroup(G, (0, 0)))
    Z = AbelianGroup((), 1)
    with pytest.raises(BoundError):
        pointed_isomorphic(PointedGroup(Z, (1,)), PointedGroup(Z, (1,)))


def test_classify_labels():
    Z5 = AbelianGroup((5,))
    assert classify(PointedGroup(Z5, (1,)), 0).pointed == "≅ O_6"
    assert classify(PointedGroup(Z5, (0,)), 0).pointed == "≅ M_5 ⊗ O_6"
    lab = classify(PointedGroup(AbelianGroup((8,)), (4,)), 0)
    assert (lab.pointed, lab.stable, lab.matrix_size) == ("≅ M_4 ⊗ O_9", "stably ≅ O_9", 4)
    assert classify(PointedGroup(AbelianGroup(), ()), 0).pointed == "≅ O_2"
    other = classify(PointedGroup(AbelianGroup((2, 2)), (0, 0)), 0)
    assert other.cuntz_n is None


def test_reference_formulas():
    group, point = reference_formula_51(2, 3)
    assert group == AbelianGroup((5,)) and point == (0,)
    assert reference_formula_51(1, 2)[0] == AbelianGroup()
    assert reference_formula_52(3, 2) == AbelianGroup((3, 9))
    with pytest.raises(ValueError):
        reference_formula_51(1, 1)
    with pytest.raises(ValueError):
        reference_formula_52(2, 1)


def test_amalgam_identity_class_oracle():
    M = transition(s3_amalgam())
    ic = identity_class(M, [1] * len(M))
    assert ic.oracle_agrees
    assert ic.oracle["epsilon"]["applicable"]


def test_epsilon_formula_two_cyclic():
    """All-ones class is (m + 1) times a letter leaving the first vertex, (l + 1) times one leaving the second."""
    for l, m in GRID_51:
        M = transition(edge(l, m))
        bf = bowen_franks(M)
        if bf.group.order == 1:
            continue
        n = len(M)
        eps = bf.project([1] * n)
        first = bf.project([1] + [0] * (n - 1))
        last = bf.project([0] * (n - 1) + [1])
        assert eps == bf.group.scale(m + 1, first) == bf.group.scale(l + 1, last)
