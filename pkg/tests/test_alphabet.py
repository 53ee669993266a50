import pytest
from hypothesis import given, strategies as st

from _fixtures import GRID_51, edge, s3_amalgam, star
from treeck.alphabet import (build_alphabet, build_decoration, build_transition,
                             canonical_orbit, count_orbits, letter_of, translate)
from treeck.exceptions import BoundError, HypothesisError
from treeck.sft import is_legal
from treeck.tree import CENTER, ball, build_model, segments_from

ACTIONS = {
    "z2*z3": edge(1, 2),
    "z3*z4": edge(2, 3),
    "star z2*z2*z2": star(2, 2, 2),
    "star z3*z3": star(3, 3),
    "s3 amalgam": s3_amalgam(),
}
MODELS = {name: build_model(a) for name, a in ACTIONS.items()}


def path_count(model, site, length, parent=None):
    """Non-backtracking paths by site type, written independently of the library."""
    if length == 0:
        return 1
    if model.geometry == "edge":
        nxt = [1 - site] * (model.degrees[site] - (parent is not None))
    elif site == CENTER:
        nxt = [j for j in range(model.n) if j != parent]
    else:
        nxt = [CENTER] * (model.degrees[site] - (parent is not None))
    return sum(path_count(model, c, length - 1, site) for c in nxt)


def orbit_count_by_stabilizers(model, length):
    """Orbit-stabilizer count, valid once the action on such segments is free."""
    total = 0
    for v in model.fundamental_vertices:
        paths = path_count(model, v.site, length)
        stab = len(model.stabilizer(v))
        assert paths % stab == 0
        total += paths // stab
    return total


@pytest.mark.parametrize("l,m", GRID_51)
def test_edge_alphabet_size(l, m):
    assert len(build_alphabet(build_model(edge(l, m)))) == l + m


@pytest.mark.parametrize("name", sorted(MODELS))
@pytest.mark.parametrize("extra", [0, 1, 2])
def test_orbit_count_matches_stabilizer_count(name, extra):
    model = MODELS[name]
    length = model.k_min + extra
    assert count_orbits(model, length) == orbit_count_by_stabilizers(model, length)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_count_orbits_order_independent(name):
    model = MODELS[name]
    n = len(model.fundamental_vertices)
    rev = list(reversed(range(n)))
    L = model.k_min + 2
    assert count_orbits(model, L) == count_orbits(model, L, order=rev)


def test_count_orbits_bound():
    with pytest.raises(BoundError):
        count_orbits(MODELS["z2*z3"], 13)


@pytest.mark.parametrize("name", sorted(MODELS))
@given(data=st.data())
def test_canonical_orbit_is_invariant(name, data):
    model = MODELS[name]
    k = model.k_min
    base = model.fundamental_vertices[data.draw(st.integers(0, len(model.fundamental_vertices) - 1))]
    paths = segments_from(model, base, k + 1)
    seg = paths[data.draw(st.integers(0, len(paths) - 1))]
    elems = model.elements_up_to(3)
    g = elems[data.draw(st.integers(0, len(elems) - 1))]
    moved = translate(model, g, seg)
    canon, h = canonical_orbit(model, seg)
    canon2, h2 = canonical_orbit(model, moved)
    assert canon == canon2
    assert translate(model, h, seg) == canon.vertices
    assert translate(model, h2, moved) == canon.vertices


def test_alphabet_rejects_small_k():
    with pytest.raises(HypothesisError) as info:
        build_alphabet(MODELS["s3 amalgam"], 1)
    assert "k_below_k_min" in info.value.reasons


@pytest.mark.parametrize("name", sorted(MODELS))
def test_transition_successor_counts(name):
    model = MODELS[name]
    A = build_alphabet(model)
    M = build_transition(model, A)
    for a, seg in enumerate(A.letters):
        assert len(M.successors(a)) == model.degree(seg.vertices[-1]) - 1
        for b in M.successors(a):
            assert A.letters[b].vertices[0] != seg.vertices[0] or len(A) == 1
            assert a in M.predecessors(b)
    assert not M.bits.flags.writeable


@pytest.mark.parametrize("name", sorted(MODELS))
def test_shifted_segments_give_legal_words(name):
    model = MODELS[name]
    A = build_alphabet(model)
    M = build_transition(model, A)
    k = A.k
    for base in model.fundamental_vertices:
        for path in segments_from(model, base, k + 4):
            word = [letter_of(model, A, path[j:j + k + 2]) for j in range(4)]
            assert is_legal(M, word)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_decorations(name):
    model = MODELS[name]
    A = build_alphabet(model)
    for base in model.fundamental_vertices:
        dec = build_decoration(model, A, base)
        assert len(dec) == path_count(model, base.site, A.k + 1)
        assert sum(dec.multiplicities) == len(dec)
        for seg, a in zip(dec.segments, dec.delta):
            assert letter_of(model, A, seg) == a
    b = ball(model, model.fundamental_vertices[0], 2)
    far = next(v for v in b.vertices if b.distance[v] == 2)
    with pytest.raises(ValueError):
        build_decoration(model, A, far)


def test_legend_is_readable():
    A = build_alphabet(MODELS["z2*z3"])
    assert A.legend() == ["v1 v2 [2:1]v1", "v1 v2 [2:2]v1", "v2 v1 [1:1]v2"]
