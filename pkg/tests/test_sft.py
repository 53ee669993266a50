import numpy as np
import pytest
from hypothesis import given, strategies as st

from treeck.sft import (Word, check_h2, check_h3, count_words, find_nonperiodic_witness,
                        is_legal, is_permutation_matrix)

# M[b][a] = 1: b may follow a
FULL2 = [[1, 1], [1, 1]]
CYCLE3 = [[0, 0, 1], [1, 0, 0], [0, 1, 0]]
REDUCIBLE = [[1, 0], [1, 1]]  # 0 -> 1 allowed, 1 -> 0 not


def test_h2():
    assert check_h2(FULL2)
    assert check_h2(CYCLE3)
    check = check_h2(REDUCIBLE)
    assert not check and check.witness == (1, 0)
    assert not check_h2([[0]])
    assert check_h2([[1]])


def test_h3():
    assert check_h3(FULL2)
    cyc = check_h3(CYCLE3)
    assert not cyc and is_permutation_matrix(CYCLE3)
    with pytest.raises(ValueError):
        check_h3(REDUCIBLE)


def test_input_validation():
    with pytest.raises(ValueError):
        check_h2([[0, 2], [1, 0]])
    with pytest.raises(ValueError):
        check_h2([[0, 1, 0], [1, 0, 1]])


def test_count_words_small():
    assert [count_words(FULL2, m) for m in range(4)] == [2, 4, 8, 16]
    assert [count_words(CYCLE3, m) for m in range(4)] == [3, 3, 3, 3]
    with pytest.raises(ValueError):
        count_words(FULL2, -1)


def test_word_periodicity():
    assert Word((0, 1, 0, 1)).is_periodic(2)
    assert not Word((0, 1, 1)).is_periodic(1)


square = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=n, max_size=n))


@given(square, st.integers(0, 5))
def test_count_words_is_power_sum(M, m):
    A = np.array(M, dtype=object)
    P = np.identity(len(M), dtype=int).astype(object)
    for _ in range(m):
        P = P.dot(A)
    assert count_words(M, m) == int(P.sum())


@given(square, st.integers(1, 6))
def test_nonperiodic_witness_is_legal_and_nonperiodic(M, p):
    w = find_nonperiodic_witness(M, p, p + 1)
    if w is not None:
        assert len(w) == p + 1
        assert is_legal(M, w.letters)
        assert not w.is_periodic(p)
    if check_h2(M) and check_h3(M):
        assert w is not None


def test_witness_absent_for_permutation():
    assert find_nonperiodic_witness(CYCLE3, 3, 10) is None
    assert find_nonperiodic_witness(CYCLE3, 1, 10) is not None
    assert find_nonperiodic_witness(FULL2, 2, 2) is None
    with pytest.raises(ValueError):
        find_nonperiodic_witness(FULL2, 0, 5)
