"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import random
import time
from contextlib import contextmanager

import pytest

from _fixtures import GRID_51, GRID_52, edge, s3_amalgam, star, z4_amalgam
from treeck.alphabet import build_alphabet, build_transition, count_orbits
from treeck.estimator import BoundaryKTheory
from treeck.exceptions import HypothesisError
from treeck.groups import is_malnormal
from treeck.ktheory import (AbelianGroup, det_bareiss, determinantal_divisors,
                            invariant_factors_from_divisors, matmul, pointed_isomorphic,
                            reference_formula_52, smith_normal_form, transpose)
from treeck.report import analyze
from treeck.sft import check_h2, check_h3, count_words
from treeck.tree import build_model, validate_hypotheses, verify_free_action


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def _criterion(number, text):
        try:
            yield
        except BaseException as exc:
            with capsys.disabled():
                print(f"\n[criterion {number}] FAIL: {text} ({type(exc).__name__}: {exc})")
            raise
        with capsys.disabled():
            print(f"\n[criterion {number}] PASS: {text}")
    return _criterion


def fit(action, k=None, l1=0):
    return BoundaryKTheory(k=k, max_l1_check=l1).fit(action)


def two_cyclic_spec(l, m):
    return (f"group a = cyclic({l + 1})\ngroup b = cyclic({m + 1})\n"
            f"action x = free_product(a, b)\n")


def test_criterion_1_two_cyclic_grid(criterion):
    with criterion(1, "edge model of Z_{l+1} * Z_{m+1}: |A| = l+m, K0 = Z_{lm-1}, K1 rank 0, "
                      "each case under 1 s"):
        for l, m in GRID_51:
            t0 = time.perf_counter()
            est = fit(edge(l, m))
            elapsed = time.perf_counter() - t0
            assert len(est.alphabet_) == l + m, (l, m)
            assert est.k0_ == AbelianGroup.from_orders([l * m - 1]), (l, m)
            assert est.k1_rank_ == 0
            assert elapsed < 1.0, (l, m, elapsed)


def test_criterion_2_equal_order_star_grid(criterion):
    with criterion(2, "star model of n copies of Z_{gamma+1}: K0 matches the closed form, "
                      "K1 rank 0"):
        for (n, gamma), factors in GRID_52.items():
            est = fit(star(*[gamma + 1] * n))
            assert est.k0_.invariant_factors == factors, (n, gamma)
            assert est.k0_ == reference_formula_52(n, gamma)
            assert est.k1_rank_ == 0


def test_criterion_3_model_independence(criterion):
    with criterion(3, "edge and star models of Z_{g+1} * Z_{g+1} agree on K0 and the pointed "
                      "unit class"):
        for gamma in (2, 3):
            e = fit(edge(gamma, gamma))
            s = fit(star(gamma + 1, gamma + 1))
            assert e.k0_ == s.k0_ == AbelianGroup.from_orders([gamma * gamma - 1])
            assert e.k1_rank_ == s.k1_rank_ == 0
            assert pointed_isomorphic(e.identity_class_.unit, s.identity_class_.unit), gamma


def test_criterion_4_k_robustness(criterion):
    with criterion(4, "rerunning at k+1 keeps invariant factors, K1 rank and the pointed "
                      "unit class"):
        fixtures = [edge(l, m) for l, m in GRID_51] + [s3_amalgam()]
        for action in fixtures:
            base = fit(action)
            more = fit(action, k=base.k_ + 1)
            assert more.k0_ == base.k0_, action
            assert more.k1_rank_ == base.k1_rank_
            assert pointed_isomorphic(more.identity_class_.unit, base.identity_class_.unit), action


def test_criterion_5_orbit_word_bijection(criterion):
    with criterion(5, "orbits of segments of length m+k+1 equal words of M with m+1 letters, "
                      "m = 0..3"):
        for action in (edge(1, 2), edge(2, 2), star(2, 2, 2)):
            model = build_model(action)
            A = build_alphabet(model)
            M = build_transition(model, A)
            for m in range(4):
                assert count_orbits(model, m + A.k + 1) == count_words(M, m), (action, m)


def test_criterion_6_hypothesis_gate(criterion):
    with criterion(6, "two-ended and non-malnormal inputs rejected; accepted fixtures are "
                      "acylindrical, irreducible and aperiodic"):
        for action in (edge(1, 1), star(2, 2)):
            report = validate_hypotheses(build_model(action))
            assert not report.passed and "two_ends" in report.reasons()
        with pytest.raises(HypothesisError) as info:
            build_model(z4_amalgam())
        assert "not_malnormal" in info.value.reasons
        accepted = ([edge(l, m) for l, m in GRID_51]
                    + [star(*[g + 1] * n) for n, g in GRID_52]
                    + [star(3, 3), star(4, 4), star(2, 2, 2), s3_amalgam()])
        for action in accepted:
            model = build_model(action)
            assert validate_hypotheses(model).passed
            assert verify_free_action(model, model.k_min)
            M = build_transition(model, build_alphabet(model))
            assert check_h2(M) and check_h3(M)


def random_unimodular(rng, n):
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(3 * n):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            U[0] = [-x for x in U[0]]
            continue
        c = rng.choice([-2, -1, 1, 2])
        U[i] = [a + c * b for a, b in zip(U[i], U[j])]
    return U


def test_criterion_7_smith_normal_form(criterion):
    with criterion(7, "Smith normal form on 500 random matrices: decomposition, unimodularity, "
                      "divisibility, determinantal divisors, transpose and unimodular "
                      "invariance, under 5 s"):
        rng = random.Random(20260101)
        t0 = time.perf_counter()
        for _ in range(500):
            r, c = rng.randint(1, 6), rng.randint(1, 6)
            A = [[rng.randint(-9, 9) for _ in range(c)] for _ in range(r)]
            snf = smith_normal_form(A)
            assert matmul(matmul(snf.U, A), snf.V) == snf.D
            assert abs(det_bareiss(snf.U)) == 1 and abs(det_bareiss(snf.V)) == 1
            d = snf.diagonal
            assert all(snf.D[i][j] == 0 for i in range(r) for j in range(c) if i != j)
            nz = [x for x in d if x]
            assert d == nz + [0] * (len(d) - len(nz)) and all(x > 0 for x in nz)
            assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
            expected = invariant_factors_from_divisors(determinantal_divisors(A))
            assert d == expected
            assert smith_normal_form(transpose(A)).diagonal == d
            P, Q = random_unimodular(rng, r), random_unimodular(rng, c)
            assert smith_normal_form(matmul(matmul(P, A), Q)).diagonal == d
        elapsed = time.perf_counter() - t0
        assert elapsed < 5.0, elapsed


def test_criterion_8_amalgam(criterion):
    with criterion(8, "S3 amalgamated over Z2: malnormal, k_min = 2, pipeline completes, "
                      "H2 and H3, orbit-word counts for m <= 2, oracle-checked unit class"):
        action = s3_amalgam()
        assert is_malnormal(action.left, action.embed1) and is_malnormal(action.right, action.embed2)
        model = build_model(action)
        assert validate_hypotheses(model).checks["acylindrical"]
        assert model.k_min == 2
        est = fit(action, l1=2)
        assert est.h2_ and est.h3_
        assert [row["holds"] for row in est.orbit_words_] == [True, True, True]
        assert est.identity_class_.oracle_agrees
        assert est.identity_class_.oracle["unit"]["applicable"]
        assert est.identity_class_.oracle["epsilon"]["agrees"]


def test_criterion_9_identity_class_reporting(criterion):
    with criterion(9, "reports carry an oracle-verified all-ones class and a well-formed "
                      "comparison with the claimed value l+m"):
        for l, m in GRID_51:
            report = analyze(two_cyclic_spec(l, m)).to_dict(include_timings=False)
            assert report["status"] == "ok"
            ic = report["identity_class"]
            assert ic["oracle_agrees"] is True
            assert ic["oracle"]["epsilon"]["agrees"] is True
            assert isinstance(ic["epsilon"], list)
            entry = report["closed_forms"]["two_cyclic_factors"]
            assert (entry["l"], entry["m"]) == (l, m)
            assert entry["claimed_unit"]["value"] == l + m
            ngens = len(entry["k0_expected"]["invariant_factors"])
            assert len(entry["claimed_unit"]["reduced"]) == ngens
            assert entry["k0_matches"] is True
            assert isinstance(entry["unit_pointed_isomorphic"], bool)
            assert isinstance(entry["epsilon_pointed_isomorphic"], bool)
            assert entry["claimed_label"].startswith("≅ ")
            assert entry["computed_label"] == report["classification"]["pointed"]
