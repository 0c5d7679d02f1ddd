import itertools
import math

import numpy as np
import pytest

from jointsparse.conditions import (
    BudgetExceededError,
    RankDeficientError,
    analyze,
    coherence,
    coherence_lower_bound,
    delta_of_support,
    delta_star,
    dual_certificate_check,
    local_two_coherence,
    pinv_column_norms,
    pseudo_inverse,
    rip_constant_exact,
    verify_general_certificate,
)
from jointsparse.core import Support, row_sign
from jointsparse.ensembles import dirac_fourier, spherical_ensemble


def random_support(rng, N, k):
    return Support.from_iterable(rng.choice(N, size=k, replace=False).tolist())


def random_signal(rng, N, S, L):
    X = np.zeros((N, L), dtype=complex)
    X[list(S)] = rng.standard_normal((len(S), L)) + 1j * rng.standard_normal((len(S), L))
    return X


# ----- coherence -----------------------------------------------------------

def test_coherence_orthonormal_and_closed_forms():
    assert coherence(np.eye(6)) == 0.0
    assert abs(coherence(dirac_fourier(32)) - 1 / math.sqrt(32)) < 1e-12
    with pytest.raises(ValueError):
        coherence(np.ones((3, 1)))


def test_welch_bound():
    assert coherence_lower_bound(5, 5) == 0.0
    assert coherence_lower_bound(32, 256) == pytest.approx(math.sqrt(224 / 8160), abs=1e-12)
    assert coherence_lower_bound(32, 256) == pytest.approx(0.165683, abs=1e-6)
    with pytest.raises(ValueError):
        coherence_lower_bound(5, 4)


def test_welch_bound_never_beaten():
    for seed in range(50):
        A = spherical_ensemble(8, 30, seed)
        assert coherence(A) >= coherence_lower_bound(8, 30)


# ----- support-local quantities ------------------------------------------------

def test_orthonormal_quantities_vanish():
    A = np.eye(5)
    S = Support((1, 3))
    assert local_two_coherence(A, S) == 0.0
    assert delta_of_support(A, S) == 0.0
    assert delta_star(A, S) == 0.0
    assert all(l1 == 0 and l2 == 0 for _, l1, l2 in pinv_column_norms(A, S))


def test_delta_two_identical_columns():
    A = np.array([[1.0, 1.0], [0.0, 0.0]])
    assert delta_of_support(A, [0, 1]) == pytest.approx(1.0)


def test_local_coherence_empty_support_error():
    with pytest.raises(ValueError):
        local_two_coherence(np.eye(3), [])


def test_delta_star_full_support_error():
    with pytest.raises(ValueError):
        delta_star(np.eye(3), [0, 1, 2])


def test_delta_star_brute_force_dirac_fourier():
    A = dirac_fourier(8).entries
    rng = np.random.default_rng(0)
    for _ in range(10):
        S = random_support(rng, 16, 2)
        outs = [l for l in range(16) if l not in S]
        assert len(outs) == 14
        brute = max(np.linalg.norm(A[:, list(S) + [l]].conj().T @ A[:, list(S) + [l]] - np.eye(3), 2)
                    for l in outs)
        assert delta_star(A, S) == pytest.approx(brute, abs=1e-12)


def test_local_coherence_matches_definition():
    rng = np.random.default_rng(1)
    A = spherical_ensemble(6, 12, 3).entries
    S = random_support(rng, 12, 3)
    vals = []
    for l in range(12):
        others = [j for j in S if j != l]
        vals.append(np.linalg.norm(A[:, others].conj().T @ A[:, l]))
    assert local_two_coherence(A, S) == pytest.approx(max(vals), abs=1e-14)


# ----- exact RIP constant ------------------------------------------------------

def test_rip_k1_zero_and_k2_equals_coherence():
    A = spherical_ensemble(5, 10, 2)
    assert rip_constant_exact(A, 1) == pytest.approx(0.0, abs=1e-12)
    assert rip_constant_exact(A, 2) == pytest.approx(coherence(A), abs=1e-12)


def test_rip_monotone_in_k():
    A = spherical_ensemble(4, 9, 7)
    vals = [rip_constant_exact(A, k) for k in range(1, 6)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_rip_matches_naive_enumeration():
    A = spherical_ensemble(4, 8, 9).entries
    naive = max(np.linalg.norm(A[:, c].T @ A[:, c] - np.eye(3), 2)
                for c in map(list, itertools.combinations(range(8), 3)))
    assert rip_constant_exact(A, 3, chunk=7) == pytest.approx(naive, abs=1e-12)


def test_rip_budget_guard():
    with pytest.raises(BudgetExceededError):
        rip_constant_exact(spherical_ensemble(8, 40, 0), 6, budget=1000)


# ----- pseudo-inverse norms --------------------------------------------------

def test_pinv_rank_deficient():
    A = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(RankDeficientError):
        pinv_column_norms(A, [0, 1])


def test_pinv_matches_normal_equations():
    A = spherical_ensemble(8, 20, 4).entries
    S = [2, 5, 11]
    P = np.linalg.solve(A[:, S].T @ A[:, S], A[:, S].T)
    np.testing.assert_allclose(pseudo_inverse(A[:, S]), P, atol=1e-12)
    for l, l1, l2 in pinv_column_norms(A, S):
        v = P @ A[:, l]
        assert l1 == pytest.approx(np.abs(v).sum(), abs=1e-12)
        assert l2 == pytest.approx(np.linalg.norm(v), abs=1e-12)


def test_small_delta_star_implies_half_norm_bound():
    # delta*(S) <= 1/3 forces ||A_S^+ a_l||_2 <= 1/2
    rng = np.random.default_rng(5)
    checked = 0
    for seed in range(400):
        A = spherical_ensemble(256, 300, seed)
        S = random_support(rng, 300, 2)
        if delta_star(A, S) <= 1 / 3:
            checked += 1
            assert max(t[2] for t in pinv_column_norms(A, S)) <= 0.5
        if checked >= 100:
            break
    assert checked >= 100


# ----- certificates ----------------------------------------------------------

def test_certificate_orthonormal_passes_with_zero_margin():
    X = np.zeros((5, 2))
    X[1] = [1, 2]
    res = dual_certificate_check(np.eye(5), X)
    assert res.passed and res.value == 0.0


def test_certificate_requires_nonzero_signal():
    with pytest.raises(ValueError):
        dual_certificate_check(np.eye(3), np.zeros((3, 1)))


def test_certificate_bounded_by_l1_norms_and_erc_implies_pass():
    rng = np.random.default_rng(2)
    A = dirac_fourier(16)
    for _ in range(30):
        S = random_support(rng, 32, 3)
        l1max = max(t[1] for t in pinv_column_norms(A, S))
        for _ in range(20):
            X = random_signal(rng, 32, S, int(rng.integers(1, 5)))
            res = dual_certificate_check(A, X)
            assert res.value <= l1max + 1e-12
            if l1max < 1:
                assert res.passed


def test_general_certificate_reduces_to_dual_check():
    rng = np.random.default_rng(3)
    A = dirac_fourier(16).entries
    for _ in range(20):
        S = random_support(rng, 32, 2)
        X = random_signal(rng, 32, S, 3)
        sgn = row_sign(X[list(S)])
        H = pseudo_inverse(A[:, list(S)]).conj().T @ sgn
        assert verify_general_certificate(A, S, sgn, H) == dual_certificate_check(A, X).passed
        assert not verify_general_certificate(A, S, sgn, np.zeros_like(H))
        if verify_general_certificate(A, S, sgn, H):
            assert np.all(np.linalg.norm(H.conj().T @ A, axis=0) <= 1 + 1e-12)


def test_general_certificate_dimension_check():
    with pytest.raises(ValueError):
        verify_general_certificate(np.eye(4), [0], np.ones((1, 2)), np.ones((4, 3)))


# ----- invariants ------------------------------------------------------------

def test_unitary_invariance():
    rng = np.random.default_rng(4)
    A = spherical_ensemble(6, 14, 1).entries
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    UA = Q @ A
    S = [1, 4, 9]
    for f in (local_two_coherence, delta_of_support, delta_star):
        assert f(UA, S) == pytest.approx(f(A, S), abs=1e-9)
    assert coherence(UA) == pytest.approx(coherence(A), abs=1e-9)
    np.testing.assert_allclose(np.array(pinv_column_norms(UA, S)), np.array(pinv_column_norms(A, S)),
                               atol=1e-9)


def test_analyze_report():
    A = spherical_ensemble(16, 40, 0)
    r = analyze(A, [1, 2, 3])
    assert r.erc_pass == (r.pinv_l1_max < 1)
    assert r.avg_case_alpha == r.pinv_l2_max
    assert r.mu2 <= r.delta_star + 1e-12 and r.delta_S <= r.delta_star + 1e-12
    assert all(v is None or v >= 0 for v in r.to_dict().values() if not isinstance(v, bool))
    assert '"coherence"' in r.to_json()
    bare = analyze(A)
    assert bare.mu2 is None and bare.coherence == r.coherence
