import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jointsparse.conditions import dual_certificate_check
from jointsparse.core import CoefficientModel, Support, mixed_norm_21, replicate_channels, sample_coefficients
from jointsparse.ensembles import dirac_fourier, spherical_ensemble
from jointsparse.solvers import (
    BudgetExceededError,
    L21Solver,
    SolverOptions,
    l0_oracle,
    p_somp,
    p_thresholding,
    run_algorithm,
    solve_l21,
)


def instance(A, k, L, seed, variant="ComplexGaussian"):
    rng = np.random.default_rng(seed)
    N = A.shape[1]
    S = Support.from_iterable(rng.choice(N, size=k, replace=False).tolist())
    X = sample_coefficients(CoefficientModel.identity(variant, k), S, N, L, seed).entries
    return X, S, np.asarray(A) @ X


def rel_err(Xh, X):
    return np.linalg.norm(Xh - X) / np.linalg.norm(X)


def naive_omp(A, y, k):
    """Textbook single-channel OMP (reference implementation)."""
    sel = []
    r = y.copy()
    for _ in range(k):
        j = int(np.argmax(np.abs(A.conj().T @ r)))
        if j in sel:
            break
        sel.append(j)
        coef, *_ = np.linalg.lstsq(A[:, sel], y, rcond=None)
        r = y - A[:, sel] @ coef
    return sel


# ----- options ---------------------------------------------------------------

def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(max_iterations=0)
    with pytest.raises(ValueError):
        SolverOptions(penalty=0)
    with pytest.raises(ValueError):
        SolverOptions(support_tol=0)


# ----- l21 -------------------------------------------------------------------

def test_l21_identity_matrix():
    rng = np.random.default_rng(0)
    Y = rng.standard_normal((6, 3))
    res = solve_l21(np.eye(6), Y)
    np.testing.assert_allclose(res.estimate.entries, Y, atol=1e-12)


def test_l21_zero_measurements():
    res = solve_l21(dirac_fourier(8), np.zeros((8, 2)))
    assert res.recovered_support == Support() and res.residual == 0


def test_l21_dimension_mismatch():
    with pytest.raises(ValueError):
        solve_l21(np.eye(4), np.ones((3, 1)))


def test_l21_certified_recovery_dirac_fourier():
    A = dirac_fourier(16)
    solver = L21Solver(A)
    done = 0
    for seed in range(60):
        X, S, Y = instance(A, 2, 3, seed)
        if not dual_certificate_check(A, X).passed:
            continue
        res = solver.solve(Y)
        assert rel_err(res.estimate.entries, X) <= 1e-5
        assert res.recovered_support == S
        done += 1
    assert done >= 30


def test_l21_feasibility_and_minimizer_property():
    A = spherical_ensemble(20, 60, 3)
    opts = SolverOptions()
    for seed in range(10):
        # dense-ish signals where the reference need not be the minimizer
        X, S, Y = instance(A, 12, 2, seed, "RealGaussian")
        res = solve_l21(A, Y, opts)
        assert res.residual <= opts.tolerance * np.linalg.norm(Y) + 1e-12
        ref = mixed_norm_21(X)
        assert res.objective <= ref + 1e-6 * (1 + ref)


def test_l21_matches_convex_reference():
    cvxpy = pytest.importorskip("cvxpy")
    A = spherical_ensemble(10, 30, 1).entries.real
    X, S, Y = instance(A, 7, 2, 4, "RealGaussian")
    Y = Y.real
    V = cvxpy.Variable((30, 2))
    prob = cvxpy.Problem(cvxpy.Minimize(cvxpy.sum(cvxpy.norm(V, 2, axis=1))), [A @ V == Y])
    prob.solve()
    res = solve_l21(A, Y)
    assert res.objective == pytest.approx(prob.value, rel=1e-5)


def test_l21_column_permutation_equivariance_bitwise():
    A = spherical_ensemble(12, 30, 5)
    X, S, Y = instance(A, 4, 5, 9)
    opts = SolverOptions(max_iterations=200, tolerance=0.0, certify=False)
    solver = L21Solver(A, opts)
    perm = np.array([3, 0, 4, 1, 2])
    r1 = solver.solve(Y)
    r2 = solver.solve(Y[:, perm])
    assert r1.iterations == r2.iterations == 200
    assert np.array_equal(r1.estimate.entries[:, perm], r2.estimate.entries)


# ----- greedy ----------------------------------------------------------------

@pytest.mark.parametrize("algo", [p_thresholding, p_somp])
def test_greedy_orthonormal_exact(algo):
    A = np.eye(10)
    X, S, Y = instance(A, 3, 2, 1)
    res = algo(A, Y, 3)
    assert res.recovered_support == S
    np.testing.assert_allclose(res.estimate.entries, X, atol=1e-12)


def test_thresholding_zero_measurements():
    res = p_thresholding(dirac_fourier(8), np.zeros((8, 1)), 3)
    assert np.all(res.estimate.entries == 0)


def test_thresholding_tie_break_lowest_index():
    A = np.eye(4)
    res = p_thresholding(A, np.ones((4, 1)), 2)
    assert res.info["selected"] == [0, 1]


def test_thresholding_rank_deficiency_recorded():
    A = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    res = p_thresholding(A, np.array([[1.0], [0.0]]), 2)
    assert res.failed


def test_greedy_k_range():
    with pytest.raises(ValueError):
        p_somp(np.eye(3), np.ones((3, 1)), 4)
    with pytest.raises(ValueError):
        p_thresholding(np.eye(3), np.ones((3, 1)), 0)


def test_somp_residual_orthogonal_to_selection():
    A = spherical_ensemble(16, 40, 2).entries
    X, S, Y = instance(A, 5, 3, 7)
    for M in range(1, 6):
        res = p_somp(A, Y, M)
        sel = res.info["trajectory"]
        R = Y - A @ res.estimate.entries
        assert np.abs(A[:, sel].conj().T @ R).max() <= 1e-10


def test_somp_early_stop_at_zero_residual():
    A = np.eye(6)
    X, S, Y = instance(A, 2, 1, 3)
    res = p_somp(A, Y, 5)
    assert res.iterations == 2 and res.recovered_support == S and not res.failed


def test_somp_single_channel_is_omp():
    for seed in range(50):
        A = spherical_ensemble(12, 30, seed).entries.real
        rng = np.random.default_rng(seed)
        y = rng.standard_normal(12)
        assert p_somp(A, y, 4).info["trajectory"] == naive_omp(A, y, 4)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(-1e3, 1e3).filter(lambda c: abs(c) > 1e-3))
def test_greedy_selection_scale_invariant(seed, c):
    A = spherical_ensemble(10, 25, seed % 97)
    X, S, Y = instance(A, 3, 2, seed)
    for algo in (p_thresholding, p_somp):
        assert algo(A, c * Y, 3).recovered_support == algo(A, Y, 3).recovered_support


def test_replicated_channels_give_identical_columns():
    A = dirac_fourier(16)
    x = np.zeros(32, dtype=complex)
    x[[3, 20]] = [1.0 + 0.5j, -2.0]
    Y = np.asarray(A) @ replicate_channels(x, 4)
    for name in ("l21", "thresh", "somp"):
        E = run_algorithm(name, A, Y, 2).estimate.entries
        assert np.abs(E - E[:, :1]).max() <= 1e-8


# ----- l0 oracle ---------------------------------------------------------------

def test_l0_zero_and_single_atom():
    A = spherical_ensemble(5, 9, 0).entries
    res = l0_oracle(A, np.zeros((5, 1)), 2)
    assert res.info["k"] == 0 and res.recovered_support == Support()
    Y = np.outer(A[:, 3], [2.0, -1.0])
    res = l0_oracle(A, Y, 2)
    assert res.info["k"] == 1 and res.recovered_support == Support((3,)) and res.info["unique"]


def test_l0_non_unique_reported():
    A = np.array([[1.0, 0.0, 1 / np.sqrt(2)], [0.0, 1.0, 1 / np.sqrt(2)]])
    res = l0_oracle(A, np.array([[1.0], [1.0]]), 2)
    assert res.info["k"] == 1 and res.recovered_support == Support((2,))
    res = l0_oracle(A, np.array([[1.0], [2.0]]), 2)
    assert res.info["k"] == 2 and not res.info["unique"]


def test_l0_budget():
    with pytest.raises(BudgetExceededError):
        l0_oracle(np.eye(30), np.ones((30, 1)), 10, budget=1000)


def test_run_algorithm_unknown():
    with pytest.raises(ValueError):
        run_algorithm("lasso", np.eye(3), np.ones((3, 1)), 1)


def test_result_json():
    res = p_somp(np.eye(4), np.array([[0.0], [2.0], [0.0], [0.0]]), 1)
    d = res.to_dict()
    assert d["support"] == [1] and d["values"] == [[[2.0, 0.0]]]
    assert '"somp"' in res.to_json()
