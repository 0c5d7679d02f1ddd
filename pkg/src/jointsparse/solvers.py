"""Recovery algorithms for jointly sparse signals.

* :func:`solve_l21` -- mixed ``l_{2,1}`` minimization subject to ``AX = Y``
  (ADMM with row-wise shrinkage and an exact affine projection),
* :func:`p_thresholding` -- one-shot selection of the ``k`` atoms with the
  largest ``p``-correlation,
* :func:`p_somp` -- simultaneous orthogonal matching pursuit,
* :func:`l0_oracle` -- exhaustive smallest-support search (tiny problems only).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .conditions import RankDeficientError, pseudo_inverse, BudgetExceededError
from .core import DimensionError, JointSignal, Support, mixed_norm_21, support_of
from .ensembles import as_matrix_array

__all__ = [
    "SolverOptions",
    "RecoveryResult",
    "L21Solver",
    "solve_l21",
    "p_thresholding",
    "p_somp",
    "l0_oracle",
    "run_algorithm",
    "ALGORITHMS",
]


@dataclass(frozen=True)
class SolverOptions:
    """Knobs shared by the solvers.

    ``support_tol`` is relative: a row counts as nonzero when its norm exceeds
    ``support_tol * max row norm``.  ``certify`` lets the mixed-norm solver stop
    as soon as the support of its iterate carries a passing dual certificate,
    which proves global optimality of the polished estimate.
    """

    max_iterations: int = 20000
    tolerance: float = 1e-8
    support_tol: float = 1e-6
    penalty: float = 1.0
    certify: bool = True
    check_every: int = 10
    adaptive: bool = False
    gap_tol: float = 1e-8

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance < 0 or self.support_tol <= 0 or self.penalty <= 0:
            raise ValueError("tolerance, support_tol and penalty must be positive")
        if self.check_every < 1:
            raise ValueError("check_every must be >= 1")


@dataclass
class RecoveryResult:
    estimate: JointSignal
    recovered_support: Support
    iterations: int
    residual: float
    objective: float
    algorithm: str = ""
    converged: bool = True
    failed: bool = False
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        X = self.estimate.entries
        return {
            "algorithm": self.algorithm,
            "n_rows": X.shape[0],
            "n_cols": X.shape[1],
            "support": list(self.recovered_support.indices),
            "values": [[[z.real, z.imag] for z in X[j]] for j in self.recovered_support],
            "iterations": self.iterations,
            "residual": self.residual,
            "objective": self.objective,
            "converged": self.converged,
            "failed": self.failed,
            "info": self.info,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _as_measurements(A: np.ndarray, Y) -> np.ndarray:
    Y = np.asarray(Y, dtype=complex)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.ndim != 2 or Y.shape[0] != A.shape[0]:
        raise DimensionError(f"measurements must have {A.shape[0]} rows, got shape {Y.shape}")
    return Y


def _relative_support(X: np.ndarray, rel_tol: float) -> Support:
    norms = np.linalg.norm(X, axis=1)
    top = norms.max(initial=0.0)
    if top == 0.0:
        return Support()
    return support_of(X, rel_tol * top)


def _result(A, Y, X, algorithm, opts, iterations, **kw) -> RecoveryResult:
    residual = float(np.linalg.norm(A @ X - Y))
    return RecoveryResult(
        estimate=JointSignal(X),
        recovered_support=_relative_support(X, opts.support_tol),
        iterations=iterations,
        residual=residual,
        objective=mixed_norm_21(X),
        algorithm=algorithm,
        **kw,
    )


def _failure(A, Y, algorithm, opts, iterations, message) -> RecoveryResult:
    X = np.zeros((A.shape[1], Y.shape[1]), dtype=complex)
    return _result(A, Y, X, algorithm, opts, iterations, converged=False, failed=True,
                   info={"message": message})


def _row_sq_norms(W: np.ndarray) -> np.ndarray:
    """Squared row norms, summed in an order that ignores column permutations."""
    a = W.real**2 + W.imag**2
    if a.shape[1] > 2:
        a = np.sort(a, axis=1)
    return np.sum(a, axis=1)


def _shrink_rows(W: np.ndarray, thresh: float) -> np.ndarray:
    norms = np.sqrt(_row_sq_norms(W))
    scale = np.maximum(1.0 - thresh / np.maximum(norms, 1e-300), 0.0)
    return W * scale[:, None]


_POLISH_LEVELS = (1e-4, 1e-3, 1e-2)


class L21Solver:
    """Mixed-norm basis pursuit for a fixed matrix.

    Solves ``min ||X||_{2,1}`` subject to ``AX = Y`` by ADMM on the splitting
    ``X = Z``: ``X`` is projected onto the affine set ``{AX = Y}`` with the
    precomputed pseudo-inverse, ``Z`` is obtained by row-wise shrinkage.  The
    measurements are normalized to unit Frobenius norm internally so the
    penalty has a scale-free meaning.  Instances are immutable after
    construction and can be shared.
    """

    def __init__(self, A, options: Optional[SolverOptions] = None):
        self.A = np.asarray(as_matrix_array(A), dtype=complex)
        self.options = options or SolverOptions()
        U, s, Vh = np.linalg.svd(self.A, full_matrices=False)
        keep = s > 1e-10 * s[0]
        self.A_pinv = (Vh[keep].conj().T / s[keep]) @ U[:, keep].conj().T
        self.A_H = self.A.conj().T

    def _candidate(self, Z: np.ndarray, Y: np.ndarray, tol: float, rel_tol: float):
        """Least-squares fit on the rows of ``Z`` above ``rel_tol * max row norm``.

        Returns ``(X, certificate value)`` or ``None`` when that support is
        unusable or the fit misses ``Y`` by more than ``tol`` (relative).
        """
        A = self.A
        n, N = A.shape
        S = _relative_support(Z, rel_tol)
        k = len(S)
        if k == 0 or k > n:
            return None
        idx = S.as_array()
        try:
            P = pseudo_inverse(A[:, idx])
        except RankDeficientError:
            return None
        XS = P @ Y
        if np.linalg.norm(A[:, idx] @ XS - Y) > max(tol, 1e-12) * np.linalg.norm(Y):
            return None
        X = np.zeros((N, Y.shape[1]), dtype=complex)
        X[idx] = XS
        norms = np.linalg.norm(XS, axis=1)
        if np.any(norms == 0):
            return X, np.inf
        if k == N:
            return X, 0.0
        mask = np.ones(N, dtype=bool)
        mask[idx] = False
        B = P @ A[:, mask]
        sgn = XS / norms[:, None]
        cert = float(np.linalg.norm(sgn.conj().T @ B, axis=0).max())
        return X, cert

    def _candidates(self, Z: np.ndarray, Y: np.ndarray, tol: float):
        seen = set()
        for rel in (self.options.support_tol, *_POLISH_LEVELS):
            S = _relative_support(Z, rel)
            if S.indices in seen:
                continue
            seen.add(S.indices)
            cand = self._candidate(Z, Y, tol, rel)
            if cand is not None:
                yield cand

    def _dual_bound(self, Lam: np.ndarray, Y: np.ndarray) -> float:
        """Lower bound on the optimal value from a multiplier estimate ``Lam``.

        ``W`` solves ``A^* W = Lam`` in the least-squares sense and is rescaled
        so every row of ``A^* W`` has norm at most one; then ``Re <W, Y>`` is a
        feasible dual objective.
        """
        W = self.A_pinv.conj().T @ Lam
        C = self.A_H @ W
        m = np.sqrt(np.max(np.sum(C.real**2 + C.imag**2, axis=1)))
        if m == 0.0:
            return 0.0
        return float(np.real(np.vdot(W, Y))) / m

    def solve(self, Y, options: Optional[SolverOptions] = None,
              objective_floor: Optional[float] = None) -> RecoveryResult:
        """Run ADMM on ``Y``.

        Stops on (i) small primal and dual residuals, (ii) a passing dual
        certificate for the least-squares fit on the iterate's support, (iii) a
        relative duality gap below ``gap_tol`` for that fit, or (iv) a feasible
        iterate whose objective is below ``objective_floor``.  The last one lets
        a caller that knows a reference signal stop as soon as the reference is
        provably not a minimizer.
        """
        opts = options or self.options
        A = self.A
        Y = _as_measurements(A, Y)
        N, L = A.shape[1], Y.shape[1]
        scale = float(np.sqrt(np.sum(_row_sq_norms(Y))))
        if scale == 0.0:
            return _result(A, Y, np.zeros((N, L), dtype=complex), "l21", opts, 0)
        Yn = Y / scale
        Ap, AH = self.A_pinv, self.A_H
        rho = opts.penalty
        tol = opts.tolerance
        x0 = Ap @ Yn
        Z = x0.copy()
        U = np.zeros_like(Z)
        converged = False
        certified = False
        gap_stop = False
        below_floor = False
        floor = None if objective_floor is None else objective_floor / scale
        it = 0
        for it in range(1, opts.max_iterations + 1):
            V = Z - U
            X = V - Ap @ (A @ V - Yn)
            Z_old = Z
            Z = _shrink_rows(X + U, 1.0 / rho)
            U = U + X - Z
            if opts.certify and it % opts.check_every == 0:
                lower = None
                for cand_X, cert in self._candidates(Z, Yn, tol):
                    if cert < 1.0:
                        X = cand_X
                        certified = converged = True
                        break
                    if lower is None:
                        lower = self._dual_bound(rho * U, Yn)
                    obj = mixed_norm_21(cand_X)
                    if obj - lower <= opts.gap_tol * obj:
                        X = cand_X
                        converged = gap_stop = True
                        break
                if converged:
                    break
            if floor is not None and it % opts.check_every == 0 and mixed_norm_21(X) < floor:
                below_floor = True
                break
            r = np.linalg.norm(X - Z)
            s = rho * np.linalg.norm(Z - Z_old)
            eps_pri = tol * max(np.linalg.norm(X), np.linalg.norm(Z), 1e-300)
            eps_dual = tol * rho * max(np.linalg.norm(U), 1e-300)
            if r <= eps_pri and s <= eps_dual:
                converged = True
                break
            if opts.adaptive and it % opts.check_every == 0:
                # residual balancing; U is the scaled dual so it is rescaled with rho
                if r > 10.0 * s:
                    rho *= 2.0
                    U = U / 2.0
                elif s > 10.0 * r:
                    rho /= 2.0
                    U = U * 2.0
        if not converged and not below_floor or (converged and not (certified or gap_stop)):
            # a feasible least-squares fit on a thresholded support that is no
            # worse in objective than the iterate is at least as good an answer
            best = mixed_norm_21(X) * (1 + 10 * tol) + 1e-12
            for cand_X, cert in self._candidates(Z, Yn, max(tol, 1e-10)):
                obj = mixed_norm_21(cand_X)
                if obj <= best:
                    X, best = cand_X, obj
                    certified = cert < 1.0
        return _result(A, Y, X * scale, "l21", opts, it, converged=converged,
                       info={"certified": bool(certified), "gap_stop": gap_stop,
                             "below_floor": below_floor})


def solve_l21(A, Y, opts: Optional[SolverOptions] = None) -> RecoveryResult:
    """Minimize ``||X||_{2,1}`` subject to ``AX = Y``.

    See :class:`L21Solver`; build one directly to reuse the pseudo-inverse
    across many right-hand sides.
    """
    return L21Solver(A, opts).solve(Y)


def _correlations(AH: np.ndarray, R: np.ndarray, p: float) -> np.ndarray:
    C = AH @ R
    if p == 2:
        return np.sqrt(np.sum(C.real**2 + C.imag**2, axis=1))
    return np.linalg.norm(C, ord=p, axis=1)


def _check_k(A: np.ndarray, k: int) -> None:
    if not (1 <= k <= A.shape[0]):
        raise ValueError(f"need 1 <= k <= n = {A.shape[0]}, got k={k}")


def p_thresholding(A, Y, k: int, p: float = 2.0,
                   opts: Optional[SolverOptions] = None) -> RecoveryResult:
    """Keep the ``k`` atoms with the largest ``||a_l^* Y||_p``, then least squares.

    Ties are broken towards the lowest column index.
    """
    opts = opts or SolverOptions()
    A = np.asarray(as_matrix_array(A), dtype=complex)
    Y = _as_measurements(A, Y)
    _check_k(A, k)
    if p < 1:
        raise ValueError("p must be >= 1")
    corr = _correlations(A.conj().T, Y, p)
    idx = np.sort(np.argsort(-corr, kind="stable")[:k])
    X = np.zeros((A.shape[1], Y.shape[1]), dtype=complex)
    try:
        X[idx] = pseudo_inverse(A[:, idx]) @ Y
    except RankDeficientError as exc:
        return _failure(A, Y, "thresh", opts, 1, str(exc))
    res = _result(A, Y, X, "thresh", opts, 1, info={"selected": [int(i) for i in idx]})
    return res


def p_somp(A, Y, k: int, p: float = 2.0, opts: Optional[SolverOptions] = None) -> RecoveryResult:
    """Simultaneous OMP with ``p``-norm atom selection, ``k`` iterations.

    Each step adds the atom most correlated with the current residual (ties
    to the lowest index) and re-projects ``Y`` onto the selected atoms.  The
    selection order is reported in ``info["trajectory"]``.
    """
    opts = opts or SolverOptions()
    A = np.asarray(as_matrix_array(A), dtype=complex)
    Y = _as_measurements(A, Y)
    _check_k(A, k)
    if p < 1:
        raise ValueError("p must be >= 1")
    AH = A.conj().T
    N, L = A.shape[1], Y.shape[1]
    ynorm = np.linalg.norm(Y)
    selected: list[int] = []
    R = Y
    XS = np.zeros((0, L), dtype=complex)
    for _ in range(k):
        if np.linalg.norm(R) <= 1e-13 * ynorm or ynorm == 0.0:
            break
        j = int(np.argmax(_correlations(AH, R, p)))
        if j in selected:
            break
        selected.append(j)
        try:
            P = pseudo_inverse(A[:, selected])
        except RankDeficientError as exc:
            return _failure(A, Y, "somp", opts, len(selected), str(exc))
        XS = P @ Y
        R = Y - A[:, selected] @ XS
    X = np.zeros((N, L), dtype=complex)
    if selected:
        X[selected] = XS
    return _result(A, Y, X, "somp", opts, len(selected), info={"trajectory": selected})


def l0_oracle(A, Y, k_max: int, budget: int = 10**6, fit_tol: float = 1e-8,
              opts: Optional[SolverOptions] = None) -> RecoveryResult:
    """Smallest support that reproduces ``Y`` exactly, by exhaustive search.

    A support fits when the least-squares residual is at most
    ``fit_tol * max(1, ||Y||_F)``.  ``info["unique"]`` is False when another
    support of the same minimal size also fits.
    """
    opts = opts or SolverOptions()
    A = np.asarray(as_matrix_array(A), dtype=complex)
    Y = _as_measurements(A, Y)
    N, L = A.shape[1], Y.shape[1]
    k_max = min(k_max, N)
    total = sum(math.comb(N, j) for j in range(k_max + 1))
    if total > budget:
        raise BudgetExceededError(f"{total} candidate supports exceed budget {budget}")
    thresh = fit_tol * max(1.0, float(np.linalg.norm(Y)))
    zero = np.zeros((N, L), dtype=complex)
    if np.linalg.norm(Y) <= thresh:
        return _result(A, Y, zero, "l0", opts, 1, info={"unique": True, "k": 0})
    visited = 1
    for k in range(1, k_max + 1):
        fits = []
        for combo in itertools.combinations(range(N), k):
            visited += 1
            AS = A[:, combo]
            XS, *_ = np.linalg.lstsq(AS, Y, rcond=None)
            if np.linalg.norm(AS @ XS - Y) <= thresh:
                fits.append((combo, XS))
        if fits:
            combo, XS = fits[0]
            X = zero.copy()
            X[list(combo)] = XS
            res = _result(A, Y, X, "l0", opts, visited,
                          info={"unique": len(fits) == 1, "k": k,
                                "fitting_supports": [list(c) for c, _ in fits]})
            res.recovered_support = Support(tuple(combo))
            return res
    return _failure(A, Y, "l0", opts, visited, f"no support of size <= {k_max} fits")


ALGORITHMS = ("l21", "thresh", "somp", "l0")


def run_algorithm(name: str, A, Y, k: int, opts: Optional[SolverOptions] = None,
                  solver: Optional[L21Solver] = None) -> RecoveryResult:
    """Dispatch by algorithm name (``l21``, ``thresh``, ``somp`` or ``l0``)."""
    if name == "l21":
        return (solver or L21Solver(A, opts)).solve(Y, opts)
    if name == "thresh":
        return p_thresholding(A, Y, k, 2.0, opts)
    if name == "somp":
        return p_somp(A, Y, k, 2.0, opts)
    if name == "l0":
        return l0_oracle(A, Y, k, opts=opts)
    raise ValueError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")
