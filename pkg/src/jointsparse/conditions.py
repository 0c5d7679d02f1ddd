"""Deterministic recovery conditions for a (matrix, support) pair.

Coherence-type quantities, support-restricted isometry constants,
pseudo-inverse column norms and the dual certificates that guarantee
uniqueness of the mixed-norm minimizer.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import Support, as_signal_array, row_sign, support_of
from .ensembles import as_matrix_array

__all__ = [
    "RankDeficientError",
    "BudgetExceededError",
    "ConditionReport",
    "CertificateResult",
    "coherence",
    "coherence_lower_bound",
    "local_two_coherence",
    "delta_of_support",
    "delta_star",
    "rip_constant_exact",
    "pseudo_inverse",
    "pinv_column_norms",
    "dual_certificate_check",
    "verify_general_certificate",
    "analyze",
]

#: relative singular-value cutoff used when forming pseudo-inverses
PINV_RCOND = 1e-10
#: absolute smallest singular value below which A_S counts as rank deficient
RANK_TOL = 1e-10
DEFAULT_BUDGET = 10**6


class RankDeficientError(np.linalg.LinAlgError):
    """The selected columns ``A_S`` do not have full column rank."""


class BudgetExceededError(RuntimeError):
    """An exhaustive enumeration would visit more subsets than allowed."""


def _support_indices(S) -> np.ndarray:
    if isinstance(S, Support):
        return S.as_array()
    return Support.from_iterable(S).as_array()


def _complement(N: int, idx: np.ndarray) -> np.ndarray:
    mask = np.ones(N, dtype=bool)
    mask[idx] = False
    return np.flatnonzero(mask)


def _hermitian_norm(M: np.ndarray) -> np.ndarray:
    """Spectral norm of (a stack of) Hermitian matrices."""
    w = np.linalg.eigvalsh(M)
    return np.max(np.abs(w), axis=-1)


def coherence(A) -> float:
    """Largest magnitude of an off-diagonal Gram entry."""
    A = as_matrix_array(A)
    if A.shape[1] < 2:
        raise ValueError("coherence needs at least two columns")
    G = np.abs(A.conj().T @ A)
    np.fill_diagonal(G, 0.0)
    return float(G.max())


def coherence_lower_bound(n: int, N: int) -> float:
    """Welch-type lower bound ``sqrt((N - n) / (n (N - 1)))`` on the coherence."""
    if not (1 <= n <= N) or N < 2:
        raise ValueError(f"need 1 <= n <= N and N >= 2, got n={n}, N={N}")
    return math.sqrt((N - n) / (n * (N - 1)))


def local_two_coherence(A, S) -> float:
    """Local 2-coherence ``mu_2(S)``.

    The maximum of ``||A_S^* a_l||_2`` over columns outside ``S`` and of
    ``||A_{S minus l}^* a_l||_2`` over columns inside ``S``.
    """
    A = as_matrix_array(A)
    idx = _support_indices(S)
    if idx.size == 0:
        raise ValueError("local 2-coherence needs a nonempty support")
    AS = A[:, idx]
    cross = AS.conj().T @ A  # (k, N)
    inner = cross[:, idx].copy()
    np.fill_diagonal(inner, 0.0)
    inside = np.linalg.norm(inner, axis=0).max()
    out = _complement(A.shape[1], idx)
    outside = np.linalg.norm(cross[:, out], axis=0).max() if out.size else 0.0
    return float(max(inside, outside))


def delta_of_support(A, S) -> float:
    """``||A_S^* A_S - I||_2`` computed with a Hermitian eigensolver."""
    A = as_matrix_array(A)
    idx = _support_indices(S)
    if idx.size == 0:
        return 0.0
    AS = A[:, idx]
    return float(_hermitian_norm(AS.conj().T @ AS - np.eye(idx.size)))


def delta_star(A, S) -> float:
    """Maximum of ``delta(S + {l})`` over all columns ``l`` outside ``S``."""
    A = as_matrix_array(A)
    idx = _support_indices(S)
    N = A.shape[1]
    out = _complement(N, idx)
    if out.size == 0:
        raise ValueError("support covers every column; no augmentation possible")
    k = idx.size
    AS = A[:, idx]
    G = np.empty((out.size, k + 1, k + 1), dtype=complex)
    G[:, :k, :k] = AS.conj().T @ AS
    c = AS.conj().T @ A[:, out]  # (k, m)
    G[:, :k, k] = c.T
    G[:, k, :k] = c.conj().T
    G[:, k, k] = np.sum(np.abs(A[:, out]) ** 2, axis=0)
    G -= np.eye(k + 1)
    return float(_hermitian_norm(G).max())


def rip_constant_exact(A, k: int, budget: int = DEFAULT_BUDGET, chunk: int = 4096) -> float:
    """Exact restricted isometry constant ``delta_k`` by exhaustive search.

    Principal submatrices cannot have a larger deviation than the matrix they
    sit in, so only supports of size exactly ``min(k, N)`` are enumerated.
    """
    A = as_matrix_array(A)
    N = A.shape[1]
    if k < 1:
        raise ValueError("k must be positive")
    k = min(k, N)
    count = math.comb(N, k)
    if count > budget:
        raise BudgetExceededError(f"C({N}, {k}) = {count} subsets exceeds budget {budget}")
    G = A.conj().T @ A - np.eye(N)
    best = 0.0
    combos = itertools.combinations(range(N), k)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.intp)
        if block.size == 0:
            break
        sub = G[block[:, :, None], block[:, None, :]]
        best = max(best, float(_hermitian_norm(sub).max()))
    return best


def pseudo_inverse(AS: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a full-column-rank block via SVD.

    Raises :class:`RankDeficientError` when the smallest singular value is not
    above ``RANK_TOL``.
    """
    U, s, Vh = np.linalg.svd(AS, full_matrices=False)
    if s.size == 0:
        return np.zeros((0, AS.shape[0]), dtype=AS.dtype)
    if s[-1] <= RANK_TOL:
        raise RankDeficientError(f"A_S is rank deficient (smallest singular value {s[-1]:.3e})")
    keep = s > PINV_RCOND * s[0]
    return (Vh[keep].conj().T / s[keep]) @ U[:, keep].conj().T


def _pinv_outside(A: np.ndarray, idx: np.ndarray):
    out = _complement(A.shape[1], idx)
    B = pseudo_inverse(A[:, idx]) @ A[:, out]  # (k, m): column l is A_S^+ a_l
    return out, B


def pinv_column_norms(A, S) -> list[tuple[int, float, float]]:
    """``(l, ||A_S^+ a_l||_1, ||A_S^+ a_l||_2)`` for every column ``l`` outside ``S``."""
    A = as_matrix_array(A)
    idx = _support_indices(S)
    out, B = _pinv_outside(A, idx)
    l1 = np.sum(np.abs(B), axis=0)
    l2 = np.linalg.norm(B, axis=0)
    return [(int(l), float(a), float(b)) for l, a, b in zip(out, l1, l2)]


class CertificateResult(NamedTuple):
    passed: bool
    value: float  # max over l outside S of ||sgn(X^S)^* A_S^+ a_l||_2


def dual_certificate_check(A, X, tol: float = 0.0) -> CertificateResult:
    """Sufficient condition for ``X`` to be the unique mixed-norm minimizer.

    Evaluates ``max_{l not in S} ||sgn(X^S)^* A_S^+ a_l||_2`` with
    ``S = support_of(X, tol)``; the check passes when this is below one.
    """
    A = as_matrix_array(A)
    Xa = as_signal_array(X)
    S = support_of(Xa, tol)
    if len(S) == 0:
        raise ValueError("dual certificate needs a nonzero signal")
    idx = S.as_array()
    out, B = _pinv_outside(A, idx)
    if out.size == 0:
        return CertificateResult(True, 0.0)
    sgn = row_sign(Xa[idx], tol)
    value = float(np.linalg.norm(sgn.conj().T @ B, axis=0).max())
    return CertificateResult(value < 1.0, value)


def verify_general_certificate(A, S, sgn_XS, H, tol: float = 1e-8) -> bool:
    """Check that ``H`` is a dual certificate for the sign pattern on ``S``.

    Requires ``A_S^* H = sgn(X^S)`` (entrywise within ``tol``) and
    ``||H^* a_l||_2 < 1`` for every column outside ``S``.
    """
    A = as_matrix_array(A)
    idx = _support_indices(S)
    sgn_XS = np.asarray(sgn_XS)
    H = np.asarray(H)
    if sgn_XS.ndim == 1:
        sgn_XS = sgn_XS[:, None]
    if H.ndim == 1:
        H = H[:, None]
    if H.shape != (A.shape[0], sgn_XS.shape[1]) or sgn_XS.shape[0] != idx.size:
        raise ValueError("inconsistent certificate dimensions")
    if np.max(np.abs(A[:, idx].conj().T @ H - sgn_XS), initial=0.0) > tol:
        return False
    out = _complement(A.shape[1], idx)
    if out.size == 0:
        return True
    corr = np.linalg.norm(H.conj().T @ A[:, out], axis=0)
    return bool(np.all(corr < 1.0))


@dataclass
class ConditionReport:
    coherence: float
    welch_bound: float
    mu2: Optional[float] = None
    delta_S: Optional[float] = None
    delta_star: Optional[float] = None
    pinv_l1_max: Optional[float] = None
    pinv_l2_max: Optional[float] = None
    erc_pass: Optional[bool] = None
    avg_case_alpha: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def analyze(A, S=None) -> ConditionReport:
    """Collect every deterministic condition for ``A`` (and ``S`` if given).

    ``avg_case_alpha`` is the largest ``||A_S^+ a_l||_2``, the smallest
    admissible ``alpha`` for the average-case mixed-norm failure bound.
    """
    A = as_matrix_array(A)
    n, N = A.shape
    report = ConditionReport(coherence=coherence(A), welch_bound=coherence_lower_bound(n, N))
    if S is None:
        return report
    idx = _support_indices(S)
    if idx.size == 0:
        return report
    report.mu2 = local_two_coherence(A, idx)
    report.delta_S = delta_of_support(A, idx)
    if idx.size < N:
        report.delta_star = delta_star(A, idx)
        try:
            norms = pinv_column_norms(A, idx)
        except RankDeficientError:
            return report
        report.pinv_l1_max = max(t[1] for t in norms)
        report.pinv_l2_max = max(t[2] for t in norms)
        report.erc_pass = report.pinv_l1_max < 1.0
        report.avg_case_alpha = report.pinv_l2_max
    return report
