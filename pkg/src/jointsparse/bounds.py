"""Closed-form recovery conditions and failure-probability bounds.

Every bound is returned as its raw expression: probabilities are not clamped
to ``[0, 1]``, so a value of one or more simply means the bound is vacuous.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

__all__ = [
    "BoundReport",
    "TROPP_C",
    "a_l_constant",
    "bernstein_tail",
    "bernstein_rate",
    "l21_failure_bound",
    "min_alpha_for_failure",
    "thm5_threshold_and_probability",
    "coherence_norm_bound",
    "rip_norm_bound",
    "tropp_random_support_bound",
    "tropp_gram_condition",
    "thresholding_theta",
    "thresholding_failure_bound",
    "somp_condition",
    "somp_failure_bound",
    "gaussian_lipschitz_tail",
    "spherical_sample_complexity",
    "sample_size_condition",
    "thresholding_sample_complexity",
    "coherent_thresholding_min_n",
    "coherent_somp_min_n",
    "dirac_fourier_sparsity_limit",
]

#: constant of the random-support bound, log(2) e^{-1/2} / (4 * 144 * log(3))
TROPP_C = math.log(2.0) * math.exp(-0.5) / (4.0 * 144.0 * math.log(3.0))


_GAMMA_DIRECT_MAX = 300


@dataclass
class BoundReport:
    name: str
    condition_holds: bool
    condition_margin: float
    failure_probability: float
    parameters: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def a_l_constant(L: int) -> float:
    """Mean Euclidean norm of a standard Gaussian vector in ``L`` dimensions.

    ``sqrt(2) Gamma((L + 1) / 2) / Gamma(L / 2)``.  Gamma itself is used while it
    is representable (it is correctly rounded there, so ``A_1 = sqrt(2/pi)``
    exactly); beyond that the ratio goes through log-Gamma.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    if L <= _GAMMA_DIRECT_MAX:
        return math.sqrt(2.0) * math.gamma((L + 1) / 2.0) / math.gamma(L / 2.0)
    return math.sqrt(2.0) * math.exp(math.lgamma((L + 1) / 2.0) - math.lgamma(L / 2.0))


def bernstein_rate(x: float) -> float:
    """``x^-2 - log(x^-2) - 1`` for ``0 < x < 1``; positive and decreasing in ``x``."""
    inv_sq = 1.0 / (x * x)
    return inv_sq - math.log(inv_sq) - 1.0


def _channel_factor(L: int, complex_model: bool) -> float:
    return L if complex_model else L / 2.0


def bernstein_tail(u: float, L: int, complex_model: bool = False) -> float:
    """Tail bound for ``||sum_j a_j Z_j||_2 >= u ||a||_2`` with ``Z_j`` uniform on a sphere.

    ``exp(-(L/2) (u^2 - log u^2 - 1))`` for the real sphere in ``R^L``; the
    complex sphere doubles the exponent.
    """
    if u <= 1:
        raise ValueError("u must be > 1")
    if L < 1:
        raise ValueError("L must be >= 1")
    return math.exp(-_channel_factor(L, complex_model) * bernstein_rate(1.0 / u))


def l21_failure_bound(N: int, L: int, alpha: float, complex_model: bool = False) -> BoundReport:
    """Failure probability of mixed-norm recovery when ``||A_S^+ a_l||_2 <= alpha``.

    ``N exp(-c L)`` with ``c = (alpha^-2 - log alpha^-2 - 1) / 2`` (real
    models) or without the halving (complex models).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    rate = bernstein_rate(alpha) * (1.0 if complex_model else 0.5)
    return BoundReport(
        name="l21_average_case",
        condition_holds=True,
        condition_margin=1.0 - alpha,
        failure_probability=N * math.exp(-rate * L),
        parameters={"N": N, "L": L, "alpha": alpha, "complex_model": complex_model,
                    "rate": rate},
    )


def min_alpha_for_failure(N: int, L: int, epsilon: float, complex_model: bool = False,
                          xtol: float = 1e-14) -> float:
    """Largest ``alpha`` whose mixed-norm failure bound equals ``epsilon``.

    Solves ``alpha^-2 - log(alpha^-2) = 2 log(N / epsilon) / L + 1`` (real
    models; ``log(N / epsilon) / L`` for complex ones) by bisection.
    """
    if not 0.0 < epsilon < 1.0 or N < 1 or L < 1:
        raise ValueError("need N >= 1, L >= 1 and 0 < epsilon < 1")
    target = math.log(N / epsilon) / _channel_factor(L, complex_model)
    lo, hi = 1e-300, 1.0
    # bernstein_rate decreases from +inf at 0 to 0 at 1
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if bernstein_rate(mid) >= target:
            lo = mid
        else:
            hi = mid
    return lo


def thm5_threshold_and_probability(k: int, L: int) -> tuple[float, float]:
    """Norm threshold ``gamma`` and success probability for Gaussian coefficients.

    ``gamma = A_L / (3 sqrt(L) + 2 sqrt(k))`` and
    ``P = 1 - exp(-L/8) - k exp(-A_L^2 / 8)``.
    """
    if k < 1 or L < 1:
        raise ValueError("k and L must be >= 1")
    AL = a_l_constant(L)
    gamma = AL / (3.0 * math.sqrt(L) + 2.0 * math.sqrt(k))
    prob = 1.0 - math.exp(-L / 8.0) - k * math.exp(-AL * AL / 8.0)
    return gamma, prob


def coherence_norm_bound(k: int, mu: float, delta: float) -> BoundReport:
    """Coherence condition ``(sqrt(k) + (k - 1) delta) mu < delta``.

    When it holds, ``||A_S^+ a_l||_2 <= delta`` for every support of size ``k``.
    """
    if mu < 0 or delta <= 0:
        raise ValueError("need mu >= 0 and delta > 0")
    lhs = (math.sqrt(k) + (k - 1) * delta) * mu
    holds = lhs < delta
    return BoundReport(
        name="coherence_norm",
        condition_holds=holds,
        condition_margin=delta - lhs,
        failure_probability=0.0 if holds else 1.0,
        parameters={"k": k, "mu": mu, "delta": delta, "norm_bound": delta},
    )


def rip_norm_bound(delta: float, eta: Optional[float] = None) -> float:
    """Upper bound on ``||A_S^+ a_l||_2`` from restricted isometry quantities.

    Without ``eta``: requires ``delta*(S) <= delta < 1/2`` and returns
    ``delta / (1 - delta)``.  With ``eta``: requires ``delta(S) <= delta < 1``
    and ``mu_2(S) <= eta`` and returns ``eta / (1 - delta)``.
    """
    if eta is None:
        if not 0.0 <= delta < 0.5:
            raise ValueError("variant (a) needs 0 <= delta < 1/2")
        return delta / (1.0 - delta)
    if not 0.0 <= delta < 1.0:
        raise ValueError("variant (b) needs 0 <= delta < 1")
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    return eta / (1.0 - delta)


def _check_unit(name: str, x: float) -> None:
    if not 0.0 < x < 1.0:
        raise ValueError(f"{name} must lie in (0, 1)")


def tropp_random_support_bound(k: int, N: int, mu: float, opnorm_sq: float,
                               delta: float, epsilon: float) -> BoundReport:
    """Norm bound for a uniformly random support from coherence and ``||A||_2^2``.

    Conditions: ``mu^2 k log(1/eps) <= c delta^2`` and
    ``(k/N) ||A||_2^2 <= delta / (4 e^{1/4})``.  If both hold then with
    probability at least ``1 - eps`` every ``||A_S^+ a_l||_2`` is at most
    ``sqrt(c) delta / ((1 - delta) sqrt(log(1/eps)))``.
    """
    if k < 4:
        raise ValueError("the random-support bound needs k >= 4")
    _check_unit("delta", delta)
    _check_unit("epsilon", epsilon)
    log_inv = math.log(1.0 / epsilon)
    slack_mu = TROPP_C * delta**2 - mu**2 * k * log_inv
    slack_norm = delta / (4.0 * math.exp(0.25)) - (k / N) * opnorm_sq
    holds = slack_mu >= 0 and slack_norm >= 0
    bound = math.sqrt(TROPP_C) * delta / ((1.0 - delta) * math.sqrt(log_inv))
    return BoundReport(
        name="random_support_norm",
        condition_holds=holds,
        condition_margin=min(slack_mu, slack_norm),
        failure_probability=epsilon if holds else 1.0,
        parameters={"k": k, "N": N, "mu": mu, "opnorm_sq": opnorm_sq, "delta": delta,
                    "epsilon": epsilon, "c": TROPP_C, "norm_bound": bound,
                    "coherence_slack": slack_mu, "opnorm_slack": slack_norm},
    )


def tropp_gram_condition(k: int, N: int, mu: float, opnorm_sq: float,
                         delta: float, epsilon: float) -> bool:
    """Condition under which ``P(||A_S^* A_S - I|| >= delta) <= epsilon`` for random ``S``.

    ``sqrt(144 log(3) / log(2) mu^2 k log(1/eps)) + (k/N) ||A||^2 <= e^{-1/4} delta``.
    """
    if k < 4:
        raise ValueError("needs k >= 4")
    lhs = math.sqrt(144.0 * math.log(3.0) / math.log(2.0) * mu**2 * k * math.log(1.0 / epsilon))
    lhs += (k / N) * opnorm_sq
    return lhs <= math.exp(-0.25) * delta


def thresholding_theta(dynamic_range: float, mu2: float) -> float:
    """``theta = R mu_2(S)`` with ``R = max sigma / min sigma``."""
    return dynamic_range * mu2


def thresholding_failure_bound(N: int, L: int, theta: float,
                               complex_model: bool = False) -> BoundReport:
    """Failure bound of 2-thresholding, ``N exp(-(L/2)(theta^-2 - log theta^-2 - 1))``."""
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    rate = bernstein_rate(theta) * (1.0 if complex_model else 0.5)
    return BoundReport(
        name="thresholding",
        condition_holds=True,
        condition_margin=1.0 - theta,
        failure_probability=N * math.exp(-rate * L),
        parameters={"N": N, "L": L, "theta": theta, "complex_model": complex_model,
                    "rate": rate},
    )


def somp_condition(mu2: float, delta_S: float, eps: float) -> bool:
    """``(mu_2^2 + (1 + eps)/(1 - eps) mu_2) / (1 - delta(S)) <= 1``."""
    _check_unit("eps", eps)
    if delta_S >= 1:
        return False
    return (mu2**2 + (1 + eps) / (1 - eps) * mu2) / (1 - delta_S) <= 1.0


def somp_failure_bound(N: int, k: int, L: int, eps: float,
                       complex_model: bool = False) -> BoundReport:
    """Failure bound of 2-SOMP, ``N 2^k exp(-eps^2 A_L^2)``.

    The complex Gaussian model uses ``A_{2L}`` in place of ``A_L``.
    """
    _check_unit("eps", eps)
    AL = a_l_constant(2 * L if complex_model else L)
    log_p = math.log(N) + k * math.log(2.0) - eps**2 * AL**2
    return BoundReport(
        name="somp",
        condition_holds=True,
        condition_margin=1.0 - eps,
        failure_probability=math.exp(log_p),
        parameters={"N": N, "k": k, "L": L, "eps": eps, "complex_model": complex_model,
                    "A_L": AL},
    )


def gaussian_lipschitz_tail(t: float, B: float) -> float:
    """One-sided concentration ``exp(-t^2 / (2 B^2))`` for a ``B``-Lipschitz function."""
    if t < 0 or B <= 0:
        raise ValueError("need t >= 0 and B > 0")
    return math.exp(-t * t / (2.0 * B * B))


def spherical_sample_complexity(k: int, N: int, delta: float, epsilon: float,
                                C1: float) -> int:
    """``ceil(C1 delta^-2 max(k log(1/delta), log(N/epsilon)))`` measurements.

    ``C1`` is an unspecified absolute constant and must be supplied.
    """
    if min(k, N, delta, epsilon, C1) <= 0:
        raise ValueError("all arguments must be positive")
    return math.ceil(C1 / delta**2 * max(k * math.log(1.0 / delta), math.log(N / epsilon)))


def sample_size_condition(n: int, k: int, N: int, epsilon: float, C1: float, C2: float) -> bool:
    """``n >= max(C1 k, C2 log(N / epsilon))`` with caller-supplied constants."""
    return n >= max(C1 * k, C2 * math.log(N / epsilon))


def thresholding_sample_complexity(k: int, N: int, R: float, theta: float, epsilon: float,
                                   C: float) -> float:
    """``C R^2 / theta^2 max(k log(R/theta), log(N/epsilon))`` for random spherical matrices."""
    return C * R**2 / theta**2 * max(k * math.log(R / theta), math.log(N / epsilon))


def coherent_thresholding_min_n(k: int, R: float, theta: float) -> float:
    """``4 R^2 k / theta^2``: measurements making ``2 R mu sqrt(k) <= theta`` when ``mu = n^-1/2``."""
    return 4.0 * R**2 * k / theta**2


def coherent_somp_min_n(k: int) -> int:
    """``49 k``: gives ``mu sqrt(k) <= 1/7`` when ``mu = n^-1/2``."""
    return 49 * k


def dirac_fourier_sparsity_limit(n: int, epsilon: float, C: float, c: float = 0.25) -> float:
    """Largest sparsity ``c n / sqrt(log(eps / (C n)) + log(n))`` for random Dirac-Fourier supports.

    The inner constant ``C`` is unspecified and supplied by the caller; the
    expression is only defined when the radicand is positive.
    """
    radicand = math.log(epsilon / (C * n)) + math.log(n)
    if radicand <= 0:
        raise ValueError("log(eps / (C n)) + log(n) must be positive")
    return c * n / math.sqrt(radicand)
