"""Monte Carlo experiments: phase-transition curves and empirical tail checks.

Every random draw is derived from a stable hash of ``(base_seed, k, L,
trial)``, so results do not depend on the number of worker processes or on
the order in which trials are executed.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import (
    CoefficientModel,
    CoefficientVariant,
    Support,
    keyed_rng,
    mixed_norm_21,
    sample_coefficients,
    stable_seed,
)
from .ensembles import EnsembleTag, MeasurementMatrix, make_ensemble
from .solvers import L21Solver, SolverOptions, p_somp, p_thresholding, l0_oracle

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "TrialRecord",
    "PhaseCurve",
    "PRESETS",
    "preset",
    "draw_instance",
    "run_trial",
    "phase_curve",
    "empirical_bernstein_tail",
    "empirical_al",
    "binomial_se",
    "validate_l21_bound",
]

EXPERIMENT_ALGORITHMS = ("l21", "thresh", "somp")
MODELS = ("model1", "model2", "real_gaussian", "real_spherical",
          "complex_gaussian", "complex_spherical")
CSV_HEADER = ["ensemble", "n", "N", "model", "algorithm", "k", "L", "trials", "successes", "rate"]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _experiment_solver_options() -> dict:
    return {"penalty": 10.0, "adaptive": True}


@dataclass(frozen=True)
class ExperimentConfig:
    """A grid of ``(k, L, algorithm)`` points and how to draw each trial.

    ``model`` is ``"model1"`` (row scales ``|N(0,1)|``, real Gaussian rows),
    ``"model2"`` (unit scales, complex Gaussian rows) or one of the four
    coefficient variants with unit scales.  ``redraw_matrix`` draws a fresh
    matrix per trial for random ensembles; deterministic ensembles are
    always fixed.
    """

    ensemble: str = "Spherical"
    n: int = 32
    N: Optional[int] = 256
    k_grid: tuple[int, ...] = (2, 4, 6, 8)
    L_grid: tuple[int, ...] = (1, 2, 4)
    model: str = "model1"
    algorithms: tuple[str, ...] = EXPERIMENT_ALGORITHMS
    trials: int = 100
    base_seed: int = 0
    matrix_seed: int = 0
    redraw_matrix: bool = True
    success_threshold: float = 1e-4
    support_tol: float = 1e-6
    solver: dict = field(default_factory=_experiment_solver_options)

    def __post_init__(self):
        object.__setattr__(self, "ensemble", EnsembleTag(self.ensemble).value)
        for name in ("k_grid", "L_grid", "algorithms"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "solver", dict(self.solver))

    @property
    def tag(self) -> EnsembleTag:
        return EnsembleTag(self.ensemble)

    @property
    def n_columns(self) -> int:
        if self.tag is EnsembleTag.DIRAC_FOURIER:
            return 2 * self.n
        if self.tag is EnsembleTag.ALLTOP_GABOR:
            return self.n * self.n
        return int(self.N)

    def validate(self) -> "ExperimentConfig":
        if not self.k_grid:
            raise ConfigError("k_grid must not be empty")
        if not self.L_grid:
            raise ConfigError("L_grid must not be empty")
        if not self.algorithms:
            raise ConfigError("algorithms must not be empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.tag is EnsembleTag.CUSTOM:
            raise ConfigError("experiments need a constructible ensemble, not Custom")
        if self.tag.is_random and not self.N:
            raise ConfigError(f"ensemble {self.ensemble} needs N")
        bad = [a for a in self.algorithms if a not in EXPERIMENT_ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithms {bad}; choose from {EXPERIMENT_ALGORITHMS}")
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {MODELS}")
        if any(k < 0 or k > self.n for k in self.k_grid):
            raise ConfigError(f"every k must satisfy 0 <= k <= n = {self.n}")
        if any(L < 1 for L in self.L_grid):
            raise ConfigError("every L must be >= 1")
        try:
            self.solver_options()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid solver options: {exc}") from None
        return self

    def solver_options(self) -> SolverOptions:
        return SolverOptions(support_tol=self.support_tol, **self.solver)

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("k_grid", "L_grid", "algorithms"):
            d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def digest(self) -> str:
        return format(stable_seed(json.dumps(self.to_dict(), sort_keys=True)), "016x")


PRESETS = {
    "fig1": dict(ensemble="Spherical", n=32, N=256, model="model1",
                 k_grid=(2, 4, 6, 8, 10, 12, 14, 16, 18, 20), L_grid=(1, 2, 4),
                 algorithms=("l21", "somp", "thresh")),
    "fig2": dict(ensemble="DiracFourier", n=32, N=64, model="model2",
                 k_grid=(2, 4, 6, 8, 10, 12, 14, 16, 18, 20), L_grid=(1, 2, 4),
                 algorithms=("l21", "somp", "thresh")),
    "fig3": dict(ensemble="AlltopGabor", n=29, N=841, model="model2",
                 k_grid=(2, 4, 6, 8, 10, 12, 14, 16), L_grid=(1, 2, 4),
                 algorithms=("l21", "somp")),
}


def preset(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return ExperimentConfig(**{**PRESETS[name], **overrides})


@dataclass(frozen=True)
class TrialRecord:
    k: int
    L: int
    algorithm: str
    trial: int
    success: bool
    relative_error: float
    support_match: bool
    seed: int
    iterations: int = 0
    converged: bool = True

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _coefficient_model(name: str, k: int, rng: np.random.Generator) -> CoefficientModel:
    if name == "model1":
        sigma = np.abs(rng.standard_normal(k))
        sigma = np.maximum(sigma, np.finfo(float).tiny)
        return CoefficientModel(CoefficientVariant.REAL_GAUSSIAN, tuple(sigma))
    variant = {
        "model2": CoefficientVariant.COMPLEX_GAUSSIAN,
        "real_gaussian": CoefficientVariant.REAL_GAUSSIAN,
        "real_spherical": CoefficientVariant.REAL_SPHERICAL,
        "complex_gaussian": CoefficientVariant.COMPLEX_GAUSSIAN,
        "complex_spherical": CoefficientVariant.COMPLEX_SPHERICAL,
    }[name]
    return CoefficientModel.identity(variant, k)


def trial_seed(config: ExperimentConfig, k: int, L: int, trial: int) -> int:
    return stable_seed(config.base_seed, k, L, trial)


@functools.lru_cache(maxsize=8)
def _fixed_matrix(tag: str, n: int, N: Optional[int], seed: int) -> MeasurementMatrix:
    return make_ensemble(tag, n, N, seed)


@functools.lru_cache(maxsize=8)
def _fixed_solver(tag: str, n: int, N: Optional[int], seed: int) -> L21Solver:
    return L21Solver(_fixed_matrix(tag, n, N, seed))


def _matrix_for_trial(config: ExperimentConfig, seed: int):
    """Return ``(matrix, reusable mixed-norm solver or None)`` for one trial."""
    if config.tag.is_random and config.redraw_matrix:
        return make_ensemble(config.tag, config.n, config.N, stable_seed(seed, "matrix")), None
    key = (config.ensemble, config.n, config.N if config.tag.is_random else None, config.matrix_seed)
    return _fixed_matrix(*key), _fixed_solver(*key)


def draw_instance(A, model: str, k: int, L: int, seed: int):
    """Random support (uniform among size-``k`` subsets) and coefficients.

    Returns ``(X, S)`` where ``X`` is the ``N x L`` coefficient array.
    """
    N = A.shape[1]
    rng = keyed_rng(seed, 0)
    S = Support(tuple(int(j) for j in np.sort(rng.choice(N, size=k, replace=False))))
    if k == 0:
        return np.zeros((N, L), dtype=complex), S
    coef = _coefficient_model(model, k, rng)
    X = sample_coefficients(coef, S, N, L, stable_seed(seed, "coefficients"))
    return X.entries, S


def _solve(algorithm, A, Y, k, X_true, config, solver):
    opts = config.solver_options()
    if algorithm == "l21":
        solver = solver or L21Solver(A, opts)
        # Stop once the reference signal is provably not within the success
        # threshold of any minimizer: sgn(X_true) is a subgradient, so every X
        # within relative error t of X_true has
        # ||X||_21 >= ||X_true||_21 - sqrt(k) t ||X_true||_F.
        floor = mixed_norm_21(X_true) - math.sqrt(k) * config.success_threshold * np.linalg.norm(X_true)
        return solver.solve(Y, opts, objective_floor=floor)
    if algorithm == "thresh":
        return p_thresholding(A, Y, k, 2.0, opts)
    if algorithm == "somp":
        return p_somp(A, Y, k, 2.0, opts)
    if algorithm == "l0":
        return l0_oracle(A, Y, k, opts=opts)
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def run_trial(A, k: int, L: int, algorithm: str, seed: int, config: ExperimentConfig,
              trial: int = 0, solver: Optional[L21Solver] = None) -> TrialRecord:
    """One recovery trial; solver exceptions are recorded as failures."""
    A_arr = np.asarray(A.entries if isinstance(A, MeasurementMatrix) else A, dtype=complex)
    X, S = draw_instance(A_arr, config.model, k, L, seed)
    if k == 0:
        return TrialRecord(k, L, algorithm, trial, True, 0.0, True, seed)
    Y = A_arr @ X
    try:
        res = _solve(algorithm, A_arr, Y, k, X, config, solver)
    except Exception:  # numerical failure of any kind counts as an unsuccessful trial
        return TrialRecord(k, L, algorithm, trial, False, math.inf, False, seed, 0, False)
    err = float(np.linalg.norm(res.estimate.entries - X) / np.linalg.norm(X))
    match = res.recovered_support == S
    ok = bool(err <= config.success_threshold and match and not res.failed)
    return TrialRecord(k, L, algorithm, trial, ok, err, bool(match), seed,
                       int(res.iterations), bool(res.converged))


def _run_point(config: ExperimentConfig, k: int, L: int, trial: int) -> list[TrialRecord]:
    seed = trial_seed(config, k, L, trial)
    A, solver = _matrix_for_trial(config, seed)
    return [run_trial(A, k, L, alg, seed, config, trial, solver) for alg in config.algorithms]


def _run_chunk(args) -> list[TrialRecord]:
    config, points = args
    out = []
    for k, L, trial in points:
        out.extend(_run_point(config, k, L, trial))
    return out


@dataclass
class PhaseCurve:
    """Success counts per ``(algorithm, k, L)`` grid point."""

    config: ExperimentConfig
    counts: dict = field(default_factory=dict)  # (algorithm, k, L) -> (successes, trials)
    records: list = field(default_factory=list)

    def rate(self, algorithm: str, k: int, L: int) -> float:
        s, t = self.counts[(algorithm, k, L)]
        return s / t

    def rates(self, algorithm: str, L: int) -> list[float]:
        return [self.rate(algorithm, k, L) for k in self.config.k_grid]

    def rows(self) -> list[list]:
        c = self.config
        out = []
        for alg in c.algorithms:
            for L in c.L_grid:
                for k in c.k_grid:
                    s, t = self.counts[(alg, k, L)]
                    out.append([c.ensemble, c.n, c.n_columns, c.model, alg, k, L, t, s, repr(s / t)])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(self.rows())
        return buf.getvalue()

    def records_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    @classmethod
    def from_csv(cls, text: str, config: Optional[ExperimentConfig] = None) -> "PhaseCurve":
        """Rebuild counts from CSV; the config is reconstructed from the rows if absent."""
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty phase-curve CSV")
        counts = {(r["algorithm"], int(r["k"]), int(r["L"])): (int(r["successes"]), int(r["trials"]))
                  for r in rows}
        if config is None:
            first = rows[0]
            ordered = lambda key, conv: tuple(dict.fromkeys(conv(r[key]) for r in rows))
            config = ExperimentConfig(
                ensemble=first["ensemble"], n=int(first["n"]), N=int(first["N"]),
                model=first["model"], k_grid=tuple(sorted(ordered("k", int))),
                L_grid=tuple(sorted(ordered("L", int))), algorithms=ordered("algorithm", str),
                trials=int(first["trials"]))
        return cls(config, counts)


def phase_curve(config: ExperimentConfig, workers: int = 1, keep_records: bool = False,
                chunk_size: int = 25) -> PhaseCurve:
    """Sweep the whole grid and aggregate success counts.

    ``workers > 1`` distributes chunks of trials over processes; the output is
    identical for any worker count.
    """
    config.validate()
    points = [(k, L, t) for k in config.k_grid for L in config.L_grid for t in range(config.trials)]
    chunks = [(config, points[i:i + chunk_size]) for i in range(0, len(points), chunk_size)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, chunks))
    else:
        results = [_run_chunk(c) for c in chunks]
    records = sorted((r for chunk in results for r in chunk),
                     key=lambda r: (r.algorithm, r.k, r.L, r.trial))
    counts: dict = {}
    for r in records:
        s, t = counts.get((r.algorithm, r.k, r.L), (0, 0))
        counts[(r.algorithm, r.k, r.L)] = (s + int(r.success), t + 1)
    return PhaseCurve(config, counts, records if keep_records else [])


def _sphere_samples(rng: np.random.Generator, shape: tuple, complex_model: bool) -> np.ndarray:
    Z = rng.standard_normal(shape)
    if complex_model:
        Z = Z + 1j * rng.standard_normal(shape)
    return Z / np.linalg.norm(Z, axis=-1, keepdims=True)


def empirical_bernstein_tail(a: Sequence[complex], L: int, u: float, trials: int, seed: int,
                             complex_model: bool = False, chunk: int = 20000) -> float:
    """Frequency of ``||sum_j a_j Z_j||_2 >= u ||a||_2`` with ``Z_j`` uniform on the unit sphere."""
    if u <= 1:
        raise ValueError("u must be > 1")
    a = np.asarray(a, dtype=complex if complex_model or np.iscomplexobj(a) else float)
    thresh = u * np.linalg.norm(a)
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        Z = _sphere_samples(rng, (m, a.size, L), complex_model)
        S = np.einsum("j,mjl->ml", a, Z)
        hits += int(np.count_nonzero(np.linalg.norm(S, axis=1) >= thresh))
        done += m
    return hits / trials


def empirical_al(L: int, trials: int, seed: int) -> tuple[float, float]:
    """Sample mean and standard error of ``||Z||_2`` for ``Z ~ N(0, I_L)``."""
    if trials < 100:
        raise ValueError("use at least 100 trials")
    rng = np.random.default_rng(seed)
    norms = np.linalg.norm(rng.standard_normal((trials, L)), axis=1)
    return float(norms.mean()), float(norms.std(ddof=1) / math.sqrt(trials))


def binomial_se(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)


def validate_l21_bound(A, k: int, L: int, alpha: float, trials: int, seed: int,
                       model: str = "real_gaussian", max_draws: Optional[int] = None,
                       success_threshold: float = 1e-4) -> dict:
    """Empirical mixed-norm failure rate on supports with ``max ||A_S^+ a_l||_2 <= alpha``.

    Supports are drawn uniformly; those violating the norm condition are
    skipped.  Draws stop after ``trials`` qualifying instances or
    ``max_draws`` attempts (default ``20 * trials``).
    """
    from .conditions import RankDeficientError, pinv_column_norms

    A_arr = np.asarray(A.entries if isinstance(A, MeasurementMatrix) else A, dtype=complex)
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}")
    opts = SolverOptions(**_experiment_solver_options())
    solver = L21Solver(A_arr, opts)
    max_draws = max_draws or 20 * trials
    qualifying = failures = draws = 0
    while qualifying < trials and draws < max_draws:
        s = stable_seed(seed, k, L, draws)
        draws += 1
        X, S = draw_instance(A_arr, model, k, L, s)
        try:
            worst = max(t[2] for t in pinv_column_norms(A_arr, S))
        except RankDeficientError:
            continue
        if worst > alpha:
            continue
        qualifying += 1
        res = solver.solve(A_arr @ X)
        err = np.linalg.norm(res.estimate.entries - X) / np.linalg.norm(X)
        if not (err <= success_threshold and res.recovered_support == S):
            failures += 1
    return {"qualifying": qualifying, "draws": draws, "failures": failures,
            "frequency": failures / qualifying if qualifying else math.nan}
