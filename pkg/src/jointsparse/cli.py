"""Command line front end.

Subcommands: ``generate``, ``analyze``, ``solve``, ``bound``, ``experiment``
and ``plot``.  Exit status is 0 on success, 2 for usage or validation
errors and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__, bounds, conditions, montecarlo
from .core import CoefficientModel, CoefficientVariant, Support, sample_coefficients, stable_seed
from .ensembles import EnsembleTag, make_ensemble
from .io import load_matrix_csv, save_matrix_csv, signal_from_json, signal_to_json
from .plotting import phase_curve_svg
from .solvers import SolverOptions, run_algorithm

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

_ENSEMBLES = {
    "spherical": EnsembleTag.SPHERICAL,
    "gaussian": EnsembleTag.GAUSSIAN,
    "bernoulli": EnsembleTag.BERNOULLI,
    "dirac-fourier": EnsembleTag.DIRAC_FOURIER,
    "alltop": EnsembleTag.ALLTOP_GABOR,
}
_VARIANTS = {v.value: v for v in CoefficientVariant}


class UsageError(Exception):
    """Invalid arguments detected after parsing."""


@dataclass
class RunManifest:
    command_line: list
    config_digest: str
    base_seed: Optional[int]
    artifact_version: str = __version__
    outputs: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# generate -----------------------------------------------------------------

def cmd_generate(args) -> int:
    tag = _ENSEMBLES[args.ensemble]
    if tag.is_random and args.N is None:
        raise UsageError(f"--N is required for the {args.ensemble} ensemble")
    A = make_ensemble(tag, args.n, args.N, args.seed)
    out = Path(args.out)
    A.to_csv(out)
    meta = {"ensemble": tag.value, "n": A.n, "N": A.N,
            "seed": args.seed if tag.is_random else None,
            "coherence": conditions.coherence(A) if A.N > 1 else None}
    outputs = [str(out), str(out.with_suffix(".json"))]
    if args.k is not None:
        if not 0 <= args.k <= A.N:
            raise UsageError("--k must lie in [0, N]")
        rng = np.random.default_rng(stable_seed(args.seed, "support"))
        S = Support.from_iterable(int(j) for j in rng.choice(A.N, size=args.k, replace=False))
        model = CoefficientModel.identity(_VARIANTS[args.model], args.k)
        X = sample_coefficients(model, S, A.N, args.L, stable_seed(args.seed, "coefficients"))
        sig_path = out.with_name(out.stem + "_signal.json")
        y_path = out.with_name(out.stem + "_measurements.csv")
        sig_path.write_text(signal_to_json(X) + "\n", encoding="utf-8")
        save_matrix_csv(A.entries @ X.entries, y_path)
        meta.update({"k": args.k, "L": args.L, "model": args.model, "support": list(S.indices)})
        outputs += [str(sig_path), str(y_path)]
    out.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                        encoding="utf-8")
    for p in outputs:
        print(p)
    return EXIT_OK


# analyze ------------------------------------------------------------------

def _parse_support(text: Optional[str]):
    if text is None:
        return None
    try:
        return Support.from_iterable(_int_list(text))
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"invalid --support: {exc}") from None


def cmd_analyze(args) -> int:
    A = load_matrix_csv(args.matrix)
    S = _parse_support(args.support)
    if S is not None and S.indices and S.indices[-1] >= A.shape[1]:
        raise UsageError(f"support index out of range for N = {A.shape[1]}")
    report = conditions.analyze(A, S)
    d = report.to_dict()
    if args.rip_k is not None:
        d["rip_constant"] = conditions.rip_constant_exact(A, args.rip_k, budget=args.budget)
    _emit(json.dumps(d, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


# solve --------------------------------------------------------------------

def cmd_solve(args) -> int:
    A = load_matrix_csv(args.matrix)
    Y = load_matrix_csv(args.measurements)
    if args.algorithm != "l21" and args.k is None:
        raise UsageError(f"--k is required for {args.algorithm}")
    opts = SolverOptions(max_iterations=args.max_iterations, tolerance=args.tolerance,
                         penalty=args.penalty, adaptive=args.adaptive)
    res = run_algorithm(args.algorithm, A, Y, args.k or 0, opts)
    d = res.to_dict()
    if args.truth:
        X = signal_from_json(Path(args.truth).read_text(encoding="utf-8")).entries
        err = float(np.linalg.norm(res.estimate.entries - X) / max(np.linalg.norm(X), 1e-300))
        truth_S = Support(tuple(int(j) for j in np.flatnonzero(np.linalg.norm(X, axis=1) > 0)))
        d["relative_error"] = err
        d["support_match"] = res.recovered_support == truth_S
    _emit(json.dumps(d, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_NUMERIC if res.failed else EXIT_OK


# bound --------------------------------------------------------------------

def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"--theorem {args.theorem} needs {flags}")


def cmd_bound(args) -> int:
    t = args.theorem
    if t == "t4":
        _need(args, "N", "L", "alpha")
        d = bounds.l21_failure_bound(args.N, args.L, args.alpha, args.complex).to_dict()
    elif t == "t5":
        _need(args, "k", "L")
        gamma, prob = bounds.thm5_threshold_and_probability(args.k, args.L)
        d = {"name": "gaussian_coefficients", "gamma": gamma, "success_probability": prob,
             "A_L": bounds.a_l_constant(args.L), "parameters": {"k": args.k, "L": args.L}}
    elif t == "t7":
        _need(args, "k", "N", "mu", "opnorm_sq", "delta", "epsilon")
        d = bounds.tropp_random_support_bound(args.k, args.N, args.mu, args.opnorm_sq,
                                              args.delta, args.epsilon).to_dict()
    elif t == "t8":
        _need(args, "k", "N", "mu", "opnorm_sq", "delta", "epsilon")
        holds = bounds.tropp_gram_condition(args.k, args.N, args.mu, args.opnorm_sq,
                                            args.delta, args.epsilon)
        d = {"name": "random_support_gram", "condition_holds": holds,
             "failure_probability": args.epsilon if holds else 1.0,
             "parameters": {"k": args.k, "N": args.N, "mu": args.mu, "opnorm_sq": args.opnorm_sq,
                            "delta": args.delta, "epsilon": args.epsilon}}
    elif t == "t9":
        _need(args, "N", "L", "theta")
        d = bounds.thresholding_failure_bound(args.N, args.L, args.theta, args.complex).to_dict()
    elif t == "t10":
        _need(args, "N", "k", "L", "eps")
        d = bounds.somp_failure_bound(args.N, args.k, args.L, args.eps, args.complex).to_dict()
        if args.mu2 is not None and args.delta is not None:
            d["condition_holds"] = bounds.somp_condition(args.mu2, args.delta, args.eps)
    else:  # bernstein
        _need(args, "u", "L")
        d = {"name": "bernstein", "tail": bounds.bernstein_tail(args.u, args.L, args.complex),
             "parameters": {"u": args.u, "L": args.L, "complex_model": args.complex}}
    _emit(json.dumps(d, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


# experiment / plot ----------------------------------------------------------

def _resolve_config(args) -> montecarlo.ExperimentConfig:
    base: dict = {}
    if args.preset:
        if args.preset not in montecarlo.PRESETS:
            raise UsageError(f"unknown preset {args.preset!r}")
        base.update(montecarlo.PRESETS[args.preset])
    if args.config:
        base.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
    overrides = {
        "ensemble": _ENSEMBLES[args.ensemble].value if args.ensemble else None,
        "n": args.n, "N": args.N, "model": args.model, "k_grid": args.k_grid,
        "L_grid": args.L_grid, "algorithms": args.algorithms, "trials": args.trials,
        "base_seed": args.base_seed,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if args.fixed_matrix:
        base["redraw_matrix"] = False
    try:
        return montecarlo.ExperimentConfig.from_dict(base).validate()
    except TypeError as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


def cmd_experiment(args) -> int:
    config = _resolve_config(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = args.name or args.preset or "experiment"
    curve = montecarlo.phase_curve(config, workers=args.workers, keep_records=args.records)
    paths = [out / f"{name}.csv", out / f"{name}.svg"]
    paths[0].write_text(curve.to_csv(), encoding="utf-8")
    paths[1].write_text(phase_curve_svg(curve), encoding="utf-8")
    if args.records:
        paths.append(out / f"{name}.jsonl")
        paths[-1].write_text(curve.records_jsonl(), encoding="utf-8")
    (out / f"{name}.config.json").write_text(
        json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths.append(out / f"{name}.config.json")
    manifest = RunManifest(command_line=list(args.argv), config_digest=config.digest(),
                           base_seed=config.base_seed, outputs=[p.name for p in paths])
    (out / f"{name}.manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_plot(args) -> int:
    curve = montecarlo.PhaseCurve.from_csv(Path(args.csv).read_text(encoding="utf-8"))
    _emit(phase_curve_svg(curve), args.out)
    return EXIT_OK


# parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jointsparse", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a measurement matrix (and optionally an instance)")
    g.add_argument("--ensemble", required=True, choices=sorted(_ENSEMBLES))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--N", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="matrix.csv")
    g.add_argument("--k", type=int, help="also draw a random k-sparse instance")
    g.add_argument("--L", type=int, default=1)
    g.add_argument("--model", choices=sorted(_VARIANTS), default="ComplexGaussian")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="deterministic recovery conditions")
    a.add_argument("--matrix", required=True)
    a.add_argument("--support")
    a.add_argument("--rip-k", type=int)
    a.add_argument("--budget", type=int, default=conditions.DEFAULT_BUDGET)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("solve", help="recover a jointly sparse signal")
    s.add_argument("--matrix", required=True)
    s.add_argument("--measurements", required=True)
    s.add_argument("--algorithm", choices=("l21", "thresh", "somp", "l0"), default="l21")
    s.add_argument("--k", type=int)
    s.add_argument("--truth", help="reference signal JSON for error reporting")
    s.add_argument("--max-iterations", type=int, default=20000)
    s.add_argument("--tolerance", type=float, default=1e-8)
    s.add_argument("--penalty", type=float, default=1.0)
    s.add_argument("--adaptive", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bound", help="evaluate a closed-form bound")
    b.add_argument("--theorem", required=True,
                   choices=("t4", "t5", "t7", "t8", "t9", "t10", "bernstein"))
    for flag, typ in (("N", int), ("L", int), ("k", int), ("alpha", float), ("theta", float),
                      ("eps", float), ("mu", float), ("mu2", float), ("delta", float),
                      ("epsilon", float), ("opnorm-sq", float), ("u", float)):
        b.add_argument(f"--{flag}", type=typ)
    b.add_argument("--complex", action="store_true", help="complex coefficient model")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bound)

    e = sub.add_parser("experiment", help="Monte Carlo phase-transition sweep")
    e.add_argument("--preset", choices=sorted(montecarlo.PRESETS))
    e.add_argument("--config", help="JSON file with ExperimentConfig fields")
    e.add_argument("--ensemble", choices=sorted(_ENSEMBLES))
    e.add_argument("--n", type=int)
    e.add_argument("--N", type=int)
    e.add_argument("--model", choices=montecarlo.MODELS)
    e.add_argument("--k-grid", type=_int_list)
    e.add_argument("--L-grid", type=_int_list)
    e.add_argument("--algorithms", type=_str_list)
    e.add_argument("--trials", type=int)
    e.add_argument("--base-seed", type=int)
    e.add_argument("--fixed-matrix", action="store_true",
                   help="reuse one matrix for all trials of a random ensemble")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--records", action="store_true", help="also write per-trial JSON lines")
    e.add_argument("--name")
    e.add_argument("--out-dir", default=".")
    e.set_defaults(func=cmd_experiment)

    pl = sub.add_parser("plot", help="render a phase-curve CSV as SVG")
    pl.add_argument("--csv", required=True)
    pl.add_argument("--out")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        return args.func(args)
    except (UsageError, montecarlo.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (np.linalg.LinAlgError, conditions.BudgetExceededError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
