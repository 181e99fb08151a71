"""Command line entry point: ``qspectra <subcommand> ...``.

Every subcommand writes a CSV (to ``--out`` or stdout) and, when an output
path is known, a JSON summary next to it with the config echo, a version
string and per-phase wall-clock times. Exit status: 0 success, 1 config
error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import subprocess
import sys
import time
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path

import numpy as np

from qspectra import __version__
from qspectra.bai_bound import bai_rhs, make_constants
from qspectra.experiments import (
    RATE_COLUMNS,
    ConfigError,
    ExperimentConfig,
    covariance_spectrum,
    lambda_max_check,
    rate_sweep,
    reflection_check,
    variance_scaling,
)
from qspectra.fixed_point import BranchError, DegeneratePointError
from qspectra.mp_law import MPLaw, QuadratureError
from qspectra.sampling import EntryDistribution, preprocess, replication_rng, sample_matrix
from qspectra.spectra import ConvergenceError, NotHermitianError, esd

NUMERICAL_ERRORS = (ConvergenceError, QuadratureError, NotHermitianError, BranchError, DegeneratePointError, FloatingPointError)


def version_string() -> str:
    """``git describe`` output for the source tree, else the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"v{__version__}-g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"v{__version__}"


def fmt(value) -> str:
    # round-trip exact, locale independent
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


class Timer:
    def __init__(self):
        self.phases = {}

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.phases[name] = self.phases.get(name, 0.0) + time.perf_counter() - t0


def emit(columns, rows, out, summary: dict):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    text = buf.getvalue()
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        summary = dict(summary, version=version_string(), csv=str(path))
        path.with_suffix(".json").write_text(json.dumps(summary, indent=2, default=fmt) + "\n")
    else:
        sys.stdout.write(text)


def _load_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        data = ExperimentConfig.from_json(args.config).to_dict()
    for key in ("out", "workers", "seed", "replications", "y"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if getattr(args, "distribution", None):
        data["distribution"] = args.distribution
    if getattr(args, "n_grid", None):
        data["n_grid"] = args.n_grid
    return ExperimentConfig.from_dict(data)


# --------------------------------------------------------------- commands


def cmd_rate_sweep(args) -> None:
    cfg = _load_config(args)
    timer = Timer()
    with timer.phase("sweep"):
        report = rate_sweep(cfg)
    rows = [asdict(r) for r in report.rows]
    summary = {
        "command": "rate-sweep",
        "config": cfg.to_dict(),
        "v_by_n": {str(n): cfg.v_for(n) for n in cfg.n_grid},
        "slope_mean_ks": report.slope_mean_ks,
        "slope_pooled_ks": report.slope_pooled_ks,
        "ordering_violations": report.ordering_violations,
        "timing_seconds": timer.phases,
    }
    emit(RATE_COLUMNS, rows, cfg.out, summary)


def cmd_variance(args) -> None:
    cfg = _load_config(args)
    timer = Timer()
    with timer.phase("variance"):
        report = variance_scaling(cfg, complex(args.u, args.v))
    rows = [asdict(r) for r in report.rows]
    summary = {
        "command": "variance",
        "config": cfg.to_dict(),
        "z": [args.u, args.v],
        "slope_re": report.slope_re,
        "slope_im": report.slope_im,
        "timing_seconds": timer.phases,
    }
    emit(["n", "p", "v", "var_re", "var_im", "low_confidence"], rows, cfg.out, summary)


def cmd_lambda_max(args) -> None:
    cfg = _load_config(args)
    timer = Timer()
    with timer.phase("lambda_max"):
        rows = [asdict(r) for r in lambda_max_check(cfg, args.margin)]
    summary = {"command": "lambda-max", "config": cfg.to_dict(), "margin": args.margin, "timing_seconds": timer.phases}
    emit(["n", "p", "max_lambda", "threshold", "exceedances"], rows, cfg.out, summary)


def cmd_reflection(args) -> None:
    if args.p <= args.n:
        raise ConfigError(f"reflection needs p > n, got p={args.p}, n={args.n}")
    dist = EntryDistribution(args.distribution)
    timer = Timer()
    rows = []
    with timer.phase("reflection"):
        for draw in range(args.draws):
            X = sample_matrix(args.p, args.n, dist, replication_rng(args.seed, draw, args.n))
            rows.append(dict(draw=draw, **asdict(reflection_check(X))))
    columns = ["draw", "p", "n", "multiset_deviation", "zero_count", "expected_zero_count", "identity_deviation", "norm_identity_gap"]
    summary = {"command": "reflection", "config": vars_clean(args), "timing_seconds": timer.phases}
    emit(columns, rows, args.out, summary)


def cmd_bai_bound(args) -> None:
    dist = EntryDistribution(args.distribution)
    p = int(round(args.y * args.n))
    if p < 1:
        raise ConfigError(f"p = round(y n) is zero for y={args.y}, n={args.n}")
    v = args.v if args.v is not None else args.n**-0.4
    if not v > 0:
        raise ConfigError(f"v must be positive, got {v}")
    timer = Timer()
    with timer.phase("sample"):
        X = sample_matrix(p, args.n, dist, replication_rng(args.seed, 0, args.n))
        if not args.no_preprocess:
            X, _ = preprocess(X, args.n, dist)
    with timer.phase("eigen"):
        spec = covariance_spectrum(X)
    law = MPLaw(p / args.n)
    with timer.phase("bound"):
        rep = bai_rhs(esd(spec), law, v, make_constants(law.b))
    row = dict(n=args.n, p=p, y_p=p / args.n, **asdict(rep), holds=rep.holds)
    columns = ["n", "p", "y_p", "v", "term_stieltjes", "term_tail", "term_smoothing", "prefactor", "total", "observed_ks", "holds"]
    summary = {"command": "bai-bound", "config": vars_clean(args), "report": asdict(rep), "timing_seconds": timer.phases}
    emit(columns, [row], args.out, summary)


def cmd_mp_eval(args) -> None:
    law = MPLaw(args.y)
    timer = Timer()
    rows = []
    with timer.phase("evaluate"):
        for x in args.x:
            row = dict(x=x, density=law.density(x), cdf=law.cdf(x))
            if args.v is not None:
                s = law.stieltjes(complex(x, args.v))
                row.update(stieltjes_re=s.real, stieltjes_im=s.imag)
            rows.append(row)
    columns = ["x", "density", "cdf"] + (["stieltjes_re", "stieltjes_im"] if args.v is not None else [])
    summary = {"command": "mp-eval", "config": vars_clean(args), "timing_seconds": timer.phases}
    emit(columns, rows, args.out, summary)


def vars_clean(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qspectra", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment_args(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", help="CSV output path (summary goes to the .json sibling)")
        sp.add_argument("--workers", type=int, help="replication worker processes")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--replications", type=int)
        sp.add_argument("--y", type=float)
        sp.add_argument("--distribution", choices=["q_gaussian", "q_rademacher", "q_bounded_mix"])
        sp.add_argument("--n-grid", dest="n_grid", type=int, nargs="+")

    sp = sub.add_parser("rate-sweep", help="Kolmogorov distances to the MP law across n")
    experiment_args(sp)
    sp.set_defaults(func=cmd_rate_sweep)

    sp = sub.add_parser("variance", help="variance of s_p(z) across replications")
    experiment_args(sp)
    sp.add_argument("--u", type=float, default=0.0)
    sp.add_argument("--v", type=float, default=1.0)
    sp.set_defaults(func=cmd_variance)

    sp = sub.add_parser("lambda-max", help="largest eigenvalue against the MP upper edge")
    experiment_args(sp)
    sp.add_argument("--margin", type=float, default=0.3)
    sp.set_defaults(func=cmd_lambda_max)

    sp = sub.add_parser("reflection", help="p > n spectra of X X^* versus X^* X")
    sp.add_argument("--p", type=int, default=6)
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--draws", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--distribution", default="q_gaussian", choices=["q_gaussian", "q_rademacher", "q_bounded_mix"])
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_reflection)

    sp = sub.add_parser("bai-bound", help="smoothing-inequality terms for one sampled ESD")
    sp.add_argument("--y", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--v", type=float, help="imaginary offset (default n^(-2/5))")
    sp.add_argument("--distribution", default="q_gaussian", choices=["q_gaussian", "q_rademacher", "q_bounded_mix"])
    sp.add_argument("--no-preprocess", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bai_bound)

    sp = sub.add_parser("mp-eval", help="MP density, CDF and Stieltjes transform at points")
    sp.add_argument("--y", type=float, required=True)
    sp.add_argument("--x", type=float, nargs="+", required=True)
    sp.add_argument("--v", type=float, help="also evaluate the Stieltjes transform at x + iv")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_mp_eval)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        args.func(args)
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
