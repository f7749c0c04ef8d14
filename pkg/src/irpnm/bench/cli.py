"""Command line entry point: ``irpnm-bench {gen,run,diagnose}``.

Values from a ``--config`` YAML file override command-line flags. A nested
``solver:`` mapping in the file becomes SolverConfig overrides.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import yaml

from ..diagnostics import classify_from_margin, report_from_columns
from .experiment import read_run_csv, run_experiment, spec_from_mapping
from .generators import FAMILIES, ExperimentSpec, generate


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=FAMILIES, default="l1_studentt")
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--d", type=float, default=20.0)
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--c-lambda", type=float, default=0.1)
    p.add_argument("--image-side", type=int, default=64)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", type=Path, default=None,
                   help="YAML file whose keys override the flags")


def spec_from_args(args) -> ExperimentSpec:
    spec = ExperimentSpec(family=args.family, n=args.n, m=args.m, s=args.s, d=args.d,
                          nu=args.nu, lam=args.lam, c_lambda=args.c_lambda,
                          image_side=args.image_side, trials=args.trials, seed=args.seed)
    extra = {}
    if getattr(args, "solver", None):
        extra["solvers"] = tuple(dict.fromkeys(args.solver))
    if getattr(args, "eps0", None) is not None:
        extra["eps0"] = args.eps0
    if getattr(args, "rho", None) is not None:
        extra["solver_overrides"] = {"rho": args.rho}
    spec = replace(spec, **extra)
    if args.config is not None:
        with open(args.config) as fh:
            spec = spec_from_mapping(spec, yaml.safe_load(fh) or {})
    return spec


def cmd_gen(args) -> int:
    spec = spec_from_args(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for t in range(spec.trials):
        inst = generate(spec.with_seed(spec.seed + t))
        sm = inst.problem.smooth
        path = out / f"instance_{spec.family}_seed{inst.seed}.npz"
        np.savez(path, b=sm.b, x_init=inst.x_init, x_true=inst.x_true, lam=inst.lam)
        print(path)
    return 0


def cmd_run(args) -> int:
    spec = spec_from_args(args)
    summary = run_experiment(spec, args.out_dir, jobs=args.jobs)
    for name, s in summary["solvers"].items():
        print(f"{name}: Fval={s['Fval']} r(x)={s['r(x)']} time(s)={s['time(s)']} "
              f"converged={s['all_converged']}")
    return 0 if summary["all_converged"] else 1


def cmd_diagnose(args) -> int:
    cols = read_run_csv(args.csv)
    errors = cols["err"] if "err" in cols else np.array([])
    stat = classify_from_margin(float(cols["min_D"][-1]), args.tol)
    rep = report_from_columns(errors, cols["alpha"], stat, args.window)
    print(json.dumps(rep.as_dict(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irpnm-bench")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write seeded instances as .npz")
    _add_spec_flags(gen)
    gen.add_argument("--out-dir", default="instances")
    gen.set_defaults(func=cmd_gen)

    run = sub.add_parser("run", help="solve seeded instances and write CSV/JSON")
    _add_spec_flags(run)
    run.add_argument("--rho", type=float, default=None)
    run.add_argument("--eps0", type=float, default=None,
                     help="default 1e-5, or 1e-4 for image_restore")
    run.add_argument("--solver", choices=("irpnm", "pg"), action="append")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--out-dir", default="results")
    run.set_defaults(func=cmd_run)

    diag = sub.add_parser("diagnose", help="convergence report from a run CSV")
    diag.add_argument("csv", type=Path)
    diag.add_argument("--window", type=int, default=4)
    diag.add_argument("--tol", type=float, default=1e-10)
    diag.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
