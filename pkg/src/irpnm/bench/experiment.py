"""Run benchmark trials and write per-iteration CSVs, error curves and a JSON summary.

Output layout in ``out_dir``::

    trial{t:03d}_{solver}.csv   one row per outer iteration (RUN_COLUMNS)
    curves.csv                  trial, solver, k, err, r, F  (plot-ready)
    summary.json                averaged Fval / r(x) / time(s) per solver plus per-trial rows
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from ..diagnostics import convergence_report
from ..solver import ROW_COLUMNS, SolverConfig, SolverError, pg_baseline, solve
from .generators import ExperimentSpec, generate

log = logging.getLogger(__name__)

RUN_COLUMNS = ROW_COLUMNS + ["err"]
CURVE_COLUMNS = ["trial", "solver", "k", "err", "r", "F"]
TIMING_COLUMNS = ("time",)
SUMMARY_KEYS = ("Fval", "r(x)", "time(s)")
SOLVERS = {"irpnm": solve, "pg": pg_baseline}


@dataclass
class TrialResult:
    trial: int
    seed: int
    solver: str
    status: str
    Fval: float
    resid: float
    time: float
    iterations: int
    estimated_order: float | None
    unit_step_count: int
    stationarity: str
    min_hess: float
    rows: list
    errors: list
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status in ("ResidualConverged", "DirectionConverged")

    def summary_row(self) -> dict:
        return {
            "trial": self.trial, "seed": self.seed, "status": self.status,
            "Fval": self.Fval, "r(x)": self.resid, "time(s)": self.time,
            "iterations": self.iterations, "estimated_order": self.estimated_order,
            "unit_step_count": self.unit_step_count, "stationarity": self.stationarity,
            "min_hess": self.min_hess, "message": self.message,
        }


def solver_config(spec: ExperimentSpec) -> SolverConfig:
    overrides = dict(spec.solver_overrides)
    overrides.setdefault("eps0", spec.eps0_value)
    return SolverConfig(**overrides)


def run_trial(spec: ExperimentSpec, trial: int) -> list[TrialResult]:
    seed = spec.seed + trial
    inst = generate(spec.with_seed(seed))
    cfg = solver_config(spec)
    results = []
    for name in spec.solvers:
        try:
            x, rec = SOLVERS[name](inst.problem, cfg, inst.x_init)
        except SolverError as exc:
            log.error("trial %d solver %s aborted: %s", trial, name, exc)
            results.append(TrialResult(trial, seed, name, "Aborted", math.nan, math.nan,
                                       math.nan, 0, None, 0, "Inconclusive", math.nan, [], [],
                                       str(exc)))
            continue
        rep = convergence_report(rec, inst.problem)
        results.append(TrialResult(
            trial=trial, seed=seed, solver=name, status=rec.status, Fval=rec.final.F,
            resid=rec.final.r, time=rec.wall_time, iterations=rec.iterations,
            estimated_order=rep.estimated_order, unit_step_count=rep.unit_step_count,
            stationarity=rep.stationarity.kind, min_hess=rep.stationarity.margin,
            rows=rec.as_dicts(), errors=rep.errors.tolist(), message=rec.message))
    return results


def _mean(values):
    vals = [v for v in values if v is not None and np.isfinite(v)]
    return float(np.mean(vals)) if vals else None


def summarize(spec: ExperimentSpec, results: list[TrialResult]) -> dict:
    summary = {"spec": _jsonable(asdict(spec)), "solvers": {}}
    for name in spec.solvers:
        rows = [r for r in results if r.solver == name]
        summary["solvers"][name] = {
            "Fval": _mean(r.Fval for r in rows),
            "r(x)": _mean(r.resid for r in rows),
            "time(s)": _mean(r.time for r in rows),
            "mean_order": _mean(r.estimated_order for r in rows),
            "all_converged": all(r.converged for r in rows),
            "trials": [r.summary_row() for r in rows],
        }
    summary["all_converged"] = all(r.converged for r in results)
    return summary


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def write_run_csv(path: Path, result: TrialResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RUN_COLUMNS)
        w.writeheader()
        errors = result.errors + [math.nan] * (len(result.rows) - len(result.errors))
        for row, err in zip(result.rows, errors):
            w.writerow({**row, "err": err})


def run_experiment(spec: ExperimentSpec, out_dir, jobs: int = 1) -> dict:
    """Run all trials and solvers, write outputs, return the summary dict."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        per_trial = list(pool.map(lambda t: run_trial(spec, t), range(spec.trials)))
    results = [r for trial in per_trial for r in trial]

    for res in results:
        write_run_csv(out / f"trial{res.trial:03d}_{res.solver}.csv", res)
    with open(out / "curves.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CURVE_COLUMNS)
        for res in results:
            for row, err in zip(res.rows, res.errors):
                w.writerow([res.trial, res.solver, row["k"], err, row["r"], row["F"]])
    summary = summarize(spec, results)
    with open(out / "summary.json", "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2)
    return summary


def read_run_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    cols = {}
    for name in rows[0] if rows else RUN_COLUMNS:
        if name == "chose_yk":
            cols[name] = np.array([r[name] == "True" for r in rows])
        else:
            cols[name] = np.array([float(r[name]) for r in rows])
    return cols


def spec_from_mapping(base: ExperimentSpec, mapping: dict) -> ExperimentSpec:
    """Apply a flat mapping (from a config file) onto ``base``.

    Keys of ``solver`` (a nested mapping) become SolverConfig overrides.
    """
    mapping = dict(mapping)
    overrides = dict(base.solver_overrides)
    overrides.update(mapping.pop("solver", {}) or {})
    if "solvers" in mapping:
        mapping["solvers"] = tuple(mapping["solvers"])
    unknown = set(mapping) - set(ExperimentSpec.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown experiment keys: {sorted(unknown)}")
    return replace(base, **mapping, solver_overrides=overrides)
