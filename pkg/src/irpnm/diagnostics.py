"""Post-hoc checks on solver trajectories: convergence order, unit steps, stationarity type."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Problem
from .solver import RunRecord

NOISE_FLOOR = 1e-14

STRONG = "Strong"
NON_STRONG = "NonStrong"
INCONCLUSIVE = "Inconclusive"


def errors_to_reference(iterates, x_ref=None) -> np.ndarray:
    """||x^k - x_ref|| for every stored iterate; ``x_ref`` defaults to the last one."""
    if x_ref is None:
        x_ref = iterates[-1]
    return np.array([np.linalg.norm(x - x_ref) for x in iterates])


def estimate_order(errors, window: int = 4, floor: float = NOISE_FLOOR) -> float | None:
    """Slope p of the least-squares fit log e_{k+1} = p log e_k + c.

    Uses the last ``window`` consecutive pairs among errors above ``floor``.
    Returns None (inconclusive) when there are too few usable pairs or the
    tail is not strictly decreasing.
    """
    if window < 2:
        raise ValueError("window must be at least 2")
    e = np.asarray(errors, dtype=float)
    usable = np.flatnonzero(e > floor)
    if usable.size < window + 1:
        return None
    # the fit needs a contiguous run ending at the last usable error
    tail = usable[-(window + 1):]
    if np.any(np.diff(tail) != 1):
        return None
    seq = e[tail]
    if np.any(np.diff(seq) >= 0):
        return None
    p, _ = np.polyfit(np.log(seq[:-1]), np.log(seq[1:]), 1)
    return float(p)


def unit_step_tail(alphas) -> int | None:
    """Start index K of the trailing run with alpha_k = 1, or None if the last step was damped.

    NaN entries (iterations without a line search, e.g. the final row) are skipped.
    """
    a = np.asarray(alphas, dtype=float)
    idx = np.flatnonzero(~np.isnan(a))
    if idx.size == 0 or a[idx[-1]] != 1.0:
        return None
    start = idx[-1]
    for i in idx[::-1]:
        if a[i] != 1.0:
            break
        start = i
    return int(start)


@dataclass(frozen=True)
class Stationarity:
    kind: str
    margin: float

    @property
    def strong(self) -> bool:
        return self.kind == STRONG


def classify_from_margin(min_hess: float, tol: float = 1e-10) -> Stationarity:
    if not np.isfinite(min_hess):
        return Stationarity(INCONCLUSIVE, float(min_hess))
    return Stationarity(STRONG if min_hess >= -tol else NON_STRONG, float(min_hess))


def classify_stationarity(problem: Problem, x, tol: float = 1e-10) -> Stationarity:
    """Strong when psi'' >= -tol at every residual entry of an (approximately) stationary x."""
    D = problem.smooth.hess_diag(x)
    return classify_from_margin(float(D.min()), tol)


@dataclass(frozen=True)
class ConvergenceReport:
    errors: np.ndarray
    estimated_order: float | None
    unit_step_start: int | None
    unit_step_count: int
    stationarity: Stationarity

    @property
    def order_conclusive(self) -> bool:
        return self.estimated_order is not None

    def as_dict(self) -> dict:
        return {
            "estimated_order": self.estimated_order,
            "unit_step_start": self.unit_step_start,
            "unit_step_count": self.unit_step_count,
            "stationarity": self.stationarity.kind,
            "min_hess": self.stationarity.margin,
        }


def convergence_report(record: RunRecord, problem: Problem | None = None, *,
                       window: int = 4, tol: float = 1e-10) -> ConvergenceReport:
    """Diagnose a finished run. Needs ``record.iterates`` for the error sequence."""
    if record.iterates:
        errors = errors_to_reference(record.iterates)
        if problem is not None:
            stat = classify_stationarity(problem, record.iterates[-1], tol)
        else:
            stat = classify_from_margin(record.final.min_D, tol)
    else:
        errors = np.array([])
        stat = classify_from_margin(record.final.min_D, tol)
    return report_from_columns(errors, record.column("alpha"), stat, window)


def report_from_columns(errors, alphas, stat: Stationarity, window: int = 4) -> ConvergenceReport:
    alphas = np.asarray(alphas, dtype=float)
    start = unit_step_tail(alphas)
    if start is None:
        count = 0
    else:
        count = int(np.count_nonzero(~np.isnan(alphas[start:])))
    return ConvergenceReport(errors=np.asarray(errors, dtype=float),
                             estimated_order=estimate_order(errors, window),
                             unit_step_start=start, unit_step_count=count,
                             stationarity=stat)
