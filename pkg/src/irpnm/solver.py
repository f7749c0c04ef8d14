"""Inexact regularized proximal Newton outer loop and a proximal-gradient baseline."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .model import Problem, ModelState, build_model, operator_norm_G
from .snalm import RhoPositive, RhoZero, SnalmOptions, solve_subproblem

log = logging.getLogger(__name__)

RESIDUAL_CONVERGED = "ResidualConverged"
DIRECTION_CONVERGED = "DirectionConverged"
MAX_ITER = "MaxIter"
INNER_FAILURE = "InnerFailure"


class SolverError(RuntimeError):
    """Raised when a run must be aborted (non-finite objective, runaway line search)."""


@dataclass(frozen=True)
class SolverConfig:
    eps0: float = 1e-5
    a1: float = 1.0
    # None: min(sigma_ls, 1e-2 / max(1, r(x0))), frozen at solve start
    a2: float | None = None
    rho: float = 0.45
    # None: tau = rho
    tau: float | None = None
    eta: float = 0.9
    beta: float = 0.1
    sigma_ls: float = 1e-4
    max_outer: int = 1000
    max_inner: int = 100
    max_backtracks: int = 60
    seed: int = 0
    # power-iteration estimate of ||G_k|| per iteration, diagnostics only
    estimate_G_norm: bool = True
    keep_iterates: bool = True

    def __post_init__(self):
        checks = [
            (self.eps0 > 0, "eps0 must be positive"),
            (self.a1 >= 1, "a1 must be >= 1"),
            (self.a2 is None or self.a2 > 0, "a2 must be positive"),
            (0 <= self.rho < 1, "rho must lie in [0, 1)"),
            (self.tau is None or self.tau >= self.rho, "tau must be >= rho"),
            (0 < self.eta < 1, "eta must lie in (0, 1)"),
            (0 < self.beta < 1, "beta must lie in (0, 1)"),
            (0 < self.sigma_ls < 0.5, "sigma_ls must lie in (0, 1/2)"),
            (self.max_outer >= 1 and self.max_inner >= 1, "iteration caps must be positive"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    @property
    def tau_value(self) -> float:
        return self.rho if self.tau is None else self.tau

    def resolve_a2(self, r0: float) -> float:
        if self.a2 is not None:
            return self.a2
        return min(self.sigma_ls, 1e-2 / max(1.0, r0))


@dataclass
class IterRow:
    k: int
    F: float
    r: float
    mu: float = np.nan
    lam_shift: float = np.nan
    min_D: float = np.nan
    dnorm: float = np.nan
    alpha: float = np.nan
    m: int = -1
    chose_yk: bool = False
    alm_iters: int = 0
    newton_iters: int = 0
    cg_iters: int = 0
    certificate: float = np.nan
    bound: float = np.nan
    slack: float = np.nan
    theta_decrease: float = np.nan
    rk: float = np.nan
    omega_norm: float = np.nan
    G_norm_est: float = np.nan
    time: float = np.nan


ROW_COLUMNS = [f.name for f in fields(IterRow)]


@dataclass
class RunRecord:
    solver: str
    rows: list = field(default_factory=list)
    status: str = MAX_ITER
    a2: float = np.nan
    wall_time: float = 0.0
    iterates: list = field(default_factory=list, repr=False)
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status in (RESIDUAL_CONVERGED, DIRECTION_CONVERGED)

    @property
    def iterations(self) -> int:
        return max(len(self.rows) - 1, 0)

    @property
    def final(self) -> IterRow:
        return self.rows[-1]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def as_dicts(self) -> list[dict]:
        return [asdict(r) for r in self.rows]


def line_search(problem: Problem, state: ModelState, y, d, F_y: float | None = None, *,
                beta: float = 0.1, sigma_ls: float = 1e-4, max_backtracks: int = 60):
    """Armijo search along ``d = y - x^k`` and choice of the next iterate.

    Finds the least m >= 0 with F(x) - F(x + beta^m d) >= sigma_ls beta^m mu ||d||^2.
    The next iterate is y when F(y) < F(x + alpha d), else x + alpha d.

    Returns ``(m, alpha, x_next, F_next, chose_y)``.
    """
    Fx = state.Fx
    dd = float(d @ d)
    alpha = 1.0
    for m in range(max_backtracks + 1):
        trial = state.x + alpha * d
        F_trial = problem.objective(trial)
        if Fx - F_trial >= sigma_ls * alpha * state.mu * dd:
            break
        alpha *= beta
    else:
        raise SolverError(f"line search exceeded {max_backtracks} backtracks "
                          f"(F={Fx:.6e}, ||d||={np.sqrt(dd):.3e}, mu={state.mu:.3e})")
    if m == 0:
        return 0, 1.0, y, F_trial, True
    if F_y is None:
        F_y = problem.objective(y)
    if F_y < F_trial:
        return m, alpha, y, F_y, True
    return m, alpha, trial, F_trial, False


def solve(problem: Problem, cfg: SolverConfig = SolverConfig(), x0=None,
          snalm_opts: SnalmOptions | None = None) -> tuple[np.ndarray, RunRecord]:
    """Run the inexact regularized proximal Newton method from ``x0``."""
    t_start = time.perf_counter()
    x = np.zeros(problem.n) if x0 is None else np.array(x0, dtype=float)
    sm = problem.smooth
    if snalm_opts is None:
        snalm_opts = SnalmOptions(max_alm=cfg.max_inner)
    rec = RunRecord(solver="irpnm")

    u = sm.residual(x)
    grad = sm.A.adjoint(sm.loss.deriv(u))
    r, _ = problem.residual(x, grad)
    F = sm.loss.value(u) + problem.reg.value(x)
    if not np.isfinite(F):
        raise SolverError(f"F(x0) is not finite ({F})")
    a2 = cfg.resolve_a2(r)
    rec.a2 = a2
    xi_warm = None

    for k in range(cfg.max_outer + 1):
        row = IterRow(k=k, F=F, r=r, min_D=float(sm.loss.deriv2(u).min()))
        rec.rows.append(row)
        if cfg.keep_iterates:
            rec.iterates.append(x.copy())
        if r <= cfg.eps0:
            rec.status = RESIDUAL_CONVERGED
            break
        if k == cfg.max_outer:
            rec.status = MAX_ITER
            break

        state = build_model(problem, x, a1=cfg.a1, a2=a2, rho=cfg.rho, resid=r, grad=grad, u=u)
        row.mu, row.lam_shift = state.mu, state.lam_shift
        if cfg.rho > 0:
            crit = RhoPositive(cfg.eta, cfg.tau_value, r)
        else:
            crit = RhoZero(cfg.eta, r)
        rep = solve_subproblem(state, crit, snalm_opts, xi0=xi_warm)
        xi_warm = rep.xi
        row.alm_iters, row.newton_iters, row.cg_iters = rep.alm_iters, rep.newton_iters, rep.cg_iters
        row.certificate, row.bound = rep.certificate, rep.bound
        row.slack = rep.bound - rep.certificate
        row.theta_decrease, row.rk, row.omega_norm = rep.theta_decrease, rep.rk, rep.omega_norm
        if cfg.estimate_G_norm:
            row.G_norm_est = operator_norm_G(state, seed=cfg.seed + k)
        if not rep.converged:
            rec.status = INNER_FAILURE
            rec.message = (f"inner solver failed at k={k}: certificate {rep.certificate:.3e} "
                           f"> bound {rep.bound:.3e}")
            log.warning(rec.message)
            break

        y = rep.y
        d = y - x
        row.dnorm = float(np.linalg.norm(d))
        if row.dnorm <= cfg.eps0:
            rec.status = DIRECTION_CONVERGED
            break

        m, alpha, x_next, F_next, chose_y = line_search(
            problem, state, y, d, beta=cfg.beta, sigma_ls=cfg.sigma_ls,
            max_backtracks=cfg.max_backtracks)
        row.m, row.alpha, row.chose_yk = m, alpha, chose_y
        if not np.isfinite(F_next):
            raise SolverError(f"non-finite objective at k={k}")
        row.time = time.perf_counter() - t_start
        log.debug("k=%d F=%.10e r=%.3e mu=%.2e |d|=%.2e alpha=%g alm=%d newton=%d cg=%d",
                  k, F, r, state.mu, row.dnorm, alpha, rep.alm_iters, rep.newton_iters,
                  rep.cg_iters)

        x, F = x_next, F_next
        u = sm.residual(x)
        grad = sm.A.adjoint(sm.loss.deriv(u))
        r, _ = problem.residual(x, grad)

    rec.wall_time = time.perf_counter() - t_start
    rec.final.time = rec.wall_time
    return x, rec


def pg_baseline(problem: Problem, cfg: SolverConfig = SolverConfig(), x0=None, *,
                max_iter: int = 20000, memory: int = 5, armijo: float = 1e-4
                ) -> tuple[np.ndarray, RunRecord]:
    """Proximal gradient with Barzilai-Borwein steps and a nonmonotone Armijo safeguard.

    Stops on the same residual test r(x) <= eps0. The ``alpha`` column holds the
    accepted step size.
    """
    t_start = time.perf_counter()
    sm, reg = problem.smooth, problem.reg
    x = np.zeros(problem.n) if x0 is None else np.array(x0, dtype=float)
    rec = RunRecord(solver="pg")
    u = sm.residual(x)
    F = sm.loss.value(u) + reg.value(x)
    if not np.isfinite(F):
        raise SolverError(f"F(x0) is not finite ({F})")
    grad = sm.A.adjoint(sm.loss.deriv(u))
    history = [F]
    step = 1.0

    for k in range(max_iter + 1):
        r, _ = problem.residual(x, grad)
        row = IterRow(k=k, F=F, r=r, min_D=float(sm.loss.deriv2(u).min()))
        rec.rows.append(row)
        if cfg.keep_iterates:
            rec.iterates.append(x.copy())
        if r <= cfg.eps0:
            rec.status = RESIDUAL_CONVERGED
            break
        if k == max_iter:
            rec.status = MAX_ITER
            break
        ref = max(history[-memory:])
        for _ in range(cfg.max_backtracks):
            x_new = reg.prox(step, x - step * grad)
            s = x_new - x
            u_new = sm.residual(x_new)
            F_new = sm.loss.value(u_new) + reg.value(x_new)
            if F_new <= ref - armijo / (2.0 * step) * float(s @ s):
                break
            step *= 0.5
        else:
            raise SolverError(f"proximal-gradient backtracking failed at k={k}")
        if not np.isfinite(F_new):
            raise SolverError(f"non-finite objective at k={k}")
        grad_new = sm.A.adjoint(sm.loss.deriv(u_new))
        row.alpha, row.dnorm = step, float(np.linalg.norm(s))
        yv = grad_new - grad
        sy = float(s @ yv)
        step = float(s @ s) / sy if sy > 0 else 2.0 * step
        step = min(max(step, 1e-10), 1e10)
        x, u, F, grad = x_new, u_new, F_new, grad_new
        history.append(F)
        row.time = time.perf_counter() - t_start

    rec.wall_time = time.perf_counter() - t_start
    rec.final.time = rec.wall_time
    return x, rec
