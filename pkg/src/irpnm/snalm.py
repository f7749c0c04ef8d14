"""Dual semismooth Newton augmented Lagrangian solver for the model subproblem.

The subproblem min_y Theta_k(y) is rewritten as

    min_{y,z} 0.5||z||^2 - <b_k, y> + h(y)   s.t.  A_k y - z = 0,
    h = g + (mu_k/2)||.||^2,

and the augmented Lagrangian method is run on its dual in (xi, zeta) with
multiplier ``mult``. Eliminating zeta leaves

    Phi(xi) = 0.5||xi||^2 + e_{1/sigma} h*(b_k - A_k^T xi - mult/sigma),

whose gradient is xi - A_k prox_{sigma h}(sigma(b_k - A_k^T xi) - mult).
Phi is strongly convex and semismooth, so its stationarity equation is solved
by a semismooth Newton method with CG on the Newton system. The primal
iterate is y = -mult.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import ModelState, subproblem_residual, theta_eval

log = logging.getLogger(__name__)

SIGMA_MIN, SIGMA_MAX = 1e-6, 1e8


@dataclass
class SnalmState:
    xi: np.ndarray
    zeta: np.ndarray
    mult: np.ndarray
    sigma: float = 1.0
    j: int = 0


@dataclass(frozen=True)
class RhoPositive:
    """Stop on r_k(y) <= eta * min(r, r^(1+tau))."""

    eta: float
    tau: float
    resid: float

    @property
    def bound(self) -> float:
        return self.eta * min(self.resid, self.resid ** (1.0 + self.tau))


@dataclass(frozen=True)
class RhoZero:
    """Stop on ||omega|| <= eta * r with omega a subgradient of Theta_k at y."""

    eta: float
    resid: float

    @property
    def bound(self) -> float:
        return self.eta * self.resid


@dataclass
class InnerReport:
    y: np.ndarray
    alm_iters: int
    newton_iters: int
    cg_iters: int
    certificate: float
    bound: float
    theta_decrease: float
    converged: bool
    # r_k(y) and ||omega|| at the returned point, whichever criterion is active
    rk: float = np.nan
    omega_norm: float = np.nan
    xi: np.ndarray = field(default=None, repr=False)
    sigma: float = 1.0


@dataclass(frozen=True)
class SnalmOptions:
    sigma0: float = 1.0
    sigma_factor: float = 5.0
    max_alm: int = 100
    max_newton: int = 50
    max_backtracks: int = 50
    armijo: float = 1e-4
    cg_rtol: float = 1e-2
    cg_maxiter: int = 200


def conjugate_gradient(apply_op: Callable[[np.ndarray], np.ndarray], rhs: np.ndarray,
                       rtol: float, maxiter: int) -> tuple[np.ndarray, int, bool]:
    """Plain CG from zero. Returns ``(x, iterations, breakdown)``.

    ``breakdown`` is set when a nonpositive curvature direction is met.
    """
    x = np.zeros_like(rhs)
    r = rhs.copy()
    p = r.copy()
    rr = float(r @ r)
    stop = (rtol * np.sqrt(rr)) ** 2
    it = 0
    while it < maxiter and rr > stop:
        Ap = apply_op(p)
        pAp = float(p @ Ap)
        if not pAp > 0.0:
            return x, it, True
        a = rr / pAp
        x += a * p
        r -= a * Ap
        rr_new = float(r @ r)
        p = r + (rr_new / rr) * p
        rr = rr_new
        it += 1
    return x, it, False


def _inner_point(state: ModelState, sigma: float, mult: np.ndarray, xi: np.ndarray):
    v = sigma * (state.bk - state.Ak.adjoint(xi)) - mult
    p = state.problem.reg.prox_tikhonov(sigma, state.mu, v)
    return v, p


def phi_value(state: ModelState, sigma: float, mult: np.ndarray, xi: np.ndarray) -> float:
    """Phi_j(xi) evaluated through the prox of h, never through h*."""
    _, p = _inner_point(state, sigma, mult, xi)
    return _phi_from(state, sigma, mult, xi, p)


def phi_grad(state: ModelState, sigma: float, mult: np.ndarray, xi: np.ndarray) -> np.ndarray:
    _, p = _inner_point(state, sigma, mult, xi)
    return xi - state.Ak.apply(p)


def semismooth_newton(state: ModelState, sigma: float, mult: np.ndarray, xi0: np.ndarray,
                      tol: float, opts: SnalmOptions = SnalmOptions(),
                      trace: list | None = None) -> tuple[np.ndarray, int, int]:
    """Drive ``||grad Phi_j(xi)|| <= tol``. Returns ``(xi, newton_iters, cg_iters)``.

    Steps solve (I + sigma A_k M A_k^T) d = -grad Phi with M from the generalized
    Jacobian of prox_{sigma h}; an Armijo backtracking on Phi guards each step.
    When ``trace`` is a list, accepted Phi values are appended to it.
    """
    reg, Ak, mu = state.problem.reg, state.Ak, state.mu
    xi = xi0.copy()
    n_newton = n_cg = 0
    v, p = _inner_point(state, sigma, mult, xi)
    phi = _phi_from(state, sigma, mult, xi, p)
    grad = xi - Ak.apply(p)
    gnorm = float(np.linalg.norm(grad))
    if trace is not None:
        trace.append(phi)
    stalled, g_ref = 0, gnorm
    while gnorm > tol and n_newton < opts.max_newton:
        M = reg.prox_tikhonov_jacobian(sigma, mu, v)

        def hess(d, shift=0.0):
            return (1.0 + shift) * d + sigma * Ak.apply(M(Ak.adjoint(d)))

        direction, it, broke = conjugate_gradient(hess, -grad, opts.cg_rtol, opts.cg_maxiter)
        n_cg += it
        shift = 1e-8
        while broke and shift < 1.0:
            log.debug("CG breakdown; regularizing Newton system by %g", shift)
            direction, it, broke = conjugate_gradient(lambda d: hess(d, shift), -grad,
                                                      opts.cg_rtol, opts.cg_maxiter)
            n_cg += it
            shift *= 100.0
        slope = float(grad @ direction)
        newton_dir = not broke and slope < 0.0
        if not newton_dir:
            direction, slope = -grad, -gnorm**2
        n_newton += 1

        accepted = _backtrack(state, sigma, mult, xi, phi, gnorm, direction, slope, opts)
        if accepted is None and newton_dir:
            # Newton stagnation: fall back to a gradient step
            accepted = _backtrack(state, sigma, mult, xi, phi, gnorm, -grad, -gnorm**2, opts)
        if accepted is None:
            log.debug("semismooth Newton stalled at ||grad||=%.3e (tol %.3e)", gnorm, tol)
            break
        xi, v, p, phi = accepted
        grad = xi - Ak.apply(p)
        gnorm = float(np.linalg.norm(grad))
        if trace is not None:
            trace.append(phi)
        # rounding floor of grad Phi reached: no 10% progress over 5 steps
        if gnorm < 0.9 * g_ref:
            stalled, g_ref = 0, gnorm
        else:
            stalled += 1
            if stalled >= 5:
                break
    return xi, n_newton, n_cg


def _phi_terms(state, sigma, mult, xi, p):
    # <p, v>/sigma expanded so that no term carries a factor sigma
    w = state.bk - state.Ak.adjoint(xi)
    h = state.problem.reg.value(p) + 0.5 * state.mu * float(p @ p)
    return (0.5 * float(xi @ xi), float(p @ w), -float(p @ mult) / sigma,
            -float(p @ p) / (2.0 * sigma), -h)


def _phi_from(state, sigma, mult, xi, p):
    return float(sum(_phi_terms(state, sigma, mult, xi, p)))


def _phi_noise(state, sigma, mult, xi, p):
    terms = _phi_terms(state, sigma, mult, xi, p)
    return float(sum(terms)), 64.0 * np.finfo(float).eps * max(1.0, sum(abs(t) for t in terms))


def _backtrack(state, sigma, mult, xi, phi, gnorm, direction, slope, opts):
    """Armijo search on Phi. Returns ``(xi, v, p, phi)`` or None.

    Once the predicted decrease of Phi falls below its rounding level, Phi
    comparisons carry no information and a step is accepted on a decrease of
    ||grad Phi|| instead.
    """
    Ak = state.Ak
    t = 1.0
    for _ in range(opts.max_backtracks):
        trial = xi + t * direction
        v, p = _inner_point(state, sigma, mult, trial)
        phi_t, noise = _phi_noise(state, sigma, mult, trial, p)
        if opts.armijo * t * abs(slope) > noise:
            if phi_t <= phi + opts.armijo * t * slope:
                return trial, v, p, phi_t
        elif np.linalg.norm(trial - Ak.apply(p)) <= (1.0 - opts.armijo * t) * gnorm:
            return trial, v, p, phi_t
        t *= 0.5
    return None


def update_penalty(sigma: float, primal_infeas: float, dual_infeas: float,
                   factor: float = 5.0) -> float:
    """Balance the two infeasibilities by scaling sigma; result clipped to [1e-6, 1e8]."""
    if primal_infeas > 10.0 * dual_infeas:
        sigma *= factor
    elif dual_infeas > 10.0 * primal_infeas:
        sigma /= factor
    return float(min(max(sigma, SIGMA_MIN), SIGMA_MAX))


def solve_subproblem(state: ModelState, criterion, opts: SnalmOptions = SnalmOptions(),
                     xi0: np.ndarray | None = None, sigma0: float | None = None) -> InnerReport:
    """Find y^k with Theta_k(y) <= Theta_k(x^k) and the active certificate under its bound.

    ``xi0`` and ``sigma0`` warm-start the dual variable and the penalty.
    """
    if not state.resid > 0:
        raise ValueError("subproblem requested at a stationary point")
    Ak, bk, mu, reg = state.Ak, state.bk, state.mu, state.problem.reg
    bound = criterion.bound
    theta_x = state.Fx
    rho_zero = isinstance(criterion, RhoZero)

    if xi0 is None or xi0.shape != (Ak.rows,):
        xi0 = Ak.apply(state.x)
    s = SnalmState(xi=xi0.copy(), zeta=np.zeros_like(state.x), mult=-state.x.copy(),
                   sigma=opts.sigma0 if sigma0 is None else sigma0)
    n_newton = n_cg = 0
    best = None
    bk_scale = 1.0 + float(np.linalg.norm(bk))

    for j in range(opts.max_alm):
        s.j = j
        tol = max(0.1 * bound / (1.0 + j), 1e-12)
        s.xi, it_n, it_cg = semismooth_newton(state, s.sigma, s.mult, s.xi, tol, opts)
        n_newton += it_n
        n_cg += it_cg

        v, p = _inner_point(state, s.sigma, s.mult, s.xi)
        s.zeta = reg.prox_conjugate(1.0 / s.sigma, mu, v / s.sigma)
        infeas_vec = Ak.adjoint(s.xi) + s.zeta - bk
        s.mult = s.mult + s.sigma * infeas_vec
        y = -s.mult

        theta_y = theta_eval(state, y)
        rk, _ = subproblem_residual(state, y)
        # zeta lies in the subdifferential of g + (mu/2)||.||^2 at y, so it already
        # carries mu*y; the mu part of G_k must not be added a second time
        omega = Ak.adjoint(Ak.apply(y)) - bk + s.zeta
        omega_norm = float(np.linalg.norm(omega))
        cert = omega_norm if rho_zero else rk
        decrease = theta_x - theta_y
        report = InnerReport(y=y, alm_iters=j + 1, newton_iters=n_newton, cg_iters=n_cg,
                             certificate=cert, bound=bound, theta_decrease=decrease,
                             converged=False, rk=rk, omega_norm=omega_norm,
                             xi=s.xi.copy(), sigma=s.sigma)
        if decrease >= 0.0 and cert <= bound:
            report.converged = True
            return report
        if decrease >= 0.0 and (best is None or cert < best.certificate):
            best = report

        primal = float(np.linalg.norm(infeas_vec)) / bk_scale
        dual = float(np.linalg.norm(s.xi - Ak.apply(y))) / (1.0 + float(np.linalg.norm(s.xi)))
        s.sigma = update_penalty(s.sigma, primal, dual, opts.sigma_factor)

    log.warning("SNALM hit %d iterations without meeting the inexactness criterion", opts.max_alm)
    return best if best is not None else report
