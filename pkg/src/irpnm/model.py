"""Composite problem F = f + g and the per-iteration quadratic model.

At an iterate x^k the model uses the regularized Hessian

    G_k = A^T diag(D + Lam_k) A + mu_k I,
    D = psi''(Ax^k - b),  Lam_k = a1 * max(0, -min D),  mu_k = a2 * r(x^k)^rho,

which is written as A_k^T A_k + mu_k I with A_k = diag(sqrt(D + Lam_k)) A.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linop import DiagLeftScaled
from .regularizer import Regularizer
from .smooth import SmoothTerm


class Problem:
    """min_x F(x) = psi(Ax - b) + g(x)."""

    def __init__(self, smooth: SmoothTerm, reg: Regularizer):
        self.smooth = smooth
        self.reg = reg

    @property
    def n(self) -> int:
        return self.smooth.n

    def objective(self, x) -> float:
        gx = self.reg.value(x)
        if not np.isfinite(gx):
            return np.inf
        return self.smooth.value(x)[0] + gx

    def residual(self, x, grad=None) -> tuple[float, np.ndarray]:
        """KKT residual ``r(x) = ||x - prox_g(x - grad f(x))||`` and its vector."""
        if grad is None:
            grad = self.smooth.grad(x)
        R = x - self.reg.prox(1.0, x - grad)
        return float(np.linalg.norm(R)), R


@dataclass(frozen=True)
class ModelState:
    problem: Problem
    x: np.ndarray
    fx: float
    gx: float
    gradfx: np.ndarray
    u: np.ndarray
    D: np.ndarray
    lam_shift: float
    mu: float
    resid: float
    Ak: DiagLeftScaled
    bk: np.ndarray

    @property
    def Fx(self) -> float:
        return self.fx + self.gx

    @property
    def Ak_scale(self) -> np.ndarray:
        return self.Ak.scale


def build_model(problem: Problem, x, *, a1: float, a2: float, rho: float,
                resid: float | None = None, grad=None, u=None) -> ModelState:
    """Assemble the quadratic model at ``x``.

    ``resid``, ``grad`` and ``u`` may be passed in when the caller already has them.
    """
    x = np.asarray(x, dtype=float)
    sm = problem.smooth
    if u is None:
        u = sm.residual(x)
    fx = sm.loss.value(u)
    if grad is None:
        grad = sm.A.adjoint(sm.loss.deriv(u))
    if resid is None:
        resid, _ = problem.residual(x, grad)
    if resid <= 0.0:
        raise ValueError("r(x) = 0: x is stationary and no model should be built")
    mu = a2 * (resid**rho if rho > 0 else 1.0)
    if not mu > 0:
        raise ValueError(f"model regularization mu={mu} must be positive")
    D = sm.loss.deriv2(u)
    lam_shift = a1 * max(0.0, -float(D.min()))
    # with a1 >= 1 the shifted diagonal is nonnegative up to rounding
    scale = np.sqrt(np.maximum(D + lam_shift, 0.0))
    Ak = DiagLeftScaled(sm.A, scale)
    bk = Ak.adjoint(scale * (u + sm.b)) + mu * x - grad
    return ModelState(problem=problem, x=x, fx=fx, gx=problem.reg.value(x), gradfx=grad,
                      u=u, D=D, lam_shift=lam_shift, mu=mu, resid=float(resid), Ak=Ak, bk=bk)


def apply_G(state: ModelState, v) -> np.ndarray:
    """G_k v = A^T((D + Lam_k) * Av) + mu_k v."""
    Ak = state.Ak
    return Ak.adjoint(Ak.apply(v)) + state.mu * v


def theta_eval(state: ModelState, y) -> float:
    d = y - state.x
    return state.fx + float(state.gradfx @ d) + 0.5 * float(d @ apply_G(state, d)) \
        + state.problem.reg.value(y)


def ell_eval(state: ModelState, y) -> float:
    """Partial linearization f(x^k) + <grad f(x^k), y - x^k> + g(y)."""
    return state.fx + float(state.gradfx @ (y - state.x)) + state.problem.reg.value(y)


def subproblem_residual(state: ModelState, y) -> tuple[float, np.ndarray]:
    """KKT residual of the model: R_k(y) = y - prox_g(y - grad f(x^k) - G_k(y - x^k))."""
    step = state.gradfx + apply_G(state, y - state.x)
    R = y - state.problem.reg.prox(1.0, y - step)
    return float(np.linalg.norm(R)), R


def operator_norm_G(state: ModelState, iters: int = 20, inflate: float = 1.1, seed: int = 0) -> float:
    """Power-iteration estimate of ||G_k||, inflated to bias it upward. Diagnostics only."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(state.x.size)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = apply_G(state, v)
        est = float(np.linalg.norm(w))
        if est == 0.0:
            break
        v = w / est
    return inflate * est
