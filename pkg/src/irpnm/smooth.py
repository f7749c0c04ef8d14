"""Separable losses psi and the composite smooth term f(x) = psi(Ax - b)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linop import LinearMap


class SeparableLoss:
    """psi(u) = sum_i phi(u_i) with scalar maps phi, phi', phi''."""

    def value(self, u: np.ndarray) -> float:
        raise NotImplementedError

    def deriv(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def deriv2(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class StudentT(SeparableLoss):
    """phi(u) = log(1 + u^2 / nu). Nonconvex for |u| > sqrt(nu)."""

    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")

    def value(self, u):
        return float(np.sum(np.log1p(u * u / self.nu)))

    def deriv(self, u):
        return 2.0 * u / (self.nu + u * u)

    def deriv2(self, u):
        u2 = u * u
        return 2.0 * (self.nu - u2) / (self.nu + u2) ** 2


@dataclass(frozen=True)
class Quadratic(SeparableLoss):
    """phi(u) = u^2 / 2."""

    def value(self, u):
        return 0.5 * float(u @ u)

    def deriv(self, u):
        return u.copy()

    def deriv2(self, u):
        return np.ones_like(u)


class SmoothTerm:
    """f(x) = psi(Ax - b).

    Most methods accept an optional residual ``u = Ax - b`` so that one outer
    iteration needs a single forward application of ``A``.
    """

    def __init__(self, loss: SeparableLoss, A: LinearMap, b):
        b = np.asarray(b, dtype=float)
        if b.shape != (A.rows,):
            raise ValueError(f"b must have length {A.rows}, got {b.shape}")
        self.loss = loss
        self.A = A
        self.b = b

    @property
    def n(self) -> int:
        return self.A.cols

    @property
    def m(self) -> int:
        return self.A.rows

    def residual(self, x) -> np.ndarray:
        return self.A.apply(x) - self.b

    def value(self, x, u=None) -> tuple[float, np.ndarray]:
        """Return ``(f(x), u)`` with ``u = Ax - b`` for reuse."""
        if u is None:
            u = self.residual(x)
        return self.loss.value(u), u

    def grad(self, x, u=None) -> np.ndarray:
        if u is None:
            u = self.residual(x)
        return self.A.adjoint(self.loss.deriv(u))

    def hess_diag(self, x, u=None) -> np.ndarray:
        """Diagonal of the Hessian of psi at ``Ax - b``; its minimum is lambda_min."""
        if u is None:
            u = self.residual(x)
        return self.loss.deriv2(u)

    def hessvec(self, x, v, u=None) -> np.ndarray:
        return self.A.adjoint(self.hess_diag(x, u) * self.A.apply(v))
