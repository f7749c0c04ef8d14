"""Convex regularizers g with exact proximal mappings.

Besides ``prox`` each regularizer returns an element of the generalized
(Clarke) Jacobian of its prox, used by the semismooth Newton solver. At
kinks the zero (inactive) element is chosen.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .linop import LinearMap

JacobianOp = Callable[[np.ndarray], np.ndarray]


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


class Regularizer:
    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def prox(self, gamma: float, v: np.ndarray) -> np.ndarray:
        """argmin_z 0.5 * ||z - v||^2 / gamma + g(z)."""
        raise NotImplementedError

    def prox_jacobian(self, gamma: float, v: np.ndarray) -> JacobianOp:
        raise NotImplementedError

    def prox_tikhonov(self, gamma: float, mu: float, v: np.ndarray) -> np.ndarray:
        """Prox of ``g + (mu/2)||.||^2`` with parameter ``gamma``."""
        _check_gamma(gamma)
        c = 1.0 + gamma * mu
        return self.prox(gamma / c, np.asarray(v, dtype=float) / c)

    def prox_tikhonov_jacobian(self, gamma: float, mu: float, v: np.ndarray) -> JacobianOp:
        c = 1.0 + gamma * mu
        inner = self.prox_jacobian(gamma / c, np.asarray(v, dtype=float) / c)
        return lambda w: inner(w) / c

    def prox_conjugate(self, gamma: float, mu: float, v: np.ndarray) -> np.ndarray:
        """Prox of the conjugate of ``g + (mu/2)||.||^2``, via Moreau decomposition.

        P_gamma h*(v) = v - gamma * P_{1/gamma} h(v / gamma).
        """
        _check_gamma(gamma)
        v = np.asarray(v, dtype=float)
        return v - gamma * self.prox_tikhonov(1.0 / gamma, mu, v / gamma)


def _check_gamma(gamma):
    if not gamma > 0:
        raise ValueError(f"prox parameter must be positive, got {gamma}")


class L1(Regularizer):
    """g(x) = lam * ||x||_1."""

    def __init__(self, lam: float):
        if not lam > 0:
            raise ValueError("lam must be positive")
        self.lam = float(lam)

    def value(self, x):
        return self.lam * float(np.abs(x).sum())

    def prox(self, gamma, v):
        _check_gamma(gamma)
        return soft_threshold(np.asarray(v, dtype=float), gamma * self.lam)

    def prox_jacobian(self, gamma, v):
        mask = (np.abs(v) > gamma * self.lam).astype(float)
        return lambda w: mask * w


class GroupL2(Regularizer):
    """g(x) = lam * sum_i ||x_{J_i}|| over a partition J_1..J_l of the coordinates."""

    def __init__(self, lam: float, groups: Sequence[Sequence[int]], n: int | None = None):
        if not lam > 0:
            raise ValueError("lam must be positive")
        self.lam = float(lam)
        groups = [np.asarray(g, dtype=np.intp) for g in groups]
        if any(g.size == 0 for g in groups):
            raise ValueError("groups must be non-empty")
        order = np.concatenate(groups)
        n = order.size if n is None else n
        if order.size != n or not np.array_equal(np.sort(order), np.arange(n)):
            raise ValueError("groups must be disjoint and cover {0, ..., n-1} exactly")
        self.groups = groups
        self.n = n
        self._order = order
        self._sizes = np.array([g.size for g in groups])
        self._starts = np.concatenate([[0], np.cumsum(self._sizes)[:-1]])

    @classmethod
    def contiguous(cls, lam: float, n: int, group_size: int) -> "GroupL2":
        if n % group_size:
            raise ValueError(f"n={n} is not divisible by group size {group_size}")
        return cls(lam, np.arange(n).reshape(-1, group_size), n)

    def group_norms(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.sqrt(np.add.reduceat(x[self._order] ** 2, self._starts))

    def value(self, x):
        return self.lam * float(self.group_norms(x).sum())

    def prox(self, gamma, v):
        _check_gamma(gamma)
        v = np.asarray(v, dtype=float)
        t = gamma * self.lam
        norms = self.group_norms(v)
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(norms > t, 1.0 - t / norms, 0.0)
        out = np.empty_like(v)
        out[self._order] = v[self._order] * np.repeat(factor, self._sizes)
        return out

    def prox_jacobian(self, gamma, v):
        v = np.asarray(v, dtype=float)
        t = gamma * self.lam
        norms = self.group_norms(v)
        active = norms > t
        safe = np.where(active, norms, 1.0)
        diag = np.repeat(np.where(active, 1.0 - t / safe, 0.0), self._sizes)
        rank1 = np.repeat(np.where(active, t / safe**3, 0.0), self._sizes)
        vo = v[self._order]

        def apply(w):
            wo = w[self._order]
            inner = np.add.reduceat(vo * wo, self._starts)
            out = np.empty_like(w)
            out[self._order] = diag * wo + rank1 * vo * np.repeat(inner, self._sizes)
            return out

        return apply


class AnalysisL1(Regularizer):
    """g(x) = lam * ||Bx||_1 with B orthogonal (B^T B = I)."""

    def __init__(self, lam: float, B: LinearMap):
        if not lam > 0:
            raise ValueError("lam must be positive")
        if B.rows != B.cols:
            raise ValueError("B must be square (orthogonal)")
        self.lam = float(lam)
        self.B = B

    def value(self, x):
        return self.lam * float(np.abs(self.B.apply(x)).sum())

    def prox(self, gamma, v):
        _check_gamma(gamma)
        return self.B.adjoint(soft_threshold(self.B.apply(v), gamma * self.lam))

    def prox_jacobian(self, gamma, v):
        mask = (np.abs(self.B.apply(v)) > gamma * self.lam).astype(float)
        return lambda w: self.B.adjoint(mask * self.B.apply(w))


class BoxIndicator(Regularizer):
    """Indicator of {lower <= x <= upper}. Infinite bounds give g = 0."""

    def __init__(self, lower=-np.inf, upper=np.inf):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if np.any(self.lower > self.upper):
            raise ValueError("lower must not exceed upper")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.all((x >= self.lower) & (x <= self.upper))
        return 0.0 if inside else np.inf

    def prox(self, gamma, v):
        _check_gamma(gamma)
        return np.clip(np.asarray(v, dtype=float), self.lower, self.upper)

    def prox_jacobian(self, gamma, v):
        mask = ((v > self.lower) & (v < self.upper)).astype(float)
        return lambda w: mask * w


def zero_regularizer() -> BoxIndicator:
    """g = 0, written as an unbounded box."""
    return BoxIndicator()
