"""Seeded instance generators for the three benchmark families.

All randomness comes from a Philox counter-based generator so that a seed
reproduces the same instance on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from ..linop import (CircularConvolution2D, DenseMap, HaarWavelet2D, SubsampledDCT,
                     gaussian_kernel)
from ..model import Problem
from ..regularizer import AnalysisL1, GroupL2, L1
from ..smooth import Quadratic, SmoothTerm, StudentT

FAMILIES = ("l1_studentt", "group_studentt", "image_restore")


@dataclass(frozen=True)
class ExperimentSpec:
    family: str = "l1_studentt"
    n: int = 4096
    # None: n // 8
    m: int | None = None
    # sparsity (l1) or number of nonzero groups (group); None: family default
    s: int | None = None
    d: float = 20.0
    nu: float | None = None
    lam: float | None = None
    c_lambda: float = 0.1
    noise_dof: float | None = None
    noise_scale: float | None = None
    group_size: int = 16
    image_side: int = 64
    blur_std: float = 4.0
    blur_size: int = 9
    wavelet_level: int = 4
    trials: int = 1
    seed: int = 0
    solvers: tuple = ("irpnm",)
    eps0: float | None = None
    solver_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.family == "image_restore":
            side = self.image_side
            if side <= 0 or side & (side - 1):
                raise ValueError("image side must be a power of two")
        else:
            if self.m_value > self.n:
                raise ValueError("m must not exceed n")
            if self.family == "group_studentt" and self.n % self.group_size:
                raise ValueError("n must be divisible by the group size")
        if self.trials < 1:
            raise ValueError("trials must be positive")

    @property
    def m_value(self) -> int:
        return self.n // 8 if self.m is None else self.m

    @property
    def eps0_value(self) -> float:
        if self.eps0 is not None:
            return self.eps0
        return 1e-4 if self.family == "image_restore" else 1e-5

    def with_seed(self, seed: int) -> "ExperimentSpec":
        return replace(self, seed=seed)


@dataclass
class Instance:
    problem: Problem
    x_init: np.ndarray
    x_true: np.ndarray
    lam: float
    family: str
    seed: int


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _signal_values(rng, count, d):
    signs = rng.choice([-1.0, 1.0], size=count)
    return signs * 10.0 ** (d * rng.uniform(0.0, 1.0, size=count) / 20.0)


def _dct_operator(rng, n, m):
    return SubsampledDCT(n, np.sort(rng.choice(n, size=m, replace=False)))


def gen_l1_studentt(spec: ExperimentSpec, rng: np.random.Generator | None = None) -> Instance:
    """Sparse signal, random cosine measurements, Student-t noise, l1 penalty."""
    rng = make_rng(spec.seed) if rng is None else rng
    n, m = spec.n, spec.m_value
    s = n // 40 if spec.s is None else spec.s
    nu = 0.25 if spec.nu is None else spec.nu
    dof = 4.0 if spec.noise_dof is None else spec.noise_dof
    scale = 0.1 if spec.noise_scale is None else spec.noise_scale

    x_true = np.zeros(n)
    support = rng.choice(n, size=s, replace=False)
    x_true[support] = _signal_values(rng, s, spec.d)
    A = _dct_operator(rng, n, m)
    b = A.apply(x_true) + scale * rng.standard_t(dof, size=m)
    smooth = SmoothTerm(StudentT(nu), A, b)
    lam = spec.lam
    if lam is None:
        lam = spec.c_lambda * float(np.abs(smooth.grad(np.zeros(n))).max())
    return Instance(Problem(smooth, L1(lam)), A.adjoint(b), x_true, lam, spec.family, spec.seed)


def gen_group_studentt(spec: ExperimentSpec, rng: np.random.Generator | None = None) -> Instance:
    """Group-sparse signal over contiguous groups, group-l2 penalty."""
    rng = make_rng(spec.seed) if rng is None else rng
    n, m, size = spec.n, spec.m_value, spec.group_size
    n_groups = n // size
    s = 16 if spec.s is None else spec.s
    if s > n_groups:
        raise ValueError(f"s={s} exceeds the number of groups {n_groups}")
    nu = 0.2 if spec.nu is None else spec.nu
    dof = 5.0 if spec.noise_dof is None else spec.noise_dof
    scale = 0.1 if spec.noise_scale is None else spec.noise_scale

    x_true = np.zeros(n)
    active = rng.choice(n_groups, size=s, replace=False)
    idx = (active[:, None] * size + np.arange(size)).ravel()
    x_true[idx] = _signal_values(rng, idx.size, spec.d)
    A = _dct_operator(rng, n, m)
    b = A.apply(x_true) + scale * rng.standard_t(dof, size=m)
    smooth = SmoothTerm(StudentT(nu), A, b)
    lam = spec.lam
    if lam is None:
        lam = spec.c_lambda * float(np.linalg.norm(smooth.grad(np.zeros(n))))
    reg = GroupL2.contiguous(lam, n, size)
    return Instance(Problem(smooth, reg), A.adjoint(b), x_true, lam, spec.family, spec.seed)


def load_test_image(side: int = 64) -> np.ndarray:
    """Bundled 64x64 grayscale test image (values in [0, 255]), block-averaged to ``side``."""
    with resources.files("irpnm.data").joinpath("cameraman64.npy").open("rb") as fh:
        img = np.load(fh)
    if side == img.shape[0]:
        return img.copy()
    if side > img.shape[0] or img.shape[0] % side:
        raise ValueError(f"cannot produce a {side}x{side} image from the bundled 64x64 one")
    f = img.shape[0] // side
    return img.reshape(side, f, side, f).mean(axis=(1, 3))


def gen_image_restore(spec: ExperimentSpec, rng: np.random.Generator | None = None) -> Instance:
    """Gaussian-blurred image with Cauchy-type noise, Haar-analysis l1 penalty."""
    rng = make_rng(spec.seed) if rng is None else rng
    side = spec.image_side
    nu = 1.0 if spec.nu is None else spec.nu
    dof = 1.0 if spec.noise_dof is None else spec.noise_dof
    scale = 1e-3 if spec.noise_scale is None else spec.noise_scale
    lam = 1e-2 if spec.lam is None else spec.lam

    x_true = load_test_image(side).ravel()
    A = CircularConvolution2D(gaussian_kernel(spec.blur_size, spec.blur_std), side)
    B = HaarWavelet2D(side, spec.wavelet_level)
    b = A.apply(x_true) + scale * rng.standard_t(dof, size=side * side)
    problem = Problem(SmoothTerm(StudentT(nu), A, b), AnalysisL1(lam, B))
    return Instance(problem, b.copy(), x_true, lam, spec.family, spec.seed)


def gen_lasso(seed: int, m: int = 50, n: int = 200, s: int = 10,
              c_lambda: float = 0.1) -> Instance:
    """Small dense lasso used as a convex reference problem: Gaussian A, l1 penalty."""
    rng = make_rng(seed)
    A = rng.standard_normal((m, n)) / np.sqrt(m)
    x_true = np.zeros(n)
    x_true[rng.choice(n, size=s, replace=False)] = rng.standard_normal(s)
    b = A @ x_true + 0.01 * rng.standard_normal(m)
    lam = c_lambda * float(np.abs(A.T @ b).max())
    problem = Problem(SmoothTerm(Quadratic(), DenseMap(A), b), L1(lam))
    return Instance(problem, np.zeros(n), x_true, lam, "lasso", seed)


GENERATORS = {
    "l1_studentt": gen_l1_studentt,
    "group_studentt": gen_group_studentt,
    "image_restore": gen_image_restore,
}


def generate(spec: ExperimentSpec) -> Instance:
    return GENERATORS[spec.family](spec, make_rng(spec.seed))
