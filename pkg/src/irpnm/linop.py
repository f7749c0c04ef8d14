"""Matrix-free linear operators with adjoints.

Every operator maps R^cols -> R^rows and exposes ``apply`` and ``adjoint``.
Nothing here ever materializes A^T A.
"""

from __future__ import annotations

import numpy as np
from scipy import fft


class LinearMap:
    """Base class for a real linear operator ``R^cols -> R^rows``."""

    def __init__(self, rows: int, cols: int):
        if rows <= 0 or cols <= 0:
            raise ValueError(f"operator dimensions must be positive, got {rows}x{cols}")
        self.rows = int(rows)
        self.cols = int(cols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.cols,):
            raise ValueError(f"{type(self).__name__}.apply expects shape ({self.cols},), got {x.shape}")
        return self._matvec(x)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.rows,):
            raise ValueError(f"{type(self).__name__}.adjoint expects shape ({self.rows},), got {y.shape}")
        return self._rmatvec(y)

    def _matvec(self, x):
        raise NotImplementedError

    def _rmatvec(self, y):
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        """Materialize column by column. Only meant for tiny test instances."""
        eye = np.eye(self.cols)
        return np.column_stack([self._matvec(eye[:, j]) for j in range(self.cols)])

    def norm_estimate(self, iters: int = 50, seed: int = 0) -> float:
        """Power iteration on A^T A; returns an estimate of the spectral norm."""
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(self.cols)
        v /= np.linalg.norm(v)
        s = 0.0
        for _ in range(iters):
            w = self._rmatvec(self._matvec(v))
            s = np.linalg.norm(w)
            if s == 0.0:
                return 0.0
            v = w / s
        return float(np.sqrt(s))


class DenseMap(LinearMap):
    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise ValueError("DenseMap needs a 2-D array")
        super().__init__(*matrix.shape)
        self.matrix = matrix

    def _matvec(self, x):
        return self.matrix @ x

    def _rmatvec(self, y):
        return self.matrix.T @ y

    def to_dense(self):
        return self.matrix.copy()


class SubsampledDCT(LinearMap):
    """Rows ``index`` of the orthonormal DCT-II matrix of size ``n``.

    ``index`` holds zero-based row positions; its order fixes the output order.
    """

    def __init__(self, n: int, index):
        index = np.asarray(index, dtype=np.intp)
        if index.ndim != 1 or index.size == 0:
            raise ValueError("index must be a non-empty 1-D array")
        if np.unique(index).size != index.size:
            raise ValueError("index entries must be distinct")
        if index.min() < 0 or index.max() >= n:
            raise ValueError("index out of range")
        super().__init__(index.size, n)
        self.index = index

    def _matvec(self, x):
        return fft.dct(x, type=2, norm="ortho")[self.index]

    def _rmatvec(self, y):
        z = np.zeros(self.cols)
        z[self.index] = y
        return fft.idct(z, type=2, norm="ortho")


def _haar_forward_axis(a: np.ndarray, axis: int) -> np.ndarray:
    a = np.moveaxis(a, axis, 0)
    even, odd = a[0::2], a[1::2]
    out = np.concatenate([(even + odd), (even - odd)]) / np.sqrt(2.0)
    return np.moveaxis(out, 0, axis)


def _haar_inverse_axis(a: np.ndarray, axis: int) -> np.ndarray:
    a = np.moveaxis(a, axis, 0)
    half = a.shape[0] // 2
    avg, diff = a[:half], a[half:]
    out = np.empty_like(a)
    out[0::2] = (avg + diff) / np.sqrt(2.0)
    out[1::2] = (avg - diff) / np.sqrt(2.0)
    return np.moveaxis(out, 0, axis)


class HaarWavelet2D(LinearMap):
    """Separable orthonormal 2-D Haar transform of a ``side x side`` image.

    Images are flattened row-major. At each level the current low-pass block
    in the top-left corner is split along both axes.
    """

    def __init__(self, side: int, level: int = 4):
        if side % (2**level) != 0:
            raise ValueError(f"side {side} is not divisible by 2**level = {2**level}")
        super().__init__(side * side, side * side)
        self.side = side
        self.level = level

    def _matvec(self, x):
        img = x.reshape(self.side, self.side).copy()
        s = self.side
        for _ in range(self.level):
            block = _haar_forward_axis(img[:s, :s], 0)
            img[:s, :s] = _haar_forward_axis(block, 1)
            s //= 2
        return img.ravel()

    def _rmatvec(self, y):
        img = y.reshape(self.side, self.side).copy()
        s = self.side >> (self.level - 1)
        for _ in range(self.level):
            block = _haar_inverse_axis(img[:s, :s], 1)
            img[:s, :s] = _haar_inverse_axis(block, 0)
            s *= 2
        return img.ravel()


def gaussian_kernel(size: int = 9, std: float = 4.0) -> np.ndarray:
    """Normalized ``size x size`` Gaussian filter (sums to one)."""
    half = (size - 1) / 2.0
    t = np.arange(size) - half
    g = np.exp(-(t**2) / (2.0 * std**2))
    k = np.outer(g, g)
    return k / k.sum()


class CircularConvolution2D(LinearMap):
    """Centered 2-D convolution with periodic boundary on a ``side x side`` grid."""

    def __init__(self, kernel, side: int):
        kernel = np.asarray(kernel, dtype=float)
        kh, kw = kernel.shape
        if kh > side or kw > side:
            raise ValueError("kernel larger than image")
        super().__init__(side * side, side * side)
        self.side = side
        self.kernel = kernel
        padded = np.zeros((side, side))
        padded[:kh, :kw] = kernel
        padded = np.roll(padded, (-(kh // 2), -(kw // 2)), axis=(0, 1))
        self._transfer = np.fft.rfft2(padded)

    def _matvec(self, x):
        img = x.reshape(self.side, self.side)
        out = np.fft.irfft2(np.fft.rfft2(img) * self._transfer, s=img.shape)
        return out.ravel()

    def _rmatvec(self, y):
        img = y.reshape(self.side, self.side)
        out = np.fft.irfft2(np.fft.rfft2(img) * np.conj(self._transfer), s=img.shape)
        return out.ravel()


class DiagLeftScaled(LinearMap):
    """``v -> diag(scale) @ (base v)``."""

    def __init__(self, base: LinearMap, scale):
        scale = np.asarray(scale, dtype=float)
        if scale.shape != (base.rows,):
            raise ValueError(f"scale must have length {base.rows}")
        if np.any(scale < 0):
            raise ValueError("scale must be nonnegative")
        super().__init__(base.rows, base.cols)
        self.base = base
        self.scale = scale

    def _matvec(self, x):
        return self.scale * self.base._matvec(x)

    def _rmatvec(self, y):
        return self.base._rmatvec(self.scale * y)
