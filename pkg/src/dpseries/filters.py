"""Circular filters and the spectral statistics of their circulant matrices."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .core import PathLike, Signal, as_array
from .errors import InvalidKernel, InvalidSigma, InvalidStats, LengthMismatch

L1_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FilterKernel:
    """Length-``T`` nonnegative kernel ``h`` with unit l1 norm.

    The matrix it defines has entries ``A[i, j] = h[(i - j) mod T]``.
    """

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=np.float64)
        if h.ndim != 1 or len(h) == 0:
            raise InvalidKernel("kernel must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(h)) or np.any(h < 0):
            raise InvalidKernel("kernel entries must be finite and nonnegative")
        if abs(math.fsum(h) - 1.0) > L1_TOL:
            raise InvalidKernel(f"kernel l1 norm is {math.fsum(h)!r}, expected 1")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def T(self) -> int:
        return len(self.h)

    @property
    def is_identity(self) -> bool:
        return self.h[0] == 1.0 and not np.any(self.h[1:])

    def matrix(self) -> np.ndarray:
        """Dense ``T x T`` circulant; for small ``T`` and tests only."""
        T = self.T
        i = np.arange(T)
        return self.h[(i[:, None] - i[None, :]) % T]


@dataclass(frozen=True)
class FilterStats:
    sigma_max: float
    srank: float
    L: float

    def __post_init__(self):
        if not (self.sigma_max > 0 and self.srank >= 1 - 1e-12 and self.L > 0):
            raise InvalidStats(
                f"invalid filter stats: sigma_max={self.sigma_max}, "
                f"srank={self.srank}, L={self.L}"
            )


def gaussian_kernel(T: int, sigma_g: float) -> FilterKernel:
    """Circular Gaussian kernel, width ``sigma_g`` in samples, l1-normalized.

    ``sigma_g = inf`` gives the flat averaging kernel.
    """
    if T < 1:
        raise InvalidKernel("T must be at least 1")
    if not sigma_g > 0:  # also rejects NaN
        raise InvalidSigma(f"sigma_g must be positive, got {sigma_g!r}")
    t = np.arange(T, dtype=np.float64)
    dist = T / 2 - np.abs(t - T / 2)
    raw = np.exp(-0.5 * (dist / sigma_g) ** 2)
    return FilterKernel(raw / raw.sum())


def identity_kernel(T: int) -> FilterKernel:
    if T < 1:
        raise InvalidKernel("T must be at least 1")
    h = np.zeros(T)
    h[0] = 1.0
    return FilterKernel(h)


def apply_filter(kernel: FilterKernel, x, method: str = "fft") -> np.ndarray:
    """Circular convolution of ``x`` with the kernel.

    ``method="direct"`` uses the O(T^2) summation kernel. The identity kernel
    is a bit-exact pass-through for either method.
    """
    x = as_array(x)
    if len(x) != kernel.T:
        raise LengthMismatch(f"kernel length {kernel.T} != signal length {len(x)}")
    if kernel.is_identity:
        return np.array(x, dtype=np.float64)
    if method == "direct":
        return _backend.circular_convolve(kernel.h, x)
    if method != "fft":
        raise ValueError(f"unknown method {method!r}")
    T = kernel.T
    return np.fft.irfft(np.fft.rfft(x) * np.fft.rfft(kernel.h), n=T)


def filter_signal(kernel: FilterKernel, x: Signal) -> Signal:
    return Signal(apply_filter(kernel, x))


def filter_stats(kernel: FilterKernel) -> FilterStats:
    """sigma_max from the circulant eigenvalues ``|DFT(h)|``; every row shares
    the same l2 norm, so ``L = ||h||^2`` and ``||A||_F^2 = T ||h||^2``."""
    h = kernel.h
    sigma_max = float(np.abs(np.fft.fft(h)).max())
    sq = float(h @ h)
    return FilterStats(sigma_max=sigma_max, srank=kernel.T * sq / sigma_max**2, L=sq)


def autocorrelation(kernel: FilterKernel) -> np.ndarray:
    """``r[m] = sum_t h[t] h[(t + m) mod T]``, the inner product of rows that
    are ``m`` apart in the circulant."""
    spec = np.fft.rfft(kernel.h)
    return np.fft.irfft(spec * np.conj(spec), n=kernel.T)


def write_kernel(path: PathLike, kernel: FilterKernel) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "h_k"])
        for k, v in enumerate(kernel.h.tolist()):
            writer.writerow([k, repr(v)])
