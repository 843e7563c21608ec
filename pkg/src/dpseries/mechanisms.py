"""Release mechanisms: the Gaussian and DFT baselines, and subsample (with
optional circular filtering) followed by Gaussian noise and interpolation.

Every mechanism is a pure function of (input, config, seed). A master seed
is expanded into independent named substreams (subsampling mask, noise)
through ``numpy.random.SeedSequence`` spawn keys feeding a counter-based
Philox generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import _backend
from .accounting import (
    PrivacyGuarantee,
    budget_solve,
    compose_filtered,
    compose_unfiltered,
    worst_case,
)
from .core import Signal, as_array, derive_rng, derive_seed
from .errors import (
    EmptyDraw,
    EmptySubsample,
    InvalidEpsilon,
    InvalidK,
    InvalidParams,
    LengthMismatch,
)
from .filters import FilterKernel, FilterStats, apply_filter, filter_stats
from .sensitivity import (
    binomial_tail_delta,
    chernoff_delta,
    solve_alpha,
    solve_I_prime,
)

KINDS = ("gaussian", "dft", "subsample", "filter-subsample")
DEFAULT_DFT_K = 20
MAX_REDRAWS = 16


NoiseSource = Callable[[np.random.Generator, int], np.ndarray]


def standard_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal(n)


def zero_noise(rng: np.random.Generator, n: int) -> np.ndarray:
    """Null noise stream, for exercising the deterministic part of a pipeline."""
    return np.zeros(n)


@dataclass(frozen=True)
class MechanismConfig:
    """Mechanism choice and parameters.

    For the subsample kinds the noise multiplier comes from ``alpha``,
    ``I_prime`` (subsample only) or a ``delta_prime`` target. If none is
    given, ``(epsilon, delta)`` is treated as the total target and the
    multiplier is found by :func:`dpseries.accounting.budget_solve`; otherwise
    ``delta`` is the Gaussian mechanism's own delta and the failure penalty
    is added on top.
    """

    kind: str
    epsilon: float
    delta: float
    I: int
    p: Optional[float] = None
    kernel: Optional[FilterKernel] = field(default=None, repr=False)
    alpha: Optional[float] = None
    I_prime: Optional[int] = None
    delta_prime: Optional[float] = None
    k: Optional[int] = None
    seed: int = 0
    delta_split: float = 0.5

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParams(f"unknown mechanism kind {self.kind!r}")
        if not (0.0 < self.epsilon < 1.0):
            raise InvalidEpsilon(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if not (0.0 < self.delta < 1.0):
            raise InvalidParams(f"delta must lie in (0, 1), got {self.delta!r}")
        if int(self.I) != self.I or self.I < 1:
            raise InvalidParams(f"I must be a positive integer, got {self.I!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InvalidParams("seed must be a nonnegative integer")

        allowed = {
            "gaussian": set(),
            "dft": {"k"},
            "subsample": {"p", "alpha", "I_prime", "delta_prime"},
            "filter-subsample": {"p", "kernel", "alpha", "delta_prime"},
        }[self.kind]
        optional = ("p", "kernel", "alpha", "I_prime", "delta_prime", "k")
        extra = [n for n in optional if getattr(self, n) is not None and n not in allowed]
        if extra:
            raise InvalidParams(f"{', '.join(extra)} not applicable to kind {self.kind!r}")

        if self.kind in ("subsample", "filter-subsample"):
            if self.p is None or not (0.0 < self.p <= 1.0):
                raise InvalidParams(f"p must lie in (0, 1], got {self.p!r}")
            sources = [n for n in ("alpha", "I_prime", "delta_prime") if getattr(self, n) is not None]
            if len(sources) > 1:
                raise InvalidParams(f"give at most one of alpha, I_prime, delta_prime (got {sources})")
            if self.alpha is not None and not (0.0 < self.alpha <= 1.0):
                raise InvalidParams("alpha must lie in (0, 1]")
            if self.I_prime is not None and not (1 <= self.I_prime <= self.I):
                raise InvalidParams("I_prime must lie in [1, I]")
            if self.delta_prime is not None and not (0.0 < self.delta_prime < 1.0):
                raise InvalidParams("delta_prime must lie in (0, 1)")
        if self.kind == "filter-subsample" and self.kernel is None:
            raise InvalidParams("filter-subsample needs a kernel")
        if self.k is not None and (int(self.k) != self.k or self.k < 1):
            raise InvalidK(f"k must be a positive integer, got {self.k!r}")
        if not (0.0 < self.delta_split < 1.0):
            raise InvalidParams("delta_split must lie in (0, 1)")

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind, "epsilon": self.epsilon, "delta": self.delta, "I": self.I,
            "p": self.p, "alpha": self.alpha, "I_prime": self.I_prime,
            "delta_prime": self.delta_prime, "k": self.k, "seed": self.seed,
            "delta_split": self.delta_split,
        }
        if self.kernel is not None:
            out["kernel_T"] = self.kernel.T
        return out


@dataclass(frozen=True)
class Calibration:
    """Everything resolved before any randomness is drawn."""

    kind: str
    sigma: float
    sensitivity: float
    base_delta: float
    guarantee: PrivacyGuarantee
    p: Optional[float] = None
    alpha: Optional[float] = None
    I_prime: Optional[int] = None
    delta_prime: Optional[float] = None
    k: Optional[int] = None
    stats: Optional[FilterStats] = None

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind, "sigma": self.sigma, "sensitivity": self.sensitivity,
            "base_delta": self.base_delta, "p": self.p, "alpha": self.alpha,
            "I_prime": self.I_prime, "delta_prime": self.delta_prime, "k": self.k,
        }
        if self.stats is not None:
            out["filter"] = {"sigma_max": self.stats.sigma_max, "srank": self.stats.srank,
                             "L": self.stats.L}
        return out


@dataclass(frozen=True, eq=False)
class SubsampleDraw:
    indices: np.ndarray
    p: float
    T: int

    def __post_init__(self):
        idx = np.array(self.indices, dtype=np.int64)
        if len(idx) > 1 and not np.all(np.diff(idx) > 0):
            raise InvalidParams("draw indices must be strictly increasing")
        if len(idx) and (idx[0] < 0 or idx[-1] >= self.T):
            raise InvalidParams("draw indices out of range")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True, eq=False)
class Release:
    signal: Signal
    guarantee: PrivacyGuarantee
    calibration: Calibration
    seed: int
    draw: Optional[SubsampleDraw] = None
    redraws: int = 0


def gaussian_noise_sigma(delta2: float, epsilon: float, delta: float) -> float:
    """``sqrt(2 ln(1.25 / delta)) * delta2 / epsilon``; classical calibration,
    valid for ``epsilon`` in (0, 1)."""
    if not (0.0 < epsilon < 1.0):
        raise InvalidEpsilon(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if not (0.0 < delta < 1.0):
        raise InvalidParams(f"delta must lie in (0, 1), got {delta!r}")
    if delta2 < 0:
        raise InvalidParams("sensitivity must be nonnegative")
    return math.sqrt(2.0 * math.log(1.25 / delta)) * delta2 / epsilon


def _ceil_alpha_sq(alpha: float, I: int) -> int:
    # alpha**2 * I lands a few ulps above an integer for e.g. alpha = 0.3
    return max(1, math.ceil(round(alpha * alpha * I, 9)))


def resolve(cfg: MechanismConfig) -> Calibration:
    """Pick the noise multiplier and compose the certified guarantee."""
    eps, I = cfg.epsilon, cfg.I
    if cfg.kind in ("gaussian", "dft"):
        sens = math.sqrt(I)
        k = None if cfg.kind == "gaussian" else (cfg.k or DEFAULT_DFT_K)
        return Calibration(
            kind=cfg.kind, sigma=gaussian_noise_sigma(sens, eps, cfg.delta), sensitivity=sens,
            base_delta=cfg.delta, guarantee=worst_case(eps, cfg.delta), delta_prime=0.0, k=k,
        )

    p = cfg.p
    if cfg.kind == "subsample":
        if cfg.I_prime is not None or cfg.alpha is not None or cfg.delta_prime is not None:
            if cfg.I_prime is not None:
                kk = int(cfg.I_prime)
            elif cfg.alpha is not None:
                kk = _ceil_alpha_sq(cfg.alpha, I)
            else:
                kk = max(1, solve_I_prime(I, p, cfg.delta_prime))
            base = cfg.delta
            dp = binomial_tail_delta(I, p, kk)
            g = compose_unfiltered(eps, base, I, kk, dp)
        else:
            sol = budget_solve(eps, cfg.delta, I=I, p=p, delta_split=cfg.delta_split)
            kk, base, dp, g = sol.I_prime, sol.base_delta, sol.delta_prime, sol.guarantee
        sens = math.sqrt(kk)
        return Calibration(
            kind=cfg.kind, sigma=gaussian_noise_sigma(sens, eps, base), sensitivity=sens,
            base_delta=base, guarantee=g, p=p, I_prime=kk, delta_prime=dp,
            alpha=math.sqrt(kk / I),
        )

    stats = filter_stats(cfg.kernel)
    if cfg.alpha is not None or cfg.delta_prime is not None:
        alpha = cfg.alpha if cfg.alpha is not None else solve_alpha(stats, p, cfg.delta_prime)
        base = cfg.delta
        dp = chernoff_delta(stats, p, alpha)
        g = compose_filtered(eps, base, alpha, dp)
    else:
        sol = budget_solve(eps, cfg.delta, I=I, p=p, stats=stats, delta_split=cfg.delta_split)
        alpha, base, dp, g = sol.alpha, sol.base_delta, sol.delta_prime, sol.guarantee
    sens = alpha * math.sqrt(I)
    return Calibration(
        kind=cfg.kind, sigma=gaussian_noise_sigma(sens, eps, base), sensitivity=sens,
        base_delta=base, guarantee=g, p=p, alpha=alpha, delta_prime=dp, stats=stats,
    )


def poisson_subsample(x, p: float, rng: np.random.Generator):
    """Keep each index independently with probability ``p``.

    Raises :class:`EmptySubsample` when nothing is kept, which happens with
    probability ``(1 - p)**T``.
    """
    if not (0.0 < p <= 1.0):
        raise InvalidParams(f"p must lie in (0, 1], got {p!r}")
    values = as_array(x)
    T = len(values)
    idx = np.flatnonzero(rng.random(T) < p)
    if len(idx) == 0:
        raise EmptySubsample(f"Poisson draw with p={p} kept none of {T} steps")
    draw = SubsampleDraw(idx, p, T)
    return draw, Signal(values[idx], index_map=idx)


def interpolate(draw: SubsampleDraw, z, T: Optional[int] = None) -> Signal:
    """Linear interpolation back to length ``T``, copying the nearest kept
    value beyond the first and last kept index."""
    T = draw.T if T is None else T
    z = as_array(z)
    if len(draw) == 0:
        raise EmptyDraw("no kept indices to interpolate from")
    if len(z) != len(draw):
        raise LengthMismatch(f"{len(z)} values for {len(draw)} kept indices")
    return Signal(_backend.interp_fill(draw.indices, z, T))


def _dft_release(x: np.ndarray, k: int, sigma: float, rng, noise: NoiseSource) -> np.ndarray:
    T = len(x)
    if not (1 <= k <= T):
        raise InvalidK(f"k must lie in [1, {T}], got {k}")
    X = np.fft.rfft(x, norm="ortho")
    nb = min(k, len(X))
    # Orthonormal real coordinates: DC and Nyquist are real, every other bin
    # carries two coordinates sqrt(2) Re and sqrt(2) Im.
    scale = np.full(nb, 1.0 / math.sqrt(2.0))
    real_only = np.zeros(nb, dtype=bool)
    real_only[0] = True
    if T % 2 == 0 and nb == T // 2 + 1:
        real_only[-1] = True
    scale[real_only] = 1.0
    xi = np.asarray(noise(rng, 2 * nb), dtype=np.float64)
    re = xi[:nb] * scale * sigma
    im = np.where(real_only, 0.0, xi[nb:] * scale * sigma)
    kept = np.zeros_like(X)
    kept[:nb] = X[:nb] + (re + 1j * im)
    return np.fft.irfft(kept, n=T, norm="ortho")


def run(x, cfg: MechanismConfig, cal: Calibration, seed: Optional[int] = None,
        noise: Optional[NoiseSource] = None) -> Release:
    """Execute one release with a precomputed calibration."""
    noise = noise or standard_normal
    seed = cfg.seed if seed is None else seed
    values = as_array(x)
    T = len(values)
    if T == 0:
        raise InvalidParams("empty input")
    noise_rng = derive_rng(seed, "noise")

    if cfg.kind == "gaussian":
        out = values + cal.sigma * np.asarray(noise(noise_rng, T), dtype=np.float64)
        return Release(Signal(out), cal.guarantee, cal, seed)
    if cfg.kind == "dft":
        out = _dft_release(values, cal.k, cal.sigma, noise_rng, noise)
        return Release(Signal(out), cal.guarantee, cal, seed)

    if cfg.kind == "filter-subsample":
        y = apply_filter(cfg.kernel, values)
    else:
        y = values
    draw, ys = poisson_subsample(y, cfg.p, derive_rng(seed, "subsample"))
    z = ys.values + cal.sigma * np.asarray(noise(noise_rng, len(draw)), dtype=np.float64)
    return Release(interpolate(draw, z, T), cal.guarantee, cal, seed, draw=draw)


def release(x, cfg: MechanismConfig, noise: Optional[NoiseSource] = None) -> Release:
    """Resolve the calibration and run once with ``cfg.seed``."""
    return run(x, cfg, resolve(cfg), noise=noise)


def run_with_redraw(x, cfg: MechanismConfig, cal: Calibration, seed: Optional[int] = None,
                    noise: Optional[NoiseSource] = None, max_redraws: int = MAX_REDRAWS) -> Release:
    """Like :func:`run`, redrawing an empty subsample with fresh derived seeds.

    Redrawing is safe because the mask never depends on the data.
    """
    seed = cfg.seed if seed is None else seed
    attempt_seed = seed
    for attempt in range(max_redraws + 1):
        try:
            rel = run(x, cfg, cal, seed=attempt_seed, noise=noise)
        except EmptySubsample:
            attempt_seed = derive_seed(seed, "redraw", attempt)
            continue
        return replace(rel, redraws=attempt)
    raise EmptySubsample(f"{max_redraws} redraws all came up empty")


def release_with_redraw(x, cfg: MechanismConfig, noise: Optional[NoiseSource] = None,
                        max_redraws: int = MAX_REDRAWS) -> Release:
    return run_with_redraw(x, cfg, resolve(cfg), noise=noise, max_redraws=max_redraws)


def gaussian_mechanism(x, cfg: MechanismConfig, noise: Optional[NoiseSource] = None) -> Signal:
    if cfg.kind != "gaussian":
        raise InvalidParams("config kind must be 'gaussian'")
    return release(x, cfg, noise=noise).signal


def dft_mechanism(x, cfg: MechanismConfig, noise: Optional[NoiseSource] = None) -> Signal:
    if cfg.kind != "dft":
        raise InvalidParams("config kind must be 'dft'")
    return release(x, cfg, noise=noise).signal
