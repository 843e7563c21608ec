"""High-probability L2-sensitivity bounds for subsampled (and filtered)
count signals, and the solvers that invert them.

Two routes are provided:

* subsampling only: the number of an individual's ``I`` time steps that
  survive Poisson subsampling is Binomial(I, p), so its exact upper tail
  (or a Hoeffding bound on it) gives the failure probability ``delta'`` of
  the claim ``Delta_2 <= sqrt(I')``;
* filter then subsample: a matrix Chernoff bound on the largest singular
  value of the row-subsampled circulant gives the failure probability of
  ``Delta_2 <= alpha * sqrt(I)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _backend
from .errors import AlphaBelowSamplingRate, InvalidParams, InvalidStats, Unsatisfiable
from .filters import FilterKernel, FilterStats, autocorrelation

METHODS = ("exact-binomial", "hoeffding", "matrix-chernoff", "worst-case")
ALPHA_GRID = 1e-6


@dataclass(frozen=True)
class SensitivityBound:
    """``delta2`` holds except with probability ``delta_prime`` over the draw."""

    delta2: float
    delta_prime: float
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidParams(f"unknown method {self.method!r}")
        if not (0.0 <= self.delta_prime <= 1.0) or self.delta2 < 0:
            raise InvalidParams("need delta2 >= 0 and delta_prime in [0, 1]")
        if self.method == "worst-case" and self.delta_prime != 0.0:
            raise InvalidParams("worst-case bounds never fail")


def _check_binomial(I, p):
    if int(I) != I or I < 1:
        raise InvalidParams(f"I must be a positive integer, got {I!r}")
    if not (0.0 <= p <= 1.0):
        raise InvalidParams(f"p must lie in [0, 1], got {p!r}")


def _log_pmf(I: int, p: float) -> np.ndarray:
    t = np.arange(I + 1)
    lgam = np.array([math.lgamma(k + 1) for k in range(I + 1)])
    log_comb = lgam[I] - lgam - lgam[::-1]
    lp = math.log(p) if p > 0 else -np.inf
    lq = math.log1p(-p) if p < 1 else -np.inf
    # 0 * log(0) must be 0, not nan
    with np.errstate(invalid="ignore"):
        tp = np.where(t > 0, t * lp, 0.0)
        tq = np.where(I - t > 0, (I - t) * lq, 0.0)
    return log_comb + tp + tq


def binomial_log_survival(I: int, p: float) -> np.ndarray:
    """``S[k] = log Pr{Binomial(I, p) > k}`` for ``k = 0..I`` (``S[I] = -inf``)."""
    _check_binomial(I, p)
    logpmf = _log_pmf(I, p)
    # accumulate from the top so small tail terms are summed first
    tail = np.logaddexp.accumulate(logpmf[::-1])[::-1]
    out = np.empty(I + 1)
    out[:-1] = tail[1:]
    out[-1] = -np.inf
    return out


def binomial_tail_delta(I: int, p: float, I_prime: int) -> float:
    """``Pr{Binomial(I, p) > I'}``, summed in log space."""
    _check_binomial(I, p)
    if int(I_prime) != I_prime or not (0 <= I_prime <= I):
        raise InvalidParams(f"I' must be an integer in [0, {I}], got {I_prime!r}")
    if I_prime == I or p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    logpmf = _log_pmf(I, p)[I_prime + 1 :]
    m = logpmf.max()
    return float(min(1.0, math.exp(m) * math.fsum(np.exp(logpmf - m))))


def solve_I_prime(I: int, p: float, delta_prime_target: float) -> int:
    """Smallest ``I'`` whose binomial tail is at most the target."""
    if not (0.0 < delta_prime_target < 1.0):
        raise InvalidParams("delta_prime_target must lie in (0, 1)")
    _check_binomial(I, p)
    log_target = math.log(delta_prime_target)
    surv = binomial_log_survival(I, p)
    for k in range(I + 1):
        if surv[k] <= log_target:
            # confirm with the directly summed tail to avoid rounding drift
            while k > 0 and binomial_tail_delta(I, p, k - 1) <= delta_prime_target:
                k -= 1
            while binomial_tail_delta(I, p, k) > delta_prime_target:
                k += 1
            return k
    return I


def hoeffding_I_prime(I: int, p: float, delta_prime: float) -> float:
    """Closed form ``I p + sqrt((I / 2) ln(1 / delta'))``."""
    _check_binomial(I, p)
    if not (0.0 < delta_prime <= 1.0):
        raise InvalidParams("delta_prime must lie in (0, 1]")
    return I * p + math.sqrt(I / 2 * math.log(1.0 / delta_prime))


def _check_stats(stats: FilterStats):
    if not (stats.sigma_max > 0 and stats.srank >= 1 - 1e-12 and stats.L > 0):
        raise InvalidStats(f"invalid stats {stats}")


def chernoff_log_delta(stats: FilterStats, p: float, alpha: float) -> float:
    """Unclamped natural log of the matrix Chernoff failure probability."""
    _check_stats(stats)
    if not (0.0 < p <= 1.0):
        raise InvalidParams(f"p must lie in (0, 1], got {p!r}")
    if not (0.0 < alpha <= 1.0):
        raise InvalidParams(f"alpha must lie in (0, 1], got {alpha!r}")
    s2 = stats.sigma_max**2
    ratio = alpha * alpha / (p * s2)
    if ratio < 1.0:
        # sqrt(p) may square to just below p
        if ratio < 1.0 - 1e-12:
            raise AlphaBelowSamplingRate(
                f"alpha^2 = {alpha * alpha!r} is below p * sigma_max^2 = {p * s2!r}"
            )
        ratio = 1.0
    expo = (ratio - 1.0) - ratio * math.log(ratio)
    return math.log(2.0 * stats.srank) + (p * s2 / stats.L) * expo


def chernoff_delta(stats: FilterStats, p: float, alpha: float) -> float:
    """``delta'`` for the claim ``sigma_max(B) <= alpha``, clamped to ``[0, 1]``."""
    log_d = chernoff_log_delta(stats, p, alpha)
    if log_d >= 0.0:
        return 1.0
    return math.exp(log_d)


def grid_bisect(feasible, lo_k: int, hi_k: int) -> int:
    """Smallest integer in ``(lo_k, hi_k]`` where the monotone predicate holds,
    given ``feasible(hi_k)`` and not ``feasible(lo_k)``."""
    while hi_k - lo_k > 1:
        mid = (lo_k + hi_k) // 2
        if feasible(mid):
            hi_k = mid
        else:
            lo_k = mid
    return hi_k


def solve_alpha(stats: FilterStats, p: float, delta_prime_target: float) -> float:
    """Smallest ``alpha`` in ``[sqrt(p), 1]`` meeting the target, on a 1e-6 grid
    and rounded up, so ``chernoff_delta(alpha - 1e-6)`` exceeds the target."""
    if not (0.0 < delta_prime_target <= 1.0):
        raise InvalidParams("delta_prime_target must lie in (0, 1]")
    floor = math.sqrt(p) * stats.sigma_max
    if floor > 1.0:
        raise Unsatisfiable("sqrt(p) * sigma_max exceeds 1")
    if chernoff_delta(stats, p, floor) <= delta_prime_target:
        return floor
    if chernoff_delta(stats, p, 1.0) > delta_prime_target:
        raise Unsatisfiable(
            f"even alpha = 1 gives delta' = {chernoff_delta(stats, p, 1.0):.3g} "
            f"> {delta_prime_target:.3g}; lower p or use worst-case sensitivity"
        )

    def ok(k):
        a = k * ALPHA_GRID
        return a >= floor and chernoff_delta(stats, p, a) <= delta_prime_target

    n = round(1.0 / ALPHA_GRID)
    k = grid_bisect(ok, int(math.floor(floor / ALPHA_GRID)), n)
    return k / n


def bounds_table(
    I: int,
    p: float,
    delta_prime: float,
    stats: Optional[FilterStats] = None,
) -> list:
    """One :class:`SensitivityBound` per applicable method at a target ``delta'``."""
    rows = [SensitivityBound(math.sqrt(I), 0.0, "worst-case")]
    k = solve_I_prime(I, p, delta_prime)
    rows.append(SensitivityBound(math.sqrt(k), binomial_tail_delta(I, p, k), "exact-binomial"))
    hoeff = min(float(I), hoeffding_I_prime(I, p, delta_prime))
    rows.append(SensitivityBound(math.sqrt(hoeff), delta_prime, "hoeffding"))
    if stats is not None:
        try:
            a = solve_alpha(stats, p, delta_prime)
            rows.append(
                SensitivityBound(a * math.sqrt(I), chernoff_delta(stats, p, a), "matrix-chernoff")
            )
        except Unsatisfiable:
            pass
    return rows


# Monte Carlo checks. Each takes an explicit Generator so callers control
# the stream.


def empirical_tail_frequency(
    I: int, p: float, I_primes: Sequence[int], draws: int, rng: np.random.Generator,
    chunk: int = 100_000,
) -> np.ndarray:
    """Fraction of Poisson draws in which more than ``I'`` of an individual's
    ``I`` time steps are kept, for each ``I'``."""
    I_primes = np.asarray(I_primes)
    exceed = np.zeros(len(I_primes), dtype=np.int64)
    done = 0
    while done < draws:
        n = min(chunk, draws - done)
        kept = (rng.random((n, I)) < p).sum(axis=1)
        exceed += (kept[:, None] > I_primes[None, :]).sum(axis=0)
        done += n
    return exceed / draws


def subsampled_sigma_max_sq(
    kernel: FilterKernel, p: float, draws: int, rng: np.random.Generator,
    tol: float = 1e-12, maxiter: int = 10000,
) -> np.ndarray:
    """``sigma_max(diag(delta) A)^2`` for ``draws`` independent Poisson masks.

    The nonzero rows of the masked circulant are the kept rows ``A_J``, so
    its squared top singular value is the top eigenvalue of the small Gram
    matrix ``A_J A_J^T``, whose entries come from the kernel autocorrelation.
    That eigenvalue is found by power iteration.
    """
    r = autocorrelation(kernel)
    T = kernel.T
    out = np.empty(draws)
    for d in range(draws):
        idx = np.flatnonzero(rng.random(T) < p)
        out[d] = _backend.gram_lambda_max(r, idx, tol, maxiter)[0]
    return out
