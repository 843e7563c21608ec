"""Domain types for count time-series and the resampling helpers shared by
the rest of the package."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    EmptySeries,
    GapInIndex,
    InvalidParams,
    NegativeValue,
    NonIntegerCount,
    NonIntegerStride,
    ParseError,
)

PathLike = Union[str, "os.PathLike[str]"]


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidParams(f"expected a 1-d sequence, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CountSeries:
    """A length-``T`` count signal with its sampling metadata.

    Values are stored as float64 so filtered and noised outputs share the
    buffer type; the integer invariant is only checked at ingestion.
    """

    values: np.ndarray
    period_seconds: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        if not self.period_seconds > 0:
            raise InvalidParams("period_seconds must be positive")

    @property
    def T(self) -> int:
        return len(self.values)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, CountSeries):
            return NotImplemented
        return (
            self.period_seconds == other.period_seconds
            and self.origin == other.origin
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Signal:
    """A real-valued signal, optionally carrying the original time indices
    it was subsampled from."""

    values: np.ndarray
    index_map: Optional[np.ndarray] = None

    def __post_init__(self):
        values = _frozen_array(self.values)
        object.__setattr__(self, "values", values)
        if len(values) == 0:
            raise EmptySeries("signal must have at least one value")
        if self.index_map is not None:
            idx = np.array(self.index_map, dtype=np.int64)
            if idx.ndim != 1 or len(idx) != len(values):
                raise InvalidParams("index_map must match values in length")
            if len(idx) > 1 and not np.all(np.diff(idx) > 0):
                raise InvalidParams("index_map must be strictly increasing")
            if len(idx) and idx[0] < 0:
                raise InvalidParams("index_map entries must be nonnegative")
            idx.setflags(write=False)
            object.__setattr__(self, "index_map", idx)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        same_idx = (self.index_map is None and other.index_map is None) or (
            self.index_map is not None
            and other.index_map is not None
            and np.array_equal(self.index_map, other.index_map)
        )
        return same_idx and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True)
class ParticipationLimit:
    """At most ``I`` distinct time steps per individual, and at most ``M``
    contributions within one step."""

    I: int
    M: int = 1

    def __post_init__(self):
        if int(self.I) != self.I or self.I < 1:
            raise InvalidParams(f"I must be a positive integer, got {self.I}")
        if int(self.M) != self.M or self.M < 1:
            raise InvalidParams(f"M must be a positive integer, got {self.M}")

    def check_against(self, series: CountSeries) -> None:
        if self.I > series.T:
            raise InvalidParams(f"I={self.I} exceeds the series length T={series.T}")


def validate_series(series: CountSeries, *, integer: bool = False) -> None:
    """Raise on the first violated invariant of ``series``.

    ``integer=True`` additionally requires whole-number counts, which is only
    meaningful for freshly ingested data.
    """
    values = np.asarray(series.values)
    if len(values) == 0:
        raise EmptySeries("series has no time steps")
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise NegativeValue(f"non-finite value at t={bad}")
    neg = np.flatnonzero(values < 0)
    if len(neg):
        t = int(neg[0])
        raise NegativeValue(f"negative value {values[t]!r} at t={t}")
    if integer:
        frac = np.flatnonzero(values != np.floor(values))
        if len(frac):
            t = int(frac[0])
            raise NonIntegerCount(f"non-integer count {values[t]!r} at t={t}")


def _stride(f) -> int:
    if isinstance(f, float) and not math.isfinite(f):
        raise NonIntegerStride(f"invalid relative frequency {f!r}")
    frac = Fraction(f).limit_denominator(1 << 40)
    if not (0 < frac <= 1):
        raise NonIntegerStride(f"relative frequency must lie in (0, 1], got {f!r}")
    inv = 1 / frac
    if inv.denominator != 1 or abs(float(frac) - float(f)) > 1e-12 * float(f):
        raise NonIntegerStride(f"1/f must be a positive integer, got f={f!r}")
    return int(inv)


def decimate(series: CountSeries, f) -> CountSeries:
    """Keep every ``1/f``-th sample starting at index 0."""
    stride = _stride(f)
    if stride == 1:
        return series
    return CountSeries(
        series.values[::stride],
        period_seconds=series.period_seconds * stride,
        origin=series.origin,
    )


def write_series(path: PathLike, values) -> None:
    """Write ``t,value`` CSV. Floats use ``repr`` so reading back is exact."""
    if isinstance(values, (CountSeries, Signal)):
        values = values.values
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "value"])
        for t, v in enumerate(np.asarray(values, dtype=np.float64).tolist()):
            writer.writerow([t, int(v) if v.is_integer() and abs(v) < 2**53 else repr(v)])


def read_series_values(path: PathLike) -> np.ndarray:
    """Parse a ``t,value`` CSV with contiguous ``t`` starting at 0."""
    values = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file", line=1)
        if [h.strip().lower() for h in header[:2]] != ["t", "value"]:
            raise ParseError(f"expected header 't,value', got {','.join(header)!r}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise ParseError("expected two columns", line=lineno)
            try:
                t = int(row[0])
                v = float(row[1])
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            if t != len(values):
                raise GapInIndex(f"expected t={len(values)}, found t={t}", line=lineno)
            values.append(v)
    return np.array(values, dtype=np.float64)


def as_array(x: Union[CountSeries, Signal, Sequence[float], np.ndarray]) -> np.ndarray:
    if isinstance(x, (CountSeries, Signal)):
        return x.values
    return np.asarray(x, dtype=np.float64)


_STREAMS = {"subsample": 0, "noise": 1, "redraw": 2, "repeat": 3, "cell": 4, "synth": 5}


def derive_rng(seed: int, stream: str, *key: int) -> np.random.Generator:
    """Independent Philox stream for ``(seed, stream, *key)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(_STREAMS[stream], *key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, stream: str, *key: int) -> int:
    """A 63-bit child seed for ``(seed, stream, *key)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(_STREAMS[stream], *key))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))
