"""Synthetic signals and ingestion of check-in logs and pre-aggregated
count series."""

from __future__ import annotations

import csv
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterator, Optional

import numpy as np

from .core import (
    CountSeries,
    PathLike,
    decimate,
    derive_rng,
    read_series_values,
    validate_series,
)
from .errors import InvalidParams, ParseError

log = logging.getLogger(__name__)

DEFAULT_OMEGA = 2 * math.pi / 1000


@dataclass(frozen=True)
class SynthConfig:
    """``x_t = a sin(omega t) + b + c t`` on the full-rate grid, observed at
    relative frequency ``f`` with optional Gaussian observation noise of
    scale ``d``.

    ``omega`` is in radians per full-rate index; the default gives ten
    periods over 10000 steps.
    """

    a: float = 200.0
    b: float = 500.0
    c: float = 0.1
    omega: float = DEFAULT_OMEGA
    d: float = 100.0
    f: float = 1.0
    T_base: int = 10000
    I: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise InvalidParams("a and b must be nonnegative")
        if self.T_base < 1:
            raise InvalidParams("T_base must be at least 1")
        if self.d < 0:
            raise InvalidParams("d must be nonnegative")


def generate_synth(cfg: SynthConfig) -> tuple:
    """Return ``(clean, noisy)`` count series at relative frequency ``cfg.f``.

    Both are generated at full rate and then decimated, so series for
    different ``f`` are nested. Observation noise that would push a count
    below zero is clipped at zero.
    """
    t = np.arange(cfg.T_base, dtype=np.float64)
    clean_full = cfg.a * np.sin(cfg.omega * t) + cfg.b + cfg.c * t
    if cfg.d > 0:
        rng = derive_rng(cfg.seed, "synth")
        noisy_full = np.maximum(clean_full + cfg.d * rng.standard_normal(cfg.T_base), 0.0)
    else:
        noisy_full = clean_full.copy()
    clean = decimate(CountSeries(clean_full), cfg.f)
    noisy = decimate(CountSeries(noisy_full), cfg.f)
    return clean, noisy


# -- check-in logs ---------------------------------------------------------


@dataclass(frozen=True)
class CheckInRecord:
    user_id: str
    venue_id: str
    timestamp: float

    def __post_init__(self):
        if not self.user_id or not self.venue_id:
            raise InvalidParams("user and venue ids must be non-empty")


@dataclass(frozen=True)
class CheckInLayout:
    """Column positions in a delimited check-in file (negative counts from
    the end). The default matches the public Gowalla dump: user, time, lat,
    lon, venue."""

    user_col: int = 0
    time_col: int = 1
    venue_col: int = -1
    delimiter: Optional[str] = None  # sniff tab vs comma

    @classmethod
    def foursquare(cls):
        """Foursquare NYC/TKY dumps: user, venue, category, name, lat, lon,
        tz offset, UTC time."""
        return cls(user_col=0, time_col=7, venue_col=1, delimiter="\t")


_TIME_FORMATS = (
    "%a %b %d %H:%M:%S %z %Y",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d",
)


def parse_timestamp(text: str) -> float:
    """Epoch seconds from epoch numbers, ISO-8601, or the Foursquare dump
    format. Naive times are taken as UTC."""
    s = text.strip()
    try:
        return float(s)
    except ValueError:
        pass
    iso = s[:-1] + "+00:00" if s.endswith("Z") else s
    try:
        dt = datetime.fromisoformat(iso)
    except ValueError:
        dt = None
        for fmt in _TIME_FORMATS:
            try:
                dt = datetime.strptime(s, fmt)
                break
            except ValueError:
                continue
        if dt is None:
            raise ValueError(f"unparseable timestamp {text!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def read_checkins(path: PathLike, layout: CheckInLayout = CheckInLayout()) -> Iterator[CheckInRecord]:
    with open(path, newline="", encoding="utf-8", errors="replace") as fh:
        delim = layout.delimiter
        if delim is None:
            head = fh.readline()
            delim = "\t" if "\t" in head else ","
            fh.seek(0)
        for lineno, row in enumerate(csv.reader(fh, delimiter=delim), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                user = row[layout.user_col].strip()
                venue = row[layout.venue_col].strip()
                ts_text = row[layout.time_col]
            except IndexError:
                raise ParseError(f"expected more columns, got {len(row)}", line=lineno) from None
            try:
                ts = parse_timestamp(ts_text)
            except ValueError as exc:
                if lineno == 1:
                    continue  # header row
                raise ParseError(str(exc), line=lineno) from None
            if not user or not venue:
                raise ParseError("empty user or venue id", line=lineno)
            yield CheckInRecord(user, venue, ts)


@dataclass(frozen=True)
class CheckInAggregate:
    """Binned counts for one venue plus the empirical participation limits.

    ``empirical_I`` counts distinct bins per user; ``empirical_I_raw`` counts
    raw check-ins; ``max_per_bin`` is the largest number of check-ins one
    user made inside a single bin.
    """

    series: CountSeries
    empirical_I: int
    empirical_I_raw: int
    max_per_bin: int
    records: int
    unknown_venue: bool = False

    def report(self) -> dict:
        return {
            "T": self.series.T,
            "empirical_I": self.empirical_I,
            "empirical_I_raw": self.empirical_I_raw,
            "max_per_bin": self.max_per_bin,
            "records": self.records,
            "unknown_venue": self.unknown_venue,
            "bin_seconds": self.series.period_seconds,
            "t_start": self.series.origin,
        }


def aggregate_checkins(
    records, venue_id: str, bin_seconds: float, t_start: float, t_end: float, dedup: bool = True,
) -> CheckInAggregate:
    if not bin_seconds > 0:
        raise InvalidParams("bin_seconds must be positive")
    if not t_end > t_start:
        raise InvalidParams("t_end must be after t_start")
    T = math.ceil((t_end - t_start) / bin_seconds)
    raw = Counter()
    per_user_bin = defaultdict(Counter)
    n = 0
    for rec in records:
        if rec.venue_id != venue_id or not (t_start <= rec.timestamp < t_end):
            continue
        b = int((rec.timestamp - t_start) // bin_seconds)
        raw[rec.user_id] += 1
        per_user_bin[rec.user_id][b] += 1
        n += 1

    counts = np.zeros(T)
    for bins in per_user_bin.values():
        for b, c in bins.items():
            counts[b] += 1 if dedup else c
    series = CountSeries(counts, period_seconds=float(bin_seconds), origin=float(t_start))
    validate_series(series, integer=True)
    if n == 0:
        log.warning("venue %r has no check-ins in the window; returning zeros", venue_id)
        return CheckInAggregate(series, 0, 0, 0, 0, unknown_venue=True)
    return CheckInAggregate(
        series,
        empirical_I=max(len(b) for b in per_user_bin.values()),
        empirical_I_raw=max(raw.values()),
        max_per_bin=max(max(b.values()) for b in per_user_bin.values()),
        records=n,
    )


def ingest_checkins(
    path: PathLike, venue_id: str, bin_seconds: float, t_start: float, t_end: float,
    dedup: bool = True, layout: CheckInLayout = CheckInLayout(),
) -> CheckInAggregate:
    """Bin one venue's check-ins into ``ceil((t_end - t_start) / bin_seconds)``
    steps over ``[t_start, t_end)``."""
    return aggregate_checkins(read_checkins(path, layout), venue_id, bin_seconds, t_start, t_end, dedup)


def top_venues(path: PathLike, n: int, layout: CheckInLayout = CheckInLayout(),
               t_start: float = -math.inf, t_end: float = math.inf) -> list:
    """The ``n`` venues with most check-ins, most visited first."""
    counts = Counter(
        r.venue_id for r in read_checkins(path, layout) if t_start <= r.timestamp < t_end
    )
    return [v for v, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:n]]


def ingest_series(path: PathLike, period_seconds: float = 1.0) -> CountSeries:
    """Read a pre-aggregated ``t,value`` CSV of whole-number counts."""
    series = CountSeries(read_series_values(path), period_seconds=period_seconds)
    validate_series(series, integer=True)
    return series
