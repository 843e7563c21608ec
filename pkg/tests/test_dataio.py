import logging
import math
from datetime import datetime, timezone

import numpy as np
import pytest

from dpseries.core import write_series
from dpseries.dataio import (
    CheckInLayout,
    CheckInRecord,
    SynthConfig,
    aggregate_checkins,
    generate_synth,
    ingest_checkins,
    ingest_series,
    parse_timestamp,
    read_checkins,
    top_venues,
)
from dpseries.errors import GapInIndex, InvalidSeries, NegativeValue, NonIntegerCount, ParseError

DAY = 86400.0


def test_synth_clean_formula():
    clean, noisy = generate_synth(SynthConfig(d=0))
    assert clean.values[0] == 500.0
    t = np.arange(10000.0)
    np.testing.assert_allclose(clean.values, 200 * np.sin(2 * np.pi / 1000 * t) + 500 + 0.1 * t, rtol=1e-15)
    assert clean == noisy


def test_synth_decimated_length_and_nesting():
    full, _ = generate_synth(SynthConfig(d=0))
    low, _ = generate_synth(SynthConfig(d=0, f=1 / 64))
    assert low.T == 157
    assert low.period_seconds == 64.0
    np.testing.assert_array_equal(low.values, full.values[::64])


def test_synth_noise_determinism():
    a = generate_synth(SynthConfig(seed=3))
    b = generate_synth(SynthConfig(seed=3))
    c = generate_synth(SynthConfig(seed=4))
    assert a[1] == b[1] and a[1] != c[1]
    assert a[0] == c[0]
    half = generate_synth(SynthConfig(seed=3, f=0.5))[1]
    np.testing.assert_array_equal(half.values, a[1].values[::2])
    assert np.all(a[1].values >= 0)
    resid = a[1].values - a[0].values
    assert np.std(resid) == pytest.approx(100, rel=0.05)


def test_parse_timestamp_formats():
    want = datetime(2010, 10, 19, 23, 55, 27, tzinfo=timezone.utc).timestamp()
    assert parse_timestamp("2010-10-19T23:55:27Z") == want
    assert parse_timestamp("Tue Oct 19 23:55:27 +0000 2010") == want
    assert parse_timestamp(str(want)) == want
    assert parse_timestamp("2010-10-19") == datetime(2010, 10, 19, tzinfo=timezone.utc).timestamp()
    with pytest.raises(ValueError):
        parse_timestamp("yesterday")


def write_gowalla(path, rows):
    path.write_text("".join(f"{u}\t{t}\t30.2\t-97.7\t{v}\n" for u, t, v in rows))


def test_single_checkin(tmp_path):
    p = tmp_path / "g.txt"
    write_gowalla(p, [("u1", "2010-01-01T05:00:00Z", "42")])
    t0 = parse_timestamp("2010-01-01")
    agg = ingest_checkins(p, "42", 3600, t0, t0 + DAY)
    assert agg.series.T == 24
    want = np.zeros(24)
    want[5] = 1
    np.testing.assert_array_equal(agg.series.values, want)
    assert (agg.empirical_I, agg.empirical_I_raw, agg.max_per_bin) == (1, 1, 1)


def test_dedup_within_bin(tmp_path):
    p = tmp_path / "g.txt"
    write_gowalla(p, [("u1", "2010-01-01T05:00:00Z", "42"), ("u1", "2010-01-01T05:30:00Z", "42")])
    t0 = parse_timestamp("2010-01-01")
    agg = ingest_checkins(p, "42", 3600, t0, t0 + DAY)
    assert agg.series.values.sum() == 1
    assert (agg.empirical_I, agg.empirical_I_raw, agg.max_per_bin) == (1, 2, 2)
    raw = ingest_checkins(p, "42", 3600, t0, t0 + DAY, dedup=False)
    assert raw.series.values.sum() == 2


def test_aggregation_invariants():
    rng = np.random.default_rng(0)
    t0 = 1_000_000.0
    recs = [CheckInRecord(f"u{rng.integers(20)}", f"v{rng.integers(3)}", t0 + rng.uniform(-DAY, 8 * DAY))
            for _ in range(2000)]
    in_window = [r for r in recs if r.venue_id == "v1" and t0 <= r.timestamp < t0 + 7 * DAY]
    raw = aggregate_checkins(recs, "v1", 3600, t0, t0 + 7 * DAY, dedup=False)
    assert raw.series.values.sum() == len(in_window) == raw.records
    agg = aggregate_checkins(recs, "v1", 3600, t0, t0 + 7 * DAY)
    assert agg.empirical_I <= agg.empirical_I_raw <= agg.max_per_bin * agg.empirical_I
    assert agg.series.values.sum() <= raw.series.values.sum()


def test_window_is_half_open():
    recs = [CheckInRecord("a", "v", 0.0), CheckInRecord("b", "v", 10.0)]
    agg = aggregate_checkins(recs, "v", 5, 0.0, 10.0)
    np.testing.assert_array_equal(agg.series.values, [1, 0])


def test_unknown_venue_warns(caplog):
    with caplog.at_level(logging.WARNING):
        agg = aggregate_checkins([CheckInRecord("a", "v", 0.0)], "missing", 1, 0.0, 4.0)
    assert agg.unknown_venue and agg.series.values.sum() == 0
    assert "missing" in caplog.text


def test_foursquare_layout(tmp_path):
    p = tmp_path / "fs.tsv"
    p.write_text(
        "470\t49bbd6c0f964a520f4531fe3\tcat\tArts\t40.7\t-74.0\t-240\tTue Apr 03 18:00:09 +0000 2012\n"
        "979\t49bbd6c0f964a520f4531fe3\tcat\tArts\t40.7\t-74.0\t-240\tTue Apr 03 18:00:25 +0000 2012\n"
    )
    recs = list(read_checkins(p, CheckInLayout.foursquare()))
    assert [r.user_id for r in recs] == ["470", "979"]
    assert recs[0].venue_id == "49bbd6c0f964a520f4531fe3"
    assert recs[0].timestamp == datetime(2012, 4, 3, 18, 0, 9, tzinfo=timezone.utc).timestamp()
    assert top_venues(p, 1, CheckInLayout.foursquare()) == ["49bbd6c0f964a520f4531fe3"]


def test_header_skipped_and_bad_line_reported(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("user,time,lat,lon,venue\nu,2010-01-01,0,0,v\nu,notatime,0,0,v\n")
    it = read_checkins(p)
    assert next(it).venue_id == "v"
    with pytest.raises(ParseError) as e:
        next(it)
    assert e.value.line == 3 and "line 3" in str(e.value)


def test_top_venues_order(tmp_path):
    p = tmp_path / "g.txt"
    write_gowalla(p, [("u", "0", "a"), ("u", "1", "b"), ("w", "2", "b"), ("u", "3", "c"), ("w", "4", "c")])
    assert top_venues(p, 2) == ["b", "c"]


def test_ingest_series_examples(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("t,value\n0,3\n1,0\n2,5\n")
    s = ingest_series(p, period_seconds=60)
    np.testing.assert_array_equal(s.values, [3, 0, 5])
    assert s.period_seconds == 60


@pytest.mark.parametrize(
    "body, err",
    [
        ("t,value\n0,3\n2,5\n", GapInIndex),
        ("t,value\n0,-1\n", NegativeValue),
        ("t,value\n0,1.5\n", NonIntegerCount),
        ("t,value\n", InvalidSeries),
        ("t,value\n0,abc\n", ParseError),
    ],
)
def test_ingest_series_errors(tmp_path, body, err):
    p = tmp_path / "s.csv"
    p.write_text(body)
    with pytest.raises(err):
        ingest_series(p)


def test_series_round_trip(tmp_path):
    p = tmp_path / "s.csv"
    vals = np.array([0, 4, 17, 2], dtype=float)
    write_series(p, vals)
    np.testing.assert_array_equal(ingest_series(p).values, vals)
