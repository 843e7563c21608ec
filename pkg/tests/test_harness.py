import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpseries.dataio import SynthConfig
from dpseries.errors import InvalidParams, LengthMismatch
from dpseries.filters import FilterStats
from dpseries.harness import (
    ALPHA_COLUMNS,
    SWEEP_COLUMNS,
    emit_plot_data,
    mae,
    mechanism_config,
    p_schedule,
    run_experiment,
    schedule_scale,
    sigma_g_schedule,
    sweep_alpha,
    sweep_frequency,
    write_rows,
)
from dpseries.mechanisms import MechanismConfig, zero_noise

STATS = FilterStats(1.0, 280.0, 0.028)


def test_mae_examples():
    assert mae([1, 2, 3], [1, 2, 3]) == 0.0
    assert mae([0, 0], [1, -1]) == 1.0
    assert mae([0, 0, 0], [1, 1, 0]) == pytest.approx(2 / 3, rel=1e-15)
    with pytest.raises(LengthMismatch):
        mae([1], [1, 2])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40))
def test_mae_symmetric_and_nonnegative(xs):
    a = np.array(xs)
    b = a[::-1].copy()
    assert mae(a, b) == mae(b, a) >= 0


def test_experiment_zero_noise_identity():
    x = np.arange(100.0)
    res = run_experiment(x, x, MechanismConfig("gaussian", 0.5, 1e-4, 100), 1, 0, noise=zero_noise)
    assert res.maes == (0.0,) and res.mean_mae == 0.0 and res.std_mae == 0.0


def test_experiment_statistics():
    x = np.full(300, 10.0)
    res = run_experiment(x, x, MechanismConfig("gaussian", 0.5, 1e-4, 100), 20, 5)
    m = np.array(res.maes)
    assert res.mean_mae == pytest.approx(m.mean(), rel=1e-14)
    assert res.std_mae == pytest.approx(m.std(ddof=0), rel=1e-12)
    # half-normal mean: sigma * sqrt(2 / pi)
    assert res.mean_mae == pytest.approx(res.calibration.sigma * math.sqrt(2 / math.pi), rel=0.02)
    assert len(set(res.maes)) == 20


def test_experiment_serial_equals_parallel():
    x = np.linspace(0, 100, 400)
    cfg = mechanism_config("subsample", 400, epsilon=0.5, delta=1e-4, I=100, p=0.1)
    a = run_experiment(x, x, cfg, 12, 77, workers=1)
    b = run_experiment(x, x, cfg, 12, 77, workers=4)
    assert a == b


def test_experiment_rejects_zero_repeats():
    with pytest.raises(InvalidParams):
        run_experiment([1.0], [1.0], MechanismConfig("gaussian", 0.5, 1e-4, 1), 0, 0)


def test_schedules():
    assert p_schedule(1) == pytest.approx(0.1) and sigma_g_schedule(1) == pytest.approx(10)
    assert p_schedule(1 / 64) == pytest.approx(0.25) and sigma_g_schedule(1 / 64) == pytest.approx(4)
    assert schedule_scale(1 / 16) == pytest.approx(2.0)
    assert schedule_scale(math.exp(-4), log_base=math.e) == pytest.approx(2.0)
    for f in (1, 0.5, 0.25, 1 / 64):
        assert p_schedule(f) * sigma_g_schedule(f) == pytest.approx(1.0)


def test_mechanism_config_caps_dft_k():
    assert mechanism_config("dft", 5, epsilon=0.5, delta=1e-4, I=10).k == 5
    with pytest.raises(InvalidParams):
        mechanism_config("laplace", 5, epsilon=0.5, delta=1e-4, I=10)


def test_sweep_alpha():
    rows = sweep_alpha(STATS, [0.1, 0.2], np.linspace(0.2, 1.0, 9))
    assert len(rows) == 18
    for r in rows:
        assert (r.delta_prime is None) == (r.alpha**2 < r.p * (1 - 1e-12))
    for p in (0.1, 0.2):
        vals = [r.delta_prime for r in rows if r.p == p and r.delta_prime is not None]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
    lo = {r.alpha: r.delta_prime for r in rows if r.p == 0.1}
    hi = {r.alpha: r.delta_prime for r in rows if r.p == 0.2}
    for a in lo:
        if lo[a] is not None and hi[a] is not None:
            assert lo[a] <= hi[a]


def test_sweep_frequency_small(tmp_path):
    synth = SynthConfig(T_base=400)
    rows = sweep_frequency(synth, f_list=[1, 0.5], repeats=3, master_seed=1)
    assert len(rows) == 2 * 2 * 4
    again = sweep_frequency(synth, f_list=[1, 0.5], repeats=3, master_seed=1, workers=3)
    assert rows == again
    for r in rows:
        assert r.delta_total <= 1e-4 * (1 + 1e-12) and r.epsilon_total == 0.5
        assert r.mean_mae > 0
    out = tmp_path / "rows.csv"
    write_rows(out, rows, SWEEP_COLUMNS)
    with open(out) as fh:
        got = list(csv.DictReader(fh))
    assert len(got) == 16 and list(got[0]) == SWEEP_COLUMNS
    assert got[0]["p"] == "" and float(got[0]["mean_mae"]) == rows[0].mean_mae


def test_emit_plot_data(tmp_path):
    synth = SynthConfig(T_base=300)
    rows = sweep_frequency(synth, f_list=[1], repeats=2, master_seed=0)
    alpha_rows = sweep_alpha(STATS, [0.1], [0.2, 0.5, 1.0])
    paths = emit_plot_data(tmp_path, sweep_rows=rows, synth=synth, alpha_rows=alpha_rows)
    names = sorted(p.split("/")[-1] for p in paths)
    assert names == ["alpha_vs_delta_prime.csv", "fig2_traces_noisy.csv", "fig3a_noiseless.csv",
                     "fig3b_noisy.csv", "fig_traces_noiseless.csv"]
    with open(tmp_path / "fig2_traces_noisy.csv") as fh:
        r = list(csv.reader(fh))
    assert r[0] == ["t", "clean", "input", "gaussian", "dft", "subsample", "filter-subsample"]
    assert len(r) == 301
    with open(tmp_path / "alpha_vs_delta_prime.csv") as fh:
        r = list(csv.reader(fh))
    assert r[0] == ALPHA_COLUMNS and r[1][2] == ""
