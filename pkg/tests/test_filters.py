import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpseries.errors import InvalidKernel, InvalidSigma, LengthMismatch
from dpseries.filters import (
    FilterKernel,
    apply_filter,
    autocorrelation,
    filter_stats,
    gaussian_kernel,
    identity_kernel,
    write_kernel,
)


def direct(h, x):
    T = len(h)
    return np.array([math.fsum(x[k] * h[(t - k) % T] for k in range(T)) for t in range(T)])


def test_gaussian_kernel_small_cases():
    assert gaussian_kernel(1, 3.0).h.tolist() == [1.0]
    np.testing.assert_allclose(gaussian_kernel(4, math.inf).h, [0.25] * 4, rtol=0, atol=1e-15)
    np.testing.assert_allclose(gaussian_kernel(4, 1e9).h, [0.25] * 4, atol=1e-12)


def test_gaussian_kernel_formula():
    T, s = 11, 2.5
    raw = [math.exp(-0.5 * ((T / 2 - abs(t - T / 2)) / s) ** 2) for t in range(T)]
    total = math.fsum(raw)
    np.testing.assert_allclose(gaussian_kernel(T, s).h, [v / total for v in raw], rtol=1e-14)


@pytest.mark.parametrize("T", [1, 2, 7, 8, 101])
def test_gaussian_kernel_reflection_symmetry(T):
    h = gaussian_kernel(T, 2.0).h
    for t in range(T):
        assert h[t] == pytest.approx(h[(T - t) % T], rel=1e-14)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_gaussian_kernel_rejects_sigma(bad):
    with pytest.raises(InvalidSigma):
        gaussian_kernel(10, bad)


def test_kernel_invariants_enforced():
    with pytest.raises(InvalidKernel):
        FilterKernel([0.5, 0.4])
    with pytest.raises(InvalidKernel):
        FilterKernel([1.5, -0.5])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3000), st.floats(0.05, 5000))
def test_generated_kernels_valid(T, s):
    h = gaussian_kernel(T, s).h
    assert np.all(h >= 0)
    assert abs(math.fsum(h) - 1) <= 1e-12
    stats = filter_stats(gaussian_kernel(T, s))
    assert stats.sigma_max == pytest.approx(1.0, abs=1e-9)
    assert stats.srank >= 1 - 1e-9
    assert stats.L * T >= 1 - 1e-9
    assert 0 < stats.L <= 1


def test_identity_kernel():
    k = identity_kernel(3)
    assert k.h.tolist() == [1, 0, 0]
    assert apply_filter(k, [4.0, 7.0, 1.0]).tolist() == [4, 7, 1]
    stats = filter_stats(identity_kernel(5))
    assert (stats.sigma_max, stats.srank, stats.L) == (1.0, 5.0, 1.0)


def test_apply_filter_two_tap():
    # direct summation y_t = sum_k x_k h[(t - k) mod 3] with only x_0 = 2
    h = FilterKernel([0.5, 0.5, 0.0])
    want = direct(h.h, [2.0, 0.0, 0.0])
    assert want.tolist() == [1.0, 1.0, 0.0]
    np.testing.assert_allclose(apply_filter(h, [2.0, 0.0, 0.0]), want, atol=1e-15)
    np.testing.assert_allclose(apply_filter(h, [2.0, 0.0, 0.0], method="direct"), want, atol=1e-15)


def test_apply_filter_preserves_constants():
    out = apply_filter(gaussian_kernel(8, 1.0), np.full(8, 3.5))
    np.testing.assert_allclose(out, 3.5, rtol=0, atol=1e-12)


def test_apply_filter_length_mismatch():
    with pytest.raises(LengthMismatch):
        apply_filter(identity_kernel(3), [1.0, 2.0])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 512), st.floats(0.1, 50), st.integers(0, 2**32 - 1))
def test_fft_matches_direct(T, s, seed):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 1000, T).astype(float)
    k = gaussian_kernel(T, s)
    fast = apply_filter(k, x)
    slow = apply_filter(k, x, method="direct")
    scale = max(1.0, np.abs(slow).max())
    assert np.max(np.abs(fast - slow)) <= 1e-9 * scale


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 300), st.integers(0, 2**32 - 1), st.floats(-5, 5), st.floats(-5, 5))
def test_linearity(T, seed, a, b):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=T), rng.normal(size=T)
    k = gaussian_kernel(T, 3.0)
    lhs = apply_filter(k, a * x + b * y)
    rhs = a * apply_filter(k, x) + b * apply_filter(k, y)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * max(1.0, np.abs(rhs).max())


def test_stats_two_tap():
    stats = filter_stats(FilterKernel([0.5, 0.5]))
    assert stats.sigma_max == pytest.approx(1.0, abs=1e-15)
    assert stats.L == 0.5
    assert stats.srank == pytest.approx(1.0, abs=1e-15)


def test_stats_against_dense_svd():
    k = gaussian_kernel(64, 2.0)
    A = k.matrix()
    sv = np.linalg.svd(A, compute_uv=False)
    stats = filter_stats(k)
    assert stats.sigma_max == pytest.approx(sv[0], abs=1e-9)
    assert stats.srank == pytest.approx(np.sum(A**2) / sv[0] ** 2, rel=1e-9)
    assert stats.L == pytest.approx(np.max(np.sum(A**2, axis=1)), rel=1e-12)


def test_default_scale_stats():
    stats = filter_stats(gaussian_kernel(10000, 10.0))
    assert stats.srank == pytest.approx(280, rel=0.05)
    assert stats.L == pytest.approx(0.028, rel=0.05)


def test_autocorrelation_is_row_gram():
    k = gaussian_kernel(30, 2.0)
    A = k.matrix()
    r = autocorrelation(k)
    G = A @ A.T
    for i, j in [(0, 0), (0, 5), (7, 2), (29, 0)]:
        assert G[i, j] == pytest.approx(r[(j - i) % 30], abs=1e-14)


def test_write_kernel(tmp_path):
    path = tmp_path / "h.csv"
    write_kernel(path, gaussian_kernel(5, 1.0))
    lines = path.read_text().splitlines()
    assert lines[0] == "k,h_k" and len(lines) == 6
