"""Pure-Python/NumPy versions of the hot kernels.

Semantics must match ``_kernels.pyx`` exactly; ``tests/test_kernels.py``
checks the two against each other.
"""

import numpy as np


def circular_convolve(h, x):
    """Direct O(T^2) circular convolution ``y_t = sum_k x_k h_{(t-k) mod T}``."""
    h = np.ascontiguousarray(h, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    T = len(h)
    if len(x) != T:
        raise ValueError("kernel and signal lengths differ")
    y = np.zeros(T)
    for k in range(T):
        if x[k] != 0.0:
            y += x[k] * np.roll(h, k)
    return y


def interp_fill(idx, z, T):
    """Linear interpolation through ``(idx, z)`` on ``0..T-1``.

    Outside ``[idx[0], idx[-1]]`` the nearest kept value is copied; at kept
    indices the output is ``z`` itself, bit for bit.
    """
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    z = np.ascontiguousarray(z, dtype=np.float64)
    if len(idx) == 0:
        raise ValueError("cannot interpolate from an empty draw")
    out = np.empty(T)
    out[: idx[0]] = z[0]
    out[idx[-1]:] = z[-1]
    for a in range(len(idx) - 1):
        i0, i1 = idx[a], idx[a + 1]
        if i1 - i0 > 1:
            t = np.arange(i0 + 1, i1)
            w = (t - i0) / (i1 - i0)
            out[i0 + 1 : i1] = z[a] + w * (z[a + 1] - z[a])
    out[idx] = z
    return out


def gram_lambda_max(r, idx, tol=1e-12, maxiter=10000):
    """Largest eigenvalue of ``G[a, b] = r[(idx[a] - idx[b]) mod T]`` by power
    iteration started from the all-ones vector.

    Returns ``(lambda_max, iterations)``.
    """
    r = np.ascontiguousarray(r, dtype=np.float64)
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    n = len(idx)
    if n == 0:
        return 0.0, 0
    T = len(r)
    G = r[(idx[:, None] - idx[None, :]) % T]
    v = np.full(n, 1.0 / np.sqrt(n))
    lam = 0.0
    it = 0
    for it in range(1, maxiter + 1):
        w = G @ v
        new = float(v @ w)
        norm = float(np.sqrt(w @ w))
        if norm == 0.0:
            return 0.0, it
        v = w / norm
        if abs(new - lam) <= tol * abs(new):
            lam = new
            break
        lam = new
    return lam, it
