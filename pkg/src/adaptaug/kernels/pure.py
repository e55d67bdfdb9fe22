"""Pure NumPy implementations of the numeric kernels.

This module is the fallback used when the compiled extension is not
available. The two backends mirror each other expression-for-expression so
their outputs agree to machine precision; cross-backend parity is asserted
in the test suite.

All kernels are RNG-free: random draws happen in the transform layer, so
backend choice can never change a random stream.
"""

from __future__ import annotations

import numpy as np


def _as_f64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def resample_linear(values: np.ndarray, out_len: int) -> np.ndarray:
    """Linearly interpolate ``values`` onto a uniform grid of ``out_len`` points.

    Endpoints are preserved exactly.
    """
    values = _as_f64(values)
    n = values.shape[0]
    if n < 2:
        raise ValueError("resample_linear needs at least 2 input points")
    if out_len < 2:
        raise ValueError("resample_linear needs out_len >= 2")
    step = (n - 1.0) / (out_len - 1.0)
    pos = np.arange(out_len - 1, dtype=np.float64) * step
    lo = np.minimum(pos.astype(np.int64), n - 2)
    frac = pos - lo
    out = np.empty(out_len, dtype=np.float64)
    out[:-1] = values[lo] + (values[lo + 1] - values[lo]) * frac
    out[-1] = values[n - 1]
    return out


def interp_linear(xp: np.ndarray, fp: np.ndarray, xq: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation of (xp, fp) at query points xq.

    ``xp`` must be strictly increasing; queries outside [xp[0], xp[-1]] clamp
    to the boundary values.
    """
    xp = _as_f64(xp)
    fp = _as_f64(fp)
    xq = _as_f64(xq)
    n = xp.shape[0]
    if n < 2 or fp.shape[0] != n:
        raise ValueError("interp_linear needs matching xp/fp with >= 2 points")
    j = np.searchsorted(xp, xq, side="right") - 1
    j = np.clip(j, 0, n - 2)
    t = (xq - xp[j]) / (xp[j + 1] - xp[j])
    out = fp[j] + (fp[j + 1] - fp[j]) * t
    out = np.where(xq <= xp[0], fp[0], out)
    out = np.where(xq >= xp[-1], fp[-1], out)
    return out


def natural_cubic_curve(knot_y: np.ndarray, n_out: int) -> np.ndarray:
    """Natural cubic spline through knots at uniform positions, sampled on 0..n_out-1.

    The k knot values sit at x = linspace(0, n_out - 1, k). Returns the
    spline evaluated at the integer grid. With all-equal knot values the
    result is exactly constant.
    """
    knot_y = _as_f64(knot_y)
    k = knot_y.shape[0]
    if k < 2:
        raise ValueError("natural_cubic_curve needs at least 2 knots")
    if n_out < 2:
        raise ValueError("natural_cubic_curve needs n_out >= 2")
    h = (n_out - 1.0) / (k - 1.0)

    # Second derivatives at the knots: natural boundary (zero), interior
    # values from the uniform-spacing tridiagonal system solved by the
    # Thomas algorithm. k is tiny so the Python loop is irrelevant.
    m = np.zeros(k, dtype=np.float64)
    if k > 2:
        rhs = 6.0 * (knot_y[2:] - 2.0 * knot_y[1:-1] + knot_y[:-2]) / (h * h)
        cp = np.empty(k - 2, dtype=np.float64)
        dp = np.empty(k - 2, dtype=np.float64)
        cp[0] = 1.0 / 4.0
        dp[0] = rhs[0] / 4.0
        for i in range(1, k - 2):
            w = 4.0 - cp[i - 1]
            cp[i] = 1.0 / w
            dp[i] = (rhs[i] - dp[i - 1]) / w
        m[k - 2] = dp[k - 3]
        for i in range(k - 3, 0, -1):
            m[i] = dp[i - 1] - cp[i - 1] * m[i + 1]

    x = np.arange(n_out, dtype=np.float64)
    j = np.minimum((x / h).astype(np.int64), k - 2)
    s = x - j * h
    a = knot_y[j]
    b = (knot_y[j + 1] - knot_y[j]) / h - h * (2.0 * m[j] + m[j + 1]) / 6.0
    c = m[j] / 2.0
    d = (m[j + 1] - m[j]) / (6.0 * h)
    return a + s * (b + s * (c + s * d))


def pool_average(values: np.ndarray, size: int) -> np.ndarray:
    """Non-overlapping average pooling; each block mean is repeated in place.

    The final partial block (when size does not divide the length) averages
    over the remaining elements, so output length equals input length.
    """
    values = _as_f64(values)
    n = values.shape[0]
    if size < 1:
        raise ValueError("pool_average needs size >= 1")
    if size > n:
        raise ValueError("pool_average window exceeds series length")
    starts = np.arange(0, n, size)
    sums = np.add.reduceat(values, starts)
    counts = np.minimum(starts + size, n) - starts
    means = sums / counts
    return np.repeat(means, counts)


def quantize_uniform(values: np.ndarray, levels: int) -> np.ndarray:
    """Snap each value to the nearest of ``levels`` evenly spaced levels.

    Levels span [min(values), max(values)], so the extremes are preserved and
    the operation is idempotent. Constant input is returned unchanged.
    """
    values = _as_f64(values)
    if levels < 2:
        raise ValueError("quantize_uniform needs levels >= 2")
    vmin = float(np.min(values))
    vmax = float(np.max(values))
    if vmin == vmax:
        return values.copy()
    grid = np.linspace(vmin, vmax, levels)
    scale = (levels - 1.0) / (vmax - vmin)
    idx = np.floor((values - vmin) * scale + 0.5).astype(np.int64)
    np.clip(idx, 0, levels - 1, out=idx)
    return grid[idx]


def convolve_reflect(values: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Same-length convolution with a symmetric kernel and reflected edges."""
    values = _as_f64(values)
    kernel = _as_f64(kernel)
    n = values.shape[0]
    m = kernel.shape[0]
    if m < 1:
        raise ValueError("convolve_reflect needs a nonempty kernel")
    if m > n:
        raise ValueError("convolve_reflect kernel exceeds series length")
    left = m // 2
    right = m - 1 - left
    padded = np.pad(values, (left, right), mode="reflect")
    return np.convolve(padded, kernel[::-1], mode="valid")
