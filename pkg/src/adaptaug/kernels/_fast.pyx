# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numeric kernels.

Mirrors ``adaptaug.kernels.pure`` function-for-function; see that module for
the documented contracts. Expressions are kept identical between the two
backends so results agree to machine precision.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def resample_linear(values, Py_ssize_t out_len):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    if n < 2:
        raise ValueError("resample_linear needs at least 2 input points")
    if out_len < 2:
        raise ValueError("resample_linear needs out_len >= 2")
    out = np.empty(out_len, dtype=np.float64)
    cdef double[::1] o = out
    cdef double step = (n - 1.0) / (out_len - 1.0)
    cdef Py_ssize_t i, lo
    cdef double pos, frac
    for i in range(out_len - 1):
        pos = i * step
        lo = <Py_ssize_t>pos
        if lo > n - 2:
            lo = n - 2
        frac = pos - lo
        o[i] = v[lo] + (v[lo + 1] - v[lo]) * frac
    o[out_len - 1] = v[n - 1]
    return out


def interp_linear(xp, fp, xq):
    cdef double[::1] x = np.ascontiguousarray(xp, dtype=np.float64)
    cdef double[::1] f = np.ascontiguousarray(fp, dtype=np.float64)
    cdef double[::1] q = np.ascontiguousarray(xq, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = q.shape[0]
    if n < 2 or f.shape[0] != n:
        raise ValueError("interp_linear needs matching xp/fp with >= 2 points")
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, lo, hi, mid
    cdef double xv, t
    for i in range(m):
        xv = q[i]
        if xv <= x[0]:
            o[i] = f[0]
            continue
        if xv >= x[n - 1]:
            o[i] = f[n - 1]
            continue
        lo = 0
        hi = n - 1
        while hi - lo > 1:
            mid = (lo + hi) >> 1
            if x[mid] <= xv:
                lo = mid
            else:
                hi = mid
        t = (xv - x[lo]) / (x[lo + 1] - x[lo])
        o[i] = f[lo] + (f[lo + 1] - f[lo]) * t
    return out


def natural_cubic_curve(knot_y, Py_ssize_t n_out):
    cdef double[::1] y = np.ascontiguousarray(knot_y, dtype=np.float64)
    cdef Py_ssize_t k = y.shape[0]
    if k < 2:
        raise ValueError("natural_cubic_curve needs at least 2 knots")
    if n_out < 2:
        raise ValueError("natural_cubic_curve needs n_out >= 2")
    cdef double h = (n_out - 1.0) / (k - 1.0)

    cdef double[::1] m2 = np.zeros(k, dtype=np.float64)
    cdef double[::1] cp
    cdef double[::1] dp
    cdef Py_ssize_t i
    cdef double w, rhs_i
    if k > 2:
        cp = np.empty(k - 2, dtype=np.float64)
        dp = np.empty(k - 2, dtype=np.float64)
        rhs_i = 6.0 * (y[2] - 2.0 * y[1] + y[0]) / (h * h)
        cp[0] = 1.0 / 4.0
        dp[0] = rhs_i / 4.0
        for i in range(1, k - 2):
            rhs_i = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]) / (h * h)
            w = 4.0 - cp[i - 1]
            cp[i] = 1.0 / w
            dp[i] = (rhs_i - dp[i - 1]) / w
        m2[k - 2] = dp[k - 3]
        for i in range(k - 3, 0, -1):
            m2[i] = dp[i - 1] - cp[i - 1] * m2[i + 1]

    out = np.empty(n_out, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t j
    cdef double xv, s, a, b, c, d
    for i in range(n_out):
        xv = <double>i
        j = <Py_ssize_t>(xv / h)
        if j > k - 2:
            j = k - 2
        s = xv - j * h
        a = y[j]
        b = (y[j + 1] - y[j]) / h - h * (2.0 * m2[j] + m2[j + 1]) / 6.0
        c = m2[j] / 2.0
        d = (m2[j + 1] - m2[j]) / (6.0 * h)
        o[i] = a + s * (b + s * (c + s * d))
    return out


def pool_average(values, Py_ssize_t size):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    if size < 1:
        raise ValueError("pool_average needs size >= 1")
    if size > n:
        raise ValueError("pool_average window exceeds series length")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t start = 0, end, i
    cdef double acc, mean
    while start < n:
        end = start + size
        if end > n:
            end = n
        acc = 0.0
        for i in range(start, end):
            acc += v[i]
        mean = acc / (end - start)
        for i in range(start, end):
            o[i] = mean
        start = end
    return out


def quantize_uniform(values, Py_ssize_t levels):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    if levels < 2:
        raise ValueError("quantize_uniform needs levels >= 2")
    cdef double vmin = v[0], vmax = v[0]
    cdef Py_ssize_t i
    for i in range(1, n):
        if v[i] < vmin:
            vmin = v[i]
        if v[i] > vmax:
            vmax = v[i]
    if vmin == vmax:
        return np.asarray(v).copy()
    grid_arr = np.linspace(vmin, vmax, levels)
    cdef double[::1] grid = grid_arr
    cdef double scale = (levels - 1.0) / (vmax - vmin)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t idx
    for i in range(n):
        idx = <Py_ssize_t>floor((v[i] - vmin) * scale + 0.5)
        if idx < 0:
            idx = 0
        elif idx > levels - 1:
            idx = levels - 1
        o[i] = grid[idx]
    return out


def convolve_reflect(values, kernel):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] kern = np.ascontiguousarray(kernel, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t m = kern.shape[0]
    if m < 1:
        raise ValueError("convolve_reflect needs a nonempty kernel")
    if m > n:
        raise ValueError("convolve_reflect kernel exceeds series length")
    cdef Py_ssize_t left = m // 2
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j, idx
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(m):
            idx = i + j - left
            if idx < 0:
                idx = -idx
            elif idx >= n:
                idx = 2 * n - 2 - idx
            acc += kern[j] * v[idx]
        o[i] = acc
    return out
