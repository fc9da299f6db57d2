"""Compiled lattice sums over offset pairs ``(x, x - y)``.

Every integrand used here is invariant under swapping the two points of a
pair (``x -> x - y``, ``y -> -y``), so each unordered pair is evaluated once
and credited to both points. Offsets are split into a fixed number of
contiguous chunks, each with a private accumulator, and the chunks are
reduced in a fixed order. The chunking does not depend on the thread count,
so results are bit-identical for any number of threads.
"""

import numba
import numpy as np
from numba import njit, prange

# OpenMP is always present with the wheels and is safe for this use
numba.config.THREADING_LAYER = "omp"

MODE_EXACT = 0
MODE_SERIES = 1


CHUNKS = 16


def n_chunks(n_offsets):
    return max(1, min(CHUNKS, n_offsets))


@njit(cache=True, inline="always")
def _series(q, coef, nmax):
    # sum_{n=1}^{nmax} (-1)^n coef[n] q^n
    acc = 0.0
    qn = 1.0
    for k in range(1, nmax + 1):
        qn *= q
        if k % 2 == 1:
            acc -= coef[k] * qn
        else:
            acc += coef[k] * qn
    return acc


@njit(parallel=True, cache=True)
def remainder_2d(f, gx, gy, offs, weight, mode, coef, nmax, nchunk):
    """sum_y weight * G/|y|^3 * [(1+q)^(-3/2) - 1]  (or its series), q = df^2/|y|^2."""
    n = f.shape[0]
    mask = n - 1
    m_total = offs.shape[0]
    buf = np.zeros((nchunk, n, n))
    for c in prange(nchunk):
        lo = c * m_total // nchunk
        hi = (c + 1) * m_total // nchunk
        out = buf[c]
        for m in range(lo, hi):
            a = offs[m, 0]
            b = offs[m, 1]
            y1 = float(a)
            y2 = float(b)
            r2 = y1 * y1 + y2 * y2
            r = np.sqrt(r2)
            w = weight[m] / (r2 * r)
            for i in range(n):
                i2 = (i - a) & mask
                for j in range(n):
                    j2 = (j - b) & mask
                    df = f[i, j] - f[i2, j2]
                    q = df * df / r2
                    g = (gx[i, j] - gx[i2, j2]) * y1 + (gy[i, j] - gy[i2, j2]) * y2
                    if mode == MODE_EXACT:
                        sq = np.sqrt(1.0 + q)
                        s = 1.0 / sq
                        k = -(q / (sq * (1.0 + sq))) * (s * s + s + 1.0)
                    else:
                        k = _series(q, coef, nmax)
                    val = w * g * k
                    out[i, j] += val
                    out[i2, j2] += val
    total = np.zeros((n, n))
    for c in range(nchunk):
        total += buf[c]
    return total


@njit(parallel=True, cache=True)
def remainder_1d(f, fx, offs, weight, mode, coef, nmax, nchunk):
    """sum_y weight * (f'(x)-f'(x-y))/y * [1/(1+q) - 1]  (or its series)."""
    n = f.shape[0]
    mask = n - 1
    m_total = offs.shape[0]
    buf = np.zeros((nchunk, n))
    for c in prange(nchunk):
        lo = c * m_total // nchunk
        hi = (c + 1) * m_total // nchunk
        out = buf[c]
        for m in range(lo, hi):
            a = offs[m, 0]
            y = float(a)
            w = weight[m]
            for i in range(n):
                i2 = (i - a) & mask
                df = (f[i] - f[i2]) / y
                q = df * df
                g = (fx[i] - fx[i2]) / y
                if mode == MODE_EXACT:
                    k = -q / (1.0 + q)
                else:
                    k = _series(q, coef, nmax)
                val = w * g * k
                out[i] += val
                out[i2] += val
    total = np.zeros(n)
    for c in range(nchunk):
        total += buf[c]
    return total


@njit(parallel=True, cache=True)
def dissipation_2d(f, offs, nchunk):
    """sum_x sum_{y != 0} (1/|y|)(1 - 1/sqrt(1+q)), every term nonnegative."""
    n = f.shape[0]
    mask = n - 1
    m_total = offs.shape[0]
    part = np.zeros(nchunk)
    for c in prange(nchunk):
        lo = c * m_total // nchunk
        hi = (c + 1) * m_total // nchunk
        acc = 0.0
        for m in range(lo, hi):
            a = offs[m, 0]
            b = offs[m, 1]
            r2 = float(a * a + b * b)
            r = np.sqrt(r2)
            sub = 0.0
            for i in range(n):
                i2 = (i - a) & mask
                for j in range(n):
                    j2 = (j - b) & mask
                    df = f[i, j] - f[i2, j2]
                    q = df * df / r2
                    sq = np.sqrt(1.0 + q)
                    sub += q / (sq * (1.0 + sq))
            acc += 2.0 * sub / r
        part[c] = acc
    total = 0.0
    for c in range(nchunk):
        total += part[c]
    return total


@njit(parallel=True, cache=True)
def dissipation_1d(f, offs, nchunk):
    """sum_x sum_{y != 0} log(1 + ((f(x)-f(x-y))/y)^2), every term nonnegative."""
    n = f.shape[0]
    mask = n - 1
    m_total = offs.shape[0]
    part = np.zeros(nchunk)
    for c in prange(nchunk):
        lo = c * m_total // nchunk
        hi = (c + 1) * m_total // nchunk
        acc = 0.0
        for m in range(lo, hi):
            a = offs[m, 0]
            y = float(a)
            sub = 0.0
            for i in range(n):
                i2 = (i - a) & mask
                df = (f[i] - f[i2]) / y
                sub += np.log1p(df * df)
            acc += 2.0 * sub
        part[c] = acc
    total = 0.0
    for c in range(nchunk):
        total += part[c]
    return total


@njit(parallel=True, cache=True)
def tail_remainder_2d(f, gx, gy, reps, W, coef, nterm, r0, nchunk):
    """sum_c G.(sum_n coef[n] W_n(c) q**n), q = df^2/r0^2, over paired far-field classes."""
    n = f.shape[0]
    mask = n - 1
    m_total = reps.shape[0]
    inv = 1.0 / (r0 * r0)
    buf = np.zeros((nchunk, n, n))
    for c in prange(nchunk):
        lo = c * m_total // nchunk
        hi = (c + 1) * m_total // nchunk
        out = buf[c]
        for m in range(lo, hi):
            a = reps[m, 0]
            b = reps[m, 1]
            for i in range(n):
                i2 = (i - a) & mask
                for j in range(n):
                    j2 = (j - b) & mask
                    df = f[i, j] - f[i2, j2]
                    q = df * df * inv
                    px = 0.0
                    py = 0.0
                    for k in range(nterm, 0, -1):
                        px = px * q + coef[k] * W[m, k - 1, 0]
                        py = py * q + coef[k] * W[m, k - 1, 1]
                    val = q * ((gx[i, j] - gx[i2, j2]) * px + (gy[i, j] - gy[i2, j2]) * py)
                    out[i, j] += val
                    out[i2, j2] += val
    total = np.zeros((n, n))
    for c in range(nchunk):
        total += buf[c]
    return total


@njit(parallel=True, cache=True)
def tail_remainder_1d(f, fx, reps, W, coef, nterm, r0, nchunk):
    n = f.shape[0]
    mask = n - 1
    m_total = reps.shape[0]
    inv = 1.0 / (r0 * r0)
    buf = np.zeros((nchunk, n))
    for c in prange(nchunk):
        lo = c * m_total // nchunk
        hi = (c + 1) * m_total // nchunk
        out = buf[c]
        for m in range(lo, hi):
            a = reps[m, 0]
            for i in range(n):
                i2 = (i - a) & mask
                df = f[i] - f[i2]
                q = df * df * inv
                p = 0.0
                for k in range(nterm, 0, -1):
                    p = p * q + coef[k] * W[m, k - 1]
                val = q * (fx[i] - fx[i2]) * p
                out[i] += val
                out[i2] += val
    total = np.zeros(n)
    for c in range(nchunk):
        total += buf[c]
    return total


@njit(parallel=True, cache=True)
def tail_dissipation(f, reps, V, mult, coef, nterm, r0, nchunk):
    """sum_c mult(c) sum_x max(0, sum_n coef[n] V_n(c) q**n); f is raveled, any dimension."""
    dim = reps.shape[1]
    size = f.size
    n = int(round(size ** (1.0 / dim)))
    mask = n - 1
    m_total = reps.shape[0]
    inv = 1.0 / (r0 * r0)
    part = np.zeros(nchunk)
    for c in prange(nchunk):
        lo = c * m_total // nchunk
        hi = (c + 1) * m_total // nchunk
        acc = 0.0
        for m in range(lo, hi):
            a = reps[m, 0]
            b = reps[m, 1] if dim == 2 else 0
            sub = 0.0
            for idx in range(size):
                if dim == 2:
                    i = idx // n
                    j = idx - i * n
                    idx2 = ((i - a) & mask) * n + ((j - b) & mask)
                else:
                    idx2 = (idx - a) & mask
                df = f[idx] - f[idx2]
                q = df * df * inv
                p = 0.0
                for k in range(nterm, 0, -1):
                    p = p * q + coef[k] * V[m, k - 1]
                val = q * p
                if val > 0.0:
                    sub += val
            acc += mult[m] * sub
        part[c] = acc
    total = 0.0
    for c in range(nchunk):
        total += part[c]
    return total
