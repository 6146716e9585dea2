"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Public names (``sph_jn_table``, ``filon_sum``, ``phase_sum``) are bound at
import time to the numba versions if available, else to the numpy ones.
Both versions are always importable under ``*_numba`` / ``*_numpy`` so the
benchmark and tests can compare them.
"""
import math

import numpy as np

from ._accel import HAVE_NUMBA, njit

# Below this argument the power series is used for j_k.
_SERIES_CUT = 0.5
_SERIES_TERMS = 14
_RESCALE = 1e250


# ---------------------------------------------------------------------------
# spherical Bessel functions j_0 .. j_{n-1}


def _miller_start(n, x):
    m = max(n, int(x) + 1)
    return m + 16 + int(math.sqrt(40.0 * m))


@njit(cache=True, nogil=True)
def _sph_jn_scalar(x, n, out):
    # out[k] = j_k(x), k < n; x >= 0
    if x == 0.0:
        out[0] = 1.0
        for k in range(1, n):
            out[k] = 0.0
        return
    if x < _SERIES_CUT:
        lead = 1.0
        for k in range(n):
            if k > 0:
                lead *= x / (2.0 * k + 1.0)
            term = lead
            s = lead
            z = -0.5 * x * x
            for m in range(_SERIES_TERMS):
                term *= z / ((m + 1.0) * (2.0 * k + 2.0 * m + 3.0))
                s += term
            out[k] = s
        return
    sx = math.sin(x)
    cx = math.cos(x)
    j0 = sx / x
    j1 = sx / (x * x) - cx / x
    if x >= n:
        out[0] = j0
        if n > 1:
            out[1] = j1
        for k in range(1, n - 1):
            out[k + 1] = (2.0 * k + 1.0) / x * out[k] - out[k - 1]
        return
    m = max(n, int(x) + 1)
    start = m + 16 + int(math.sqrt(40.0 * m))
    fkp1 = 0.0
    fk = 1e-30
    f0 = 0.0
    f1 = 0.0
    for k in range(start, 0, -1):
        fkm1 = (2.0 * k + 1.0) / x * fk - fkp1
        if k - 1 < n:
            out[k - 1] = fkm1
        if k < n:
            out[k] = fk
        if abs(fkm1) > _RESCALE:
            fkm1 /= _RESCALE
            fk /= _RESCALE
            for i in range(k - 1, min(n, start)):
                out[i] /= _RESCALE
        fkp1 = fk
        fk = fkm1
        if k == 1:
            f0 = fkm1
            f1 = fkp1
    if abs(j0) >= abs(j1):
        scale = j0 / f0
    else:
        scale = j1 / f1
    for k in range(n):
        out[k] *= scale


@njit(cache=True, nogil=True)
def sph_jn_table_numba(x, n):
    """j_k(x[i]) for k < n, shape (len(x), n). Negative x by parity."""
    res = np.empty((x.shape[0], n))
    buf = np.empty(n)
    for i in range(x.shape[0]):
        xi = x[i]
        _sph_jn_scalar(abs(xi), n, buf)
        for k in range(n):
            if xi < 0.0 and k % 2 == 1:
                res[i, k] = -buf[k]
            else:
                res[i, k] = buf[k]
    return res


def sph_jn_table_numpy(x, n):
    """Vectorized twin of :func:`sph_jn_table_numba`."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    res = np.zeros((x.size, n))

    zero = ax == 0.0
    res[zero, 0] = 1.0

    ser = (ax > 0.0) & (ax < _SERIES_CUT)
    if ser.any():
        xs = ax[ser]
        lead = np.ones_like(xs)
        z = -0.5 * xs * xs
        for k in range(n):
            if k > 0:
                lead = lead * xs / (2.0 * k + 1.0)
            term = lead.copy()
            s = lead.copy()
            for m in range(_SERIES_TERMS):
                term = term * z / ((m + 1.0) * (2.0 * k + 2.0 * m + 3.0))
                s = s + term
            res[ser, k] = s

    big = ax >= _SERIES_CUT
    if big.any():
        xb = ax[big]
        sx = np.sin(xb)
        cx = np.cos(xb)
        j0 = sx / xb
        j1 = sx / (xb * xb) - cx / xb

        up = xb >= n
        if up.any():
            xu = xb[up]
            cols = np.empty((xu.size, n))
            cols[:, 0] = j0[up]
            if n > 1:
                cols[:, 1] = j1[up]
            for k in range(1, n - 1):
                cols[:, k + 1] = (2.0 * k + 1.0) / xu * cols[:, k] - cols[:, k - 1]
            sub = np.flatnonzero(big)[up]
            res[sub] = cols

        down = ~up
        if down.any():
            xd = xb[down]
            cols = np.zeros((xd.size, n))
            # per-point start index; run a common loop from the largest one
            starts = np.array([_miller_start(n, v) for v in xd])
            top = int(starts.max())
            fkp1 = np.zeros_like(xd)
            fk = np.zeros_like(xd)
            for k in range(top, 0, -1):
                fk = np.where(starts == k, 1e-30, fk)
                fkm1 = (2.0 * k + 1.0) / xd * fk - fkp1
                if k < n:
                    cols[:, k] = fk
                if k - 1 < n:
                    cols[:, k - 1] = fkm1
                over = np.abs(fkm1) > _RESCALE
                if over.any():
                    fkm1[over] /= _RESCALE
                    fk[over] /= _RESCALE
                    cols[over] /= _RESCALE
                fkp1 = fk
                fk = fkm1
            use0 = np.abs(j0[down]) >= np.abs(j1[down])
            scale = np.where(use0, j0[down] / np.where(use0, cols[:, 0], 1.0),
                             j1[down] / np.where(use0, 1.0, cols[:, min(1, n - 1)]))
            sub = np.flatnonzero(big)[down]
            res[sub] = cols * scale[:, None]

    neg = x < 0.0
    if neg.any():
        res[np.ix_(neg, np.arange(1, n, 2))] *= -1.0
    return res


# ---------------------------------------------------------------------------
# Filon-Legendre panel sum
#
# For a panel with centre c, half width h and Legendre coefficients a_k of
# the envelope on [c-h, c+h]:
#     int f(E) exp(-iEt) dE = h exp(-ict) sum_k a_k 2 (-i)^k j_k(h t)


@njit(cache=True, nogil=True)
def filon_sum_numba(coef, centers, halfw, t):
    n = coef.shape[1]
    buf = np.empty(n)
    acc_re = 0.0
    acc_im = 0.0
    for p in range(coef.shape[0]):
        w = halfw[p] * t
        _sph_jn_scalar(abs(w), n, buf)
        s_re = 0.0
        s_im = 0.0
        for k in range(n):
            jk = buf[k]
            if w < 0.0 and k % 2 == 1:
                jk = -jk
            v = 2.0 * coef[p, k] * jk
            r = k % 4
            # (-i)^k cycles 1, -i, -1, i
            if r == 0:
                s_re += v
            elif r == 1:
                s_im -= v
            elif r == 2:
                s_re -= v
            else:
                s_im += v
        ph = centers[p] * t
        cr = math.cos(ph)
        ci = -math.sin(ph)
        acc_re += halfw[p] * (cr * s_re - ci * s_im)
        acc_im += halfw[p] * (cr * s_im + ci * s_re)
    return complex(acc_re, acc_im)


def filon_sum_numpy(coef, centers, halfw, t):
    n = coef.shape[1]
    jk = sph_jn_table_numpy(halfw * t, n)
    mi = (-1j) ** np.arange(n)
    s = (2.0 * coef * jk) @ mi
    return complex(np.sum(halfw * np.exp(-1j * centers * t) * s))


# ---------------------------------------------------------------------------
# brute-force phase sum  sum_j F_j exp(-i phi_j)


@njit(cache=True, nogil=True)
def phase_sum_numba(values, phases):
    total_re = 0.0
    total_im = 0.0
    blk_re = 0.0
    blk_im = 0.0
    for j in range(values.shape[0]):
        blk_re += values[j] * math.cos(phases[j])
        blk_im -= values[j] * math.sin(phases[j])
        if (j + 1) % 1024 == 0:
            total_re += blk_re
            total_im += blk_im
            blk_re = 0.0
            blk_im = 0.0
    return complex(total_re + blk_re, total_im + blk_im)


def phase_sum_numpy(values, phases):
    return complex(np.sum(values * np.exp(-1j * phases)))


if HAVE_NUMBA:
    sph_jn_table = sph_jn_table_numba
    filon_sum = filon_sum_numba
    phase_sum = phase_sum_numba
else:
    sph_jn_table = sph_jn_table_numpy
    filon_sum = filon_sum_numpy
    phase_sum = phase_sum_numpy

BACKEND = "numba" if HAVE_NUMBA else "numpy"
