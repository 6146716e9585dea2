"""Mass distributions omega(m) of unstable states.

All masses, widths and energies are in natural units (hbar = c = 1).  A
distribution is a frozen value; :func:`normalize` returns a new one with the
normalization constant filled in.
"""
import csv
import enum
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import special

from .errors import DomainError, ParameterError


class DistKind(str, enum.Enum):
    BREIT_WIGNER = "BreitWigner"
    GAUSSIAN = "Gaussian"
    TABULATED = "Tabulated"


@dataclass(frozen=True)
class MassDistribution:
    """Density of mass eigenvalues, zero below the threshold ``mu0``.

    For ``BREIT_WIGNER`` ``Gamma`` is the full width at half maximum; for
    ``GAUSSIAN`` it is the standard deviation.  For ``TABULATED`` the density
    is the piecewise-linear interpolant of ``table`` (masses, densities) and
    ``M``/``Gamma`` only set the reference mass and the lifetime unit.
    """

    kind: DistKind
    M: float
    Gamma: float
    mu0: float = 0.0
    norm: Optional[float] = None
    table: Optional[tuple] = None

    def __post_init__(self):
        if not (self.Gamma > 0 and math.isfinite(self.Gamma)):
            raise ParameterError(f"Gamma must be positive and finite, got {self.Gamma}")
        if not math.isfinite(self.M):
            raise ParameterError(f"M must be finite, got {self.M}")
        if math.isnan(self.mu0) or self.mu0 == math.inf:
            raise ParameterError(f"mu0 must be a number or -inf, got {self.mu0}")
        if not self.M > self.mu0:
            raise ParameterError(f"need M > mu0, got M={self.M}, mu0={self.mu0}")
        if self.kind is DistKind.TABULATED:
            if self.table is None:
                raise ParameterError("Tabulated distribution needs a table")
            m, w = self.table
            if len(m) < 2 or np.any(np.diff(m) <= 0):
                raise ParameterError("table masses must be strictly increasing (>= 2 rows)")
            if np.any(np.asarray(w) < 0) or not np.all(np.isfinite(w)):
                raise ParameterError("table densities must be finite and nonnegative")

    @property
    def tau(self):
        """Lifetime unit 1/Gamma."""
        return 1.0 / self.Gamma

    @property
    def is_normalized(self):
        return self.norm is not None

    @property
    def truncated(self):
        return math.isfinite(self.mu0)


def breit_wigner(M, Gamma, mu0=0.0, normalized=True):
    """Threshold-truncated Breit-Wigner; ``mu0=-inf`` gives the full Lorentzian."""
    d = MassDistribution(DistKind.BREIT_WIGNER, float(M), float(Gamma), float(mu0))
    return normalize(d) if normalized else d


def gaussian(M, sigma, mu0=0.0, normalized=True):
    d = MassDistribution(DistKind.GAUSSIAN, float(M), float(sigma), float(mu0))
    return normalize(d) if normalized else d


def tabulated(m, omega, Gamma=None, M=None, normalized=True):
    """Piecewise-linear density through the points ``(m[i], omega[i])``.

    ``M`` defaults to the mean mass and ``Gamma`` to the standard deviation
    of the (normalized) table.
    """
    m = np.asarray(m, dtype=float)
    w = np.asarray(omega, dtype=float)
    if m.shape != w.shape or m.ndim != 1:
        raise ParameterError("table columns must be 1-d and of equal length")
    if len(m) < 2 or np.any(np.diff(m) <= 0):
        raise ParameterError("table masses must be strictly increasing (>= 2 rows)")
    area = float(np.sum(0.5 * np.diff(m) * (w[:-1] + w[1:])))
    if not area > 0:
        raise ParameterError("table density integrates to zero")
    mean, var = _table_moments(m, w / area)
    if M is None:
        M = mean
    if Gamma is None:
        Gamma = math.sqrt(var)
    d = MassDistribution(DistKind.TABULATED, float(M), float(Gamma), float(m[0]),
                         table=(tuple(m.tolist()), tuple(w.tolist())))
    return normalize(d) if normalized else d


def load_table_csv(path, Gamma=None, M=None, normalized=True):
    """Read a two-column CSV with header ``m,omega``."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["m", "omega"]:
        raise ParameterError(f"{path}: header row must be 'm,omega'")
    try:
        data = np.array([[float(a), float(b)] for a, b in (r for r in rows[1:] if r)])
    except ValueError as exc:
        raise ParameterError(f"{path}: {exc}") from None
    if data.ndim != 2 or len(data) < 2:
        raise ParameterError(f"{path}: need at least two data rows")
    return tabulated(data[:, 0], data[:, 1], Gamma=Gamma, M=M, normalized=normalized)


def _table_moments(m, w):
    # exact first/second moments of the piecewise-linear density
    m0, m1 = m[:-1], m[1:]
    w0, w1 = w[:-1], w[1:]
    h = m1 - m0
    mass = 0.5 * h * (w0 + w1)
    first = h / 6.0 * (w0 * (2 * m0 + m1) + w1 * (m0 + 2 * m1))
    second = h / 12.0 * (w0 * (3 * m0**2 + 2 * m0 * m1 + m1**2)
                         + w1 * (m0**2 + 2 * m0 * m1 + 3 * m1**2))
    tot = mass.sum()
    mean = first.sum() / tot
    return mean, max(second.sum() / tot - mean**2, 0.0)


def _raw_density(dist, m, delta=None):
    m = np.asarray(m, dtype=float)
    if delta is None:
        delta = m - dist.M
    if dist.kind is DistKind.BREIT_WIGNER:
        g = dist.Gamma
        out = (g / (2 * np.pi)) / (delta ** 2 + 0.25 * g * g)
    elif dist.kind is DistKind.GAUSSIAN:
        z = delta / dist.Gamma
        out = np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * dist.Gamma)
    else:
        tm, tw = dist.table
        out = np.interp(m, tm, tw, left=0.0, right=0.0)
    return np.where(m < dist.mu0, 0.0, out)


def density(dist, m, delta=None):
    """Vectorized omega(m); no domain checks beyond normalization.

    ``delta`` may pass a more accurate ``m - M`` than the subtraction gives.
    """
    if dist.norm is None:
        raise ParameterError("distribution is not normalized")
    return dist.norm * _raw_density(dist, m, delta)


def omega_eval(dist, m):
    """omega(m) for a normalized distribution (scalar or array ``m``)."""
    arr = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"mass must be finite, got {m!r}")
    out = density(dist, arr)
    return float(out) if out.ndim == 0 else out


def normalize(dist):
    """Return ``dist`` with ``norm`` set so that the density integrates to 1."""
    if dist.kind is DistKind.BREIT_WIGNER:
        theta0 = math.atan(2.0 * (dist.M - dist.mu0) / dist.Gamma)
        mass = (math.pi / 2 + theta0) / math.pi
    elif dist.kind is DistKind.GAUSSIAN:
        mass = float(special.ndtr((dist.M - dist.mu0) / dist.Gamma))
    else:
        tm, tw = (np.asarray(a) for a in dist.table)
        mass = float(np.sum(0.5 * np.diff(tm) * (tw[:-1] + tw[1:])))
    if not mass > 0:
        raise ParameterError("distribution has no mass above threshold")
    return replace(dist, norm=1.0 / mass)


def tail_masses(dist, m_lo, m_hi):
    """Probability below ``m_lo`` and above ``m_hi``."""
    _need_norm(dist)
    N = dist.norm
    if dist.kind is DistKind.BREIT_WIGNER:
        g2 = 0.5 * dist.Gamma
        th0 = math.atan((dist.mu0 - dist.M) / g2) if dist.truncated else -math.pi / 2
        lo = 0.0 if m_lo <= dist.mu0 else N / math.pi * (math.atan((m_lo - dist.M) / g2) - th0)
        hi = N / math.pi * (math.pi / 2 - math.atan((m_hi - dist.M) / g2))
        if m_hi > dist.M:
            hi = N / math.pi * math.atan(g2 / (m_hi - dist.M))
    elif dist.kind is DistKind.GAUSSIAN:
        s = dist.Gamma
        c0 = special.ndtr((dist.mu0 - dist.M) / s) if dist.truncated else 0.0
        lo = 0.0 if m_lo <= dist.mu0 else N * (special.ndtr((m_lo - dist.M) / s) - c0)
        hi = N * special.ndtr(-(m_hi - dist.M) / s)
    else:
        tm = dist.table[0]
        if m_lo > tm[0] or m_hi < tm[-1]:
            grid = np.union1d(np.asarray(tm), [m_lo, m_hi])
            w = density(dist, grid)
            seg = 0.5 * np.diff(grid) * (w[:-1] + w[1:])
            lo = float(seg[grid[:-1] < m_lo].sum())
            hi = float(seg[grid[1:] > m_hi].sum())
        else:
            lo = hi = 0.0
    return float(max(lo, 0.0)), float(max(hi, 0.0))


def effective_support(dist, eps):
    """Interval ``(m_lo, m_hi)`` outside of which less than ``eps`` probability lies.

    A finite threshold is kept as the lower edge while the density there is
    non-negligible (``omega(mu0) >= eps * peak``) since the threshold drives
    the late-time behaviour of the amplitudes.
    """
    _need_norm(dist)
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if dist.kind is DistKind.TABULATED:
        tm = dist.table[0]
        return float(tm[0]), float(tm[-1])

    share = 0.4999 * eps
    N = dist.norm
    M, G = dist.M, dist.Gamma
    if dist.kind is DistKind.BREIT_WIGNER:
        g2 = 0.5 * G
        a = math.pi * share / N
        m_hi = M + g2 / math.tan(a) if a < math.pi / 2 else M + g2 * math.tan(math.pi / 2 - a)
        if dist.truncated:
            th0 = math.atan((dist.mu0 - M) / g2)
            m_q = M + g2 * math.tan(min(th0 + a, math.pi / 2 - 1e-300))
        else:
            m_q = M - g2 / math.tan(a)
        peak = density(dist, M)
    else:
        m_hi = M - G * float(special.ndtri(share / N))
        if dist.truncated:
            c0 = float(special.ndtr((dist.mu0 - M) / G))
            m_q = M + G * float(special.ndtri(min(c0 + share / N, 1.0)))
        else:
            m_q = M + G * float(special.ndtri(share / N))
        peak = density(dist, max(M, dist.mu0))

    if dist.truncated:
        keep_threshold = density(dist, dist.mu0) >= eps * peak
        m_lo = dist.mu0 if keep_threshold else max(m_q, dist.mu0)
    else:
        m_lo = m_q
    return float(m_lo), float(m_hi)


def breakpoints(dist, m_lo, m_hi):
    """Sorted masses in ``[m_lo, m_hi]`` where quadrature panels should start."""
    if dist.kind is DistKind.TABULATED:
        pts = np.asarray(dist.table[0], dtype=float)
    else:
        steps = np.concatenate([[0.0], 0.25 * 2.0 ** np.arange(0, 60)])
        pts = np.concatenate([dist.M - dist.Gamma * steps[::-1], dist.M + dist.Gamma * steps[1:]])
    pts = pts[(pts > m_lo) & (pts < m_hi)]
    return np.unique(np.concatenate([[m_lo], pts, [m_hi]]))


def _need_norm(dist):
    if dist.norm is None:
        raise ParameterError("distribution is not normalized")
