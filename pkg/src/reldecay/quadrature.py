"""Fourier integrals  A(t) = int f(E) exp(-iEt) dE  over a finite interval.

Two engines:

* :func:`fourier_transform_fast` -- Filon-type product rule.  The envelope
  is expanded in Legendre polynomials on each panel and the oscillatory
  factor is integrated exactly against them,

      int_{-1}^{1} P_k(x) exp(-i w x) dx = 2 (-i)^k j_k(w),

  so the panel layout only has to resolve ``f``; it is built once per
  integrand and reused for every ``t``.  An inverse square-root edge at
  ``E_lo`` is removed with ``E = E_lo + u**2``.
* :func:`fourier_transform_oracle` -- plain composite midpoint rule, for
  validation only.

Energies are handled as signed offsets ``x = E - E_ref`` from a reference
energy near the peak of ``f`` so that phases stay accurate at large ``t``.
"""
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from numpy.polynomial import legendre

from . import _kernels
from .errors import ConvergenceError, DomainError, OracleRefusal, ParameterError
from .massdist import breakpoints, density, effective_support, tail_masses

DEFAULT_EPS = 1e-10
DEFAULT_TOL = 1e-13
N_NODES = 20
MAX_PANELS = 20000
MAX_T_LIFETIMES = 1e5
# largest t * (panel length) for which the u-panel is integrated by plain
# Gauss-Legendre; wider edge regions are split geometrically
_EDGE_PHASE = 4.0
_EDGE_LEVELS = 64
_SQRT2 = math.sqrt(2.0)


class QuadResult(NamedTuple):
    value: complex
    error: float


@dataclass(eq=False)
class FourierIntegrand:
    """Envelope ``f`` on ``[E_lo, E_hi]`` for the kernel ``exp(-iEt)``.

    Only ``f``, ``E_lo`` and ``E_hi`` are required.  The optional callables
    give numerically stable evaluations near the reference energy
    (``f_rel(x) = f(E_ref + x)``), near the lower edge
    (``f_edge(d) = f(E_lo + d)``) and, when ``singular_lo`` is set, of the
    regularized edge integrand ``sing(u) = 2 u f(E_lo + u**2)``.
    """

    f: Callable
    E_lo: float
    E_hi: float
    singular_lo: bool = False
    E_ref: Optional[float] = None
    f_rel: Optional[Callable] = None
    f_edge: Optional[Callable] = None
    sing: Optional[Callable] = None
    breaks: Optional[np.ndarray] = None
    tail_lo: float = 0.0
    tail_hi: float = 0.0
    lower_tail_monotone: bool = False
    tau: Optional[float] = None
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.E_lo) and math.isfinite(self.E_hi) and self.E_lo < self.E_hi):
            raise ParameterError(f"need finite E_lo < E_hi, got [{self.E_lo}, {self.E_hi}]")
        if self.E_ref is None:
            self.E_ref = 0.5 * (self.E_lo + self.E_hi)
        self.E_ref = min(max(self.E_ref, self.E_lo), self.E_hi)
        f, lo, ref = self.f, self.E_lo, self.E_ref
        if self.f_rel is None:
            self.f_rel = lambda x: f(ref + x)
        if self.f_edge is None:
            self.f_edge = lambda d: f(lo + d)
        if self.singular_lo and self.sing is None:
            fe = self.f_edge
            self.sing = lambda u: 2.0 * u * fe(u * u)

    @property
    def x_lo(self):
        return self.E_lo - self.E_ref

    @property
    def x_hi(self):
        return self.E_hi - self.E_ref

    def tail_bound(self, t):
        """Bound on the truncated tails' contribution to |A(t)|."""
        at = abs(t)
        hi = self.tail_hi
        if hi > 0 and at > 0:
            hi = min(hi, 2 * _SQRT2 * float(self.f_rel(np.array([self.x_hi]))[0]) / at)
        lo = self.tail_lo
        if lo > 0 and at > 0 and self.lower_tail_monotone:
            lo = min(lo, 2 * _SQRT2 * float(self.f_edge(np.array([0.0]))[0]) / at)
        return hi + lo


def to_energy_representation(dist, p, eps=DEFAULT_EPS):
    """Envelope of  int dm omega(m) exp(-it sqrt(m^2+p^2))  in the energy variable.

    With E = sqrt(m^2+p^2) the envelope is omega(m(E)) E / m(E); for p = 0 it
    is omega itself.  A threshold at m = 0 with p > 0 gives the inverse
    square-root edge.
    """
    if not dist.is_normalized:
        raise ParameterError("distribution is not normalized")
    if not math.isfinite(p):
        raise DomainError(f"momentum must be finite, got {p}")
    p = abs(float(p))
    m_lo, m_hi = effective_support(dist, eps)
    if p > 0 and m_lo < 0:
        raise DomainError("nonzero momentum needs a nonnegative mass support; "
                          "set a threshold mu0 >= 0")
    t_lo, t_hi = tail_masses(dist, m_lo, m_hi)
    m_ref = min(max(dist.M, m_lo), m_hi)
    mb = breakpoints(dist, m_lo, m_hi)

    if p == 0.0:
        E_lo, E_hi, E_ref = m_lo, m_hi, m_ref

        def f(E):
            return density(dist, E)

        def f_rel(x):
            x = np.asarray(x, dtype=float)
            return density(dist, m_ref + x, (m_ref - dist.M) + x)

        def f_edge(d):
            return density(dist, m_lo + d)

        return FourierIntegrand(
            f=f, E_lo=E_lo, E_hi=E_hi, E_ref=E_ref, f_rel=f_rel, f_edge=f_edge,
            breaks=mb - m_ref, tail_lo=t_lo, tail_hi=t_hi,
            lower_tail_monotone=m_lo <= dist.M, tau=dist.tau)

    E_lo, E_hi, E_ref = math.hypot(m_lo, p), math.hypot(m_hi, p), math.hypot(m_ref, p)
    singular = m_lo == 0.0 and float(density(dist, 0.0)) > 0.0

    def env(m2, E, delta=None):
        m = np.sqrt(np.maximum(m2, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = density(dist, m, delta) * E / m
        return np.where(m > 0, out, 0.0 if not singular else np.inf)

    def f(E):
        E = np.asarray(E, dtype=float)
        return env((E - p) * (E + p), E)

    def f_rel(x):
        x = np.asarray(x, dtype=float)
        m2 = m_ref * m_ref + x * (2 * E_ref + x)
        m = np.sqrt(np.maximum(m2, 0.0))
        # m - M without cancellation near the peak
        delta = (m_ref - dist.M) + x * (2 * E_ref + x) / (m + m_ref)
        return env(m2, E_ref + x, delta)

    def f_edge(d):
        d = np.asarray(d, dtype=float)
        return env(m_lo * m_lo + d * (2 * E_lo + d), E_lo + d)

    def sing(u):
        u = np.asarray(u, dtype=float)
        s = np.sqrt(2 * p + u * u)
        return 2.0 * density(dist, u * s) * (p + u * u) / s

    eb = np.sqrt(mb * mb + p * p)
    return FourierIntegrand(
        f=f, E_lo=E_lo, E_hi=E_hi, singular_lo=singular, E_ref=E_ref,
        f_rel=f_rel, f_edge=f_edge, sing=sing if singular else None,
        breaks=eb - E_ref, tail_lo=t_lo, tail_hi=t_hi, tau=dist.tau)


# ---------------------------------------------------------------------------
# panel machinery


class _Rule:
    """Gauss-Legendre nodes with the Legendre projection matrix."""

    _cache = {}

    def __init__(self, n):
        x, w = legendre.leggauss(n)
        V = legendre.legvander(x, n - 1)
        self.n = n
        self.x = x
        self.w = w
        # a_k = (2k+1)/2 sum_j w_j P_k(x_j) f_j
        self.proj = (V * w[:, None] * (np.arange(n) + 0.5)).T

    @classmethod
    def get(cls, n):
        if n not in cls._cache:
            cls._cache[n] = cls(n)
        return cls._cache[n]

    def coefficients(self, values):
        return values @ self.proj.T


def _panel_fit(func, a, b, rule):
    """Legendre coefficients, error estimates and noise floors on panels [a, b]."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    vals = func(c[:, None] + h[:, None] * rule.x[None, :])
    vals = np.asarray(vals, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ConvergenceError("envelope is not finite on a quadrature node")
    coef = rule.coefficients(vals)
    tail = np.abs(coef[:, -1]) + np.abs(coef[:, -2])
    est = 2.0 * h * tail
    floor = 2.0 * h * 256 * np.finfo(float).eps * np.max(np.abs(vals), axis=1)
    return coef, est, floor


def _adapt(func, edges, rule, tol, max_panels):
    a = np.asarray(edges[:-1], dtype=float)
    b = np.asarray(edges[1:], dtype=float)
    converged = False
    while True:
        coef, est, floor = _panel_fit(func, a, b, rule)
        resolved = est <= floor
        total = float(np.sum(np.where(resolved, 0.0, est)))
        if total <= tol:
            converged = True
            break
        # split the largest contributors until the rest is below tol/2
        live = np.where(resolved, 0.0, est)
        order = np.argsort(live)[::-1]
        remaining = total - np.cumsum(live[order])
        n_split = int(np.searchsorted(-remaining, -0.5 * tol)) + 1
        split = np.zeros(len(a), dtype=bool)
        split[order[:n_split]] = True
        split &= live > 0
        if not split.any():
            converged = True
            break
        if len(a) + int(split.sum()) > max_panels:
            break
        mid = 0.5 * (a[split] + b[split])
        a = np.concatenate([a[~split], a[split], mid])
        b = np.concatenate([b[~split], mid, b[split]])
        order = np.argsort(a, kind="stable")
        a, b = a[order], b[order]
    return a, b, coef, est, converged


@dataclass
class _Layout:
    centers: np.ndarray
    halfw: np.ndarray
    coef: np.ndarray
    est: float
    converged: bool
    # square-root edge
    edge_len: float = 0.0
    graded: Optional[tuple] = None   # (centers_d, halfw_d, coef, est) per level
    u_vals: Optional[list] = None    # sing(u) at GL nodes for each level
    n_panels: int = 0


def _build_layout(fi, n_nodes, tol, max_panels):
    rule = _Rule.get(n_nodes)
    x_lo, x_hi = fi.x_lo, fi.x_hi
    start = x_lo
    edge_len = 0.0
    if fi.singular_lo:
        # the edge region is a small fixed fraction of the first hint interval
        span = x_hi - x_lo
        if fi.breaks is not None:
            inner = np.asarray(fi.breaks)
            inner = inner[(inner > x_lo) & (inner < x_hi)]
            if inner.size:
                span = inner[0] - x_lo
        edge_len = 0.25 * span
        start = x_lo + edge_len

    edges = [start]
    if fi.breaks is not None:
        hints = np.asarray(fi.breaks, dtype=float)
        edges.extend(np.sort(hints[(hints > start) & (hints < x_hi)]).tolist())
    edges.append(x_hi)
    edges = np.unique(np.asarray(edges))
    a, b, coef, est, ok = _adapt(fi.f_rel, edges, rule, tol, max_panels)
    lay = _Layout(0.5 * (a + b), 0.5 * (b - a), coef, float(np.sum(est)), ok, n_panels=len(a))

    if fi.singular_lo:
        # edge region [0, edge_len] in offsets d from E_lo, refined until the
        # u-panel over the innermost level is resolved
        while True:
            d_top = edge_len * 0.5 ** np.arange(_EDGE_LEVELS + 1)
            ga, gb = d_top[1:], d_top[:-1]
            gcoef, gest, gfloor = _panel_fit(fi.f_edge, ga, gb, rule)
            gest = np.where(gest <= gfloor, 0.0, gest)
            u_top = np.sqrt(d_top)
            u_vals = [fi.sing(0.5 * U * (rule.x + 1.0)) for U in u_top]
            u_coef = rule.coefficients(np.asarray(u_vals[0])[None, :])[0]
            u_est = u_top[0] * (abs(u_coef[-1]) + abs(u_coef[-2]))
            if u_est <= tol or edge_len < 1e-300:
                break
            edge_len *= 0.25
        # top-level graded panels are not needed below the u-panel level
        lay.edge_len = edge_len
        lay.graded = (0.5 * (ga + gb), 0.5 * (gb - ga), gcoef, gest)
        lay.u_vals = u_vals
        # the gap between the shrunken edge region and the regular panels
        gap_lo, gap_hi = x_lo + edge_len, start
        if gap_hi > gap_lo:
            k = max(1, int(math.ceil(math.log2((gap_hi - x_lo) / edge_len))))
            g_edges = x_lo + edge_len * 2.0 ** np.arange(k + 1)
            g_edges[-1] = gap_hi
            g_edges = np.unique(g_edges[g_edges <= gap_hi])
            fa, fb, fcoef, fest, fok = _adapt(
                lambda d: fi.f_edge(d - x_lo), g_edges, rule, tol, max_panels)
            lay.centers = np.concatenate([0.5 * (fa + fb), lay.centers])
            lay.halfw = np.concatenate([0.5 * (fb - fa), lay.halfw])
            lay.coef = np.vstack([fcoef, lay.coef])
            lay.est += float(np.sum(fest))
            lay.converged = lay.converged and fok
            lay.n_panels += len(fa)
    return lay


def _layout(fi, n_nodes=N_NODES, tol=DEFAULT_TOL, max_panels=MAX_PANELS):
    key = (n_nodes, tol, max_panels)
    lay = fi._cache.get(key)
    if lay is None:
        with fi._lock:
            lay = fi._cache.get(key)
            if lay is None:
                lay = _build_layout(fi, n_nodes, tol, max_panels)
                fi._cache[key] = lay
    return lay


def _edge_contribution(fi, lay, t, rule):
    """Edge region in offsets from E_lo (without the exp(-i E_lo t) factor)."""
    at = abs(t)
    if at == 0.0:
        level = 0
    else:
        level = int(math.ceil(math.log2(max(at * lay.edge_len / _EDGE_PHASE, 1.0))))
        level = min(level, _EDGE_LEVELS)
    gc, gh, gcoef, gest = lay.graded
    val = 0j
    err = 0.0
    if level > 0:
        val += _kernels.filon_sum(gcoef[:level], gc[:level], gh[:level], t)
        err += float(np.sum(gest[:level]))
    U = math.sqrt(lay.edge_len * 0.5 ** level)
    u = 0.5 * U * (rule.x + 1.0)
    g = np.asarray(lay.u_vals[level]) * np.exp(-1j * u * u * t)
    val += 0.5 * U * complex(np.sum(rule.w * g))
    cu = rule.coefficients(g[None, :])[0]
    err += U * (abs(cu[-1]) + abs(cu[-2]))
    return val, err


def fourier_transform_fast(integrand, t, n_nodes=N_NODES, tol=DEFAULT_TOL,
                           max_panels=MAX_PANELS):
    """A(t) = int f(E) exp(-iEt) dE with an error bound.

    The bound adds the panel interpolation estimate, the truncated-tail
    bound and a rounding term.  Raises :class:`ConvergenceError` (carrying
    the best estimate) when the panel budget is exhausted or ``t`` lies
    beyond 1e5 lifetimes.
    """
    t = float(t)
    if not math.isfinite(t):
        raise DomainError(f"time must be finite, got {t}")
    fi = integrand
    if fi.tau is not None and abs(t) > MAX_T_LIFETIMES * fi.tau:
        raise ConvergenceError(f"t = {t / fi.tau:.3g} lifetimes is beyond the supported "
                               f"horizon of {MAX_T_LIFETIMES:g} lifetimes")
    lay = _layout(fi, n_nodes, tol, max_panels)
    rule = _Rule.get(n_nodes)
    val = _kernels.filon_sum(lay.coef, lay.centers, lay.halfw, t)
    err = lay.est
    if fi.singular_lo:
        ev, ee = _edge_contribution(fi, lay, t, rule)
        val += ev * np.exp(-1j * fi.x_lo * t)
        err += ee
    val *= complex(np.exp(-1j * fi.E_ref * t))
    mass = float(np.sum(2.0 * lay.halfw * np.abs(lay.coef[:, 0])))
    err += 16 * np.finfo(float).eps * mass * math.sqrt(max(lay.n_panels, 1))
    err += fi.tail_bound(t)
    if not lay.converged:
        raise ConvergenceError(
            f"panel budget of {max_panels} exhausted", estimate=val, error_bound=err)
    return QuadResult(complex(val), float(err))


def filon_fixed(integrand, t, n_panels, n_nodes=N_NODES):
    """Non-adaptive Filon rule on ``n_panels`` equal panels.

    Returns the value and the summed Legendre-tail error estimate; only for
    regular envelopes.  Used to check that refinement reduces the estimate.
    """
    fi = integrand
    rule = _Rule.get(n_nodes)
    edges = np.linspace(fi.x_lo, fi.x_hi, n_panels + 1)
    coef, est, _ = _panel_fit(fi.f_rel, edges[:-1], edges[1:], rule)
    c = 0.5 * (edges[:-1] + edges[1:])
    h = 0.5 * np.diff(edges)
    val = _kernels.filon_sum(coef, c, h, float(t)) * np.exp(-1j * fi.E_ref * t)
    return QuadResult(complex(val), float(np.sum(est)))


# ---------------------------------------------------------------------------
# brute-force oracle


def oracle_min_points(integrand, t):
    """Smallest sample count the oracle accepts (ten per oscillation)."""
    return max(1, int(math.ceil(10.0 * (integrand.E_hi - integrand.E_lo) * abs(t) / (2 * math.pi))))


def oracle_points(integrand, t, phase_step=2e-3, per_width=400, minimum=200_000):
    """Sample count giving roughly 1e-7 relative accuracy for smooth envelopes."""
    L = integrand.E_hi - integrand.E_lo
    n = L * abs(t) / phase_step
    if integrand.tau is not None:
        n = max(n, per_width * L * integrand.tau)
    n = max(int(math.ceil(n)), minimum, oracle_min_points(integrand, t))
    return n


def fourier_transform_oracle(integrand, t, n_points, chunk=1 << 20):
    """Composite midpoint rule with ``n_points`` uniform panels.

    With a square-root edge the rule runs in ``u = sqrt(E - E_lo)``.
    Refuses to run with fewer than ten samples per oscillation.
    """
    fi = integrand
    t = float(t)
    n_points = int(n_points)
    need = oracle_min_points(fi, t)
    if n_points < need:
        raise OracleRefusal(f"n_points={n_points} is below the required {need} "
                            f"(ten samples per oscillation)")
    total = 0j
    if fi.singular_lo:
        U = math.sqrt(fi.E_hi - fi.E_lo)
        h = U / n_points
        for s in range(0, n_points, chunk):
            j = np.arange(s, min(s + chunk, n_points), dtype=float)
            u = (j + 0.5) * h
            total += _kernels.phase_sum(fi.sing(u), u * u * t)
        total *= h * np.exp(-1j * fi.x_lo * t)
    else:
        L = fi.E_hi - fi.E_lo
        h = L / n_points
        x0 = fi.x_lo
        for s in range(0, n_points, chunk):
            j = np.arange(s, min(s + chunk, n_points), dtype=float)
            x = x0 + (j + 0.5) * h
            total += _kernels.phase_sum(np.asarray(fi.f_rel(x), dtype=float), x * t)
        total *= h
    return complex(total * np.exp(-1j * fi.E_ref * t))
