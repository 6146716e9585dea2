"""Survival amplitudes at rest, at fixed momentum and in a moving frame."""
import csv
import enum
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from . import quadrature as quad
from .errors import ConvergenceError, DomainError, OracleRefusal, ParameterError
from .kinematics import PhaseModel, lorentz_gamma, phase_split

LOGGER = logging.getLogger(__name__)

MAX_T_LIFETIMES = quad.MAX_T_LIFETIMES
INNER_NODES = 64
INNER_MAX_NODES = 1024
INNER_TOL = 1e-8
# the oracle is refused beyond this many samples per time point
ORACLE_MAX_POINTS = 400_000_000
ORACLE_ABS_ERR = 1e-7


class Spacing(str, enum.Enum):
    LINEAR = "linear"
    LOG = "log"


@dataclass(frozen=True)
class TimeGrid:
    """Evaluation times (absolute units) with the lifetime unit ``tau``."""

    tau: float
    points: tuple
    spacing: Spacing = Spacing.LINEAR

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise ParameterError("time grid needs at least one point")
        if not self.tau > 0:
            raise ParameterError(f"tau must be positive, got {self.tau}")
        if np.any(pts < 0) or not np.all(np.isfinite(pts)):
            raise ParameterError("time points must be finite and nonnegative")
        if np.any(np.diff(pts) <= 0):
            raise ParameterError("time points must be strictly increasing")
        if pts[-1] > MAX_T_LIFETIMES * self.tau * (1 + 1e-12):
            raise ParameterError(f"time grid exceeds {MAX_T_LIFETIMES:g} lifetimes")

    @classmethod
    def linear(cls, tau, t_max, n, t_min=0.0):
        """``n`` equally spaced points from ``t_min`` to ``t_max`` (both in units of tau)."""
        if n < 2:
            raise ParameterError("need n >= 2 grid points")
        return cls(tau, tuple(np.linspace(t_min, t_max, n) * tau), Spacing.LINEAR)

    @classmethod
    def log(cls, tau, t_max, n, t_min=1e-2, include_zero=True, extra=()):
        """Log-spaced points in units of tau, optionally starting at 0.

        ``extra`` adds exact points (units of tau), e.g. the anchor ``1.0``.
        """
        if n < 2:
            raise ParameterError("need n >= 2 grid points")
        if not 0 < t_min < t_max:
            raise ParameterError("need 0 < t_min < t_max for a log grid")
        k = n - 1 if include_zero else n
        pts = np.geomspace(t_min, t_max, k)
        pts = np.concatenate([[0.0] if include_zero else [], pts, list(extra)])
        pts = np.unique(pts)
        return cls(tau, tuple(pts * tau), Spacing.LOG)

    @property
    def t(self):
        return np.asarray(self.points, dtype=float)

    @property
    def t_over_tau(self):
        return self.t / self.tau

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class MomentumSmearing:
    """Gaussian |phi(p)|^2 along the boost axis."""

    p_bar: float = 0.0
    sigma_p: float = 1e-2

    def __post_init__(self):
        if not (self.sigma_p > 0 and math.isfinite(self.sigma_p)):
            raise ParameterError(f"sigma_p must be positive, got {self.sigma_p}")
        if not math.isfinite(self.p_bar):
            raise ParameterError(f"p_bar must be finite, got {self.p_bar}")

    def nodes(self, n):
        """Momenta and weights of the n-point Gauss-Hermite rule for |phi|^2."""
        z, w = special.roots_hermite(n)
        return self.p_bar + math.sqrt(2.0) * self.sigma_p * z, w / math.sqrt(math.pi)


@dataclass(frozen=True)
class XRule:
    """Where the translation operator is evaluated: ``x = v t`` or fixed."""

    comoving: bool = True
    x: float = 0.0

    @classmethod
    def parse(cls, text):
        s = str(text).strip().lower()
        if s == "comoving":
            return cls(True)
        if s.startswith("fixed"):
            _, _, val = s.partition(":")
            val = val.strip() or "0"
            try:
                return cls(False, float(val))
            except ValueError:
                raise ParameterError(f"bad fixed position in x rule {text!r}") from None
        raise ParameterError(f"x rule must be 'comoving' or 'fixed:<x>', got {text!r}")

    def position(self, v, t):
        return v * t if self.comoving else self.x

    def __str__(self):
        return "comoving" if self.comoving else f"fixed:{self.x:g}"


COMOVING = XRule(True)


class RegimeWarning(UserWarning):
    pass


def regime_flags(dist, smear, factor=10.0):
    """Check Gamma << sigma_p << M as factor-of-``factor`` separations."""
    width_ok = dist.Gamma * factor <= smear.sigma_p
    mass_ok = smear.sigma_p * factor <= dist.M
    return {"gamma_below_sigma": bool(width_ok), "sigma_below_mass": bool(mass_ok)}


def regime_message(flags):
    bad = []
    if not flags["gamma_below_sigma"]:
        bad.append("Gamma <= sigma_p/10 violated")
    if not flags["sigma_below_mass"]:
        bad.append("sigma_p <= M/10 violated")
    if not bad:
        return None
    return ("momentum-smearing regime Gamma << sigma_p << M does not hold ("
            + "; ".join(bad) + "); the approximate phase models assume it")


@dataclass
class AmplitudeSeries:
    """Complex amplitudes on a time grid, with bounds on P = |A|^2."""

    grid: TimeGrid
    amplitudes: np.ndarray
    error_bounds: np.ndarray
    label: str
    notes: dict = field(default_factory=dict)
    probabilities: np.ndarray = field(init=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        self.error_bounds = np.asarray(self.error_bounds, dtype=float)
        self.probabilities = np.abs(self.amplitudes) ** 2

    @property
    def failed(self):
        return ~np.isfinite(self.amplitudes)

    @property
    def wholly_failed(self):
        return bool(np.all(self.failed))

    def to_csv(self, path):
        write_series_csv([self], path)


SERIES_COLUMNS = ("t", "t_over_tau", "re_A", "im_A", "P", "err_bound", "label")


def _fmt(x):
    return repr(float(x))


def write_series_csv(series_list, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_COLUMNS)
        for s in series_list:
            for t, tt, a, P, e in zip(s.grid.t, s.grid.t_over_tau, s.amplitudes,
                                      s.probabilities, s.error_bounds):
                w.writerow([_fmt(t), _fmt(tt), _fmt(a.real), _fmt(a.imag), _fmt(P), _fmt(e),
                            s.label])


def prob_bound(amp, amp_err):
    """Bound on | |A|^2 - |A_true|^2 | given |A - A_true| <= amp_err."""
    return 2.0 * abs(amp) * amp_err + amp_err * amp_err


class _Evaluator:
    """Amplitude of one integrand at arbitrary t with either engine."""

    def __init__(self, integrand, engine="fast"):
        if engine not in ("fast", "oracle"):
            raise ParameterError(f"engine must be 'fast' or 'oracle', got {engine!r}")
        self.fi = integrand
        self.engine = engine
        if engine == "fast":
            quad._layout(integrand)

    def __call__(self, t):
        """Return (amplitude, amplitude error bound, note or None)."""
        try:
            if self.engine == "fast":
                r = quad.fourier_transform_fast(self.fi, t)
                return r.value, r.error, None
            n = quad.oracle_points(self.fi, t)
            if n > ORACLE_MAX_POINTS:
                raise OracleRefusal(f"oracle would need {n} samples at t={t:g}")
            a = quad.fourier_transform_oracle(self.fi, t, n)
            # midpoint bias is about (h t)^2 / 24 of the boundary terms
            return a, self.fi.tail_bound(t) + ORACLE_ABS_ERR, None
        except ConvergenceError as exc:
            if exc.estimate is None:
                return complex("nan+nanj"), math.inf, str(exc)
            return exc.estimate, exc.error_bound, str(exc)
        except OracleRefusal as exc:
            return complex("nan+nanj"), math.inf, str(exc)


def _map(fn, items, threads):
    if threads is None or threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _assemble(grid, results, label):
    amps = np.array([r[0] for r in results], dtype=complex)
    errs = np.array([prob_bound(r[0], r[1]) if np.isfinite(r[0]) else math.inf
                     for r in results])
    notes = {i: r[2] for i, r in enumerate(results) if r[2]}
    for i, msg in notes.items():
        LOGGER.warning("%s: t=%g: %s", label, grid.t[i], msg)
    return AmplitudeSeries(grid, amps, errs, label, notes)


def survival_rest(dist, grid, eps=quad.DEFAULT_EPS, engine="fast", threads=1):
    """A_0(t) = int omega(m) exp(-imt) dm."""
    return survival_momentum(dist, 0.0, grid, eps=eps, engine=engine, threads=threads,
                             label="rest")


def survival_momentum(dist, p, grid, eps=quad.DEFAULT_EPS, engine="fast", threads=1,
                      label=None):
    """A_p(t) = int omega(m) exp(-it sqrt(m^2+p^2)) dm."""
    if p < 0:
        raise DomainError(f"momentum must be nonnegative, got {p}")
    ev = _Evaluator(quad.to_energy_representation(dist, p, eps), engine)
    if label is None:
        label = f"momentum p={p:.12g}"
    results = _map(ev, grid.t.tolist(), threads)
    return _assemble(grid, results, label)


def rest_provider(dist, eps=quad.DEFAULT_EPS, engine="fast"):
    """Callable t -> P_0(t) that evaluates the amplitude directly at each t."""
    ev = _Evaluator(quad.to_energy_representation(dist, 0.0, eps), engine)

    def provider(t):
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.array([abs(ev(x)[0]) ** 2 for x in arr])
        return out if np.ndim(t) else float(out[0])

    provider.evaluator = ev
    return provider


class _MomentumIntegrands:
    # |p| -> evaluator, built on first use
    def __init__(self, dist, eps, engine):
        self.dist, self.eps, self.engine = dist, eps, engine
        self._store = {}

    def __getitem__(self, p):
        key = abs(float(p))
        ev = self._store.get(key)
        if ev is None:
            ev = _Evaluator(quad.to_energy_representation(self.dist, key, self.eps), self.engine)
            self._store[key] = ev
        return ev

    def prepare(self, momenta):
        for p in momenta:
            self[p]


def _inner_sum(smear, n, kappa, amp_of_p):
    """sum_j w_j exp(-i kappa p_j) A(p_j) with its summed error."""
    ps, ws = smear.nodes(n)
    val = 0j
    err = 0.0
    notes = []
    for p, w in zip(ps, ws):
        a, e, note = amp_of_p(p)
        val += w * np.exp(-1j * kappa * p) * a
        err += w * e
        if note:
            notes.append(note)
    return val, err, notes


def survival_velocity_frame(dist, smear, v, x_rule=COMOVING, model=PhaseModel.EXACT, grid=None,
                            eps=quad.DEFAULT_EPS, engine="fast", threads=1, label=None):
    """A_v(t; x) = int dm omega(m) int dp |phi(p)|^2 exp(-i E' t + i k' x).

    ``(E', k')`` follow ``model``.  Every model's phase splits as
    ``T eps(m, p) + kappa p`` (see :func:`kinematics.phase_split`), so the
    mass integral is a rest-frame (approximate models) or fixed-momentum
    (exact model) transform at the shifted time ``T``, and the momentum
    integral is a Gauss-Hermite sum over |phi|^2, doubled from 64 nodes
    until two successive sums agree.
    """
    if grid is None:
        raise ParameterError("grid is required")
    lorentz_gamma(v)
    model = PhaseModel(model)
    if isinstance(x_rule, str):
        x_rule = XRule.parse(x_rule)
    msg = regime_message(regime_flags(dist, smear))
    if msg:
        warnings.warn(msg, RegimeWarning, stacklevel=2)
    if label is None:
        label = f"velocity v={v:.12g} {model.value} x={x_rule}"

    if model is PhaseModel.EXACT:
        store = _MomentumIntegrands(dist, eps, engine)
        # larger rules are built lazily if the sum has not converged
        store.prepare(smear.nodes(INNER_NODES)[0])
        store.prepare(smear.nodes(2 * INNER_NODES)[0])
    else:
        rest = _Evaluator(quad.to_energy_representation(dist, 0.0, eps), engine)

    def point(t):
        x = x_rule.position(v, t)
        T, kappa, uses_energy = phase_split(model, v, t, x)
        if uses_energy:
            def amp_of_p(p):
                return store[p](T)
        else:
            a0, e0, note0 = rest(T)

            def amp_of_p(p):
                return a0, e0, note0
        n = INNER_NODES
        prev = _inner_sum(smear, n, kappa, amp_of_p)
        while True:
            if n >= INNER_MAX_NODES:
                val, err, notes = prev
                notes = notes + [f"momentum sum not converged at {n} nodes"]
                return val, err + diff, "; ".join(sorted(set(notes)))
            n *= 2
            cur = _inner_sum(smear, n, kappa, amp_of_p)
            diff = abs(cur[0] - prev[0])
            if diff <= INNER_TOL:
                val, err, notes = cur
                note = "; ".join(sorted(set(notes))) or None
                return val, err + diff, note
            prev = cur

    results = _map(point, grid.t.tolist(), threads)
    return _assemble(grid, results, label)
