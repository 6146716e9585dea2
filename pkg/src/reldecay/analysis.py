"""Dilation-law comparisons, late-time transition detection and the
consistency-residual scan."""
import csv
import enum
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .amplitudes import _map
from .errors import ParameterError
from .kinematics import ConsistencyRecord, consistency_residual, lorentz_gamma

LOGGER = logging.getLogger(__name__)

SEPARATION = 5.0
# deviations below this are indistinguishable from quadrature noise
VERDICT_FLOOR = 1e-5
MIN_TRANSITION_HORIZON = 100.0

__all__ = [
    "Verdict", "DeviationReport", "TransitionReport", "ConsistencyRecord",
    "dilation_compare", "verdict_for", "effective_rate", "transition_time",
    "consistency_scan", "write_deviation_csv", "write_transition_csv",
    "write_consistency_csv", "summary_block",
]


class Verdict(str, enum.Enum):
    DILATED = "DilatedLaw"
    CONTRACTED = "ContractedLaw"
    NEITHER = "Neither"


@dataclass(frozen=True)
class DeviationReport:
    gamma: float
    horizon: float
    dev_dilated: float
    dev_contracted: float
    window: tuple
    verdict: Verdict
    label: str = ""
    error_bound: float = 0.0


@dataclass(frozen=True)
class TransitionReport:
    t_star: Optional[float]
    ratio_at_horizon: float
    log10_ratio: float
    threshold: float
    label: str = ""


def verdict_for(dev_dilated, dev_contracted, separation=SEPARATION, floor=VERDICT_FLOOR):
    """Smaller deviation wins if the other is more than ``separation`` times larger.

    Deviations are clipped from below at ``floor`` so two noise-level values
    never produce a verdict.
    """
    d = max(dev_dilated, floor)
    c = max(dev_contracted, floor)
    if c > separation * d:
        return Verdict.DILATED
    if d > separation * c:
        return Verdict.CONTRACTED
    return Verdict.NEITHER


def dilation_compare(series_p, provider, gamma, window=(0.0, 5.0), separation=SEPARATION,
                     floor=VERDICT_FLOOR):
    """Compare a series against P0(t/gamma) and P0(gamma t) on ``window`` (units of tau).

    ``provider`` maps an array of times to P0; it is called at the rescaled
    times directly, nothing is interpolated.
    """
    if not gamma >= 1.0:
        raise ParameterError(f"gamma must be >= 1, got {gamma}")
    lo, hi = float(window[0]), float(window[1])
    if not lo <= hi:
        raise ParameterError(f"window must satisfy t_min <= t_max, got {window}")
    tt = series_p.grid.t_over_tau
    slack = 1e-9 * max(abs(hi), 1.0)
    if lo < tt[0] - slack or hi > tt[-1] + slack:
        raise ParameterError(
            f"window ({lo:g}, {hi:g}) tau lies outside the grid [{tt[0]:g}, {tt[-1]:g}] tau")
    sel = (tt >= lo - slack) & (tt <= hi + slack)
    if not sel.any():
        raise ParameterError(f"no grid points inside the window ({lo:g}, {hi:g}) tau")
    t = series_p.grid.t[sel]
    P = series_p.probabilities[sel]
    if not np.all(np.isfinite(P)):
        raise ParameterError("series has failed points inside the comparison window")
    p_dil = np.asarray(provider(t / gamma), dtype=float)
    p_con = np.asarray(provider(t * gamma), dtype=float)
    dev_d = float(np.max(np.abs(P - p_dil)))
    dev_c = float(np.max(np.abs(P - p_con)))
    return DeviationReport(
        gamma=float(gamma), horizon=float(tt[-1]), dev_dilated=dev_d, dev_contracted=dev_c,
        window=(lo, hi), verdict=verdict_for(dev_d, dev_c, separation, floor),
        label=series_p.label, error_bound=float(np.max(series_p.error_bounds[sel])))


def effective_rate(series):
    """Local decay rate -d ln P / dt as a list of ``(t, rate)``.

    Second-order differences on the (possibly nonuniform) grid, one-sided at
    the ends.  Points with P <= 0 are dropped with a logged warning.
    """
    t = series.grid.t
    P = series.probabilities
    keep = np.isfinite(P) & (P > 0)
    for i in np.flatnonzero(~keep):
        LOGGER.warning("%s: skipping t=%g with P=%r", series.label, t[i], P[i])
    t, P = t[keep], P[keep]
    if t.size < 2:
        return []
    rate = np.gradient(-np.log(P), t, edge_order=1)
    return list(zip(t.tolist(), rate.tolist()))


def transition_time(series, threshold=2.0, anchor=1.0, use_bounds=True):
    """First time the survival probability exceeds ``threshold`` times the
    exponential extrapolated from ``t1 = anchor`` lifetimes.

    The anchor must be a grid point.  With ``use_bounds`` the detection uses
    the lower bound ``P - err`` so quadrature noise cannot fake a transition;
    ``ratio_at_horizon`` always uses the computed P.
    """
    if not threshold > 0:
        raise ParameterError(f"threshold must be positive, got {threshold}")
    tt = series.grid.t_over_tau
    if tt[-1] < MIN_TRANSITION_HORIZON * (1 - 1e-12):
        raise ParameterError(
            f"transition detection needs a horizon of at least {MIN_TRANSITION_HORIZON:g} tau, "
            f"grid ends at {tt[-1]:g} tau")
    hits = np.flatnonzero(np.isclose(tt, anchor, rtol=1e-9, atol=0.0))
    if hits.size == 0:
        raise ParameterError(f"anchor t={anchor:g} tau is not a grid point")
    i1 = int(hits[0])
    P = series.probabilities
    P1 = P[i1]
    if not (np.isfinite(P1) and P1 > 0):
        raise ParameterError("survival probability at the anchor is not positive")
    lnP1 = math.log(P1)

    def log_ratio(vals):
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = np.where(np.isfinite(vals) & (vals > 0), np.log(np.maximum(vals, 1e-320)), -np.inf)
        return lp - lnP1 + (tt - anchor)

    lr = log_ratio(P)
    lr_detect = log_ratio(P - series.error_bounds) if use_bounds else lr
    t_star = None
    if math.isfinite(threshold):
        after = np.flatnonzero((tt >= anchor) & (lr_detect >= math.log(threshold)))
        if after.size:
            t_star = float(tt[after[0]])
    last = float(lr[-1])
    try:
        ratio = math.exp(last)
    except OverflowError:
        ratio = math.inf
    return TransitionReport(t_star=t_star, ratio_at_horizon=ratio,
                            log10_ratio=last / math.log(10.0) if math.isfinite(last) else last,
                            threshold=float(threshold), label=series.label)


def consistency_scan(m_values, p_par_values, v_values, threads=1):
    """Residuals over the Cartesian product, sorted by r_identity descending.

    Ties are broken by (m, p_par, v) ascending so the order never depends on
    the number of workers.
    """
    ms = [float(x) for x in m_values]
    ps = [float(x) for x in p_par_values]
    vs = [float(x) for x in v_values]
    if not (ms and ps and vs):
        raise ParameterError("consistency scan needs nonempty m, p_par and v grids")
    for m in ms:
        if not m > 0:
            raise ParameterError(f"scan masses must be positive, got {m}")
    for v in vs:
        lorentz_gamma(v)
    combos = list(itertools.product(ms, ps, vs))
    recs = _map(lambda c: consistency_residual(*c), combos, threads)
    recs.sort(key=lambda r: (-r.r_identity, r.m, r.p_par, r.v))
    return recs


# ---------------------------------------------------------------------------
# export


def _fmt(x):
    if x is None:
        return ""
    return repr(float(x))


def write_deviation_csv(reports, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "gamma", "t_min", "t_max", "horizon", "dev_dilated",
                    "dev_contracted", "err_bound", "verdict"])
        for r in reports:
            w.writerow([r.label, _fmt(r.gamma), _fmt(r.window[0]), _fmt(r.window[1]),
                        _fmt(r.horizon), _fmt(r.dev_dilated), _fmt(r.dev_contracted),
                        _fmt(r.error_bound), r.verdict.value])


def write_transition_csv(reports, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "threshold", "t_star", "ratio_at_horizon", "log10_ratio"])
        for r in reports:
            w.writerow([r.label, _fmt(r.threshold), _fmt(r.t_star), _fmt(r.ratio_at_horizon),
                        _fmt(r.log10_ratio)])


def write_consistency_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "p_par", "v", "r_identity", "r_carlo", "r_corrected"])
        for r in records:
            w.writerow([_fmt(r.m), _fmt(r.p_par), _fmt(r.v), _fmt(r.r_identity),
                        _fmt(r.r_carlo), _fmt(r.r_corrected)])


def summary_block(deviations=(), transitions=(), scan=None):
    """Human-readable report text."""
    lines = []
    for r in deviations:
        lines.append(f"[compare] {r.label}: gamma={r.gamma:.6g} window={r.window[0]:g}..{r.window[1]:g} tau "
                     f"dev(t/gamma)={r.dev_dilated:.3e} dev(gamma t)={r.dev_contracted:.3e} "
                     f"-> {r.verdict.value}")
    for r in transitions:
        ts = "none" if r.t_star is None else f"{r.t_star:.6g} tau"
        lines.append(f"[transition] {r.label}: threshold={r.threshold:g} t_star={ts} "
                     f"P/exp at horizon=10^{r.log10_ratio:.3f}")
    if scan is not None:
        if scan:
            top = scan[0]
            lines.append(f"[scan] {len(scan)} records; max r_identity={top.r_identity:.6g} at "
                         f"m={top.m:g} p_par={top.p_par:g} v={top.v:g}")
        else:
            lines.append("[scan] no records")
    return "\n".join(lines)
