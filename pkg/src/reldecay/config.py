"""Flat ``key = value`` run configurations.

Keys use dotted section prefixes (``distribution.M = 1``).  Values are
numbers, booleans, comma-separated lists or bare strings; ``#`` starts a
comment.  All times are in lifetime units.
"""
import math
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import massdist
from .amplitudes import MAX_T_LIFETIMES, MomentumSmearing, RegimeWarning, TimeGrid, XRule, \
    regime_flags, regime_message
from .errors import ConfigError, ReldecayError
from .kinematics import PhaseModel, gamma_from_p, lorentz_gamma

DEFAULTS = {
    "distribution.kind": "BreitWigner",
    "distribution.mu0": 0.0,
    "smearing.p_bar": 0.0,
    "smearing.sigma_p": None,
    "phase_models": ["Exact"],
    "x_rule": "comoving",
    "grid.spacing": "log",
    "grid.t_min": 1e-2,
    "analyses.compare": True,
    "analyses.transition": False,
    "analyses.scan": False,
    "compare.window": [0.0, 5.0],
    "transition.threshold": 2.0,
    "transition.anchor": 1.0,
    "output_dir": "out",
    "seed": 0,
    "engine.eps": 1e-10,
}

KNOWN = set(DEFAULTS) | {
    "distribution.M", "distribution.Gamma", "distribution.table",
    "kinematics.p", "kinematics.v",
    "grid.t_max", "grid.n",
    "scan.m", "scan.p_par", "scan.v",
}
_PER_MODEL = re.compile(r"^x_rules\.(\w+)$")
_LINSPACE = re.compile(r"^linspace\(\s*([^,]+),\s*([^,]+),\s*([^,)]+)\)$")


@dataclass
class RunConfig:
    dist: Optional[massdist.MassDistribution] = None
    p: Optional[float] = None
    v: Optional[float] = None
    smearing: Optional[MomentumSmearing] = None
    phase_models: tuple = (PhaseModel.EXACT,)
    x_rules: dict = field(default_factory=dict)
    t_max: Optional[float] = None
    n_points: Optional[int] = None
    spacing: str = "log"
    t_min: float = 1e-2
    compare: bool = True
    transition: bool = False
    scan: bool = False
    window: tuple = (0.0, 5.0)
    threshold: float = 2.0
    anchor: float = 1.0
    scan_m: tuple = ()
    scan_p: tuple = ()
    scan_v: tuple = ()
    output_dir: str = "out"
    seed: int = 0
    eps: float = 1e-10
    raw: dict = field(default_factory=dict)
    regime_warning: Optional[str] = None

    @property
    def scan_only(self):
        return self.dist is None

    @property
    def gamma(self):
        if self.p is not None:
            return gamma_from_p(self.dist.M, self.p)
        if self.v is not None:
            return lorentz_gamma(self.v)
        return None

    def grid(self):
        tau = self.dist.tau
        if self.spacing == "linear":
            return TimeGrid.linear(tau, self.t_max, self.n_points)
        extra = [x for x in (self.anchor,) + tuple(self.window) if 0 < x < self.t_max]
        return TimeGrid.log(tau, self.t_max, self.n_points, t_min=self.t_min,
                            include_zero=True, extra=extra)

    def echo(self):
        """Canonical ``key = value`` lines of the effective configuration."""
        return [f"{k} = {_render(v)}" for k, v in sorted(self.raw.items()) if v is not None]


def _render(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_render(x) for x in v)
    return str(v)


def _scalar(text):
    s = text.strip()
    low = s.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("inf", "+inf", "-inf", "infinity", "-infinity"):
        return float(low.replace("infinity", "inf"))
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def parse_value(text):
    s = text.strip()
    m = _LINSPACE.match(s)
    if m:
        a, b, n = (_scalar(x) for x in m.groups())
        if not isinstance(n, int) or n < 1:
            raise ConfigError(f"bad linspace count in {text!r}")
        return [float(x) for x in np.linspace(float(a), float(b), n)]
    if "," in s:
        return [_scalar(x) for x in s.split(",") if x.strip()]
    return _scalar(s)


def parse_document(text):
    """Raw ``{key: value}`` mapping; duplicate keys are an error."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = parse_value(val)
    return out


def _num(raw, key, positive=False, allow_inf=False):
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {v!r}")
    v = float(v)
    if math.isnan(v) or (math.isinf(v) and not allow_inf):
        raise ConfigError(f"{key}: must be finite, got {v}")
    if positive and not v > 0:
        raise ConfigError(f"{key}: must be positive, got {v}")
    return v


def _flag(raw, key):
    v = raw[key]
    if not isinstance(v, bool):
        raise ConfigError(f"{key}: expected true/false, got {v!r}")
    return v


def _list(raw, key):
    v = raw[key]
    return list(v) if isinstance(v, list) else [v]


def parse_config(text, base_dir=None):
    """Validate a document into a :class:`RunConfig`.

    Emits :class:`RegimeWarning` when the smearing regime does not hold.
    """
    given = parse_document(text)
    unknown = sorted(k for k in given if k not in KNOWN and not _PER_MODEL.match(k))
    if unknown:
        raise ConfigError("unknown keys: " + ", ".join(unknown))
    raw = dict(DEFAULTS)
    raw.update(given)
    cfg = RunConfig()

    try:
        cfg.output_dir = str(raw["output_dir"])
        seed = raw["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError(f"seed: expected an integer, got {seed!r}")
        cfg.seed = seed
        cfg.eps = _num(raw, "engine.eps", positive=True)
        cfg.compare = _flag(raw, "analyses.compare")
        cfg.transition = _flag(raw, "analyses.transition")
        cfg.scan = _flag(raw, "analyses.scan")

        if cfg.scan:
            for key, attr in (("scan.m", "scan_m"), ("scan.p_par", "scan_p"), ("scan.v", "scan_v")):
                if key not in raw:
                    raise ConfigError(f"{key}: required when analyses.scan is true")
                vals = _list(raw, key)
                if not vals or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                                       for x in vals):
                    raise ConfigError(f"{key}: expected a list of numbers")
                setattr(cfg, attr, tuple(float(x) for x in vals))
            if any(not m > 0 for m in cfg.scan_m):
                raise ConfigError("scan.m: masses must be positive")
            if any(not 0 <= v < 1 for v in cfg.scan_v):
                raise ConfigError("scan.v: speeds must satisfy 0 <= v < 1")

        has_dist = any(k.startswith(("distribution.", "kinematics.", "grid.")) for k in given)
        if not has_dist:
            if not cfg.scan:
                raise ConfigError("config has no distribution section and no scan")
            cfg.raw = {k: v for k, v in raw.items() if k in given or k.startswith(("scan.", "analyses."))}
            return cfg

        _parse_physics(raw, given, cfg, base_dir)
    except ConfigError:
        raise
    except ReldecayError as exc:
        raise ConfigError(str(exc)) from None

    cfg.raw = raw
    return cfg


def _parse_physics(raw, given, cfg, base_dir):
    kind = str(raw["distribution.kind"])
    mu0 = _num(raw, "distribution.mu0", allow_inf=True)
    if mu0 == math.inf:
        raise ConfigError("distribution.mu0: must be finite or -inf")
    if kind == "Tabulated":
        if "distribution.table" not in raw:
            raise ConfigError("distribution.table: required for a Tabulated distribution")
        path = Path(str(raw["distribution.table"]))
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        if not path.is_file():
            raise ConfigError(f"distribution.table: no such file {path}")
        G = _num(raw, "distribution.Gamma", positive=True) if "distribution.Gamma" in raw else None
        M = _num(raw, "distribution.M") if "distribution.M" in raw else None
        cfg.dist = massdist.load_table_csv(path, Gamma=G, M=M)
    elif kind in ("BreitWigner", "Gaussian"):
        for key in ("distribution.M", "distribution.Gamma"):
            if key not in raw:
                raise ConfigError(f"{key}: required")
        M = _num(raw, "distribution.M")
        G = _num(raw, "distribution.Gamma", positive=True)
        make = massdist.breit_wigner if kind == "BreitWigner" else massdist.gaussian
        cfg.dist = make(M, G, mu0)
    else:
        raise ConfigError(f"distribution.kind: unknown kind {kind!r}")

    has_p = "kinematics.p" in given
    has_v = "kinematics.v" in given
    if has_p == has_v:
        raise ConfigError("kinematics: give exactly one of kinematics.p or kinematics.v")
    if has_p:
        cfg.p = _num(raw, "kinematics.p")
        if cfg.p < 0:
            raise ConfigError(f"kinematics.p: must be nonnegative, got {cfg.p}")
    else:
        cfg.v = _num(raw, "kinematics.v")
        if not 0 <= cfg.v < 1:
            raise ConfigError(f"kinematics.v: must satisfy 0 <= v < 1, got {cfg.v}")

    for key in ("grid.t_max", "grid.n"):
        if key not in raw:
            raise ConfigError(f"{key}: required")
    cfg.t_max = _num(raw, "grid.t_max", positive=True)
    if cfg.t_max > MAX_T_LIFETIMES:
        raise ConfigError(f"grid.t_max: at most {MAX_T_LIFETIMES:g} lifetimes, got {cfg.t_max:g}")
    n = raw["grid.n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise ConfigError(f"grid.n: need an integer >= 2, got {n!r}")
    cfg.n_points = n
    cfg.spacing = str(raw["grid.spacing"]).lower()
    if cfg.spacing not in ("log", "linear"):
        raise ConfigError(f"grid.spacing: 'log' or 'linear', got {raw['grid.spacing']!r}")
    cfg.t_min = _num(raw, "grid.t_min", positive=True)
    if cfg.spacing == "log" and not cfg.t_min < cfg.t_max:
        raise ConfigError("grid.t_min: must be below grid.t_max")

    win = _list(raw, "compare.window")
    if len(win) != 2 or not all(isinstance(x, (int, float)) for x in win):
        raise ConfigError("compare.window: expected 't_min, t_max'")
    cfg.window = (float(win[0]), float(win[1]))
    if cfg.compare and not 0 <= cfg.window[0] <= cfg.window[1] <= cfg.t_max:
        raise ConfigError("compare.window: must lie inside [0, grid.t_max]")
    cfg.threshold = _num(raw, "transition.threshold", positive=True, allow_inf=True)
    cfg.anchor = _num(raw, "transition.anchor", positive=True)
    if cfg.transition and cfg.t_max < 100:
        raise ConfigError("analyses.transition: needs grid.t_max >= 100")

    models = []
    for name in _list(raw, "phase_models"):
        try:
            m = PhaseModel.parse(name)
        except ReldecayError as exc:
            raise ConfigError(f"phase_models: {exc}") from None
        if m not in models:
            models.append(m)
    cfg.phase_models = tuple(models)

    default_rule = XRule.parse(raw["x_rule"])
    rules = {m: default_rule for m in cfg.phase_models}
    for key, val in raw.items():
        mt = _PER_MODEL.match(key)
        if mt:
            try:
                model = PhaseModel.parse(mt.group(1))
            except ReldecayError as exc:
                raise ConfigError(f"{key}: {exc}") from None
            rules[model] = XRule.parse(val)
    cfg.x_rules = rules

    if cfg.v is not None:
        sig = raw["smearing.sigma_p"]
        if sig is None:
            raise ConfigError("smearing.sigma_p: required when kinematics.v is given")
        cfg.smearing = MomentumSmearing(_num(raw, "smearing.p_bar"),
                                        _num(raw, "smearing.sigma_p", positive=True))
        msg = regime_message(regime_flags(cfg.dist, cfg.smearing))
        if msg:
            cfg.regime_warning = msg
            warnings.warn(msg, RegimeWarning, stacklevel=3)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent)
