"""Collinear Lorentz kinematics and the approximate boost models.

Everything is reduced to one axis parallel to the boost plus a scalar
perpendicular momentum, which passes through a boost unchanged.
"""
import enum
import math
from dataclasses import dataclass

from .errors import DomainError, ParameterError


class PhaseModel(str, enum.Enum):
    """Energy-momentum relation used inside the moving-frame amplitude.

    EXACT
        E' = gamma (E_m(p) + v p),  k' = gamma (p + v E_m(p))
    CARLO_APPROX
        E_m(p) replaced by m but the v p term kept:
        E' = gamma (m + v p),  k' = gamma (p + v m)
    CORRECTED_APPROX
        p dropped consistently: E' = gamma m,  k' = gamma v m
    """

    EXACT = "Exact"
    CARLO_APPROX = "CarloApprox"
    CORRECTED_APPROX = "CorrectedApprox"

    @classmethod
    def parse(cls, name):
        key = str(name).strip().lower().replace("_", "").replace("-", "")
        for member in cls:
            if member.value.lower() == key or member.name.lower().replace("_", "") == key:
                return member
        raise ParameterError(f"unknown phase model {name!r}; expected one of "
                             + ", ".join(m.value for m in cls))


def _check_v(v):
    if not (0.0 <= v < 1.0):
        raise DomainError(f"boost speed must satisfy 0 <= v < 1, got {v}")


def lorentz_gamma(v):
    _check_v(v)
    return 1.0 / math.sqrt((1.0 - v) * (1.0 + v))


def energy_rest(m, p):
    """E_m(p) = sqrt(m^2 + p^2)."""
    if m < 0:
        raise DomainError(f"mass must be nonnegative, got {m}")
    return math.hypot(m, p)


def gamma_from_p(M, p):
    if not M > 0:
        raise ParameterError(f"reference mass must be positive, got {M}")
    return math.hypot(M, p) / M


def velocity_from_p(M, p):
    return abs(p) / math.hypot(M, p)


@dataclass(frozen=True)
class Kinematics:
    """Reference mass with a momentum; gamma and v are always derived."""

    M: float
    p: float

    def __post_init__(self):
        if not self.M > 0:
            raise ParameterError(f"reference mass must be positive, got {self.M}")
        if not math.isfinite(self.p):
            raise DomainError(f"momentum must be finite, got {self.p}")

    @classmethod
    def from_velocity(cls, M, v):
        g = lorentz_gamma(v)
        return cls(M, M * g * v)

    @property
    def gamma(self):
        return gamma_from_p(self.M, self.p)

    @property
    def v(self):
        return velocity_from_p(self.M, self.p)

    @property
    def energy(self):
        return energy_rest(self.M, self.p)


def boost_energy_exact(m, p_par, p_perp, v):
    g = lorentz_gamma(v)
    return g * (energy_rest(m, math.hypot(p_par, p_perp)) + v * p_par)


def boost_momentum_exact(m, p_par, v, p_perp=0.0):
    """Parallel momentum after the boost; the perpendicular part is unchanged."""
    g = lorentz_gamma(v)
    return g * (p_par + v * energy_rest(m, math.hypot(p_par, p_perp)))


def boost_energy_model(model, m, p_par, p_perp, v):
    model = PhaseModel(model)
    if model is PhaseModel.EXACT:
        return boost_energy_exact(m, p_par, p_perp, v)
    g = lorentz_gamma(v)
    if model is PhaseModel.CARLO_APPROX:
        return g * (m + v * p_par)
    return g * m


def boost_momentum_model(model, m, p_par, v, p_perp=0.0):
    model = PhaseModel(model)
    if model is PhaseModel.EXACT:
        return boost_momentum_exact(m, p_par, v, p_perp)
    g = lorentz_gamma(v)
    if model is PhaseModel.CARLO_APPROX:
        return g * (p_par + v * m)
    return g * v * m


def phase_split(model, v, t, x):
    """Coefficients ``(T, kappa, uses_energy)`` with

        E' t - k' x = T * eps(m, p) + kappa * p

    where ``eps`` is E_m(p) when ``uses_energy`` is true and m otherwise.
    This is what lets the moving-frame amplitude reuse the rest-frame and
    fixed-momentum transforms.
    """
    model = PhaseModel(model)
    g = lorentz_gamma(v)
    T = g * (t - v * x)
    if model is PhaseModel.CORRECTED_APPROX:
        return T, 0.0, False
    return T, g * (v * t - x), model is PhaseModel.EXACT


@dataclass(frozen=True)
class ConsistencyRecord:
    m: float
    p_par: float
    v: float
    r_identity: float
    r_carlo: float
    r_corrected: float


def consistency_residual(m, p_par, v):
    """Residuals of the gamma identity and of both approximate energies.

    ``r_identity`` is |gamma (m + v p)/m - gamma|, evaluated as written; in
    closed form it equals gamma v |p| / m.
    """
    if not m > 0:
        raise ParameterError(f"mass must be positive, got {m}")
    g = lorentz_gamma(v)
    e_exact = boost_energy_exact(m, p_par, 0.0, v)
    return ConsistencyRecord(
        m=m, p_par=p_par, v=v,
        r_identity=abs(g * (1.0 + v * p_par / m) - g),
        r_carlo=abs(e_exact - g * (m + v * p_par)),
        r_corrected=abs(e_exact - g * m),
    )
