"""Survival amplitudes of unstable states at rest and in motion.

Quick use::

    from reldecay import breit_wigner, TimeGrid, survival_rest
    d = breit_wigner(1.0, 1e-3, mu0=0.0)
    s = survival_rest(d, TimeGrid.log(d.tau, 1e3, 200))
"""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .errors import (ConfigError, ConvergenceError, DomainError, OracleRefusal, ParameterError,
                     ReldecayError)
from .massdist import (DistKind, MassDistribution, breit_wigner, density, effective_support,
                       gaussian, load_table_csv, normalize, omega_eval, tabulated)
from .kinematics import (ConsistencyRecord, Kinematics, PhaseModel, boost_energy_exact,
                         boost_energy_model, boost_momentum_exact, boost_momentum_model,
                         consistency_residual, lorentz_gamma)
from .quadrature import (FourierIntegrand, fourier_transform_fast, fourier_transform_oracle,
                         to_energy_representation)
from .amplitudes import (AmplitudeSeries, MomentumSmearing, RegimeWarning, TimeGrid, XRule,
                         rest_provider, survival_momentum, survival_rest, survival_velocity_frame)
from .analysis import (DeviationReport, TransitionReport, Verdict, consistency_scan,
                       dilation_compare, effective_rate, transition_time)
