"""Exception hierarchy."""


class ReldecayError(Exception):
    pass


class ParameterError(ReldecayError, ValueError):
    """Invalid model parameter (widths, masses, grids, configs)."""


class DomainError(ReldecayError, ValueError):
    """Argument outside the mathematical domain (v >= 1, m < 0, nan)."""


class ConvergenceError(ReldecayError, ArithmeticError):
    """Quadrature did not reach its tolerance.

    ``estimate`` and ``error_bound`` carry the best available result.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class OracleRefusal(ReldecayError, ValueError):
    """Brute-force rule asked to run below its sampling precondition."""


class ConfigError(ReldecayError, ValueError):
    pass
