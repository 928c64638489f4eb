"""Exception hierarchy shared by all fluxon modules."""


class FluxonError(Exception):
    """Base class for every error raised by fluxon."""


class ValidationError(FluxonError, ValueError):
    """A physical parameter or configuration value violates its invariant."""


class DegenerateJunction(FluxonError, ValueError):
    """The SQUID is biased at a flux where its Josephson energy vanishes."""


class InfeasibleProfile(FluxonError, ValueError):
    """A requested scale-factor profile is outside the circuit's tunable range.

    Attributes
    ----------
    max_mass_sq : float
        Largest m^2 a^2 the circuit can realize (rad^2/s^2).
    time_range : tuple of float or None
        First and last offending sample time, if known.
    """

    def __init__(self, message, max_mass_sq=None, time_range=None):
        super().__init__(message)
        self.max_mass_sq = max_mass_sq
        self.time_range = time_range


class OutOfRange(FluxonError, ValueError):
    """Tabulated profile evaluated outside its time table."""


class PoleError(FluxonError, ValueError):
    """Gamma function evaluated at a non-positive integer."""


class PreconditionNotAsymptotic(FluxonError, ValueError):
    """Integration endpoints are not inside the static in/out regions."""


class StepSizeUnderflow(FluxonError, ArithmeticError):
    """Adaptive integrator could not meet the tolerance."""


class NotConverged(FluxonError, ArithmeticError):
    """Late-time Bogoliubov extraction did not settle."""
