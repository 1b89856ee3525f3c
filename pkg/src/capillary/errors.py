"""Exception types raised across the package."""


class CapillaryError(Exception):
    """Base class for all package errors."""


class ThermoDomainError(CapillaryError, ValueError):
    """State outside the domain of an equation of state."""


class NonFiniteError(CapillaryError, ArithmeticError):
    """A thermodynamic evaluation produced inf or nan."""


class ConvergenceError(CapillaryError, RuntimeError):
    """Newton iteration did not converge within the iteration budget."""


class SingularJacobianError(CapillaryError, ArithmeticError):
    """The energy Hessian used as Newton Jacobian is (numerically) singular."""


class NotPositiveDefiniteError(CapillaryError, ArithmeticError):
    """Cholesky factorisation of the matrix A failed.

    Attributes:
        pivot: zero-based index of the first non-positive pivot.
    """

    def __init__(self, pivot: int, message: str | None = None):
        self.pivot = pivot
        super().__init__(
            message or f"matrix A is not positive definite (pivot {pivot} non-positive)"
        )


class EigensolverError(CapillaryError, RuntimeError):
    """The Hermitian eigensolver failed."""


class SimulationBlowUp(CapillaryError, RuntimeError):
    """A time integration produced a non-finite or non-physical state.

    Attributes:
        last_good: the last field that passed the finiteness/positivity checks.
        time: simulation time of ``last_good``.
        log: audit rows recorded before the failure, if available.
    """

    def __init__(self, last_good, time: float, reason: str = "non-finite state", log=None):
        self.last_good = last_good
        self.time = time
        self.log = log
        super().__init__(f"simulation blew up ({reason}); last good time t={time!r}")


class ConfigError(CapillaryError, ValueError):
    """Invalid run configuration."""
