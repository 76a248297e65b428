"""Exception hierarchy shared by the numerical modules and the CLI."""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_EVANESCENT = 3
EXIT_INVARIANT = 4


class LarmorError(Exception):
    """Base class for all errors raised by the larmor package."""

    exit_code = EXIT_DOMAIN


class DomainError(LarmorError, ValueError):
    """Raised when an input lies outside the domain of an operation."""

    def __init__(self, parameter: str, message: str):
        self.parameter = parameter
        super().__init__(f"{parameter}: {message}")


class EvanescentChannelError(DomainError):
    """Raised when the barrier channel has E <= mu*B and continuation is off.

    Carries the decay constant kappa = sqrt(2m(mu*B - E))/hbar and, for
    wave-packet grids, the first offending wavenumber.
    """

    exit_code = EXIT_EVANESCENT

    def __init__(self, kappa: float, k: float | None = None, cutoff_k: float | None = None):
        self.kappa = kappa
        self.k = k
        self.cutoff_k = cutoff_k
        detail = f"barrier channel is evanescent (kappa={kappa:.6e} 1/m)"
        if k is not None:
            detail += f" at k={k:.6e} 1/m"
        if cutoff_k is not None:
            detail += f"; propagating channels need k > {cutoff_k:.6e} 1/m"
        detail += "; pass --allow-evanescent for analytic continuation"
        super().__init__("B", detail)


class DegenerateSpinorError(DomainError):
    """Raised when a spinor with a = b = 0 is asked for a normalized probability."""

    def __init__(self):
        super().__init__("spinor", "both channel moduli vanish, cannot normalize")


class InvariantViolation(LarmorError):
    """Raised when an internal consistency check fails."""

    exit_code = EXIT_INVARIANT
