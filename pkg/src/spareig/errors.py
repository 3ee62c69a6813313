"""Exception types and CLI exit codes."""


class InvalidInput(ValueError):
    """Raised when an argument violates a documented precondition."""


class NoConvergence(RuntimeError):
    """Raised when an iterative routine hits its iteration cap.

    Carries the final residual when available (attribute ``residual``).
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class GenerationFailed(RuntimeError):
    """Raised when random instance generation exhausts its resample budget."""


class RefusesToCertify(RuntimeError):
    """Raised when certification is requested for an unconverged solution."""


# process exit codes used by the command-line front end
EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_NO_CONVERGENCE = 3
