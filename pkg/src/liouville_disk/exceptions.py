"""Exception hierarchy shared by the numerical modules and the CLI."""


class LiouvilleError(Exception):
    """Base class for all package errors."""


class DomainError(LiouvilleError, ValueError):
    """A point, ball or parameter lies outside the admissible domain."""


class DegenerateInputError(LiouvilleError, ValueError):
    pass


class SingularityError(LiouvilleError, ValueError):
    """Kernel evaluated on its diagonal x == y."""


class ConfigurationError(LiouvilleError, ValueError):
    pass


class StencilError(LiouvilleError):
    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = list(nodes)


class NonConvergenceError(LiouvilleError, RuntimeError):
    """Newton iteration failed; ``residual`` carries the last residual norm."""

    def __init__(self, message, residual=float("nan"), stage="newton"):
        super().__init__(message)
        self.residual = residual
        self.stage = stage


class FoldError(NonConvergenceError):
    """Jacobian numerically singular (turning point of the branch)."""


class StallError(NonConvergenceError):
    pass


class NoSolutionError(LiouvilleError, ValueError):
    pass


class RunawayError(LiouvilleError, RuntimeError):
    """Blow-up extraction exceeded ``max_points``; the threshold is too low."""
