"""Exception types shared across the package."""


class QVirasoroError(Exception):
    """Base class for all package-specific errors."""


class RegimeError(QVirasoroError):
    """Parameters violate the regime a routine was derived for.

    Raised e.g. when a series product form is evaluated outside its
    region of convergence, or when strict deformation parameters are
    required but not supplied.
    """


class PoleError(QVirasoroError):
    """Evaluation requested exactly at (or numerically on top of) a pole."""


class ConvergenceError(QVirasoroError):
    """An infinite sum or product failed to converge.

    The ``direction`` attribute, when set, records which lattice
    direction diverged ("upper" / "lower") for bilateral sums.
    """

    def __init__(self, message: str, direction: str | None = None):
        super().__init__(message)
        self.direction = direction


class TruncationError(QVirasoroError):
    """A requested coefficient or matrix element lies outside the
    truncation window the object was built with."""


class ConfigError(QVirasoroError):
    """Invalid run configuration (bad parameter regime, unknown suite,
    malformed config file).  The CLI maps this to exit status 3."""
