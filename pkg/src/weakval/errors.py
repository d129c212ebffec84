"""Exception taxonomy shared by all weakval modules."""


class WeakvalError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(WeakvalError):
    """A scenario/config file is malformed or fails validation."""


class PreconditionError(WeakvalError):
    """A documented numerical precondition of an operation is violated."""


class DegenerateNormalizationError(PreconditionError):
    """The normalization integral of a distribution is below the degeneracy
    threshold, so normalized moments are undefined.

    This signals the anomalous-weak-value regime rather than a numerical
    bug; callers that can work with unnormalized quantities should catch it.
    """

    def __init__(self, norm, threshold, message=None):
        self.norm = norm
        self.threshold = threshold
        if message is None:
            message = (
                f"normalization integral |{norm:.3e}| is below the "
                f"degeneracy threshold {threshold:.3e}"
            )
        super().__init__(message)


class GridResolutionError(PreconditionError):
    """A grid is too coarse or too short for the requested tolerance."""
