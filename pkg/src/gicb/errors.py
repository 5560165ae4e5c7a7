"""Exception hierarchy shared by all gicb modules."""


class GICBError(Exception):
    """Base class for every error raised by this package."""


class LabelError(GICBError, KeyError):
    """A variable label is missing from a GaussianSystem (or duplicated)."""

    def __str__(self):
        return str(self.args[0]) if self.args else "label error"


class InvalidCovarianceError(GICBError, ValueError):
    """Matrix is not symmetric positive semidefinite within tolerance."""


class InvalidChannelError(GICBError, ValueError):
    """Channel description cannot be turned into a valid network."""


class InvalidGenieError(GICBError, ValueError):
    """Genie parameters are out of range (|rho| > 1, non-PSD Sigma, ...)."""


class InfeasibleGenieError(GICBError, ValueError):
    """Slack variables of an EPI bound are not strictly positive."""


class DomainError(GICBError, ValueError):
    """Operation requested outside the regime where its bound is valid."""


class PreconditionError(GICBError, ValueError):
    """Inputs violate the hypothesis of the inequality being verified."""


class InvalidOrderingError(GICBError, ValueError):
    """Permutation is not a valid ordering function."""


class InputError(GICBError, ValueError):
    """Malformed or missing input file, or an invalid command-line value."""
