"""Exception hierarchy shared by all modules."""


class LieBoundsError(Exception):
    """Base class for every error raised by this package."""


class BranchFailure(LieBoundsError, ArithmeticError):
    """The principal matrix logarithm does not exist (eigenvalue on the negative real axis)."""


class NotApplicable(LieBoundsError):
    """A closed form was requested for a group/pair where none is available."""


class InvalidLog(LieBoundsError):
    """A computed logarithm does not lie in the Lie algebra."""


class NoDecomposition(LieBoundsError):
    """No feasible exponential factorisation could be found."""


class NotMaterializable(LieBoundsError):
    """The representation has no finite matrix form (Lorentz scalar representation)."""


class NotAvailable(LieBoundsError):
    """No improved energy operator is known for this representation."""


class LocalRegimeViolation(LieBoundsError):
    """A Hilbert-space comparison of a projective representation was requested for distant elements."""


class InvalidEnergyBudget(LieBoundsError):
    """The energy budget is not above the bottom of the spectrum."""


class QuadratureError(LieBoundsError):
    """Successive quadrature refinements disagree."""


class ConfigError(LieBoundsError, ValueError):
    """Invalid experiment or CLI configuration."""
