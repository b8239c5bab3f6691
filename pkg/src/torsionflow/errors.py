"""Exception types raised across the package."""


class TorsionFlowError(Exception):
    """Base class for all package errors."""


class DegenerateContact(TorsionFlowError):
    """theta wedge d theta vanishes: no Reeb field exists."""


class NonCompatibleJ(TorsionFlowError):
    """J fails J^2 = -I or the positivity d theta(X, JX) > 0."""


class SingularSystem(TorsionFlowError):
    """The structure-equation solve is rank deficient (coframe not adapted)."""


class NonRealFactor(TorsionFlowError):
    """A conformal exponent has a nonzero imaginary part."""


class BackgroundMismatch(TorsionFlowError):
    """Jets over different conformal exponents were combined."""


class UnsupportedIndexType(TorsionFlowError):
    """Tensor rank not handled by the covariant derivative."""


class PreconditionViolated(TorsionFlowError):
    """An identity was requested outside its hypotheses."""


class UnsupportedBackground(TorsionFlowError):
    """Operator is only pinned down on the flat background."""


class ExtinctionReached(TorsionFlowError):
    """Contact-form scale fell below the extinction guard."""


class StepUnstable(TorsionFlowError):
    """The integrator left the region where J stays bounded."""


class InsufficientSamples(TorsionFlowError):
    """Too few trajectory samples for a centered difference."""


class FamilyEvaluationFailed(TorsionFlowError):
    """A one-parameter family could not be evaluated near the base point."""


class ConfigInvalid(TorsionFlowError):
    """Scenario configuration is missing fields or malformed."""


class UnknownSuite(TorsionFlowError):
    """Requested verification suite does not exist."""
