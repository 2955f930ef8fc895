"""Exception hierarchy."""


class LoccError(Exception):
    """Base class for all package errors."""


class DimensionLimitError(LoccError):
    """A tensor product would exceed the configured dimension cap."""


class SignatureError(LoccError, ValueError):
    """Shapes or dimension signatures are inconsistent."""


class DegenerateInputError(LoccError, ValueError):
    """Input is the zero vector or otherwise degenerate."""


class PartitionError(LoccError, ValueError):
    """Index sets do not partition the local basis."""


class CompletenessError(LoccError, ValueError):
    """Measurement operators do not satisfy sum M^dag M = I."""


class EmptyBranchError(LoccError):
    """Every input state is eliminated by a measurement outcome."""


class SearchBudgetError(LoccError):
    """Numerical search exhausted its budget without a solution."""


class PreconditionError(LoccError, ValueError):
    """An operation precondition does not hold."""


class NotFoundError(LoccError, KeyError):
    """Unknown catalog identifier."""


class UnsupportedDemoError(LoccError):
    """Catalog entry has no activating measurement to demonstrate."""
