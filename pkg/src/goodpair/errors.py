"""Exception types shared across the package."""


class GoodPairError(Exception):
    """Base class for all errors raised by goodpair."""


class DimensionError(GoodPairError, ValueError):
    """Operands live in rings or spaces of different dimension."""


class ContractError(GoodPairError, ValueError):
    """An operation was called outside its documented preconditions."""


class PreconditionError(ContractError):
    """A quantitative hypothesis (e.g. a gradient-dominance inequality) fails."""
