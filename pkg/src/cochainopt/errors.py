"""Exception types shared across the package."""


class CochainoptError(Exception):
    """Base class for all package errors."""


class InputError(CochainoptError):
    """Malformed user input: bad files, non-finite data, domain mismatches."""


class PreconditionError(CochainoptError):
    """A documented precondition of an operation does not hold."""


class InternalConsistencyError(CochainoptError):
    """A quantity that must hold by construction failed to hold."""
