"""Exception types shared across the package."""


class ExarrayError(Exception):
    """Base class for all package-specific errors."""


class CanonicalizationError(ExarrayError, ValueError):
    """A subset key was presented in non-canonical form (unsorted or duplicated)."""


class ArityError(ExarrayError, ValueError):
    """An edge or map has the wrong number of indices for the declared arity."""


class SpaceMismatchError(ExarrayError, TypeError):
    """A point or set descriptor does not belong to the expected value space."""


class DomainError(ExarrayError, ValueError):
    """An argument lies outside the operation's domain (e.g. eps <= 0, k < n)."""


class UnsupportedError(ExarrayError, ValueError):
    """The requested combination of inputs is not supported."""


class IncompleteAssignmentError(ExarrayError, KeyError):
    """A latent assignment is missing a subset required by the representation body."""


class SpecValidationError(ExarrayError, ValueError):
    """A representation spec violates its own declared contract."""


class InjectivityError(ExarrayError, ValueError):
    """An index map was required to be injective but is not."""
