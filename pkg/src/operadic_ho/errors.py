"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class PositivityError(DomainError):
    """A matrix expected to be positive semidefinite has a clearly negative eigenvalue."""


class TruncationError(RuntimeError):
    """The Fock truncation is too small for the requested computation."""
