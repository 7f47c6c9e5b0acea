"""Exception hierarchy shared by all modules."""


class FermicohError(Exception):
    """Base class for library errors."""


class ConfigurationError(FermicohError, ValueError):
    """Invalid construction parameters (mode index out of range, cap exceeded, bad grid)."""


class UsageError(FermicohError, ValueError):
    """Operands that cannot be combined (different algebras, clashing labels)."""


class SubstitutionError(FermicohError, ValueError):
    """A monomial could not be written as a product of y*_k y_k pairs."""


class DomainError(FermicohError, ValueError):
    """Numeric input outside the domain of a formula."""


class NotApplicableError(FermicohError, TypeError):
    """Predicate undefined for the given input (e.g. Grassmann-valued amplitudes)."""


class VerificationError(FermicohError, AssertionError):
    """Two independent routes to the same quantity disagreed."""
