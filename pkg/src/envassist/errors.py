"""Exception types raised by the library."""


class DomainError(ValueError):
    """An argument lies outside its admissible range."""


class NumericalConsistencyError(ArithmeticError):
    """A computed quantity violates an invariant it must satisfy by theory."""


class InconsistentMomentsError(NumericalConsistencyError):
    """The first risk moment has weight outside the support of the zeroth."""


class ClassificationError(RuntimeError):
    """Optimisation reports do not fit any known strategy class."""
