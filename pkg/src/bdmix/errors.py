"""Exception hierarchy for bdmix.

Every error raised on purpose by the library derives from :class:`BDMixError`.
Input-validation failures additionally derive from :class:`ValueError` so that
callers that only care about "bad input" can catch the builtin.
"""


class BDMixError(Exception):
    """Base class for all library errors."""


# -- chain validation -------------------------------------------------------

class ChainError(BDMixError, ValueError):
    """A rate triple does not describe a valid irreducible birth-death chain."""


class RowSumError(ChainError):
    pass


class BoundaryError(ChainError):
    pass


class ReducibleError(ChainError):
    pass


class RangeError(ChainError):
    pass


class ParseError(BDMixError, ValueError):
    """Malformed chain or family document."""


# -- argument domains ---------------------------------------------------------

class DomainError(BDMixError, ValueError):
    pass


class SideConditionError(BDMixError, ValueError):
    pass


class DimensionError(BDMixError, ValueError):
    pass


class ZeroWeightError(BDMixError, ValueError):
    pass


class SymmetryError(BDMixError, ValueError):
    pass


class ShapeError(BDMixError, ValueError):
    """A monotonicity (valley / monotone) precondition fails."""


class SpecError(BDMixError, ValueError):
    """Invalid family description."""


class InsufficientDataError(BDMixError, ValueError):
    pass


# -- numerical failures -------------------------------------------------------

class SpectralError(BDMixError, ArithmeticError):
    pass


class AccuracyError(BDMixError, ArithmeticError):
    """Cancellation in an alternating sum exceeded tolerance."""


class DegenerateSpectrumError(BDMixError, ArithmeticError):
    pass


class PeriodicityError(BDMixError, ArithmeticError):
    pass


class ConvergenceError(BDMixError, ArithmeticError):
    """A mixing time could not be bracketed within the iteration cap."""


# -- resources ----------------------------------------------------------------

class SizeError(BDMixError):
    """Chain exceeds the configured dense-matrix limit."""


class InvariantViolation(BDMixError, AssertionError):
    """A proven inequality failed numerically; signals an implementation bug."""
