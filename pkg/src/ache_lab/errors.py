"""Exception types shared across the library.

CLI exit-code mapping: ValidationFailure subclasses exit 1, NumericalFailure
subclasses exit 2, SchemaError exits 3.
"""


class AcheLabError(Exception):
    """Base class for all library errors."""


class ValidationFailure(AcheLabError):
    """Structural/geometric validation failed (CLI exit 1)."""


class NumericalFailure(AcheLabError):
    """A numerical procedure failed or diverged (CLI exit 2)."""


class SchemaError(AcheLabError):
    """Config/file schema violation (CLI exit 3)."""


# -- structures ---------------------------------------------------------------

class NonContact(ValidationFailure):
    """d(eta) is degenerate: the input coframe is not a contact coframe."""


class Inconsistent(ValidationFailure):
    """No purely-imaginary connection / (0,1) torsion solves the structure equations."""


class UnsupportedDirection(ValidationFailure):
    """Covariant-derivative direction must be one of '1', '1b', '0'."""


class DeformationTooLarge(NumericalFailure):
    """Complex-structure deformation too large to renormalize the coframe."""


# -- series -------------------------------------------------------------------

class IncompatibleShape(ValidationFailure):
    """Series operands have incompatible coefficient shapes."""


class SingularLeading(NumericalFailure):
    """Series inverse/sqrt requested with a non-invertible leading coefficient."""


class DivergentTail(NumericalFailure):
    """Improper integral with a non-decaying integrand."""


class EmptySeries(NumericalFailure):
    """Operation requires at least one retained coefficient."""


class NonPositiveSamples(NumericalFailure):
    """Decay fit requires strictly positive sample values."""


# -- curvature / filling ------------------------------------------------------

class SingularMetric(NumericalFailure):
    """Frame metric has a singular leading term."""


class NotPositive(NumericalFailure):
    """Frame metric leading term is not positive definite."""


class RouteMismatch(NumericalFailure):
    """The two independent constructions of the Kahler form disagree."""


# -- invariants ---------------------------------------------------------------

class LeadingOrderTooLow(NumericalFailure):
    """Anti-self-dual Weyl curvature decays slower than its guaranteed order."""


class DegenerateFamily(NumericalFailure):
    """Proportionality fit requested on a family with identically zero tensor."""


class ShapeMismatch(ValidationFailure):
    """Multilinear boundary functional received arrays of the wrong shape."""
