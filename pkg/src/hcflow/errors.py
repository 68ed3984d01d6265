"""Exception hierarchy.

Two failure families matter operationally:

* :class:`InputError` -- the supplied data is rejected before any real
  computation starts (bad shapes, unsupported factor types, non-positive
  metrics).  The CLI maps these to exit code 2, the service to HTTP 422.
* :class:`NumericFailure` -- the computation itself cannot proceed
  (evaluation past the extinction time, loss of positivity, singular
  coupling matrix).  CLI exit code 3, HTTP 409.
"""


class HCFlowError(Exception):
    """Base class for all package errors."""


class InputError(HCFlowError):
    """Invalid input data; rejected before computation."""


class NumericFailure(HCFlowError):
    """Computation failed or was requested outside its valid domain."""


# -- input validation -------------------------------------------------------

class QuadricNotSupported(InputError):
    """Complex-quadric base factors are excluded."""


class DimensionTooSmall(InputError):
    """Base factors must have complex dimension at least two."""


class ShapeMismatch(InputError):
    """Array or list dimensions are inconsistent with the model."""


class NotAComplexStructure(InputError):
    """A claimed complex structure does not square to minus the identity."""


class DegenerateBasis(InputError):
    """The chosen real basis does not induce a complex basis of the fiber."""


class UnknownType(InputError):
    """Unrecognized factor type."""


class SizeLimit(InputError):
    """Requested explicit realization exceeds the supported matrix size."""


class UnequalA(InputError):
    """Normalized-flow analysis requires all initial base coefficients equal."""


class NotCEProduct(InputError):
    """Model is not tagged as a product of Calabi-Eckmann-type blocks."""


class NonPositiveMetric(InputError):
    """Metric data is not positive definite (or not Hermitian)."""


class NoStaticForNonpositiveLambda(InputError):
    """Static metrics exist only for positive scaling constants."""


# -- numeric failures --------------------------------------------------------

class PastExtinction(NumericFailure):
    """Evaluation time at or beyond the extinction time."""


class OutOfDomain(NumericFailure):
    """Scalar integral requested outside its domain of convergence."""


class LostPositivity(NumericFailure):
    """A numerically integrated fiber metric stopped being positive definite."""


class NotPositive(NumericFailure):
    """Closed-form fiber metric is not positive definite (negative times)."""


class ThetaSingular(NumericFailure):
    """Total coupling matrix is singular; no static metric exists."""


# -- warnings ----------------------------------------------------------------

class RealizabilityWarning(UserWarning):
    """Fiber coefficient vectors do not span the fiber over the reals.

    The flow equations are well posed for any coefficient data, so this is
    reported as a warning rather than an error: such data cannot come from
    an honest fiber complex structure but is useful for degenerate tests.
    """
