"""Exception hierarchy.

Two broad families matter for callers: invalid input (bad data, bad
hypothesis text, bad configuration) and numeric failure (decompositions,
underflow).  The command line maps them to exit codes 1 and 2.
"""


class BfregError(Exception):
    """Base class for all package errors."""


class InvalidInputError(BfregError):
    """Malformed or inconsistent user input."""


class DataError(InvalidInputError):
    """Problems with the data set or the fitted design matrix."""


class FormulaError(InvalidInputError):
    """Unparseable or unsupported model formula."""


class HypothesisSyntaxError(InvalidInputError):
    """Hypothesis text that does not follow the constraint grammar."""


class InconsistentEqualityError(InvalidInputError):
    """Equality constraints within one hypothesis contradict each other."""


class InfeasibleHypothesisError(InvalidInputError):
    """Constraint set that describes an empty region."""


class NumericError(BfregError):
    """Numeric breakdown: singular systems, underflow, failed factorizations."""


class DecompositionError(NumericError):
    """A matrix factorization (Cholesky, SVD) could not be completed."""


class ConstraintCenterWarning(UserWarning):
    """The stacked constraint system has no exact solution; the prior is
    centered on its least-squares surrogate instead."""
