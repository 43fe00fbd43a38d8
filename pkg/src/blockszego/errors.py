"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`BlockSzegoError`. The CLI maps the three families below onto its
exit codes: deflation (2), invalid input (3) and numerical failure (4).
"""


class BlockSzegoError(Exception):
    """Base class for all package errors."""


# -- invalid input -----------------------------------------------------------


class InvalidInput(BlockSzegoError, ValueError):
    """Arguments are malformed or violate a documented precondition."""


class DimensionMismatch(InvalidInput):
    """Operand shapes are incompatible."""


class InvalidParameter(InvalidInput):
    """A constructor parameter is outside its admissible range."""


class InvalidStart(InvalidInput):
    """The starting block is rank deficient."""


class InvalidVerblunsky(InvalidInput):
    """A Verblunsky coefficient has spectral norm >= 1."""


class AdjointUnavailable(InvalidInput):
    """The operator cannot apply its adjoint."""


class InverseUnavailable(InvalidInput):
    """Negative powers were requested from an operator without an inverse."""


# -- numerical failure -------------------------------------------------------


class NumericalFailure(BlockSzegoError, ArithmeticError):
    """A numerical kernel could not produce a trustworthy result."""


class NotHermitian(NumericalFailure):
    pass


class IndefiniteMatrix(NumericalFailure):
    pass


class SingularMatrix(NumericalFailure):
    pass


class ConvergenceFailure(NumericalFailure):
    pass


class NotNormal(NumericalFailure):
    pass


# -- deflation ---------------------------------------------------------------


class DeflationError(BlockSzegoError):
    """Raised in strict mode when a Krylov run deflates or breaks down.

    The partial result and the :class:`~blockszego.krylov.DeflationReport`
    are attached so that callers can still inspect what was built.
    """

    def __init__(self, msg, report=None, result=None):
        super().__init__(msg)
        self.report = report
        self.result = result


class VerblunskyOverflow(DeflationError):
    """A short-recurrence run produced ``||alpha_k||_2 >= 1 - eps``."""
