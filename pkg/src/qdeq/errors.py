"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` (bad input, exit code 1
on the command line) and ``NumericalError`` (poles, divergence, breakdown of
a recursion, exit code 2).
"""


class QdeqError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(QdeqError, ValueError):
    """Malformed or inconsistent input."""


class NumericalError(QdeqError, ArithmeticError):
    """A numerical evaluation hit a pole or failed to converge."""


class ParseError(ValidationError):
    """Operator text does not match the grammar.

    ``position`` is the 0-based character offset of the offending token.
    """

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class NonIntegerShiftPower(ValidationError):
    """A power of the shift operator is not a nonnegative integer."""


class NotHorizontal(ValidationError):
    """A characteristic equation was requested for a sloped segment."""


class PreconditionError(ValidationError):
    """A documented precondition of an operation does not hold."""


class NonInvertible(NumericalError):
    """Inverse of a nilpotent polynomial with vanishing constant term."""


class NonConvergence(NumericalError):
    """A series or product did not reach tolerance within its iteration cap."""


class PoleAtThetaZero(NumericalError):
    """Evaluation at a zero of the theta function."""


class PoleAtNonpositive(NumericalError):
    """q-Gamma evaluated at one of its poles."""


class PoleAtNonpositiveInteger(NumericalError):
    """Classical Gamma evaluated at a nonpositive integer."""


class DenominatorPochhammerZero(NumericalError):
    """A denominator Pochhammer symbol of a basic hypergeometric series vanishes."""


class PoleInSum(NumericalError):
    """A helper sum hit one of its poles."""


class PoleAtLattice(NumericalError):
    """The sample point lies on the lattice q^Z where the identity has poles."""


class TruncationTooShort(NumericalError):
    """The solution series is too short to give any computable residual."""


class ResonantRoot(NumericalError):
    """A Frobenius recursion denominator vanished (resonant exponent)."""


class MultipleRoot(NumericalError):
    """The characteristic root is not simple; use the nilpotent series route."""


class ResonantAlphas(NumericalError):
    """Two parameters differ by a nonzero integer power of q."""


class RecursionBreakdown(NumericalError):
    """The leading coefficient of a solution recursion vanished."""


class TailTooLarge(NumericalError):
    """A truncated series has not converged to tolerance at the requested order."""


class SeriesDivergent(NumericalError):
    """A series is evaluated outside its region of convergence."""
