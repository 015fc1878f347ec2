"""
Exception hierarchy for padepde.

Mathematical failures (an obstruction in the series, a singular Padé system,
a vanishing denominator) are results, not bugs: the CLI maps them to exit
code 2. Usage errors (bad problem files, unknown symbols) map to exit code 1.
"""

from typing import List, Optional, Sequence, Tuple


class PadePDEError(Exception):
    """Base class for every error raised by padepde."""


class MathematicalFailure(PadePDEError):
    """The computation is well posed but has no result of the requested kind."""


class UsageError(PadePDEError, ValueError):
    """The input (problem file, expression, command line) is invalid."""


# Arithmetic

class ZeroDivisor(PadePDEError, ZeroDivisionError):
    """Exact polynomial division by the zero polynomial."""


class DivisionByZero(PadePDEError, ZeroDivisionError):
    """Rational-function division by zero."""


class NotDivisible(PadePDEError):
    """The divisor does not divide the dividend exactly."""


class NonTerminating(MathematicalFailure):
    """A rewrite system exceeded its step budget."""


# Series / Padé / residual

class UnsupportedAnsatz(UsageError):
    """A derivative-table entry is not polynomial in the rho variables."""


class NoCandidates(MathematicalFailure):
    """No constant seed verifies against the equation."""


class Obstruction(MathematicalFailure):
    """The coefficient equation at ``index`` has no solution."""

    def __init__(self, index: Tuple[int, ...], message: str = ""):
        self.index = tuple(index)
        super().__init__(message or f"Obstruction at index {list(self.index)}")


class InsufficientOrder(MathematicalFailure):
    """The series is not known to the order a computation needs."""


class SingularSystem(MathematicalFailure):
    """The Padé linear system is inconsistent (blocked table entry)."""


class DegenerateDenominator(MathematicalFailure):
    """The collapsed Padé denominator reduces to zero."""


class ZeroDenominator(MathematicalFailure):
    """The ansatz denominator reduces to zero under the active rules."""


class NearPole(MathematicalFailure):
    """A numeric evaluation point lies too close to a pole of the ansatz."""


class NoNumericSolution(MathematicalFailure):
    """Newton iteration found no parameters satisfying the constraint rules."""


# Frontend

class ExpressionSyntaxError(UsageError):
    """Syntax error in an expression, with a 1-based position."""

    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"{message} (line {line}, col {col})")


class UnknownSymbol(UsageError):
    """An expression references a symbol that was never declared."""

    def __init__(self, name: str, line: Optional[int] = None, col: Optional[int] = None):
        self.name = name
        self.line = line
        self.col = col
        where = f" (line {line}, col {col})" if line is not None else ""
        super().__init__(f"Unknown symbol '{name}'{where}")


class ProblemFileError(UsageError):
    """A problem file failed to resolve; carries every located error."""

    def __init__(self, errors: Sequence[Tuple[int, str]], path: str = "<problem>"):
        self.errors: List[Tuple[int, str]] = list(errors)
        self.path = path
        lines = "; ".join(f"{path}:{line}: {msg}" for line, msg in self.errors)
        super().__init__(f"Invalid problem file: {lines}")
