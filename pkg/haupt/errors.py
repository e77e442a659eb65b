"""
Exception hierarchy for haupt.

Every error raised by the series kernel, the catalog and the checkers derives
from HauptError. The CLI maps ``exit_code`` straight to the process status.
"""


class HauptError(Exception):
    """Base class for all haupt errors."""

    exit_code = 4


# ============================================================
# Series arithmetic
# ============================================================

class EmptyWindow(HauptError):
    """An operation would produce (or compare on) an empty precision window."""

    exit_code = 3


class NonPIntegral(HauptError):
    """A coefficient has a denominator divisible by p."""

    exit_code = 3

    def __init__(self, p: int, exponent: int):
        super().__init__(f"coefficient at q^{exponent} is not {p}-integral")
        self.p = p
        self.exponent = exponent


class ZeroLeadingCoefficient(HauptError):
    """Reciprocal requested for a series whose lowest coefficient is zero."""


class PrecisionExhausted(HauptError):
    """The requested computation needs more coefficients than allowed."""

    exit_code = 3

    def __init__(self, needed: int, limit: int):
        super().__init__(f"need {needed} coefficients, limit is {limit}")
        self.needed = needed
        self.limit = limit


# ============================================================
# Forms
# ============================================================

class FractionalOffset(HauptError):
    """Eta quotient whose q-offset sum(d*r)/24 is not an integer."""


class BadWeight(HauptError):
    """Eisenstein series requested with an odd or too small weight."""


class OddWeight(HauptError):
    """Trace formula needs an even weight."""


class NotExactDivisor(HauptError):
    """e does not exactly divide the level."""


class IrrationalScalar(HauptError):
    """Slash scalar ((d*e)/d)^(k/2) is not rational."""


class BadGroup(HauptError):
    """Group symbol violates the hypotheses of a construction."""


# ============================================================
# Catalog
# ============================================================

class Malformed(HauptError, ValueError):
    """Text input (symbol, eta quotient, pattern, data file) failed to parse."""


class InvariantViolation(HauptError):
    """Parsed group symbol breaks a structural invariant."""


class RootMismatch(HauptError):
    """A formal root expansion is inconsistent with its defining data."""


class FileError(HauptError):
    """A data file could not be read."""


class DuplicateSymbol(HauptError):
    """A catalog file lists the same symbol twice."""


class MissingCatalogEntry(HauptError, KeyError):
    """Symbol not present in the catalog."""

    exit_code = 2

    def __init__(self, symbol: str):
        super().__init__(symbol)
        self.symbol = symbol

    def __str__(self) -> str:
        return f"no catalog entry for {self.symbol!r}"


# ============================================================
# Checks
# ============================================================

class HypothesisViolated(HauptError):
    """A check was requested outside the hypotheses of its identity."""


class UnknownDatum(HauptError):
    """No tabulated functional-equation data for this symbol."""


class OutOfRange(HauptError):
    """Rate pattern evaluated past its defined range."""


# ============================================================
# Groups
# ============================================================

class OrthogonalityFailure(HauptError):
    """Character table rows are not orthogonal."""


class PowerMapInconsistent(HauptError):
    """Power map contradicts element orders or is incomplete."""


class IrrationalResidue(HauptError):
    """Irrational part of a multiplicity series did not cancel."""
