"""Exception hierarchy shared across the package.

Every error that a command-line user can trigger maps to one of these
classes; the CLI translates them to stable exit codes.
"""

from __future__ import annotations


class ProperactError(Exception):
    """Base class for all package errors."""


class BadParameters(ProperactError):
    """Family parameters outside the documented validity range."""


class UnsupportedFamily(BadParameters):
    """Family tag not in the encoded catalog."""


class RankCapExceeded(ProperactError):
    """Requested Weyl enumeration above the configured rank cap."""


class NotFound(ProperactError):
    """A uniquely-expected element (e.g. the longest element) was not found."""


class DimensionMismatch(ProperactError):
    """Vector/matrix shapes inconsistent with the ambient dimension."""


class BadIndex(ProperactError):
    """Exterior-power index outside 1..n-1."""


class SingularInput(ProperactError):
    """Matrix not invertible within binary64 tolerance."""


class KindMismatch(ProperactError):
    """Margin function applied to a vector of the wrong length/kind."""


class BudgetExceeded(ProperactError):
    """Word-ball enumeration larger than the configured budget."""


class OverflowRisk(ProperactError):
    """Requested computation exceeds the documented binary64 guard."""


class NotProximal(ProperactError):
    """No simple dominant eigenvalue above the gap tolerance."""


class PreconditionFailed(ProperactError):
    """A stated precondition of the operation does not hold."""


class TransversalityFailed(ProperactError):
    """Attracting point of one factor too close to the repelling
    hyperplane of the next."""


class NotCertified(ProperactError):
    """A required proximality certificate did not reach the Certified verdict."""


class NoDirectionFound(ProperactError):
    """Avoiding-cone search exhausted its candidate budget."""


class RetryBudgetExhausted(ProperactError):
    """Generator construction kept failing the transversality floor."""


class MaxPowerExceeded(ProperactError):
    """Power doubling reached max_m without certifying every representation."""


class WordBallCheckFailure(ProperactError):
    """Base class for word-ball verification failures; names the word."""

    def __init__(self, message: str, word: tuple[int, ...] | None = None):
        self.word = word
        if word is not None:
            message = f"{message} (word {word})"
        super().__init__(message)


class FreenessFailure(WordBallCheckFailure):
    """Two distinct reduced words evaluated to (nearly) the same matrix."""


class ConeEscape(WordBallCheckFailure):
    """A word's Cartan projection left the invariant cone."""


class AdditivityFailure(WordBallCheckFailure):
    """Additivity residual exceeded its linear bound."""


class MarginDegeneration(WordBallCheckFailure):
    """Properness margins failed to grow along word length."""
