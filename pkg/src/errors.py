"""
Exception hierarchy for the toolkit.

Input problems subclass ValueError; numerical verdicts subclass ArithmeticError.
"""


class MrdistError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(MrdistError, ValueError):
    """Experiment configuration is malformed or references unknown names."""


class InvalidFilter(MrdistError, ValueError):
    """Filter coefficients violate the sum rule or shift orthonormality."""


class OrderTooHigh(MrdistError, ValueError):
    """Requested derivative order exceeds the available regularity."""


class GrowthMismatch(MrdistError, ValueError):
    """Test-function decay cannot absorb the growth of a distribution term."""


class EpsilonNonpositive(MrdistError, ValueError):
    """A scale parameter was zero or negative."""


class InsufficientScales(MrdistError, ValueError):
    """Too few scales to fit a slope."""


class EmptyFamily(MrdistError, ValueError):
    """A family sweep was given no members."""


class NegativeMeasure(MrdistError, ValueError):
    """A measure expected to be positive produced negative mass."""


class NonConvergent(MrdistError, ArithmeticError):
    """An iteration failed to settle within tolerance."""


class DivergentSeminorm(MrdistError, ArithmeticError):
    """Weighted values keep growing past the edge of the sampling grid."""


class InconsistentDegree(MrdistError, ArithmeticError):
    """Battery slopes disagree by more than the allowed spread."""


class AllPairingsVanish(MrdistError, ArithmeticError):
    """Every battery pairing vanished, so no degree can be fitted."""


class HypothesisFailed(MrdistError, ArithmeticError):
    """A hypothesis of a density criterion failed; `clause` names which."""

    def __init__(self, clause, message):
        super().__init__(f"{clause}: {message}")
        self.clause = clause
