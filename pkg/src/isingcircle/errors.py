"""Exception hierarchy shared by every module."""


class IsingCircleError(Exception):
    """Base class for all library errors."""


class PreconditionViolated(IsingCircleError, ValueError):
    """An input falls outside the documented domain of an operation."""


class Indeterminate(IsingCircleError):
    """A decision lies within the tracked numerical error of a boundary."""


class NoConvergence(IsingCircleError):
    """An iterative numerical routine did not converge."""


class BudgetExceeded(IsingCircleError):
    """A search or iteration ran out of its configured budget."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class CoverViolated(IsingCircleError):
    """The images of a family of maps fail to cover their domain."""


class HypothesisFailed(IsingCircleError):
    """A hypothesis of the construction does not hold for the supplied instance."""

    def __init__(self, condition: str):
        super().__init__(condition)
        self.condition = condition


class TooLarge(IsingCircleError):
    """An exhaustive enumeration would exceed its size cap."""


class ZeroDenominator(IsingCircleError, ZeroDivisionError):
    """A partition function used as a denominator vanished."""


class DegreeViolation(IsingCircleError):
    """A construction would exceed a degree cap."""


class SeedUnavailable(IsingCircleError):
    """No seed trees are available for field implementation."""


class CertificationFailed(IsingCircleError):
    """An exhaustive certificate found a counterexample."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class InconsistentOracle(IsingCircleError):
    """Oracle answers contradict the oracle contract."""


class SeparationFailure(IsingCircleError):
    """Lattice rounding could not identify a unique exact value."""


class NoPerfectMatching(IsingCircleError):
    """The graph has no perfect matching."""
