"""Exception hierarchy shared across the package."""


class LatentOceError(Exception):
    """Base class for all package errors."""


class StructureError(LatentOceError, ValueError):
    """Invalid graph: cycle, self-loop, duplicate edge or bad node index."""


class ModelError(LatentOceError, ValueError):
    """Model parameters violate an invariant."""


class DomainError(LatentOceError, ValueError):
    """Argument outside the mathematical domain of a function."""


class DegenerateIntervalError(LatentOceError, ValueError):
    """Truncation interval carries (numerically) zero probability mass."""


class QueryError(LatentOceError, ValueError):
    """Invalid causal-effect query (levels, nodes, policy)."""


class DegenerateLevelError(QueryError, DegenerateIntervalError):
    """An intervention level whose band has numerically zero probability."""


class DataError(LatentOceError, ValueError):
    """Malformed or inconsistent data."""


class NumericError(LatentOceError, ArithmeticError):
    """A numerical routine failed (non-convergence, singular system)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class EstimationError(LatentOceError):
    """Parameter estimation from data failed."""
