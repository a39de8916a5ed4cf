"""Exception hierarchy shared across the package."""


class PsvgdError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(PsvgdError, ValueError):
    """Invalid configuration, prior, or model construction."""


class DomainError(PsvgdError, ValueError):
    """A density was evaluated outside its support."""


class NumericalError(PsvgdError, ArithmeticError):
    """A numerical failure during transport (non-finite particles, degenerate kernel)."""

    def __init__(self, message, iteration=None, outer=None):
        self.reason = message
        self.iteration = iteration
        self.outer = outer
        where = []
        if outer is not None:
            where.append(f"outer step {outer}")
        if iteration is not None:
            where.append(f"iteration {iteration}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)

    def at_outer(self, outer):
        """Return a copy of this error tagged with an adaptation step index."""
        return type(self)(self.reason, iteration=self.iteration, outer=outer)


class DegenerateBandwidthError(NumericalError):
    """All particles coincide, so the median heuristic has no scale."""
