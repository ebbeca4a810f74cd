"""
Exception hierarchy for the toolkit.

Services raise these; the command layer maps them to exit codes.
"""
from typing import Optional


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit."""


class ProfileError(ToolkitError, ValueError):
    """Coefficient profile is not symmetric positive definite or malformed."""


class BesselArgumentError(ToolkitError, ValueError):
    """Argument outside the range handled by the recurrences."""


class QuadratureError(ToolkitError, ValueError):
    """Invalid quadrature rule request."""


class MollifierError(ToolkitError, ValueError):
    """Invalid mollifier configuration."""


class UnweightedHypothesisError(ToolkitError, ValueError):
    """eps_star or mu_star not positive, so the unweighted bound does not apply."""


class BoundInputError(ToolkitError, ValueError):
    """Invalid input to a bound formula."""


class ConfigError(ToolkitError, ValueError):
    """Sweep configuration could not be parsed or validated."""


class PlotError(ToolkitError, ValueError):
    """Report file cannot be plotted."""


class TruncationError(ToolkitError):
    """Multipole series did not converge below the tail threshold."""

    def __init__(self, order: int, tail: float, threshold: float, reason: Optional[str] = None):
        self.order = order
        self.tail = tail
        self.threshold = threshold
        if reason is None:
            reason = f"multipole truncation cap reached at N={order}: tail {tail:.3e} above threshold {threshold:.3e}"
        else:
            reason = f"{reason} at N={order}"
        super().__init__(reason)
