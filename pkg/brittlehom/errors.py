"""Exception hierarchy for brittlehom."""

from __future__ import annotations


class BrittlehomError(Exception):
    """Base class for every error raised by brittlehom."""


class GeometryError(BrittlehomError, ValueError):
    """A geometry description violates the microstructure assumptions."""


class MarginViolation(GeometryError):
    """A primitive leaves the open cube Q_delta = (delta, 1 - delta)^n."""


class OverlapViolation(GeometryError):
    """Two primitives intersect or touch (E/E or E/F)."""


class BadPrimitive(GeometryError):
    """A primitive is degenerate (non-positive radius, empty rect, bad vertices)."""


class ResolutionTooCoarse(BrittlehomError, ValueError):
    """The grid has fewer than two layers inside the margin (m * delta < 2)."""


class CrackOutsideInclusions(BrittlehomError, ValueError):
    """A crack set contains a bond that is not Breakable."""


class TooManyBreakableBonds(BrittlehomError, ValueError):
    """The exhaustive oracle was asked to enumerate above its cap."""


class DimensionUnsupported(BrittlehomError, ValueError):
    """The operation is only defined in two dimensions."""


class ConfigError(BrittlehomError, ValueError):
    """A run configuration fails validation before any solve starts."""


class SolverError(BrittlehomError, RuntimeError):
    """A numerical solve failed."""


class NoConvergence(SolverError):
    """The iterative solver hit its iteration cap above tolerance."""

    def __init__(
        self, message: str, iterations: int = 0, residual: float = float("nan")
    ):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
