"""Exception hierarchy.

Input problems (malformed potentials, mismatched grids) derive from
``ValueError``.  Failures of a numerical procedure derive from
``ComputationError`` so front ends can tell the two apart.
"""


class ComputationError(Exception):
    """A numerical operation could not produce a trustworthy result."""


class PotentialError(ValueError):
    """Malformed piecewise-constant potential."""


class GapError(PotentialError):
    pass


class OverlapError(PotentialError):
    pass


class UnboundedError(PotentialError):
    pass


class NonPositiveEps(ValueError):
    pass


class NonPositiveTime(ValueError):
    pass


class GridMismatch(ValueError):
    pass


class GridTooCoarse(ComputationError, ValueError):
    pass


class CausticError(ComputationError, ValueError):
    pass


class NoConvergence(ComputationError, RuntimeError):
    """Newton iteration exhausted its budget; ``residual`` holds the last norm."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class NotForbidden(ComputationError, ValueError):
    pass


class DegenerateRegion(ComputationError, ArithmeticError):
    pass


class NoPropagatingAsymptote(ComputationError, ValueError):
    pass


class EnergyOutOfRange(ComputationError, ValueError):
    pass


class PhaseWrapError(ComputationError, ArithmeticError):
    pass
