"""One-dimensional quantum evolution: time-sliced propagators, stationary-action
paths and matter-field scattering states on piecewise-constant potentials."""

from .core import (
    Grid1D,
    PhysicsParams,
    PiecewisePotential,
    SmoothPotential,
    StateVector,
    harmonic_potential,
    linear_potential,
    load_potential,
    rectangular_barrier,
    step_potential,
    validate_potential,
)

__version__ = "0.1.0"
