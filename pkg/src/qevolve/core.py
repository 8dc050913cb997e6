"""Shared value types: physical constants, grids, potentials and states."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import GapError, OverlapError, PotentialError, UnboundedError

# Energies closer than this to a region's potential use the linear basis.
DEGENERACY_TOL = 1e-12


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PhysicsParams:
    """Mass and reduced Planck constant; natural units by default."""

    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("mass", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``n_points`` nodes spanning ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points!r}")
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min must be < x_max, got [{self.x_min}, {self.x_max}]")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights."""
        w = np.full(self.n_points, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w

    def interior(self) -> slice:
        """Index slice of the interior two-thirds of the grid."""
        sixth = self.n_points // 6
        return slice(sixth, self.n_points - sixth)


class Region(NamedTuple):
    x_left: float
    x_right: float
    v: float


@dataclass(frozen=True)
class PiecewisePotential:
    """Constant potential on contiguous regions covering the whole line.

    Region lookup follows the right-ownership convention: an interface point
    belongs to the region on its right.  Instances are callable and vectorised,
    ``potential(x)`` returns V(x).
    """

    regions: tuple

    def __post_init__(self):
        regions = tuple(Region(float(a), float(b), float(v)) for a, b, v in self.regions)
        _check_regions(regions)
        object.__setattr__(self, "regions", regions)

    @property
    def boundaries(self) -> np.ndarray:
        """Finite interface positions, strictly increasing."""
        return np.array([r.x_right for r in self.regions[:-1]], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([r.v for r in self.regions], dtype=float)

    def region_index(self, x):
        idx = np.searchsorted(self.boundaries, x, side="right")
        return int(idx) if np.ndim(idx) == 0 else idx

    def __call__(self, x):
        v = self.values[np.searchsorted(self.boundaries, x, side="right")]
        return float(v) if np.ndim(v) == 0 else v

    def gradient(self, x):
        """Zero inside every region; interface jumps carry no finite slope."""
        return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0

    def curvature(self, x):
        return self.gradient(x)

    def mirrored(self) -> "PiecewisePotential":
        """Potential reflected through the origin, x -> -x."""
        return PiecewisePotential(tuple((-r.x_right, -r.x_left, r.v) for r in reversed(self.regions)))

    def to_json(self) -> dict:
        def enc(b):
            if math.isinf(b):
                return "-inf" if b < 0 else "inf"
            return b

        return {"regions": [{"xl": enc(r.x_left), "xr": enc(r.x_right), "v": r.v} for r in self.regions]}


def _check_regions(regions: Sequence[Region]) -> None:
    if not regions:
        raise PotentialError("potential needs at least one region")
    if regions[0].x_left != -math.inf or regions[-1].x_right != math.inf:
        raise UnboundedError("first region must start at -inf and last must end at +inf")
    for r in regions:
        if math.isnan(r.x_left) or math.isnan(r.x_right) or not math.isfinite(r.v):
            raise PotentialError(f"non-numeric region {r}")
        if not r.x_left < r.x_right:
            raise OverlapError(f"empty or inverted region {r}")
    for left, right in zip(regions, regions[1:]):
        if left.x_right < right.x_left:
            raise GapError(f"gap between x={left.x_right} and x={right.x_left}")
        if left.x_right > right.x_left:
            raise OverlapError(f"regions overlap between x={right.x_left} and x={left.x_right}")


def _parse_bound(value) -> float:
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("-inf", "-infinity"):
            return -math.inf
        if text in ("inf", "+inf", "infinity", "+infinity"):
            return math.inf
        return float(text)
    return float(value)


def validate_potential(regions) -> PiecewisePotential:
    """Normalise a raw region list into a :class:`PiecewisePotential`.

    ``regions`` may be a sequence of ``(x_left, x_right, v)`` triples, a list of
    ``{"xl", "xr", "v"}`` mappings, or an existing potential (returned as an
    equal value).  Regions are sorted by their left edge before the
    contiguity checks, so input order does not matter.

    Raises
    ------
    GapError, OverlapError, UnboundedError
        When the regions do not tile the real line exactly.
    """
    if isinstance(regions, PiecewisePotential):
        return PiecewisePotential(regions.regions)
    parsed = []
    for item in regions:
        if isinstance(item, dict):
            item = (item["xl"], item["xr"], item["v"])
        a, b, v = item
        parsed.append(Region(_parse_bound(a), _parse_bound(b), float(v)))
    if not parsed:
        raise PotentialError("potential needs at least one region")
    starts = [r.x_left for r in parsed]
    if len(set(starts)) != len(starts):
        raise OverlapError("two regions share a left edge")
    parsed.sort(key=lambda r: r.x_left)
    return PiecewisePotential(tuple(parsed))


def load_potential(path: Union[str, Path]) -> PiecewisePotential:
    """Read the JSON potential format ``{"regions": [{"xl", "xr", "v"}, ...]}``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "regions" not in doc:
        raise PotentialError(f"{path}: missing 'regions' key")
    return validate_potential(doc["regions"])


def free_potential(v: float = 0.0) -> PiecewisePotential:
    return PiecewisePotential(((-math.inf, math.inf, v),))


def step_potential(v0: float, x_step: float = 0.0, v_left: float = 0.0) -> PiecewisePotential:
    return PiecewisePotential(((-math.inf, x_step, v_left), (x_step, math.inf, v0)))


def rectangular_barrier(v0: float, width: float, x_left: float = 0.0) -> PiecewisePotential:
    """Barrier of height ``v0`` on ``[x_left, x_left + width]``; zero width gives free space."""
    if width < 0:
        raise ValueError(f"barrier width must be non-negative, got {width}")
    if width == 0:
        return free_potential()
    x_right = x_left + width
    return PiecewisePotential(((-math.inf, x_left, 0.0), (x_left, x_right, v0), (x_right, math.inf, 0.0)))


def layered_potential(v_outside: float, layers: Iterable[tuple], x_left: float = 0.0) -> PiecewisePotential:
    """Consecutive ``(width, v)`` layers starting at ``x_left``, embedded in ``v_outside``."""
    edge = x_left
    regions = [(-math.inf, x_left, v_outside)]
    for width, v in layers:
        regions.append((edge, edge + width, v))
        edge += width
    regions.append((edge, math.inf, v_outside))
    return PiecewisePotential(tuple(regions))


@dataclass(frozen=True)
class SmoothPotential:
    """Potential given by callables for V, V' and (optionally) V''.

    Used by the propagator and the least-action solver.  A missing curvature
    is replaced by a central difference of the gradient.
    """

    value: Callable
    gradient: Callable
    curvature: Optional[Callable] = None

    def __call__(self, x):
        return self.value(x)

    def second_derivative(self, x):
        if self.curvature is not None:
            return self.curvature(x)
        x = np.asarray(x, dtype=float)
        h = 1e-5 * np.maximum(1.0, np.abs(x))
        return (self.gradient(x + h) - self.gradient(x - h)) / (2 * h)


def harmonic_potential(omega: float = 1.0, mass: float = 1.0) -> SmoothPotential:
    """V = m omega^2 x^2 / 2."""
    c = mass * omega**2
    return SmoothPotential(
        value=lambda x: 0.5 * c * np.asarray(x, dtype=float) ** 2,
        gradient=lambda x: c * np.asarray(x, dtype=float),
        curvature=lambda x: np.full_like(np.asarray(x, dtype=float), c),
    )


def linear_potential(g: float) -> SmoothPotential:
    """V = g x (constant force -g)."""
    return SmoothPotential(
        value=lambda x: g * np.asarray(x, dtype=float),
        gradient=lambda x: np.full_like(np.asarray(x, dtype=float), g),
        curvature=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
    )


def as_smooth(potential) -> SmoothPotential:
    """Adapt a piecewise potential (or a smooth one) to the SmoothPotential interface."""
    if isinstance(potential, SmoothPotential):
        return potential
    if isinstance(potential, PiecewisePotential):
        return SmoothPotential(value=potential, gradient=potential.gradient, curvature=potential.curvature)
    raise TypeError(f"cannot use {type(potential).__name__} as a potential with a gradient")


@dataclass(frozen=True)
class StateVector:
    """Complex wavefunction samples on a grid."""

    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = _frozen_array(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise ValueError(f"state has {values.shape} samples, grid has {self.grid.n_points}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid1D, func: Callable) -> "StateVector":
        return cls(grid, func(grid.points))

    def norm(self) -> float:
        """L2 norm by the trapezoid rule."""
        return float(np.sqrt(np.sum(self.grid.weights * np.abs(self.values) ** 2)))

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2
