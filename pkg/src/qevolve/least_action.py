"""Stationary-action paths and related action functionals.

Paths are discretised on time nodes; the discrete action uses the midpoint
rule for the potential, ``S = sum_k [m/2 ((x_{k+1}-x_k)/dt)^2 - V(mid_k)] dt``.
The boundary-value solver finds the stationary point of exactly that sum, so
its output has vanishing :func:`action_gradient` to solver precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .core import PhysicsParams, PiecewisePotential, SmoothPotential, as_smooth
from .errors import NoConvergence, NotForbidden

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 100

CONVENTIONS = ("one_minus_i", "plus_i_reversed")


@dataclass(frozen=True)
class Path:
    """Trajectory samples ``positions[k] = x(times[k])``."""

    times: np.ndarray = field(repr=False)
    positions: np.ndarray = field(repr=False)

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        positions = np.array(self.positions, dtype=float)
        if times.ndim != 1 or times.shape != positions.shape:
            raise ValueError("times and positions must be 1-D arrays of equal length")
        if times.size < 2 or np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing with at least two nodes")
        times.setflags(write=False)
        positions.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", positions)

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.times)

    def time_reversed(self) -> "Path":
        """x(-tau) on the same time nodes: positions run backwards."""
        return Path(self.times, self.positions[::-1])

    def with_positions(self, positions) -> "Path":
        return Path(self.times, positions)


def _uniform_times(t: float, n_steps: int) -> np.ndarray:
    return np.linspace(0.0, t, n_steps + 1)


def action(params: PhysicsParams, potential, path: Path) -> float:
    """Real-time discrete action with the midpoint potential."""
    x = path.positions
    dt = path.steps
    dx = np.diff(x)
    mid = 0.5 * (x[1:] + x[:-1])
    lagr = 0.5 * params.mass * (dx / dt) ** 2 - np.asarray(potential(mid), dtype=float)
    return float(np.sum(lagr * dt))


def action_gradient(params: PhysicsParams, potential, path: Path) -> np.ndarray:
    """dS/dx_k at the interior nodes k = 1..N-1."""
    pot = as_smooth(potential)
    x = path.positions
    dt = path.steps
    vel = np.diff(x) / dt
    mid = 0.5 * (x[1:] + x[:-1])
    force_half = 0.5 * dt * np.asarray(pot.gradient(mid), dtype=float)
    # node k touches intervals k-1 and k
    return params.mass * (vel[:-1] - vel[1:]) - (force_half[:-1] + force_half[1:])


def _action_hessian_bands(params: PhysicsParams, pot: SmoothPotential, x: np.ndarray, dt: np.ndarray) -> np.ndarray:
    mid = 0.5 * (x[1:] + x[:-1])
    curv = 0.25 * dt * np.asarray(pot.second_derivative(mid), dtype=float)
    stiff = params.mass / dt
    diag = (stiff[:-1] + stiff[1:]) - (curv[:-1] + curv[1:])
    off = -stiff[1:-1] - curv[1:-1]
    bands = np.zeros((3, diag.size))
    bands[0, 1:] = off
    bands[1] = diag
    bands[2, :-1] = off
    return bands


def solve_classical_path(params: PhysicsParams, potential, x0: float, x1: float, t: float, n_steps: int) -> Path:
    """Fixed-endpoint path with stationary discrete action.

    Damped Newton on the tridiagonal Euler-Lagrange system, started from the
    straight line.  Converged when ``max |dS/dx_k| < 1e-10``.

    Raises
    ------
    NoConvergence
        After 100 iterations, or when no damped step reduces the residual.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")
    if n_steps < 2:
        raise ValueError(f"n_steps must be >= 2, got {n_steps!r}")
    pot = as_smooth(potential)
    times = _uniform_times(t, n_steps)
    x = x0 + (x1 - x0) * times / t
    x[0], x[-1] = x0, x1
    dt = np.diff(times)
    path = Path(times, x)
    grad = action_gradient(params, pot, path)
    res = float(np.max(np.abs(grad)))
    for _ in range(NEWTON_MAX_ITER):
        if res < NEWTON_TOL:
            return path
        step = solve_banded((1, 1), _action_hessian_bands(params, pot, x, dt), -grad)
        lam = 1.0
        while lam > 1e-6:
            trial = x.copy()
            trial[1:-1] += lam * step
            trial_path = Path(times, trial)
            trial_grad = action_gradient(params, pot, trial_path)
            trial_res = float(np.max(np.abs(trial_grad)))
            if np.isfinite(trial_res) and trial_res < res:
                break
            lam *= 0.5
        else:
            raise NoConvergence(f"solve_classical_path: line search stalled at residual {res:.3e}", res)
        x, path, grad, res = trial, trial_path, trial_grad, trial_res
    if res < NEWTON_TOL:
        return path
    raise NoConvergence(f"solve_classical_path: {NEWTON_MAX_ITER} iterations, residual {res:.3e}", res)


def discrete_extremum_path(params: PhysicsParams, gradient: Callable, x0: float, t: float, n: int) -> Path:
    """Iterate ``x_k = x_{k-1} - V'(x_{k-1}) eps^2 / (2m)`` with ``eps = t/n``.

    This is the per-slice Gaussian maximum taken literally: each step starts
    from rest at the previous node, so no velocity is carried between slices.
    ``gradient`` may be a callable V'(x) or an object exposing ``.gradient``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    grad = getattr(gradient, "gradient", gradient)
    eps = t / n
    xs = np.empty(n + 1)
    xs[0] = x0
    for k in range(1, n + 1):
        xs[k] = xs[k - 1] - float(grad(xs[k - 1])) * eps**2 / (2 * params.mass)
    return Path(_uniform_times(t, n), xs)


def extremum_path_divergence(params: PhysicsParams, potential, x0: float, t: float, n: int) -> float:
    """Max deviation of the literal recursion from the stationary path with the same endpoints."""
    pot = as_smooth(potential)
    literal = discrete_extremum_path(params, pot, x0, t, n)
    classical = solve_classical_path(params, pot, x0, float(literal.positions[-1]), t, max(n, 2))
    if n == 1:
        return 0.0
    return float(np.max(np.abs(literal.positions - classical.positions)))


def complex_action(params: PhysicsParams, potential, path: Path, convention: str = "one_minus_i") -> complex:
    """Single complex action combining forward and time-reversed motion.

    ``one_minus_i``: ``(1 - i) S[x(tau)]``, the Lagrangian integrated against
    ``(1 - i) dtau``.  ``plus_i_reversed``: ``S[x(tau)] + i S[x(-tau)]``.
    The two differ in the sign of the imaginary part whenever the Lagrangian is
    even under time reversal; both are kept and neither is preferred silently.
    """
    s = action(params, potential, path)
    if convention == "one_minus_i":
        return complex(s, -s)
    if convention == "plus_i_reversed":
        return complex(s, action(params, potential, path.time_reversed()))
    raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")


def complex_action_gradient(params: PhysicsParams, potential, path: Path, convention: str = "one_minus_i") -> np.ndarray:
    """Interior-node gradient of :func:`complex_action` (real and imaginary parts)."""
    g = action_gradient(params, potential, path)
    if convention == "one_minus_i":
        return (1 - 1j) * g
    if convention == "plus_i_reversed":
        g_rev = action_gradient(params, potential, path.time_reversed())
        return g + 1j * g_rev[::-1]
    raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")


def forbidden_action(params: PhysicsParams, potential: PiecewisePotential, e: float, x0: float, x1: float) -> float:
    """Integral of sqrt(2m(V - e)) over [x0, x1], exact region by region.

    Raises
    ------
    NotForbidden
        If V <= e anywhere on a sub-interval of positive length.
    """
    if not x0 < x1:
        raise ValueError(f"need x0 < x1, got {x0}, {x1}")
    total = 0.0
    for region in potential.regions:
        lo = max(region.x_left, x0)
        hi = min(region.x_right, x1)
        if hi <= lo:
            continue
        if region.v <= e:
            raise NotForbidden(f"forbidden_action: V={region.v} <= E={e} on [{lo}, {hi}]")
        total += math.sqrt(2 * params.mass * (region.v - e)) * (hi - lo)
    return total
