"""Time-sliced transition amplitudes on a grid.

The kernel for a finite time is the product of short-time slice kernels,
each intermediate position integral done with the trapezoid rule.  Two time
modes are supported: ordinary (oscillatory) real time and Wick-rotated
imaginary time, where the slice kernel becomes a positive heat kernel.

Real-time slicing on a truncated grid needs care.  The slice kernel has
constant modulus, so cutting the intermediate integrals off at the grid ends
leaves boundary terms that never decay.  In real-time mode the intermediate
integrals therefore run over the grid extended by an absorbing margin whose
quadrature weights roll off smoothly to zero; the returned matrix is the block
on the requested grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import erfc

from .core import Grid1D, PhysicsParams, StateVector
from .errors import CausticError, GridMismatch, GridTooCoarse, NonPositiveEps, NonPositiveTime

# Caustic threshold on |sin(omega t)| for the harmonic closed form.
CAUSTIC_TOL = 1e-9
# Absorbing margin, in units of sqrt(hbar t / m).
MARGIN_WIDTHS = 6.0


class Mode(str, enum.Enum):
    REAL = "real_time"
    IMAGINARY = "imaginary_time"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        aliases = {"real": cls.REAL, "imag": cls.IMAGINARY, "imaginary": cls.IMAGINARY}
        if value in aliases:
            return aliases[value]
        return cls(value)


@dataclass(frozen=True)
class PropagatorConfig:
    n_slices: int
    total_time: float
    mode: Mode = Mode.REAL

    def __post_init__(self):
        if int(self.n_slices) != self.n_slices or self.n_slices < 1:
            raise ValueError(f"n_slices must be an integer >= 1, got {self.n_slices!r}")
        if not (math.isfinite(self.total_time) and self.total_time > 0):
            raise NonPositiveTime(f"total_time must be positive, got {self.total_time!r}")
        object.__setattr__(self, "mode", Mode.parse(self.mode))

    @property
    def eps(self) -> float:
        return self.total_time / self.n_slices


@dataclass(frozen=True)
class PropagatorMatrix:
    """Kernel K(x, x0) sampled on ``grid``; rows index x, columns x0.

    ``extrapolated_from`` lists the slice counts combined by Richardson
    extrapolation, empty for a plain time-sliced product.
    """

    grid: Grid1D
    entries: np.ndarray = field(repr=False)
    config: PropagatorConfig
    extrapolated_from: tuple = ()

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        n = self.grid.n_points
        if entries.shape != (n, n):
            raise ValueError(f"kernel shape {entries.shape} does not match grid of {n} points")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def column(self, x0: float) -> np.ndarray:
        """K(., x0) at the grid node nearest ``x0``."""
        j = int(np.argmin(np.abs(self.grid.points - x0)))
        return self.entries[:, j]


def _prefactor(params: PhysicsParams, eps, mode: Mode):
    if mode is Mode.REAL:
        return np.sqrt(params.mass / (2j * np.pi * params.hbar * eps))
    return np.sqrt(params.mass / (2 * np.pi * params.hbar * eps))


def slice_kernel(params: PhysicsParams, eps: float, x_next, x_prev, v_mid, mode=Mode.REAL):
    """Single-slice amplitude for a step of duration ``eps``.

    Real time: ``sqrt(m / (2 pi i hbar eps)) exp((i/hbar)[m dx^2 / (2 eps) - eps V])``.
    Imaginary time: ``sqrt(m / (2 pi hbar eps)) exp(-(1/hbar)[m dx^2 / (2 eps) + eps V])``.
    ``v_mid`` is the potential at the slice midpoint.  Arguments broadcast.
    """
    mode = Mode.parse(mode)
    if not eps > 0:
        raise NonPositiveEps(f"slice duration must be positive, got {eps!r}")
    dx = np.asarray(x_next, dtype=float) - np.asarray(x_prev, dtype=float)
    kinetic = params.mass * dx**2 / (2 * eps)
    if mode is Mode.REAL:
        out = _prefactor(params, eps, mode) * np.exp(1j / params.hbar * (kinetic - eps * np.asarray(v_mid)))
    else:
        out = _prefactor(params, eps, mode) * np.exp(-(kinetic + eps * np.asarray(v_mid)) / params.hbar)
    return complex(out) if np.ndim(out) == 0 else out


def _absorbing_weights(x: np.ndarray, dx: float, inner_lo: float, inner_hi: float, margin: float) -> np.ndarray:
    """Trapezoid weights damped by an erfc roll-off across the outer two-thirds of the margin."""
    w = np.full(x.size, dx)
    w[0] = w[-1] = 0.5 * dx
    if margin <= 0:
        return w
    depth = np.maximum(np.maximum(inner_lo - x, x - inner_hi), 0.0)
    band = 2.0 * margin / 3.0
    centre = margin - band / 2.0
    # erfc(+-4.05) ~ 1e-8 at both ends of the band
    sigma = band / 11.5
    return w * 0.5 * erfc((depth - centre) / (math.sqrt(2.0) * sigma))


def _matrix_power_times(a: np.ndarray, power: int, tail: np.ndarray) -> np.ndarray:
    """a**power @ tail by binary exponentiation."""
    result = tail
    base = a
    while power:
        if power & 1:
            result = base @ result
        power >>= 1
        if power:
            base = base @ base
    return result


def min_real_time_eps(params: PhysicsParams, grid: Grid1D, margin: float) -> float:
    """Smallest real-time slice length whose kernel is sampled without aliasing.

    ``m L dx / (pi hbar)`` with ``L`` the grid span plus a third of ``margin``
    on each side, the part of the extension the absorbing taper leaves intact.
    """
    reach = (grid.x_max - grid.x_min) + 2.0 * margin / 3.0
    return params.mass * reach * grid.dx / (math.pi * params.hbar)


def max_real_time_slices(params: PhysicsParams, grid: Grid1D, total_time: float, absorbing_margin: Optional[float] = None) -> int:
    """Largest slice count accepted by :func:`timeslice_propagator` in real time."""
    cfg = PropagatorConfig(1, total_time, Mode.REAL)
    margin = default_margin(params, cfg) if absorbing_margin is None else float(absorbing_margin)
    return max(1, int(math.floor(total_time / min_real_time_eps(params, grid, margin) * (1 + 1e-12))))


def default_margin(params: PhysicsParams, config: PropagatorConfig) -> float:
    if config.mode is Mode.IMAGINARY:
        return 0.0
    return MARGIN_WIDTHS * math.sqrt(params.hbar * config.total_time / params.mass)


def timeslice_propagator(
    params: PhysicsParams,
    potential,
    grid: Grid1D,
    config: PropagatorConfig,
    absorbing_margin: Optional[float] = None,
) -> PropagatorMatrix:
    """Build K on ``grid`` as a product of ``config.n_slices`` slice kernels.

    Parameters
    ----------
    params : PhysicsParams
    potential : callable
        Vectorised V(x); a :class:`PiecewisePotential` or any sampled callback.
        It is evaluated at slice midpoints ``(x_k + x_{k+1}) / 2``.
    grid : Grid1D
        Output grid.  Accuracy statements refer to its interior two-thirds.
    config : PropagatorConfig
    absorbing_margin : float, optional
        Width of the damped extension used for intermediate integrals.
        Defaults to ``6 sqrt(hbar t / m)`` in real time and zero in imaginary
        time, where the Gaussian tails make truncation harmless.

    Raises
    ------
    GridTooCoarse
        Real time with ``m dx^2 / (2 hbar eps) > pi / 4``, or, for more than
        one slice, with ``m L dx / (hbar eps) > pi`` where ``L`` is the grid
        span plus the undamped third of the margin on each side.  The second
        bound keeps the kernel's local wavenumber ``m |x - y| / (hbar eps)``
        below the Nyquist limit for every jump that carries weight; past it
        the sliced product aliases and grows with each slice.
    """
    eps = config.eps
    dx = grid.dx
    margin = default_margin(params, config) if absorbing_margin is None else float(absorbing_margin)
    if margin < 0:
        raise ValueError("absorbing_margin must be non-negative")
    if config.mode is Mode.REAL:
        if params.mass * dx**2 / (2 * params.hbar * eps) > math.pi / 4:
            raise GridTooCoarse(
                f"timeslice_propagator: dx={dx:.3g} does not resolve the slice kernel at eps={eps:.3g}"
                f" (need m dx^2 / (2 hbar eps) <= pi/4)"
            )
        if config.n_slices > 1 and eps < min_real_time_eps(params, grid, margin):
            raise GridTooCoarse(
                f"timeslice_propagator: eps={eps:.3g} is below {min_real_time_eps(params, grid, margin):.3g};"
                f" long jumps across the grid alias at dx={dx:.3g} (use fewer slices or a finer grid)"
            )

    x_user = grid.points
    n_pad = int(math.ceil(margin / dx)) if config.n_slices > 1 else 0
    if n_pad:
        x = np.concatenate([x_user[0] - dx * np.arange(n_pad, 0, -1), x_user, x_user[-1] + dx * np.arange(1, n_pad + 1)])
    else:
        x = x_user

    xn, xp = np.meshgrid(x, x, indexing="ij")
    v_mid = np.asarray(potential(0.5 * (xn + xp)), dtype=float)
    k1 = slice_kernel(params, eps, xn, xp, v_mid, config.mode)
    if config.mode is Mode.IMAGINARY:
        k1 = k1.real
    del xn, xp, v_mid

    if config.n_slices == 1:
        k = k1
    else:
        w = _absorbing_weights(x, dx, x_user[0], x_user[-1], margin if n_pad else 0.0)
        k = _matrix_power_times(k1 * w[None, :], config.n_slices - 1, k1)
        if n_pad:
            k = k[n_pad:-n_pad, n_pad:-n_pad]
    return PropagatorMatrix(grid=grid, entries=k, config=config)


def richardson_weights(slice_counts: Sequence[int], total_time: float = 1.0) -> np.ndarray:
    """Combination weights cancelling error terms eps, eps^2, ... eps^(k-1).

    The midpoint slice action leaves an O(eps) error for non-constant V, so
    every integer power is eliminated, not only the even ones.
    """
    eps = total_time / np.asarray(slice_counts, dtype=float)
    vander = np.vander(eps, len(eps), increasing=True)
    rhs = np.zeros(len(eps))
    rhs[0] = 1.0
    return np.linalg.solve(vander.T, rhs)


def extrapolated_propagator(
    params: PhysicsParams,
    potential,
    grid: Grid1D,
    total_time: float,
    slice_counts: Sequence[int],
    mode=Mode.REAL,
    absorbing_margin: Optional[float] = None,
) -> PropagatorMatrix:
    """Richardson-extrapolate time-sliced kernels over several slice counts."""
    counts = tuple(int(n) for n in slice_counts)
    if len(counts) < 2 or len(set(counts)) != len(counts):
        raise ValueError("need at least two distinct slice counts")
    coeffs = richardson_weights(counts, total_time)
    acc = None
    for c, n in zip(coeffs, counts):
        cfg = PropagatorConfig(n, total_time, mode)
        k = timeslice_propagator(params, potential, grid, cfg, absorbing_margin).entries
        acc = c * k if acc is None else acc + c * k
    final = PropagatorConfig(max(counts), total_time, mode)
    return PropagatorMatrix(grid=grid, entries=acc, config=final, extrapolated_from=counts)


def free_propagator_closed_form(params: PhysicsParams, x, x0, t: float, mode=Mode.REAL):
    """Exact free-particle kernel (heat kernel in imaginary time)."""
    mode = Mode.parse(mode)
    if not t > 0:
        raise NonPositiveTime(f"t must be positive, got {t!r}")
    m, hbar = params.mass, params.hbar
    d2 = (np.asarray(x, dtype=float) - np.asarray(x0, dtype=float)) ** 2
    if mode is Mode.REAL:
        out = np.sqrt(m / (2j * np.pi * hbar * t)) * np.exp(1j * m * d2 / (2 * hbar * t))
    else:
        out = np.sqrt(m / (2 * np.pi * hbar * t)) * np.exp(-m * d2 / (2 * hbar * t))
    return complex(out) if np.ndim(out) == 0 else out


def harmonic_propagator_closed_form(params: PhysicsParams, omega: float, x, x0, t: float, mode=Mode.REAL):
    """Exact kernel for V = m omega^2 x^2 / 2.

    Real time uses the principal branch of the square root; no Maslov phase
    is tracked past the first caustic.
    """
    mode = Mode.parse(mode)
    if not t > 0:
        raise NonPositiveTime(f"t must be positive, got {t!r}")
    m, hbar = params.mass, params.hbar
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    wt = omega * t
    if mode is Mode.REAL:
        s, c = math.sin(wt), math.cos(wt)
        if abs(s) < CAUSTIC_TOL:
            raise CausticError(f"harmonic kernel is singular at omega*t={wt} (sin = {s:.2e})")
        pref = np.sqrt(m * omega / (2j * np.pi * hbar * s))
        out = pref * np.exp(1j * m * omega * ((x**2 + x0**2) * c - 2 * x * x0) / (2 * hbar * s))
    else:
        s, c = math.sinh(wt), math.cosh(wt)
        pref = math.sqrt(m * omega / (2 * math.pi * hbar * s))
        out = pref * np.exp(-m * omega * ((x**2 + x0**2) * c - 2 * x * x0) / (2 * hbar * s))
    return complex(out) if np.ndim(out) == 0 else out


def apply_propagator(k: PropagatorMatrix, psi0: StateVector) -> StateVector:
    """Psi_t(x) = sum_j K(x, x_j) Psi_0(x_j) w_j with trapezoid weights w."""
    if psi0.grid != k.grid:
        raise GridMismatch(f"state grid {psi0.grid} differs from kernel grid {k.grid}")
    return StateVector(k.grid, k.entries @ (k.grid.weights * psi0.values))
