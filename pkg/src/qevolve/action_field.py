"""Stationary scattering states assembled from counter-propagating action fields.

In each constant-V region the wavefunction is the sum of two exponentials,
``psi = a exp(i S^- / hbar) + b exp(i S^+ / hbar)``, with action fields
``S^(+-)(x, tau) = +-hbar k (x - x_ref) - E tau``.  For E > V the wavevector is
real and the fields travel right (+) and left (-); for E < V it is ``i kappa``
and ``i S^+`` becomes a real decaying exponent.  The amplitudes follow from
continuity of psi and psi' across every interface, with unit incidence from
the left and nothing arriving from the right.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import DEGENERACY_TOL, PhysicsParams, PiecewisePotential
from .errors import DegenerateRegion, NoPropagatingAsymptote


@dataclass(frozen=True)
class RegionWave:
    """Wavevector of one region: real k, ``i kappa``, or degenerate (E = V)."""

    v: float
    k: complex
    degenerate: bool = False

    @property
    def forbidden(self) -> bool:
        return not self.degenerate and self.k.imag > 0

    @property
    def propagating(self) -> bool:
        return not self.degenerate and self.k.imag == 0

    @property
    def kappa(self) -> float:
        return self.k.imag


def region_wavevector(params: PhysicsParams, e: float, v: float) -> RegionWave:
    """k = sqrt(2m(E-V))/hbar on the positive real or positive imaginary axis."""
    diff = e - v
    if abs(diff) <= DEGENERACY_TOL:
        return RegionWave(v=v, k=0j, degenerate=True)
    mag = math.sqrt(2 * params.mass * abs(diff)) / params.hbar
    return RegionWave(v=v, k=complex(mag, 0.0) if diff > 0 else complex(0.0, mag))


@dataclass(frozen=True)
class ActionField:
    """S(x, tau) = sign * p * (x - x_ref) - E tau with complex momentum p = hbar k."""

    direction: str
    momentum: complex
    energy: float
    x_ref: float = 0.0

    @property
    def sign(self) -> int:
        return 1 if self.direction == "plus" else -1

    def __call__(self, x, tau=0.0):
        return self.sign * self.momentum * (np.asarray(x, dtype=float) - self.x_ref) - self.energy * tau


def action_field(params: PhysicsParams, wave: RegionWave, e: float, direction: str, x_ref: float = 0.0) -> ActionField:
    if direction not in ("plus", "minus"):
        raise ValueError(f"direction must be 'plus' or 'minus', got {direction!r}")
    if wave.degenerate:
        raise DegenerateRegion("action_field: zero kinetic energy has no exponential action field")
    return ActionField(direction, params.hbar * wave.k, e, x_ref)


@dataclass(frozen=True)
class RegionSolution:
    """Per-region amplitudes of a stationary state at energy ``energy``.

    ``a[j]`` multiplies the left-moving (or growing) field and ``b[j]`` the
    right-moving (or decaying) one, both referenced to ``x_ref[j]``: the left
    interface of region j, and 0 for the leftmost region.  Degenerate regions
    use the basis ``{1, x - x_ref}`` with coefficients ``(a, b)``.
    """

    params: PhysicsParams
    potential: PiecewisePotential
    energy: float
    waves: tuple
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    x_ref: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("a", "b"):
            arr = np.array(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        xr = np.array(self.x_ref, dtype=float)
        xr.setflags(write=False)
        object.__setattr__(self, "x_ref", xr)


def reference_points(potential: PiecewisePotential) -> np.ndarray:
    return np.concatenate([[0.0], potential.boundaries])


def _basis(wave: RegionWave, u: float) -> np.ndarray:
    """[[f_a, f_b], [f_a', f_b']] at local coordinate u."""
    if wave.degenerate:
        return np.array([[1.0, u], [0.0, 1.0]], dtype=complex)
    k = wave.k
    fa = cmath.exp(-1j * k * u)
    fb = cmath.exp(1j * k * u)
    return np.array([[fa, fb], [-1j * k * fa, 1j * k * fb]])


def _check_asymptotes(waves: Sequence[RegionWave]) -> None:
    if not waves[0].propagating:
        raise NoPropagatingAsymptote("the leftmost region must carry a propagating incident wave (E > V)")
    if waves[-1].degenerate:
        raise NoPropagatingAsymptote("the rightmost region has E = V; no outgoing or decaying tail")


def build_wavefunction(params: PhysicsParams, potential: PiecewisePotential, e: float) -> RegionSolution:
    """Match the two action fields region by region, right to left.

    The rightmost region keeps only its outgoing (or, if E < V there, its
    decaying) field.  Its amplitude is carried leftwards through each interface
    by the 2x2 continuity condition, then the whole solution is rescaled so the
    incident amplitude in the leftmost region is 1.

    Raises
    ------
    NoPropagatingAsymptote
        If E does not exceed V on the left, or E = V on the right.
    DegenerateRegion
        If an interface matching matrix is singular.
    """
    waves = tuple(region_wavevector(params, e, v) for v in potential.values)
    _check_asymptotes(waves)
    x_ref = reference_points(potential)
    bounds = potential.boundaries
    n = len(waves)
    coef = np.zeros((n, 2), dtype=complex)
    coef[-1] = (0.0, 1.0)
    for j in range(n - 2, -1, -1):
        xb = bounds[j]
        left = _basis(waves[j], xb - x_ref[j])
        right = _basis(waves[j + 1], xb - x_ref[j + 1])
        if abs(np.linalg.det(left)) < 1e-300:
            raise DegenerateRegion(f"build_wavefunction: singular matching at x={xb}")
        coef[j] = np.linalg.solve(left, right @ coef[j + 1])
    incident = coef[0, 1]
    if incident == 0:
        raise DegenerateRegion("build_wavefunction: no incident component survives matching")
    coef /= incident
    return RegionSolution(params, potential, float(e), waves, coef[:, 0], coef[:, 1], x_ref)


def evaluate_psi(solution: RegionSolution, x, tau: float = 0.0):
    """psi(x, tau) = a exp(i S^-/hbar) + b exp(i S^+/hbar); vectorised over x."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    idx = np.atleast_1d(solution.potential.region_index(xs))
    out = np.empty(xs.shape, dtype=complex)
    hbar = solution.params.hbar
    for j in np.unique(idx):
        sel = idx == j
        wave = solution.waves[j]
        xr = solution.x_ref[j]
        if wave.degenerate:
            out[sel] = (solution.a[j] + solution.b[j] * (xs[sel] - xr)) * cmath.exp(-1j * solution.energy * tau / hbar)
            continue
        s_minus = action_field(solution.params, wave, solution.energy, "minus", xr)
        s_plus = action_field(solution.params, wave, solution.energy, "plus", xr)
        out[sel] = solution.a[j] * np.exp(1j * s_minus(xs[sel], tau) / hbar) + solution.b[j] * np.exp(
            1j * s_plus(xs[sel], tau) / hbar
        )
    return complex(out[0]) if np.ndim(x) == 0 else out


def evaluate_dpsi(solution: RegionSolution, x):
    """d psi / dx at tau = 0."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    idx = np.atleast_1d(solution.potential.region_index(xs))
    out = np.empty(xs.shape, dtype=complex)
    for j in np.unique(idx):
        sel = idx == j
        basis = np.array([_basis(solution.waves[j], u)[1] for u in xs[sel] - solution.x_ref[j]])
        out[sel] = basis @ np.array([solution.a[j], solution.b[j]])
    return complex(out[0]) if np.ndim(x) == 0 else out


def interface_residuals(solution: RegionSolution) -> np.ndarray:
    """Relative mismatch of (psi, psi') at each finite interface, shape (n_interfaces, 2)."""
    res = []
    for j, xb in enumerate(solution.potential.boundaries):
        left = _basis(solution.waves[j], xb - solution.x_ref[j]) @ (solution.a[j], solution.b[j])
        right = _basis(solution.waves[j + 1], xb - solution.x_ref[j + 1]) @ (solution.a[j + 1], solution.b[j + 1])
        scale = np.maximum(np.maximum(np.abs(left), np.abs(right)), 1e-300)
        res.append(np.abs(left - right) / scale)
    return np.array(res).reshape(-1, 2)


@dataclass(frozen=True)
class Scattering:
    t_amp: complex
    r_amp: complex
    t_prob: float
    r_prob: float


def transmission_reflection(solution: RegionSolution) -> Scattering:
    """Reflection ``a`` of the leftmost region, transmission ``b`` of the rightmost.

    Probabilities are flux weighted, ``T = (k_right / k_left) |t|^2``.  An
    evanescent right tail carries no flux, so T = 0 there.
    """
    first, last = solution.waves[0], solution.waves[-1]
    if not first.propagating or last.degenerate:
        raise NoPropagatingAsymptote("transmission_reflection: asymptotes must not be degenerate")
    r = complex(solution.a[0])
    t = complex(solution.b[-1])
    t_prob = (last.k.real / first.k.real) * abs(t) ** 2 if last.propagating else 0.0
    return Scattering(t_amp=t, r_amp=r, t_prob=float(t_prob), r_prob=float(abs(r) ** 2))


def transmission_scan(params: PhysicsParams, potential: PiecewisePotential, energies) -> tuple:
    """Arrays (T, R) over ``energies``."""
    ts, rs = [], []
    for e in energies:
        sc = transmission_reflection(build_wavefunction(params, potential, float(e)))
        ts.append(sc.t_prob)
        rs.append(sc.r_prob)
    return np.array(ts), np.array(rs)
