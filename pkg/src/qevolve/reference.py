"""Independent Schrödinger oracle for piecewise-constant potentials.

Two routes that share nothing with the action-field matching:

* :func:`transfer_matrix` multiplies (psi, psi') free-flight matrices through
  the structure and converts to plane-wave amplitudes only at the asymptotes.
* :func:`reference_wavefunction` writes every interface condition into one
  global linear system and solves it in a single shot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .action_field import RegionSolution, RegionWave, evaluate_psi
from .core import DEGENERACY_TOL, PhysicsParams, PiecewisePotential
from .errors import EnergyOutOfRange, NoPropagatingAsymptote


def _wave(params: PhysicsParams, e: float, v: float) -> RegionWave:
    kin = e - v
    if abs(kin) <= DEGENERACY_TOL:
        return RegionWave(v, 0j, True)
    q = math.sqrt(2.0 * params.mass * abs(kin)) / params.hbar
    return RegionWave(v, complex(q, 0) if kin > 0 else complex(0, q))


@dataclass(frozen=True)
class TransferMatrix:
    """Maps (right-moving, left-moving) amplitudes on the left to those on the right.

    Asymptotic plane waves are referenced to the global origin,
    ``psi = B exp(i k x) + A exp(-i k x)``, so matrices of concatenated
    structures multiply.
    """

    entries: np.ndarray = field(repr=False)
    e: float
    k_left: float
    k_right: float

    @property
    def t_amp(self) -> complex:
        """Transmitted amplitude for unit incidence from the left, no return from the right."""
        m = self.entries
        return complex(np.linalg.det(m) / m[1, 1])

    @property
    def r_amp(self) -> complex:
        m = self.entries
        return complex(-m[1, 0] / m[1, 1])

    @property
    def t_prob(self) -> float:
        return float(self.k_right / self.k_left * abs(self.t_amp) ** 2)

    @property
    def r_prob(self) -> float:
        return float(abs(self.r_amp) ** 2)

    def pseudo_unitarity_defect(self) -> float:
        """| |M11|^2 - |M12|^2 - k_left/k_right |, zero for flux-conserving matrices."""
        m = self.entries
        return float(abs(abs(m[0, 0]) ** 2 - abs(m[0, 1]) ** 2 - self.k_left / self.k_right))


def _flight(wave: RegionWave, d: float) -> np.ndarray:
    """(psi, psi') at x + d from (psi, psi') at x inside one region."""
    if wave.degenerate:
        return np.array([[1.0, d], [0.0, 1.0]], dtype=complex)
    if wave.propagating:
        k = wave.k.real
        c, s = math.cos(k * d), math.sin(k * d)
        return np.array([[c, s / k], [-k * s, c]], dtype=complex)
    q = wave.k.imag
    c, s = math.cosh(q * d), math.sinh(q * d)
    return np.array([[c, s / q], [q * s, c]], dtype=complex)


def _plane_to_state(k: float, x: float) -> np.ndarray:
    """(B, A) -> (psi, psi') at x for psi = B e^{ikx} + A e^{-ikx}."""
    p, q = np.exp(1j * k * x), np.exp(-1j * k * x)
    return np.array([[p, q], [1j * k * p, -1j * k * q]])


def transfer_matrix(params: PhysicsParams, potential: PiecewisePotential, e: float) -> TransferMatrix:
    """Product of interface and free-flight matrices across all regions."""
    waves = [_wave(params, e, v) for v in potential.values]
    if not (waves[0].propagating and waves[-1].propagating):
        raise NoPropagatingAsymptote("transfer_matrix: both asymptotes must have E > V")
    kl, kr = waves[0].k.real, waves[-1].k.real
    bounds = potential.boundaries
    if bounds.size == 0:
        return TransferMatrix(np.eye(2, dtype=complex), e, kl, kr)
    m = _plane_to_state(kl, bounds[0])
    for j in range(1, len(waves) - 1):
        m = _flight(waves[j], bounds[j] - bounds[j - 1]) @ m
    m = np.linalg.solve(_plane_to_state(kr, bounds[-1]), m)
    return TransferMatrix(m, e, kl, kr)


def _local_basis(wave: RegionWave, u: float):
    if wave.degenerate:
        return (1.0, u), (0.0, 1.0)
    k = wave.k
    fa, fb = np.exp(-1j * k * u), np.exp(1j * k * u)
    return (fa, fb), (-1j * k * fa, 1j * k * fb)


def reference_wavefunction(params: PhysicsParams, potential: PiecewisePotential, e: float) -> RegionSolution:
    """Solve all interface conditions at once as a 2N x 2N linear system.

    Unknowns are ordered (a_0, b_0, a_1, b_1, ...).  Rows: b_0 = 1, then psi and
    psi' continuity at each interface, then a_{N-1} = 0.  Columns are scaled
    to unit max-norm before the solve to tame exp(kappa w) entries.
    """
    waves = tuple(_wave(params, e, v) for v in potential.values)
    if not waves[0].propagating or waves[-1].degenerate:
        raise NoPropagatingAsymptote("reference_wavefunction: need E > V on the left and E != V on the right")
    n = len(waves)
    bounds = potential.boundaries
    x_ref = np.concatenate([[0.0], bounds])
    mat = np.zeros((2 * n, 2 * n), dtype=complex)
    rhs = np.zeros(2 * n, dtype=complex)
    mat[0, 1] = 1.0
    rhs[0] = 1.0
    for j, xb in enumerate(bounds):
        (la, lb), (dla, dlb) = _local_basis(waves[j], xb - x_ref[j])
        (ra, rb), (dra, drb) = _local_basis(waves[j + 1], xb - x_ref[j + 1])
        row = 1 + 2 * j
        mat[row, 2 * j : 2 * j + 4] = (la, lb, -ra, -rb)
        mat[row + 1, 2 * j : 2 * j + 4] = (dla, dlb, -dra, -drb)
    mat[-1, 2 * (n - 1)] = 1.0
    scale = np.max(np.abs(mat), axis=0)
    coef = np.linalg.solve(mat / scale, rhs) / scale
    return RegionSolution(params, potential, float(e), waves, coef[0::2], coef[1::2], x_ref)


def rect_barrier_T_closed_form(params: PhysicsParams, e: float, v0: float, a: float) -> float:
    """T = [1 + V0^2 sinh^2(kappa a) / (4 E (V0 - E))]^-1 for 0 < E < V0."""
    if not 0 < e < v0:
        raise EnergyOutOfRange(f"rect_barrier_T_closed_form needs 0 < E < V0, got E={e}, V0={v0}")
    if a < 0:
        raise ValueError(f"barrier width must be non-negative, got {a}")
    kappa = math.sqrt(2 * params.mass * (v0 - e)) / params.hbar
    return 1.0 / (1.0 + v0**2 * math.sinh(kappa * a) ** 2 / (4 * e * (v0 - e)))


def max_relative_deviation(sol: RegionSolution, ref: RegionSolution, x) -> float:
    """max_x |psi_sol - psi_ref| / |psi_ref| over the sample points ``x``."""
    psi = evaluate_psi(sol, x)
    psi_ref = evaluate_psi(ref, x)
    return float(np.max(np.abs(psi - psi_ref) / np.abs(psi_ref)))


def sample_points(potential: PiecewisePotential, n: int = 401, pad: float = 3.0) -> np.ndarray:
    """Evenly spaced x covering every interface plus ``pad`` on either side."""
    b = potential.boundaries
    lo, hi = (b[0] - pad, b[-1] + pad) if b.size else (-pad, pad)
    return np.linspace(lo, hi, n)
