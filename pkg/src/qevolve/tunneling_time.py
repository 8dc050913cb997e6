"""Phase (Wigner) time, Hartman saturation and barrier phase flatness."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .action_field import RegionSolution, build_wavefunction, evaluate_psi, transmission_reflection
from .core import PhysicsParams, PiecewisePotential, rectangular_barrier
from .errors import NotForbidden, PhaseWrapError

DEFAULT_DE = 1e-6
MAX_HALVINGS = 3
SLOPE_RTOL = 1e-4


@dataclass(frozen=True)
class TimeScanResult:
    abscissa: np.ndarray = field(repr=False)
    tau_phase: np.ndarray = field(repr=False)
    t_prob: np.ndarray = field(repr=False)
    saturation: float = float("nan")


def _t_amp(params: PhysicsParams, potential: PiecewisePotential, e: float) -> complex:
    return transmission_reflection(build_wavefunction(params, potential, e)).t_amp


def _phase_step(params, potential, e, de) -> float:
    lo = _t_amp(params, potential, e - de)
    mid = _t_amp(params, potential, e)
    hi = _t_amp(params, potential, e + de)
    d1 = cmath.phase(mid / lo)
    d2 = cmath.phase(hi / mid)
    # each half-step must stay well inside the principal branch to be unambiguous
    if abs(d1) >= math.pi / 2 or abs(d2) >= math.pi / 2:
        raise PhaseWrapError(f"phase_time: arg t jumps by {d1:.3f}, {d2:.3f} rad across dE={de:g}")
    return (d1 + d2) / (2 * de)


def _resolved_slope(params, potential, e, de) -> float:
    """d(arg t)/dE, accepted only when halving the step leaves it unchanged.

    A wrapped phase can land back inside the principal branch, so the
    magnitude check alone cannot detect aliasing; the halved step can.
    """
    coarse = _phase_step(params, potential, e, de)
    fine = _phase_step(params, potential, e, de / 2)
    noise = 1e-10 / de
    if abs(coarse - fine) > SLOPE_RTOL * max(abs(coarse), abs(fine)) + noise:
        raise PhaseWrapError(f"phase_time: slope {coarse:.6g} vs {fine:.6g} at dE={de:g}, {de / 2:g}")
    return fine


def phase_time(
    params: PhysicsParams,
    potential: PiecewisePotential,
    e: float,
    de: float = DEFAULT_DE,
    delay: bool = False,
) -> float:
    """hbar d(arg t)/dE by a central difference.

    The transmitted amplitude is referenced to the last interface and the
    incident one to the origin, so for a structure starting at x = 0 this is
    the time spent between the first and last interfaces.  With ``delay`` the
    free-flight time from the origin to the last interface at the incident
    speed is subtracted.

    ``de`` is halved up to three times when the phase change is ambiguous,
    either because a half-step reaches pi/2 or because the estimates at
    ``de`` and ``de / 2`` disagree.

    Raises
    ------
    PhaseWrapError
        If the slope is still unresolved after the last halving.
    """
    if not de > 0:
        raise ValueError(f"de must be positive, got {de!r}")
    step = de
    for attempt in range(MAX_HALVINGS + 1):
        try:
            slope = _resolved_slope(params, potential, e, step)
            break
        except PhaseWrapError:
            if attempt == MAX_HALVINGS:
                raise
            step /= 2
    tau = params.hbar * slope
    if delay:
        bounds = potential.boundaries
        if bounds.size:
            k_in = math.sqrt(2 * params.mass * (e - potential.values[0])) / params.hbar
            tau -= params.mass * bounds[-1] / (params.hbar * k_in)
    return tau


def hartman_scan(
    params: PhysicsParams,
    v0: float,
    e: float,
    widths: Sequence[float],
    de: float = DEFAULT_DE,
) -> TimeScanResult:
    """Phase time and transmission of rectangular barriers of increasing width.

    ``saturation`` is ``|tau(w_last) - tau(w_last / 2)| / tau(w_last)``.
    """
    widths = np.asarray(widths, dtype=float)
    if widths.ndim != 1 or widths.size == 0:
        raise ValueError("widths must be a non-empty 1-D sequence")
    if np.any(np.diff(widths) <= 0):
        raise ValueError("widths must be strictly increasing")
    if not 0 < e < v0:
        raise ValueError(f"hartman_scan needs 0 < E < V0, got E={e}, V0={v0}")
    taus, ts = [], []
    for w in widths:
        pot = rectangular_barrier(v0, float(w))
        taus.append(phase_time(params, pot, e, de))
        ts.append(transmission_reflection(build_wavefunction(params, pot, e)).t_prob)
    last = widths[-1]
    saturation = float("nan")
    if last > 0:
        tau_half = phase_time(params, rectangular_barrier(v0, last / 2), e, de)
        saturation = abs(taus[-1] - tau_half) / abs(taus[-1])
    return TimeScanResult(widths, np.array(taus), np.array(ts), saturation)


def phase_flatness(solution: RegionSolution, region: int, n_samples: int = 401, tail_length: Optional[float] = None) -> float:
    """Largest phase excursion of psi inside a forbidden region, modulo pi.

    Phases differing by pi count as equal (a real function may change sign).
    A semi-infinite region is sampled over ``tail_length``, by default
    20 decay lengths.
    """
    wave = solution.waves[region]
    if not wave.forbidden:
        raise NotForbidden(f"phase_flatness: region {region} has E >= V")
    r = solution.potential.regions[region]
    lo = r.x_left if math.isfinite(r.x_left) else r.x_right - (tail_length or 20.0 / wave.kappa)
    hi = r.x_right if math.isfinite(r.x_right) else r.x_left + (tail_length or 20.0 / wave.kappa)
    xs = np.linspace(lo, hi, n_samples, endpoint=not math.isfinite(r.x_right))
    psi = evaluate_psi(solution, xs)
    d = np.abs(np.angle(psi / psi[0]))
    return float(np.max(np.minimum(d, math.pi - d)))
