import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qevolve.action_field import (
    action_field,
    build_wavefunction,
    evaluate_dpsi,
    evaluate_psi,
    interface_residuals,
    region_wavevector,
    transmission_reflection,
    transmission_scan,
)
from qevolve.core import PhysicsParams, free_potential, layered_potential, rectangular_barrier, step_potential
from qevolve.errors import DegenerateRegion, NoPropagatingAsymptote
from qevolve.reference import rect_barrier_T_closed_form, reference_wavefunction

P = PhysicsParams()


def test_region_wavevector():
    assert region_wavevector(P, 0.5, 0.0).k == pytest.approx(1.0)
    w = region_wavevector(P, 0.5, 1.0)
    assert w.forbidden and w.kappa == pytest.approx(1.0)
    assert region_wavevector(P, 1.0, 1.0).degenerate
    w = region_wavevector(PhysicsParams(mass=2.0, hbar=0.5), 1.0, 0.0)
    assert w.k.real == pytest.approx(4.0)


def test_action_field_values():
    wave = region_wavevector(P, 0.5, 0.0)
    s_plus = action_field(P, wave, 0.5, "plus", x_ref=1.0)
    s_minus = action_field(P, wave, 0.5, "minus", x_ref=1.0)
    assert s_plus(3.0, 2.0) == pytest.approx(2.0 - 1.0)
    assert s_minus(3.0, 2.0) == pytest.approx(-2.0 - 1.0)
    with pytest.raises(ValueError):
        action_field(P, wave, 0.5, "up")
    with pytest.raises(DegenerateRegion):
        action_field(P, region_wavevector(P, 1.0, 1.0), 1.0, "plus")


def test_free_plane_wave():
    sol = build_wavefunction(P, free_potential(), 0.5)
    assert evaluate_psi(sol, math.pi) == pytest.approx(-1.0)
    xs = np.linspace(-5, 5, 11)
    for tau in (0.0, 0.7, 3.0):
        np.testing.assert_allclose(np.abs(evaluate_psi(sol, xs, tau)), 1.0)
    assert evaluate_psi(sol, 0.0, 2.0) == pytest.approx(np.exp(-1j))


def test_step_reflection():
    sol = build_wavefunction(P, step_potential(1.0), 2.0)
    sc = transmission_reflection(sol)
    assert sc.r_amp == pytest.approx(3 - 2 * math.sqrt(2))
    assert sc.r_prob == pytest.approx(0.029437251522859, rel=1e-12)
    assert sc.r_prob + sc.t_prob == pytest.approx(1.0, abs=1e-14)


def test_barrier_matches_closed_form():
    for e in (0.1, 0.5, 0.9):
        sc = transmission_reflection(build_wavefunction(P, rectangular_barrier(1.0, 1.3), e))
        assert sc.t_prob == pytest.approx(rect_barrier_T_closed_form(P, e, 1.0, 1.3), rel=1e-12)


def test_degenerate_barrier_energy():
    sol = build_wavefunction(P, rectangular_barrier(1.0, 1.0), 1.0)
    assert sol.waves[1].degenerate
    assert transmission_reflection(sol).t_prob == pytest.approx(2.0 / 3.0, rel=1e-12)
    assert np.max(interface_residuals(sol)) < 1e-13


def test_evanescent_tail_reflects_everything():
    sol = build_wavefunction(P, step_potential(1.0), 0.5)
    sc = transmission_reflection(sol)
    assert sc.t_prob == 0.0
    assert sc.r_prob == pytest.approx(1.0, abs=1e-14)
    assert abs(evaluate_psi(sol, 30.0)) < 1e-12


def test_missing_asymptote():
    with pytest.raises(NoPropagatingAsymptote):
        build_wavefunction(P, step_potential(1.0, v_left=2.0), 0.5)
    with pytest.raises(NoPropagatingAsymptote):
        build_wavefunction(P, step_potential(1.0), 1.0)


def test_psi_modulus_bounded_inside_barrier():
    # |psi|^2 is convex where E < V, so its maximum sits on the edges
    sol = build_wavefunction(P, rectangular_barrier(2.0, 3.0), 0.7)
    inside = np.abs(evaluate_psi(sol, np.linspace(0, 3, 301)))
    assert inside.max() <= max(inside[0], inside[-1]) * (1 + 1e-12)


def test_symmetric_barrier_mirror_has_same_transmission():
    pot = layered_potential(0.0, [(0.5, 1.0), (0.8, 2.5), (0.3, 0.4)])
    a = transmission_reflection(build_wavefunction(P, pot, 0.9))
    b = transmission_reflection(build_wavefunction(P, pot.mirrored(), 0.9))
    assert abs(a.t_amp) == pytest.approx(abs(b.t_amp), rel=1e-12)


def test_scan_shapes():
    t, r = transmission_scan(P, rectangular_barrier(1.0, 1.0), np.linspace(0.2, 3.0, 7))
    assert t.shape == r.shape == (7,)
    np.testing.assert_allclose(t + r, 1.0, atol=1e-13)


layers = st.lists(st.tuples(st.floats(0.05, 2.0), st.floats(-1.0, 3.0)), min_size=1, max_size=5)


@settings(max_examples=60, deadline=None)
@given(layers, st.floats(0.05, 4.0))
def test_random_layers_flux_continuity_and_reference(layer_list, e):
    pot = layered_potential(0.0, layer_list, x_left=-0.7)
    if np.any(np.abs(pot.values - e) < 1e-6):
        return
    sol = build_wavefunction(P, pot, e)
    sc = transmission_reflection(sol)
    assert sc.t_prob + sc.r_prob == pytest.approx(1.0, abs=1e-10)
    assert np.max(interface_residuals(sol)) < 1e-9
    # psi' is continuous too
    for xb in pot.boundaries:
        lo, hi = np.nextafter(xb, -np.inf), xb
        assert evaluate_dpsi(sol, lo) == pytest.approx(evaluate_dpsi(sol, hi), rel=1e-8, abs=1e-12)
    ref = reference_wavefunction(P, pot, e)
    xs = np.linspace(-3, pot.boundaries[-1] + 3, 57)
    np.testing.assert_allclose(evaluate_psi(sol, xs), evaluate_psi(ref, xs), rtol=1e-8, atol=1e-12)
