import math

import numpy as np
import pytest

from rfchain.dot import (DotModel, DoubleDotModel, conductance,
                         conductance_first_harmonic, conductance_slope,
                         dc_current, gate_charge_modulation,
                         quantum_capacitance, stability_grid, stored_charge)
from rfchain.units import BOLTZMANN, ELEMENTARY_CHARGE, PLANCK


def test_model_validation():
    with pytest.raises(ValueError):
        DotModel(peak_positions_v=())
    with pytest.raises(ValueError):
        DotModel(peak_positions_v=(-0.1, -0.2))  # not increasing
    with pytest.raises(ValueError):
        DotModel(peak_positions_v=(-0.3156,))  # single peak, no period
    with pytest.raises(ValueError):
        DotModel(delta_v_cb_v=1e-3)  # disagrees with default spacings
    with pytest.raises(ValueError):
        DotModel(g_max_s=0.0)
    with pytest.raises(ValueError):
        DotModel(lever_arm=1.5)
    with pytest.raises(ValueError):
        DotModel(electron_temperature_k=-1.0)
    # single peak with an explicit period is fine
    dot = DotModel(peak_positions_v=(-0.3156,), delta_v_cb_v=2.5e-3)
    assert dot.delta_v_cb_v == 2.5e-3


def test_gate_period_derived_from_peak_spacing():
    dot = DotModel()
    assert dot.delta_v_cb_v == pytest.approx(2.5e-3, rel=1e-12)


def test_thermal_width_hand_value():
    dot = DotModel()
    w = 2.5 * BOLTZMANN * 0.1 / (0.05 * ELEMENTARY_CHARGE)
    assert dot.thermal_width_v == pytest.approx(w, rel=1e-12)
    assert w == pytest.approx(4.31e-4, rel=1e-3)


def test_peak_shape_and_fwhm():
    dot = DotModel()
    p = dot.peak_positions_v[1]
    # tolerances leave room for the tails of the two neighboring peaks
    assert conductance(dot, p) == pytest.approx(dot.g_max_s, rel=2e-4)
    # sech^2 half maximum sits at x = arccosh(sqrt(2))
    half = dot.thermal_width_v * math.acosh(math.sqrt(2.0))
    assert conductance(dot, p + half) == pytest.approx(
        0.5 * dot.g_max_s, rel=1e-3)
    assert conductance(dot, p - half) == pytest.approx(
        0.5 * dot.g_max_s, rel=1e-3)
    # midway between peaks the device is blockaded (only tail conductance)
    assert conductance(dot, p + 0.5 * dot.delta_v_cb_v) < 0.03 * dot.g_max_s


def test_bias_slope_hand_value():
    dot = DotModel()
    kappa = dot.delta_v_cb_v * ELEMENTARY_CHARGE / (2.0 * dot.charging_energy_j)
    assert dot.bias_slope == pytest.approx(kappa, rel=1e-12)
    assert kappa == pytest.approx(1.25, rel=1e-12)


def test_diamond_closes_at_charging_energy():
    """Mid-way between two peaks the device is blockaded at zero bias, but
    the split branches from the flanking peaks cross there once the bias
    reaches E_C / e."""
    dot = DotModel()
    mid = 0.5 * (dot.peak_positions_v[0] + dot.peak_positions_v[1])
    apex = dot.charging_energy_j / ELEMENTARY_CHARGE
    g_blockade = conductance(dot, mid, 0.0)
    g_apex = conductance(dot, mid, apex)
    assert g_blockade < 0.05 * dot.g_max_s
    # two half-height branches coincide at the apex
    assert g_apex == pytest.approx(dot.g_max_s, rel=1e-2)


def test_dc_current_is_conductance_times_bias():
    dot = DotModel()
    v_l, v_b = -0.3156, 2e-4
    assert dc_current(dot, v_l, v_b) == pytest.approx(
        conductance(dot, v_l, v_b) * v_b, rel=1e-12)
    assert dc_current(dot, v_l, 0.0) == 0.0


def test_gate_charge_modulation():
    dot = DotModel()
    assert gate_charge_modulation(dot, 2.5e-3) == pytest.approx(
        ELEMENTARY_CHARGE, rel=1e-12)
    assert gate_charge_modulation(dot, 117.8e-6) == pytest.approx(
        0.04712 * ELEMENTARY_CHARGE, rel=1e-12)
    assert gate_charge_modulation(dot, 0.0) == 0.0
    with pytest.raises(ValueError):
        gate_charge_modulation(dot, -1e-6)


def test_first_harmonic_small_signal_limit():
    dot = DotModel()
    v_l = dot.peak_positions_v[1] + 0.5 * dot.thermal_width_v  # on a flank
    a = 1e-7  # far below the peak width
    dg = conductance_first_harmonic(dot, v_l, 0.0, a)
    assert dg == pytest.approx(conductance_slope(dot, v_l) * a, rel=1e-4)
    assert conductance_first_harmonic(dot, v_l, 0.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        conductance_first_harmonic(dot, v_l, 0.0, -1e-6)


def test_first_harmonic_saturates_at_large_drive():
    dot = DotModel()
    v_l = dot.peak_positions_v[1] + 0.5 * dot.thermal_width_v
    small = conductance_first_harmonic(dot, v_l, 0.0, 1e-5)
    big = conductance_first_harmonic(dot, v_l, 0.0, 5e-3)
    # linear extrapolation of the small-signal response overshoots badly
    assert big < conductance_slope(dot, v_l) * 5e-3
    assert big < small * (5e-3 / 1e-5)


def test_first_harmonic_vanishes_at_peak_top():
    dot = DotModel()
    # symmetric point: even response only, no fundamental
    dg = conductance_first_harmonic(dot, dot.peak_positions_v[1], 0.0, 1e-5)
    assert dg < 1e-6 * dot.g_max_s


def test_conductance_slope_matches_analytic():
    dot = DotModel()
    w = dot.thermal_width_v
    p = dot.peak_positions_v[1]
    x = 0.7
    # d/dx sech^2(x) = -2 sech^2(x) tanh(x), per-peak, both branches at V_B=0;
    # tolerance covers the neighboring peaks' slope tails
    expected = abs(-2.0 * dot.g_max_s / math.cosh(x) ** 2 * math.tanh(x) / w)
    assert conductance_slope(dot, p + x * w) == pytest.approx(expected, rel=1e-3)


def test_stability_grid_shape_and_current():
    dot = DotModel()
    v_l = np.linspace(-0.3196, -0.3116, 9)
    v_b = np.linspace(-1.5e-3, 1.5e-3, 5)
    g, i = stability_grid(dot, v_l, v_b)
    assert g.shape == (5, 9)
    assert i.shape == (5, 9)
    np.testing.assert_allclose(i, g * v_b[:, None], rtol=1e-12)
    # zero-bias row reproduces the 1-d conductance trace
    np.testing.assert_allclose(g[2], conductance(dot, v_l), rtol=1e-12)


def test_double_dot_validation():
    with pytest.raises(ValueError):
        DoubleDotModel(tunnel_coupling_j=0.0)
    with pytest.raises(ValueError):
        DoubleDotModel(lever_arm=0.0)


def test_quantum_capacitance_peak_value():
    dd = DoubleDotModel()
    le = dd.lever_arm * ELEMENTARY_CHARGE
    assert quantum_capacitance(dd, 0.0) == pytest.approx(
        le**2 / (4.0 * dd.tunnel_coupling_j), rel=1e-12)
    # default coupling is h * 500 MHz
    assert dd.tunnel_coupling_j == pytest.approx(PLANCK * 500e6, rel=1e-12)
    assert quantum_capacitance(dd, 0.0) == pytest.approx(1.74e-15, rel=5e-3)


def test_quantum_capacitance_decays_symmetrically():
    dd = DoubleDotModel()
    v = np.array([-5e-3, -1e-3, 1e-3, 5e-3])
    cq = quantum_capacitance(dd, v)
    np.testing.assert_allclose(cq[:2], cq[:1:-1], rtol=1e-12)
    assert np.all(cq < quantum_capacitance(dd, 0.0))
    # far detuning: C_Q ~ (le)^2 (2t)^2 / (2 |le v|^3)
    le = dd.lever_arm * ELEMENTARY_CHARGE
    gap = 2.0 * dd.tunnel_coupling_j
    far = 1.0
    assert quantum_capacitance(dd, far) == pytest.approx(
        le**2 * gap**2 / (2.0 * (le * far) ** 3), rel=1e-6)


def test_stored_charge_is_antiderivative_of_cq():
    dd = DoubleDotModel()
    for v in (0.0, 1e-4, -3e-4, 2e-3):
        h = 1e-9
        fd = (stored_charge(dd, v + h) - stored_charge(dd, v - h)) / (2.0 * h)
        assert fd == pytest.approx(quantum_capacitance(dd, v), rel=1e-6)
    # saturates at half the gate-referred charge of one electron transfer
    le = dd.lever_arm * ELEMENTARY_CHARGE
    assert stored_charge(dd, 10.0) == pytest.approx(0.5 * le, rel=1e-6)
    assert stored_charge(dd, -10.0) == pytest.approx(-0.5 * le, rel=1e-6)
    assert stored_charge(dd, 0.0) == 0.0
