"""End-to-end acceptance checks, one test per shipped guarantee.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line (run with
``pytest tests/test_acceptance.py -v -s`` to see them) before asserting,
so a red run still reports every criterion's measured values.
"""

import json
import math
import os

import numpy as np

from rfchain.chain import (AnalysisState, Chain, analytic_snr_db,
                           operating_point, resolve_carrier, with_drive)
from rfchain.circuit import TankCircuit, capacitance_modulation
from rfchain.config import default_config
from rfchain.dot import DoubleDotModel, quantum_capacitance, stored_charge
from rfchain.readout import (average_capacitance,
                             average_capacitance_closed_form)
from rfchain.spectra import (analyze_spectrum, capacitance_sensitivity,
                             charge_sensitivity,
                             oscillating_charge_sensitivity,
                             synthesize_spectrum)
from rfchain.squid import postamp_contribution, quantum_limit
from rfchain.units import BOLTZMANN, ELEMENTARY_CHARGE, PLANCK
from rfchain.workflows import run_readout


def _report(n, ok, description, values):
    shown = ", ".join(f"{k}={v}" for k, v in values.items())
    print(f"ACCEPTANCE {n:02d} {'PASS' if ok else 'FAIL'} "
          f"{description} ({shown})")


def test_criterion_01_quantum_capacitance_peak():
    dd = DoubleDotModel()  # t = h * 500 MHz, lever arm 0.3
    le = dd.lever_arm * ELEMENTARY_CHARGE
    hand = le**2 / (4.0 * dd.tunnel_coupling_j)
    got = quantum_capacitance(dd, 0.0)
    rel = abs(got - hand) / hand
    ok = rel <= 1e-12 and abs(got - 1.74e-15) / 1.74e-15 < 5e-3
    _report(1, ok, "zero-detuning quantum capacitance",
            {"C_Q(0)_fF": f"{got * 1e15:.6f}", "rel_err": f"{rel:.2e}"})
    assert rel <= 1e-12
    assert abs(got - 1.74e-15) / 1.74e-15 < 5e-3


def test_criterion_02_total_charge_identity():
    dd = DoubleDotModel()
    le = dd.lever_arm * ELEMENTARY_CHARGE
    width = 2.0 * dd.tunnel_coupling_j / le
    x = 1e4 * width
    # integral of C_Q over +/- x, recovered from the window average
    integral = average_capacitance(dd, x / math.sqrt(2.0)) * 2.0 * x
    antiderivative = stored_charge(dd, x) - stored_charge(dd, -x)
    rel_total = abs(integral - le) / le
    rel_anti = abs(integral - antiderivative) / antiderivative
    ok = rel_total <= 1e-6 and rel_anti <= 1e-6
    _report(2, ok, "integrated capacitance peak carries the full charge",
            {"integral_C": f"{integral:.6e}", "lambda_e_C": f"{le:.6e}",
             "rel_err": f"{rel_total:.2e}"})
    assert rel_total <= 1e-6
    assert rel_anti <= 1e-6


def test_criterion_03_closed_form_convergence():
    dd = DoubleDotModel()
    width = 2.0 * dd.tunnel_coupling_j / (dd.lever_arm * ELEMENTARY_CHARGE)
    rels = {}
    for mult in (100.0, 300.0, 1000.0):
        v0 = mult * width / math.sqrt(2.0)  # sqrt(2)*V0 = mult * width
        quadrature = average_capacitance(dd, v0)
        closed = average_capacitance_closed_form(dd, v0)
        rels[mult] = abs(closed - quadrature) / quadrature
    ok = all(r <= 0.01 for r in rels.values())
    _report(3, ok, "wide-swing closed form within 1% beyond 100 widths",
            {f"rel@{int(m)}w": f"{r:.2e}" for m, r in rels.items()})
    for mult, rel in rels.items():
        assert rel <= 0.01, f"swing {mult} widths: {rel}"


def test_criterion_04_readout_time_optimum():
    result = run_readout(default_config())
    tau = result.summary["best"]["tau_s"]
    ok = 26e-9 / 2.0 <= tau <= 26e-9 * 2.0
    _report(4, ok, "power-sweep readout-time minimum near 26 ns",
            {"tau_ns": f"{tau * 1e9:.3f}",
             "at_dbm": result.summary["best"]["p1_dbm"]})
    assert 13e-9 <= tau <= 52e-9


def test_criterion_05_bias_to_capacitance_conversion():
    delta_c = capacitance_modulation(TankCircuit(), 6.8, 99e-6)
    rel = abs(delta_c - 6.7e-18) / 6.7e-18
    ok = rel <= 0.02
    _report(5, ok, "99 uVrms tuning modulation converts to 6.7 aF",
            {"delta_C_aF": f"{delta_c * 1e18:.4f}", "rel_err": f"{rel:.2e}"})
    assert rel <= 0.02


def test_criterion_06_sensitivity_arithmetic():
    s_c = capacitance_sensitivity(20.0, 50.0, 6.7e-18)
    hand_c = 6.7e-18 / math.sqrt(2.0 * 50.0) * 10.0 ** (-20.0 / 20.0)

    s_q = charge_sensitivity(66.0, 0.5, 0.1178 * ELEMENTARY_CHARGE)
    hand_q = 0.1178 / math.sqrt(2.0 * 0.5) * 10.0 ** (-66.0 / 20.0)

    s_s = oscillating_charge_sensitivity(0.07e-18, 152.6e-6)
    hand_s = math.sqrt(2.0) * 152.6e-6 * 0.07e-18
    s_s_e = s_s / ELEMENTARY_CHARGE

    rels = (abs(s_c - hand_c) / hand_c,
            abs(s_q - hand_q) / hand_q,
            abs(s_s - hand_s) / hand_s)
    magnitudes = (abs(s_c - 0.07e-18) / 0.07e-18 < 0.15,   # ~0.07 aF/rtHz
                  abs(s_q - 60e-6) / 60e-6 < 0.15,         # ~60 ue/rtHz
                  s_s_e < 1e-4)                            # below 1e-4 e/rtHz
    ok = all(r <= 1e-9 for r in rels) and all(magnitudes)
    _report(6, ok, "sensitivity formulas against hand arithmetic",
            {"S_C_aF": f"{s_c * 1e18:.4f}", "S_Q_ue": f"{s_q * 1e6:.3f}",
             "S_S_e": f"{s_s_e:.3e}",
             "max_rel": f"{max(rels):.2e}"})
    for rel in rels:
        assert rel <= 1e-9
    assert all(magnitudes)


def test_criterion_07_noise_referral():
    t_n2 = postamp_contribution(3.7, 11.7)
    hand_t2 = 3.7 / 10.0 ** (11.7 / 10.0)
    ql = quantum_limit(196e6)
    hand_ql = PLANCK * 196e6 / (2.0 * BOLTZMANN)
    ratio = 0.49 / ql
    rel_t2 = abs(t_n2 - hand_t2) / hand_t2
    rel_ql = abs(ql - hand_ql) / hand_ql
    ok = (rel_t2 <= 1e-6 and rel_ql <= 1e-6
          and round(t_n2, 3) == 0.250 and round(ql * 1e3, 2) == 4.70
          and 100.0 <= ratio <= 115.0)
    _report(7, ok, "second-stage noise referral and quantum limit",
            {"T_N2_K": f"{t_n2:.6f}", "QL_mK": f"{ql * 1e3:.4f}",
             "T_N_over_QL": f"{ratio:.2f}"})
    assert rel_t2 <= 1e-6
    assert rel_ql <= 1e-6
    assert round(t_n2, 3) == 0.250
    assert round(ql * 1e3, 2) == 4.70
    assert 100.0 <= ratio <= 115.0


def test_criterion_08_round_trip_recovery():
    chain = Chain()
    chain = with_drive(chain, f_c_hz=resolve_carrier(chain).f_c_hz)
    op = operating_point(chain)
    assert op.regime == "linear"
    expected_snr = analytic_snr_db(op, chain.analysis.rbw_hz)
    expected_s_c = capacitance_sensitivity(
        expected_snr, chain.analysis.rbw_hz, op.delta_c_f)

    snr_errs, s_cs = [], []
    for seed in range(32):
        spectrum = synthesize_spectrum(chain, seed=seed)
        res = analyze_spectrum(chain, spectrum)
        assert not res.flagged
        snr_errs.append(abs(res.snr_db - expected_snr))
        s_cs.append(res.s_c_f_per_rthz)
    worst_snr = max(snr_errs)
    median_s_c = float(np.median(s_cs))
    median_rel = abs(median_s_c - expected_s_c) / expected_s_c
    ok = worst_snr <= 0.5 and median_rel <= 0.20
    _report(8, ok, "noisy synthesize/analyze round trip over 32 seeds",
            {"worst_snr_err_db": f"{worst_snr:.3f}",
             "median_S_C_rel_err": f"{median_rel:.4f}"})
    assert worst_snr <= 0.5
    assert median_rel <= 0.20


def test_criterion_09_regime_shape():
    chain = Chain(analysis=AnalysisState(noiseless=True))
    chain = with_drive(chain, f_c_hz=resolve_carrier(chain).f_c_hz)
    p1 = np.arange(-60.0, -14.9, 1.0)
    s = []
    for p in p1:
        c = with_drive(chain, p1_dbm=float(p))
        s.append(analyze_spectrum(c, synthesize_spectrum(c)).s_c_f_per_rthz)
    s = np.array(s)
    below = s[p1 < -31.0]
    flat = s[(p1 >= -31.0) & (p1 <= -21.0)]
    above = s[p1 > -21.0]
    improving = bool(np.all(np.diff(below) < 0))
    degrading = bool(np.all(np.diff(above) > 0))
    flat_ratio = float(flat.max() / flat.min())
    ordered = below.mean() > flat.mean() and above.mean() > flat.mean()
    ok = improving and degrading and flat_ratio < 2.5 and ordered
    _report(9, ok, "sensitivity vs drive power has the three-regime shape",
            {"improving_below": improving, "flat_ratio": f"{flat_ratio:.3f}",
             "degrading_above": degrading, "means_ordered": ordered})
    assert improving
    assert degrading
    assert flat_ratio < 2.5
    assert ordered


def test_criterion_10_cli_determinism(cli, tmp_path):
    protocol = tmp_path / "protocol.json"
    protocol.write_text(json.dumps({
        "objective": "s_c",
        "seed": 0,
        "passes": [{"parameter": "v_s", "grid": [6.5, 6.8, 7.1]},
                   {"parameter": "p1", "grid": [-41.0, -38.0]}],
    }))
    config = tmp_path / "config.json"
    config.write_text(json.dumps(
        {"stability": {"v_l_points": 21, "v_b_points": 9}}))

    commands = {
        "match": ("match",),
        "spectrum": ("spectrum",),
        "readout": ("readout",),
        "stability": ("stability",),
        "optimize": ("optimize", str(protocol)),
    }
    identical = {}
    for name, argv in commands.items():
        outputs = []
        for run in ("a", "b"):
            out = tmp_path / f"{name}_{run}"
            code, _, _ = cli(*argv, "--config", str(config),
                             "--out", str(out))
            assert code == 0, name
            outputs.append({f: open(out / f, "rb").read()
                            for f in os.listdir(out)})
        identical[name] = outputs[0] == outputs[1]
    ok = all(identical.values())
    _report(10, ok, "repeated CLI runs are byte-identical",
            {k: v for k, v in identical.items()})
    assert all(identical.values()), identical
