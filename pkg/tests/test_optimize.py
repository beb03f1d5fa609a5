import math
import warnings

import numpy as np
import pytest

from rfchain.chain import AnalysisState, Chain, with_drive
from rfchain.optimize import (FlaggedPointWarning, GateSlopeWarning,
                              SweepPlan, apply_record, canonical_parameter,
                              evaluate_point, run_pass, run_protocol)


def _noiseless():
    return Chain(analysis=AnalysisState(noiseless=True))


def test_canonical_parameter():
    assert canonical_parameter("V_L") == "v_l"
    assert canonical_parameter("p1_dbm") == "p1"
    assert canonical_parameter("dv_l") == "dv_l"
    with pytest.raises(ValueError):
        canonical_parameter("frequency")


def test_plan_validation():
    with pytest.raises(ValueError):
        SweepPlan(steps=[("v_s", [6.8])], objective="elegance")
    with pytest.raises(ValueError):
        SweepPlan(steps=[("v_s", [6.8])], seed=-1)
    with pytest.raises(ValueError):
        SweepPlan(steps=[])
    with pytest.raises(ValueError):
        SweepPlan(steps=[("v_s", [])])
    with pytest.raises(ValueError):
        SweepPlan(steps=[("v_s", [6.8]), ("V_S", [7.0])])  # duplicate
    with pytest.raises(ValueError):
        SweepPlan(steps=[("v_s", [math.nan])])
    # amplitude knob must match the objective's modulated element
    with pytest.raises(ValueError):
        SweepPlan(steps=[("dv_l", [1e-5])], objective="s_c")
    with pytest.raises(ValueError):
        SweepPlan(steps=[("v_m", [1e-5])], objective="s_q")
    plan = SweepPlan(steps=[("P1_DBM", [-40.0, -38])])
    assert plan.steps == [("p1", [-40.0, -38.0])]


def test_single_point_grid_is_trivial():
    chain = _noiseless()
    result = run_pass(SweepPlan(steps=[("v_s", [6.8])]), chain)
    assert len(result.records) == 1
    assert result.best_index == 0
    assert result.best.value == 6.8
    assert math.isfinite(result.best.sensitivity)


def test_pass_best_is_exhaustive_minimum():
    chain = _noiseless()
    grid = [6.2, 6.5, 6.8, 7.1]
    result = run_pass(SweepPlan(steps=[("v_s", grid)]), chain)
    sens = [r.sensitivity for r in result.records]
    assert result.best_index == int(np.argmin(sens))
    assert [r.value for r in result.records] == grid


def test_grid_order_does_not_change_point_values():
    """Noise is keyed by (seed, parameter, value), so permuting the grid
    permutes the records without changing any of them."""
    chain = Chain()  # noisy on purpose
    grid = [-44.0, -41.0, -38.0, -35.0]
    fwd = run_pass(SweepPlan(steps=[("p1", grid)], seed=5), chain)
    rev = run_pass(SweepPlan(steps=[("p1", grid[::-1])], seed=5), chain)
    by_value_fwd = {r.value: r.sensitivity for r in fwd.records}
    by_value_rev = {r.value: r.sensitivity for r in rev.records}
    assert by_value_fwd == by_value_rev
    assert fwd.best.value == rev.best.value
    assert fwd.best.sensitivity == rev.best.sensitivity


def test_seed_changes_noise_but_not_grid():
    chain = Chain()
    grid = [-44.0, -38.0]
    a = run_pass(SweepPlan(steps=[("p1", grid)], seed=1), chain)
    b = run_pass(SweepPlan(steps=[("p1", grid)], seed=2), chain)
    assert [r.value for r in a.records] == [r.value for r in b.records]
    assert any(x.sensitivity != y.sensitivity
               for x, y in zip(a.records, b.records))


def test_record_reproducible_from_snapshot():
    """Re-evaluating a record's drive snapshot with the plan seed gives
    back the recorded sensitivity exactly."""
    chain = Chain()
    plan = SweepPlan(steps=[("p1", [-44.0, -38.0, -32.0])], seed=9)
    result = run_pass(plan, chain)
    rec = result.best
    again = evaluate_point(
        with_drive(chain, target="varactor", f_c_hz=rec.f_c_hz),
        "s_c", rec.parameter, rec.value, plan.seed)
    assert again.sensitivity == rec.sensitivity
    assert again.snr_db == rec.snr_db


def test_coarse_grid_tracks_dense_optimum():
    """On a noiseless chain the coarse-grid argmin must sit within one
    coarse step of a 10x-denser grid's argmin."""
    chain = _noiseless()
    coarse = list(np.linspace(6.2, 7.4, 7))   # 0.2 V steps
    dense = list(np.linspace(6.2, 7.4, 61))   # 0.02 V steps
    rc = run_pass(SweepPlan(steps=[("v_s", coarse)]), chain)
    rd = run_pass(SweepPlan(steps=[("v_s", dense)]), chain)
    assert abs(rc.best.value - rd.best.value) <= 0.2 + 1e-12


def test_flagged_points_get_infinite_sensitivity():
    chain = _noiseless()
    with pytest.warns(FlaggedPointWarning):
        result = run_pass(
            SweepPlan(steps=[("v_m", [0.0, 99e-6])]), chain)
    zero, live = result.records
    assert zero.flagged and zero.sensitivity == math.inf
    assert not live.flagged and math.isfinite(live.sensitivity)
    assert result.best is live


def test_gate_slope_warning_off_flank():
    chain = _noiseless()
    # dead center of a Coulomb peak: dG/dV_L ~ 0, useless for charge readout
    peak_top = chain.dot.peak_positions_v[1]
    plan = SweepPlan(steps=[("dv_l", [117.8e-6])], objective="s_q")
    with warnings.catch_warnings(record=True) as log:
        warnings.simplefilter("always")
        run_pass(plan, with_drive(chain, v_l=peak_top))
    kinds = {type(r.message) for r in log}
    assert GateSlopeWarning in kinds
    # the symmetric point also kills the first harmonic, flagging the point
    assert FlaggedPointWarning in kinds
    # on the flank (the default bias) no warning fires
    with warnings.catch_warnings(record=True) as log:
        warnings.simplefilter("always")
        run_pass(plan, chain)
    assert not any(isinstance(r.message, GateSlopeWarning) for r in log)


def test_within_pass_steps_chain_together():
    """A later step starts from the best point of the earlier step."""
    chain = _noiseless()
    plan = SweepPlan(steps=[("p1", [-44.0, -38.0]),
                            ("v_m", [50e-6, 99e-6])])
    result = run_pass(plan, chain)
    p1_step = result.records[:2]
    vm_step = result.records[2:]
    best_p1 = min(p1_step, key=lambda r: r.sensitivity).value
    assert all(r.p1_dbm == best_p1 for r in vm_step)


def test_protocol_monotone_with_incumbent_grids():
    """Each pass's grid contains the incumbent value, so the best
    sensitivity cannot get worse from pass to pass."""
    chain = _noiseless()
    passes = [
        SweepPlan(steps=[("v_s", [6.2, 6.5, 6.8, 7.1, 7.4])]),
        SweepPlan(steps=[("p1", [-44.0, -41.0, -38.0, -35.0, -32.0])]),
        SweepPlan(steps=[("v_m", [49.5e-6, 99e-6, 198e-6])]),
    ]
    out = run_protocol(passes, chain)
    bests = out.best_sensitivities
    assert len(bests) == 3
    assert all(b <= a * (1 + 1e-12) for a, b in zip(bests, bests[1:]))
    # the final chain actually carries the final best assignment
    last = out.passes[-1].best
    assert out.chain.drive.modulation.amplitude_vrms == last.amplitude_vrms
    assert out.chain.drive.p1_dbm == last.p1_dbm
    assert out.chain.drive.f_c_hz == last.f_c_hz


def test_protocol_empty_is_identity():
    chain = Chain()
    out = run_protocol([], chain)
    assert out.passes == []
    assert out.chain is chain


def test_idempotent_repeat_pass():
    chain = _noiseless()
    plan = SweepPlan(steps=[("v_s", [6.2, 6.8, 7.4])])
    first = run_protocol([plan], chain)
    second = run_protocol([plan, plan], chain)
    assert second.best_sensitivities[0] == pytest.approx(
        second.best_sensitivities[1], rel=1e-9)
    assert first.best_sensitivities[0] == second.best_sensitivities[0]


def test_apply_record_pins_all_drive_fields():
    chain = Chain()
    plan = SweepPlan(steps=[("v_l", [-0.31590, -0.31582])], objective="s_q",
                     seed=3)
    result = run_pass(plan, chain)
    applied = apply_record(chain, result.best)
    assert applied.drive.v_l == result.best.value
    assert applied.drive.f_c_hz == result.best.f_c_hz
    assert applied.drive.p1_dbm == result.best.p1_dbm
    assert applied.drive.v_s == result.best.v_s


def test_rematch_carrier_toggle():
    chain = _noiseless()
    on = run_pass(SweepPlan(steps=[("v_s", [6.2, 7.4])],
                            rematch_carrier=True), chain)
    off = run_pass(SweepPlan(steps=[("v_s", [6.2, 7.4])],
                             rematch_carrier=False), chain)
    # re-matching tracks the moving dip: different carrier per point
    assert on.records[0].f_c_hz != on.records[1].f_c_hz
    # pinned: both points share one carrier
    assert off.records[0].f_c_hz == off.records[1].f_c_hz
