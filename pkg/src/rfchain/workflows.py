"""End-to-end workflows behind the service endpoints and CLI subcommands.

Every workflow is a pure function from a validated configuration (plus
workflow-specific inputs) to a WorkflowResult: a dict of named text
artifacts exactly as they should land on disk, and a JSON-safe summary.
Rendering happens here, once, so repeated runs with the same inputs are
byte-identical no matter which front end asked.
"""

import json
import math
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import Field, model_validator

from . import circuit as _circuit
from . import dot as _dot
from .chain import build_chain, load_conductance, resolve_carrier, with_drive
from .config import ChainConfig, StrictModel
from .optimize import SweepPlan, run_protocol
from .readout import ScCurve, best_estimate, readout_time_sweep
from .spectra import (analyze_spectrum, demodulate, spectrum_from_csv,
                      spectrum_to_csv, synthesize_spectrum)
from .units import dbm_to_watts


@dataclass
class WorkflowResult:
    files: Dict[str, str]
    summary: dict


def json_safe(obj):
    """Recursively coerce to plain JSON types; non-finite floats become
    null (strict-JSON consumers reject inf/nan)."""
    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


def render_json(obj):
    return json.dumps(json_safe(obj), indent=2, sort_keys=True) + "\n"


def _csv(header, rows):
    lines = [header]
    for row in rows:
        lines.append(",".join(
            repr(float(v)) if isinstance(v, (float, np.floating))
            else str(v).lower() if isinstance(v, (bool, np.bool_))
            else str(v)
            for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- match

def run_match(cfg: ChainConfig) -> WorkflowResult:
    """Reflection traces over the scan window for each varactor bias,
    plus the deepest-dip summary (ties go to the first bias listed)."""
    chain = build_chain(cfg)
    scan = cfg.match
    g_load = load_conductance(chain)
    freqs = np.linspace(scan.f_lo_hz, scan.f_hi_hz, scan.n_points)
    rows = []
    per_vs = []
    best = None
    for v_s in scan.v_s_values:
        gamma = _circuit.reflection_coefficient(chain.circuit, v_s, freqs,
                                                g_load=g_load)
        gamma_db = 20.0 * np.log10(np.maximum(np.abs(np.atleast_1d(gamma)),
                                              1e-300))
        rows.extend((v_s, f, g) for f, g in zip(freqs, gamma_db))
        if scan.n_points == 1:
            entry = {"v_s": v_s, "f_c_hz": float(freqs[0]),
                     "depth_db": float(gamma_db[0]), "at_boundary": False}
        else:
            m = _circuit.find_best_match(chain.circuit, v_s, scan.f_lo_hz,
                                         scan.f_hi_hz, g_load=g_load)
            entry = {"v_s": v_s, "f_c_hz": m.f_c_hz, "depth_db": m.depth_db,
                     "at_boundary": m.at_boundary}
        per_vs.append(entry)
        if best is None or entry["depth_db"] < best["depth_db"]:
            best = entry
    summary = {
        "best": best,
        "scan": per_vs,
        "f_lo_hz": scan.f_lo_hz,
        "f_hi_hz": scan.f_hi_hz,
        "n_points": scan.n_points,
    }
    files = {
        "match.csv": _csv("v_s,frequency_hz,gamma_db", rows),
        "match.json": render_json(summary),
    }
    return WorkflowResult(files=files, summary=json_safe(summary))


# ------------------------------------------------------------- spectrum

def _sensitivity_dict(result):
    return {
        "snr_db": result.snr_db,
        "delta_f_hz": result.delta_f_hz,
        "s_c_f_per_rthz": result.s_c_f_per_rthz,
        "s_q_e_per_rthz": result.s_q_e_per_rthz,
        "s_s_c_per_rthz": result.s_s_c_per_rthz,
        "uncertainty": result.uncertainty,
        "flagged": result.flagged,
    }


def run_spectrum_synthesize(cfg: ChainConfig) -> WorkflowResult:
    """Simulate one analyzer trace at the configured operating point and
    analyze it back into sensitivities."""
    chain = build_chain(cfg)
    spectrum = synthesize_spectrum(chain)
    result = analyze_spectrum(chain, spectrum)
    sens = _sensitivity_dict(result)
    summary = {"sensitivity": sens, "spectrum": dict(spectrum.metadata),
               "n_bins": int(spectrum.power_dbm.size)}
    files = {
        "spectrum.csv": spectrum_to_csv(spectrum),
        "sensitivity.json": render_json(sens),
    }
    return WorkflowResult(files=files, summary=json_safe(summary))


def run_spectrum_analyze(cfg: ChainConfig, csv_text: str) -> WorkflowResult:
    """Ingest an analyzer trace (ours or an instrument's in the same
    format) and extract SNR and sensitivities.

    The trace's own metadata wins for the modulated element and sideband
    offset; parameter excursions (how much the element actually moved)
    still come from the configured chain.
    """
    spectrum = spectrum_from_csv(csv_text)
    chain = build_chain(cfg)
    meta = spectrum.metadata
    updates = {}
    if meta.get("target") in ("varactor", "gate"):
        updates["target"] = meta["target"]
    if "f_m_hz" in meta:
        updates["f_m_hz"] = float(meta["f_m_hz"])
    if updates:
        chain = with_drive(chain, **updates)
    result = analyze_spectrum(chain, spectrum)
    sens = _sensitivity_dict(result)
    summary = {"sensitivity": sens, "spectrum": dict(meta),
               "n_bins": int(spectrum.power_dbm.size)}
    files = {"sensitivity.json": render_json(sens)}
    return WorkflowResult(files=files, summary=json_safe(summary))


# -------------------------------------------------------------- readout

def run_readout(cfg: ChainConfig) -> WorkflowResult:
    """Readout-time sweep over the configured drive-power grid."""
    chain = build_chain(cfg)
    r = cfg.readout
    curve = ScCurve(anchors=[tuple(a) for a in r.sc_anchors],
                    flat_until_dbm=r.flat_until_dbm,
                    degrade_db_per_db=r.degrade_db_per_db)
    n = int(round((r.p1_stop_dbm - r.p1_start_dbm) / r.p1_step_db)) + 1
    grid = [r.p1_start_dbm + i * r.p1_step_db for i in range(n)]
    estimates, excluded = readout_time_sweep(
        chain.double_dot, curve, grid,
        v0_ref_p1_dbm=r.v0_ref_p1_dbm, v0_ref_vrms=r.v0_ref_vrms,
        electrode_scale=r.electrode_scale, closed_form=r.closed_form)
    if not estimates:
        raise ValueError(
            "no grid point is covered by the sensitivity table; lower "
            "readout.p1 grid or extend readout.sc_anchors")
    best = best_estimate(estimates)
    rows = [(e.p1_dbm, e.v0_vrms, e.c_bar_f, e.delta_f_hz, e.tau_s)
            for e in estimates]
    summary = {
        "best": {"p1_dbm": best.p1_dbm, "v0_vrms": best.v0_vrms,
                 "c_bar_f": best.c_bar_f, "delta_f_hz": best.delta_f_hz,
                 "tau_s": best.tau_s},
        "n_points": len(estimates),
        "excluded_p1_dbm": excluded,
        "electrode_scale": r.electrode_scale,
        "closed_form": r.closed_form,
    }
    files = {
        "readout.csv": _csv("P1_dBm,V0_vrms,Cbar_F,delta_f_Hz,tau_s", rows),
        "readout.json": render_json(summary),
    }
    return WorkflowResult(files=files, summary=json_safe(summary))


# ------------------------------------------------------------ stability

def run_stability(cfg: ChainConfig) -> WorkflowResult:
    """Charge-stability scan: dot conductance, DC current, and the
    demodulated reflectometer voltage over the (V_L, V_B) grid.

    The carrier sits at the reflection minimum for the dot conductance at
    the configured bias (or at the pinned f_C) and stays there across the
    grid, as in a swept measurement.
    """
    chain = build_chain(cfg)
    st = cfg.stability
    v_l = np.linspace(st.v_l_start, st.v_l_stop, st.v_l_points)
    v_b = np.linspace(st.v_b_start, st.v_b_stop, st.v_b_points)
    g, i_dc = _dot.stability_grid(chain.dot, v_l, v_b)
    if chain.drive.f_c_hz is not None:
        f_c = chain.drive.f_c_hz
    else:
        f_c = resolve_carrier(with_drive(chain, target="gate")).f_c_hz
    gamma = _circuit.reflection_coefficient(chain.circuit, chain.drive.v_s,
                                            f_c, g_load=g)
    v_carrier = math.sqrt(dbm_to_watts(chain.drive.p1_dbm)
                          * chain.circuit.z0)
    v_d = demodulate(v_carrier * np.abs(gamma), np.angle(gamma),
                     st.lo_phase_rad)
    rows = []
    for ib in range(v_b.size):
        for il in range(v_l.size):
            rows.append((v_l[il], v_b[ib], g[ib, il], i_dc[ib, il],
                         v_d[ib, il]))
    summary = {
        "f_c_hz": f_c,
        "v_s": chain.drive.v_s,
        "p1_dbm": chain.drive.p1_dbm,
        "lo_phase_rad": st.lo_phase_rad,
        "n_v_l": st.v_l_points,
        "n_v_b": st.v_b_points,
        "g_min_s": float(np.min(g)),
        "g_max_s": float(np.max(g)),
        "v_d_min_v": float(np.min(v_d)),
        "v_d_max_v": float(np.max(v_d)),
    }
    files = {
        "stability.csv": _csv("V_L,V_B,G,I,V_D", rows),
        "stability.json": render_json(summary),
    }
    return WorkflowResult(files=files, summary=json_safe(summary))


# ------------------------------------------------------------- optimize

class ProtocolPass(StrictModel):
    """One pass: either a single parameter+grid, or explicit steps.
    Unset knobs inherit the protocol-level defaults."""

    parameter: Optional[str] = None
    grid: Optional[List[float]] = None
    steps: Optional[List[Tuple[str, List[float]]]] = None
    objective: Optional[Literal["s_c", "s_q"]] = None
    rematch_carrier: Optional[bool] = None
    seed: Optional[int] = Field(None, ge=0)
    gate_slope_floor: Optional[float] = Field(None, ge=0)

    @model_validator(mode="after")
    def _check_shape(self):
        shorthand = self.parameter is not None or self.grid is not None
        if shorthand and self.steps is not None:
            raise ValueError("give either parameter+grid or steps, not both")
        if shorthand and (self.parameter is None or self.grid is None):
            raise ValueError("shorthand form needs both parameter and grid")
        if not shorthand and self.steps is None:
            raise ValueError("a pass needs parameter+grid or steps")
        return self


class ProtocolSpec(StrictModel):
    objective: Literal["s_c", "s_q"] = "s_c"
    rematch_carrier: bool = True
    seed: int = Field(0, ge=0)
    gate_slope_floor: float = Field(1e-3, ge=0)
    passes: List[ProtocolPass] = Field(default_factory=list)


def plans_from_protocol(spec: ProtocolSpec) -> List[SweepPlan]:
    def pick(value, fallback):
        return fallback if value is None else value

    plans = []
    for p in spec.passes:
        steps = p.steps if p.steps is not None else [(p.parameter, p.grid)]
        plans.append(SweepPlan(
            steps=[(name, list(grid)) for name, grid in steps],
            objective=pick(p.objective, spec.objective),
            rematch_carrier=pick(p.rematch_carrier, spec.rematch_carrier),
            seed=pick(p.seed, spec.seed),
            gate_slope_floor=pick(p.gate_slope_floor, spec.gate_slope_floor),
        ))
    return plans


_RECORD_COLUMNS = ("parameter", "value", "v_l", "v_s", "p1_dbm",
                   "amplitude_vrms", "f_c_hz", "snr_db", "sensitivity",
                   "flagged")


def run_optimize(cfg: ChainConfig, protocol: ProtocolSpec) -> WorkflowResult:
    """Run the sweep protocol and export one CSV per pass plus a summary
    whose best sensitivity is the minimum over every recorded point."""
    plans = plans_from_protocol(protocol)
    chain = build_chain(cfg)
    result = run_protocol(plans, chain)

    files = {}
    pass_summaries = []
    for sweep in result.passes:
        rows = [tuple(getattr(rec, col) for col in _RECORD_COLUMNS)
                for rec in sweep.records]
        files[f"optimize_pass_{sweep.pass_index}.csv"] = _csv(
            ",".join(_RECORD_COLUMNS), rows)
        b = sweep.best
        pass_summaries.append({
            "pass_index": sweep.pass_index,
            "objective": sweep.objective,
            "n_points": len(sweep.records),
            "n_flagged": sum(r.flagged for r in sweep.records),
            "best": {col: getattr(b, col) for col in _RECORD_COLUMNS},
        })
    best_sensitivity = (min(p.best.sensitivity for p in result.passes)
                        if result.passes else None)
    drive = result.chain.drive
    summary = {
        "objective": protocol.objective,
        "n_passes": len(result.passes),
        "passes": pass_summaries,
        "best_sensitivity": best_sensitivity,
        "final_drive": {
            "v_l": drive.v_l,
            "v_s": drive.v_s,
            "p1_dbm": drive.p1_dbm,
            "f_c_hz": drive.f_c_hz,
            "modulation_target": drive.modulation.target,
            "f_m_hz": drive.modulation.f_m_hz,
            "amplitude_vrms": drive.modulation.amplitude_vrms,
        },
    }
    files["optimize.json"] = render_json(summary)
    return WorkflowResult(files=files, summary=json_safe(summary))
