"""Coordinate-descent sensitivity optimization over chain drive settings.

Each pass exhaustively scans one or more parameter grids in order,
synthesizing and analyzing one spectrum per point, and the best (smallest
sensitivity) point of the pass is applied to the chain before the next
pass.  Sweeping the varactor bias can re-match the carrier at every point;
all other sweeps hold the carrier where the pass found it.

Improvement across passes is guaranteed on noiseless chains only when
each grid contains the incumbent value of its parameter (the engine does
not inject incumbents, so a single-point grid means exactly one
evaluation).

Noise draws are keyed by (plan seed, parameter name, parameter value),
never by grid index, so reordering or refining a grid cannot change the
noise any individual point sees.
"""

import hashlib
import math
import struct
import warnings
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .chain import Chain, resolve_carrier, with_drive
from .dot import conductance_slope
from .spectra import analyze_spectrum, synthesize_spectrum

# Aliased parameter spellings -> canonical names.
_PARAM_ALIASES = {
    "v_l": "v_l",
    "v_s": "v_s",
    "p1": "p1",
    "p1_dbm": "p1",
    "v_m": "v_m",
    "dv_l": "dv_l",
}
PARAMETERS = ("v_l", "v_s", "p1", "v_m", "dv_l")

_OBJECTIVES = ("s_c", "s_q")
# Modulated element implied by each objective.
_OBJECTIVE_TARGET = {"s_c": "varactor", "s_q": "gate"}
# Modulation-amplitude parameter belonging to each objective.
_AMPLITUDE_PARAM = {"s_c": "v_m", "s_q": "dv_l"}


class FlaggedPointWarning(UserWarning):
    """Sweep points with non-positive SNR were recorded with +inf."""


class GateSlopeWarning(UserWarning):
    """Gate-sensitivity points sat where |dG/dV_L| is below the floor
    (off a Coulomb-peak flank)."""


def canonical_parameter(name):
    key = str(name).lower()
    if key not in _PARAM_ALIASES:
        raise ValueError(
            f"unknown sweep parameter {name!r}; expected one of {PARAMETERS}"
        )
    return _PARAM_ALIASES[key]


@dataclass
class SweepPlan:
    """One pass: ordered (parameter, grid) steps scanned exhaustively."""

    steps: List[Tuple[str, List[float]]]
    objective: str = "s_c"
    rematch_carrier: bool = True
    seed: int = 0
    # Minimum |dG/dV_L| (S/V) considered "on a flank" for gate sweeps.
    gate_slope_floor: float = 1e-3

    def __post_init__(self):
        if self.objective not in _OBJECTIVES:
            raise ValueError(f"objective must be one of {_OBJECTIVES}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not self.steps:
            raise ValueError("a pass needs at least one (parameter, grid) step")
        norm = []
        seen = set()
        for param, grid in self.steps:
            param = canonical_parameter(param)
            if param in seen:
                raise ValueError(f"parameter {param!r} appears twice in one pass")
            seen.add(param)
            grid = [float(v) for v in grid]
            if not grid:
                raise ValueError(f"empty grid for parameter {param!r}")
            if not all(math.isfinite(v) for v in grid):
                raise ValueError(f"non-finite grid value for parameter {param!r}")
            other = {"s_c": "dv_l", "s_q": "v_m"}[self.objective]
            if param == other:
                raise ValueError(
                    f"parameter {param!r} modulates the wrong element for "
                    f"objective {self.objective!r}; use "
                    f"{_AMPLITUDE_PARAM[self.objective]!r}"
                )
            norm.append((param, grid))
        self.steps = norm


@dataclass
class SweepRecord:
    """One evaluated point: the swept value plus the full drive snapshot
    it was evaluated under, so applying a record is unambiguous."""

    parameter: str
    value: float
    v_l: float
    v_s: float
    p1_dbm: float
    amplitude_vrms: float
    f_c_hz: float
    snr_db: float
    sensitivity: float
    flagged: bool


@dataclass
class SweepResult:
    pass_index: int
    objective: str
    records: List[SweepRecord] = field(default_factory=list)
    best_index: int = 0

    @property
    def best(self):
        return self.records[self.best_index]


def _point_seed(seed, parameter, value):
    """Deterministic per-point stream key from (seed, name, value)."""
    name_key = int.from_bytes(
        hashlib.blake2s(parameter.encode()).digest()[:4], "big")
    value_bits = struct.unpack("<Q", struct.pack("<d", float(value)))[0]
    ss = np.random.SeedSequence([int(seed), name_key, int(value_bits)])
    return int(ss.generate_state(1, np.uint64)[0])


def _apply_parameter(chain, parameter, value):
    if parameter == "v_l":
        return with_drive(chain, v_l=value)
    if parameter == "v_s":
        return with_drive(chain, v_s=value)
    if parameter == "p1":
        return with_drive(chain, p1_dbm=value)
    # v_m / dv_l are both the modulation amplitude; the objective fixed
    # the target already.
    return with_drive(chain, amplitude_vrms=value)


def evaluate_point(chain, objective, parameter, value, seed):
    """Evaluate one sweep point and package the record.

    The chain is taken as-is apart from the swept parameter (callers
    wanting per-point carrier re-matching clear f_c first).  Points whose
    SNR comes out non-positive get sensitivity +inf so they lose every
    comparison without being dropped.
    """
    point = _apply_parameter(chain, parameter, value)
    spectrum = synthesize_spectrum(point, seed=_point_seed(seed, parameter, value))
    analysis = analyze_spectrum(point, spectrum)
    if objective == "s_c":
        sensitivity = analysis.s_c_f_per_rthz
    else:
        sensitivity = analysis.s_q_e_per_rthz
    if analysis.flagged or sensitivity is None:
        sensitivity = math.inf
    drive = point.drive
    return SweepRecord(
        parameter=parameter,
        value=float(value),
        v_l=drive.v_l,
        v_s=drive.v_s,
        p1_dbm=drive.p1_dbm,
        amplitude_vrms=drive.modulation.amplitude_vrms,
        f_c_hz=spectrum.metadata["f_c_hz"],
        snr_db=analysis.snr_db,
        sensitivity=sensitivity,
        flagged=analysis.flagged,
    )


def apply_record(chain, record):
    """Chain with the record's full drive assignment, carrier pinned
    where the record measured it."""
    return with_drive(chain, v_l=record.v_l, v_s=record.v_s,
                      p1_dbm=record.p1_dbm, f_c_hz=record.f_c_hz,
                      amplitude_vrms=record.amplitude_vrms)


def _record_key(record, step_index):
    return (record.sensitivity, step_index, record.value)


def run_pass(plan: SweepPlan, chain: Chain, pass_index: int = 0) -> SweepResult:
    """Scan every step grid of one pass and return the per-point table.

    Steps run in order; each step starts from the best point found so far
    in the pass, so a later step sees earlier improvements.  best_index
    is the argmin over all records of the pass (ties: earlier step, then
    smaller value).  The input chain is not modified — callers apply
    result.best themselves (see run_protocol).
    """
    chain = with_drive(chain, target=_OBJECTIVE_TARGET[plan.objective])
    result = SweepResult(pass_index=pass_index, objective=plan.objective)
    step_of_record = []
    off_flank = 0
    for step_index, (parameter, grid) in enumerate(plan.steps):
        rematch = parameter == "v_s" and plan.rematch_carrier
        if rematch:
            base = with_drive(chain, f_c_hz=None)
        elif chain.drive.f_c_hz is None:
            base = chain = with_drive(
                chain, f_c_hz=resolve_carrier(chain).f_c_hz)
        else:
            base = chain
        step_records = []
        for value in grid:
            record = evaluate_point(base, plan.objective, parameter, value,
                                    plan.seed)
            if plan.objective == "s_q":
                slope = conductance_slope(chain.dot, record.v_l,
                                          chain.drive.v_b)
                if abs(slope) < plan.gate_slope_floor:
                    off_flank += 1
            step_records.append(record)
        result.records.extend(step_records)
        step_of_record.extend([step_index] * len(step_records))
        best_in_step = min(step_records,
                           key=lambda r: _record_key(r, step_index))
        chain = apply_record(chain, best_in_step)
    result.best_index = min(
        range(len(result.records)),
        key=lambda i: _record_key(result.records[i], step_of_record[i]),
    )
    flagged = sum(r.flagged for r in result.records)
    if flagged:
        warnings.warn(
            f"pass {pass_index}: {flagged} point(s) had non-positive SNR and "
            "were recorded with infinite sensitivity",
            FlaggedPointWarning,
            stacklevel=2,
        )
    if off_flank:
        warnings.warn(
            f"pass {pass_index}: {off_flank} point(s) sat below the gate "
            f"slope floor {plan.gate_slope_floor:g} S/V; gate sensitivity "
            "needs a Coulomb-peak flank",
            GateSlopeWarning,
            stacklevel=2,
        )
    return result


@dataclass
class ProtocolResult:
    passes: List[SweepResult]
    chain: Chain

    @property
    def best_sensitivities(self):
        return [p.best.sensitivity for p in self.passes]


def run_protocol(passes: Sequence[SweepPlan], chain: Chain) -> ProtocolResult:
    """Run passes sequentially, applying each pass's best point to the
    chain before the next.  An empty list returns the chain untouched."""
    history = []
    for index, plan in enumerate(passes):
        result = run_pass(plan, chain, pass_index=index)
        chain = apply_record(
            with_drive(chain, target=_OBJECTIVE_TARGET[plan.objective]),
            result.best,
        )
        history.append(result)
    return ProtocolResult(passes=history, chain=chain)
