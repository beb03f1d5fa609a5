"""Validated configuration for a full readout chain.

All quantities are SI unless the key name says otherwise: powers carry a
``_dbm`` suffix, everything else is volts / farads / henries / kelvin /
joules / seconds.  Unknown keys are rejected so typos fail loudly, with
the full key path in the error message.
"""

import json
import os
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .units import ELEMENTARY_CHARGE, PLANCK


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class VaractorConfig(StrictModel):
    """Tuning curve source: a CSV file, an inline table, or the built-in
    calibrated curve when neither is given."""

    csv_path: Optional[str] = None
    v_s: Optional[List[float]] = None
    c_f: Optional[List[float]] = None
    order: Literal[1, 3] = 1

    @model_validator(mode="after")
    def _check_source(self):
        inline = self.v_s is not None or self.c_f is not None
        if self.csv_path is not None and inline:
            raise ValueError("give either csv_path or an inline table, not both")
        if inline and (self.v_s is None or self.c_f is None):
            raise ValueError("inline table needs both v_s and c_f")
        if self.csv_path is not None and not os.path.isfile(self.csv_path):
            raise ValueError(f"varactor file not found: {self.csv_path}")
        return self


class CircuitConfig(StrictModel):
    inductance_h: float = Field(223e-9, gt=0)
    parasitic_c_f: float = Field(0.0, ge=0)
    r_device_ohm: float = Field(1560.0, gt=0)
    z0_ohm: float = Field(50.0, gt=0)
    varactor: VaractorConfig = Field(default_factory=VaractorConfig)


class SquidConfig(StrictModel):
    v_pp_v: float = Field(40e-6, gt=0)
    flux_offset_wb: float = 0.0
    power_gain_db: float = 11.7
    t_p_k: float = Field(3.7, gt=0)
    t_n0_k: float = Field(0.49, gt=0)
    # Amplifier input power at which saturation is reached; sets the
    # flux-drive calibration kappa unless kappa is given explicitly.
    saturation_p_in_dbm: float = -122.0
    kappa_wb_per_sqrtw: Optional[float] = Field(None, gt=0)
    linear_fraction: float = Field(0.25 * 10.0 ** (-10.0 / 20.0), gt=0, lt=0.25)
    noise_exponent: float = Field(2.0, gt=0)
    harmonics: Optional[List[Tuple[int, float]]] = None
    # Net transfer from the drive port to the amplifier input (carrier
    # calibration), and from the amplifier input to the analyzer.
    port1_to_squid_offset_db: float = Field(-101.0, lt=0)
    chain_gain_db: float = 60.0


class DotConfig(StrictModel):
    peak_positions_v: List[float] = Field(
        default_factory=lambda: [-0.3181, -0.3156, -0.3131]
    )
    g_max_s: float = Field(5e-5, gt=0)
    lever_arm: float = Field(0.05, gt=0, le=1)
    charging_energy_j: float = Field(
        default_factory=lambda: 1e-3 * ELEMENTARY_CHARGE, gt=0
    )
    electron_temperature_k: float = Field(0.1, gt=0)
    # None derives the gate period from consecutive peak positions.
    delta_v_cb_v: Optional[float] = Field(None, gt=0)


class DoubleDotConfig(StrictModel):
    tunnel_coupling_j: float = Field(default_factory=lambda: PLANCK * 500e6, gt=0)
    lever_arm: float = Field(0.3, gt=0, le=1)


class ModulationConfig(StrictModel):
    target: Literal["varactor", "gate"] = "varactor"
    f_m_hz: float = Field(3e3, gt=0)
    amplitude_vrms: float = Field(99e-6, ge=0)


class DriveConfig(StrictModel):
    p1_dbm: float = -38.0
    v_s: float = 6.8
    # None asks the chain to sit at the reflection minimum.
    f_c_hz: Optional[float] = Field(None, gt=0)
    v_l: float = -0.315884
    v_b: float = 0.0
    modulation: ModulationConfig = Field(default_factory=ModulationConfig)


class AnalysisConfig(StrictModel):
    rbw_hz: float = Field(10.0, gt=0)
    span_hz: float = Field(18e3, gt=0)
    seed: int = Field(7, ge=0)
    noiseless: bool = False


class MatchScanConfig(StrictModel):
    v_s_values: List[float] = Field(
        default_factory=lambda: [5.0, 5.6, 6.2, 6.8, 7.4, 8.0], min_length=1
    )
    f_lo_hz: float = Field(180e6, gt=0)
    f_hi_hz: float = Field(210e6, gt=0)
    n_points: int = Field(601, ge=1)

    @model_validator(mode="after")
    def _check_window(self):
        if self.n_points == 1:
            if self.f_hi_hz < self.f_lo_hz:
                raise ValueError("f_hi_hz must be >= f_lo_hz")
        elif self.f_hi_hz <= self.f_lo_hz:
            raise ValueError("f_hi_hz must be > f_lo_hz")
        return self


class ReadoutConfig(StrictModel):
    # Measured capacitance-sensitivity anchors (P1 in dBm, S_C in F/rtHz),
    # interpolated log-log in between; flat past the last anchor up to
    # flat_until_dbm, then degrading.
    sc_anchors: List[Tuple[float, float]] = Field(
        default_factory=lambda: [(-60.0, 0.9e-18), (-31.0, 0.07e-18)],
        min_length=1,
    )
    flat_until_dbm: float = -21.0
    degrade_db_per_db: float = Field(2.0, ge=0)
    v0_ref_p1_dbm: float = -29.0
    v0_ref_vrms: float = Field(192e-6, gt=0)
    # Fraction of the port-referred probe amplitude reaching the detuning
    # electrode.
    electrode_scale: float = Field(0.45, gt=0, le=1)
    p1_start_dbm: float = -60.0
    p1_stop_dbm: float = -15.0
    p1_step_db: float = Field(0.5, gt=0)
    closed_form: bool = False

    @model_validator(mode="after")
    def _check(self):
        p = [a[0] for a in self.sc_anchors]
        if p != sorted(p) or len(set(p)) != len(p):
            raise ValueError("sc_anchors must be sorted by power, no duplicates")
        if any(a[1] <= 0 for a in self.sc_anchors):
            raise ValueError("sensitivity anchors must be positive")
        if self.p1_stop_dbm < self.p1_start_dbm:
            raise ValueError("p1_stop_dbm must be >= p1_start_dbm")
        if self.flat_until_dbm < self.sc_anchors[-1][0]:
            raise ValueError("flat_until_dbm cannot precede the last anchor")
        return self


class StabilityConfig(StrictModel):
    v_l_start: float = -0.3196
    v_l_stop: float = -0.3116
    v_l_points: int = Field(61, ge=2)
    v_b_start: float = -1.5e-3
    v_b_stop: float = 1.5e-3
    v_b_points: int = Field(31, ge=2)
    lo_phase_rad: float = 0.0

    @model_validator(mode="after")
    def _check(self):
        if self.v_l_stop <= self.v_l_start:
            raise ValueError("v_l_stop must be > v_l_start")
        if self.v_b_stop <= self.v_b_start:
            raise ValueError("v_b_stop must be > v_b_start")
        return self


class ChainConfig(StrictModel):
    circuit: CircuitConfig = Field(default_factory=CircuitConfig)
    squid: SquidConfig = Field(default_factory=SquidConfig)
    dot: DotConfig = Field(default_factory=DotConfig)
    double_dot: DoubleDotConfig = Field(default_factory=DoubleDotConfig)
    drive: DriveConfig = Field(default_factory=DriveConfig)
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)
    match: MatchScanConfig = Field(default_factory=MatchScanConfig)
    readout: ReadoutConfig = Field(default_factory=ReadoutConfig)
    stability: StabilityConfig = Field(default_factory=StabilityConfig)

    @model_validator(mode="after")
    def _cross_checks(self):
        if self.analysis.rbw_hz > self.drive.modulation.f_m_hz / 10.0:
            raise ValueError(
                "analysis.rbw_hz must be at most f_m_hz/10 so sidebands resolve"
            )
        if self.analysis.span_hz < 2.0 * (self.drive.modulation.f_m_hz
                                          + 2.0 * self.analysis.rbw_hz):
            raise ValueError("analysis.span_hz too narrow to contain the sidebands")
        return self


def default_config():
    return ChainConfig()


def format_validation_error(err: ValidationError) -> str:
    lines = []
    for item in err.errors():
        path = ".".join(str(p) for p in item["loc"]) or "<root>"
        lines.append(f"{path}: {item['msg']}")
    return "\n".join(lines)


def load_config(path) -> ChainConfig:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON ({exc})") from None
    return ChainConfig.model_validate(raw)
