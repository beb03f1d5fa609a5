"""Assembled readout chain and its operating point.

A Chain bundles the tank circuit, the dot devices, the SQUID model and the
drive/analysis settings into one mutable-by-replacement state.  The
operating point derived from it carries everything spectrum synthesis and
sensitivity analysis need: carrier frequency (located at the reflection
minimum when not pinned), complex reflection and its derivatives, the
modulation-induced parameter excursions, and the amplifier noise state at
the drive power.

Power planes: line powers (carrier, sidebands, noise floor) are referred
to the drive port; the configured chain gain is a display offset applied
when spectra are rendered.  The separate port-to-amplifier offset converts
drive power to the power seen by the SQUID, which is what sets its noise
temperature and compression state.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from . import circuit as _circuit
from . import dot as _dot
from . import squid as _squid
from .circuit import ModulationSpec, TankCircuit, VaractorCurve
from .config import ChainConfig
from .dot import DotModel, DoubleDotModel
from .squid import SquidModel
from .units import BOLTZMANN, dbm_to_watts

# Carrier search window relative to the bare LC resonance; the reflection
# dip of this topology sits a few percent below it.
_MATCH_WINDOW = (0.85, 1.05)


@dataclass
class DriveState:
    p1_dbm: float = -38.0
    v_s: float = 6.8
    f_c_hz: Optional[float] = None
    v_l: float = -0.315884
    v_b: float = 0.0
    modulation: ModulationSpec = field(default_factory=ModulationSpec)


@dataclass
class AnalysisState:
    rbw_hz: float = 10.0
    span_hz: float = 18e3
    seed: int = 7
    noiseless: bool = False


@dataclass
class Chain:
    circuit: TankCircuit = field(default_factory=TankCircuit)
    squid: SquidModel = field(default_factory=SquidModel)
    dot: DotModel = field(default_factory=DotModel)
    double_dot: DoubleDotModel = field(default_factory=DoubleDotModel)
    drive: DriveState = field(default_factory=DriveState)
    analysis: AnalysisState = field(default_factory=AnalysisState)
    port_to_squid_offset_db: float = -101.0
    chain_gain_db: float = 60.0


def build_chain(cfg: ChainConfig) -> Chain:
    """Instantiate the physics models from a validated configuration."""
    vcfg = cfg.circuit.varactor
    if vcfg.csv_path is not None:
        curve = _circuit.load_varactor_csv(vcfg.csv_path)
        if vcfg.order != curve.order:
            curve = VaractorCurve(curve.v_s, curve.c_f, order=vcfg.order)
    elif vcfg.v_s is not None:
        curve = VaractorCurve(vcfg.v_s, vcfg.c_f, order=vcfg.order)
    else:
        curve = _circuit.default_varactor_curve()
    tank = TankCircuit(
        inductance=cfg.circuit.inductance_h,
        varactor=curve,
        parasitic_c=cfg.circuit.parasitic_c_f,
        r_device=cfg.circuit.r_device_ohm,
        z0=cfg.circuit.z0_ohm,
    )
    kappa = cfg.squid.kappa_wb_per_sqrtw
    if kappa is None:
        kappa = _squid.calibrate_kappa(dbm_to_watts(cfg.squid.saturation_p_in_dbm))
    squid = SquidModel(
        v_pp=cfg.squid.v_pp_v,
        flux_offset_wb=cfg.squid.flux_offset_wb,
        power_gain_db=cfg.squid.power_gain_db,
        t_p_k=cfg.squid.t_p_k,
        t_n0_k=cfg.squid.t_n0_k,
        kappa_wb_per_sqrtw=kappa,
        linear_fraction=cfg.squid.linear_fraction,
        noise_exponent=cfg.squid.noise_exponent,
        harmonics=[tuple(h) for h in cfg.squid.harmonics]
        if cfg.squid.harmonics else None,
    )
    dot = DotModel(
        peak_positions_v=tuple(cfg.dot.peak_positions_v),
        g_max_s=cfg.dot.g_max_s,
        lever_arm=cfg.dot.lever_arm,
        charging_energy_j=cfg.dot.charging_energy_j,
        electron_temperature_k=cfg.dot.electron_temperature_k,
        delta_v_cb_v=cfg.dot.delta_v_cb_v,
    )
    dd = DoubleDotModel(
        tunnel_coupling_j=cfg.double_dot.tunnel_coupling_j,
        lever_arm=cfg.double_dot.lever_arm,
    )
    drive = DriveState(
        p1_dbm=cfg.drive.p1_dbm,
        v_s=cfg.drive.v_s,
        f_c_hz=cfg.drive.f_c_hz,
        v_l=cfg.drive.v_l,
        v_b=cfg.drive.v_b,
        modulation=ModulationSpec(
            target=cfg.drive.modulation.target,
            f_m_hz=cfg.drive.modulation.f_m_hz,
            amplitude_vrms=cfg.drive.modulation.amplitude_vrms,
        ),
    )
    analysis = AnalysisState(
        rbw_hz=cfg.analysis.rbw_hz,
        span_hz=cfg.analysis.span_hz,
        seed=cfg.analysis.seed,
        noiseless=cfg.analysis.noiseless,
    )
    return Chain(
        circuit=tank,
        squid=squid,
        dot=dot,
        double_dot=dd,
        drive=drive,
        analysis=analysis,
        port_to_squid_offset_db=cfg.squid.port1_to_squid_offset_db,
        chain_gain_db=cfg.squid.chain_gain_db,
    )


def load_conductance(chain: Chain) -> float:
    """Shunt conductance loading the tank: the dot itself when the gate is
    the modulated element, otherwise the configured static device."""
    if chain.drive.modulation.target == "gate":
        return _dot.conductance(chain.dot, chain.drive.v_l, chain.drive.v_b)
    return 1.0 / chain.circuit.r_device


def resolve_carrier(chain: Chain) -> _circuit.MatchResult:
    """Locate the reflection minimum near the tank resonance at the
    current bias, for use as the carrier frequency."""
    f0 = _circuit.resonant_frequency(chain.circuit, chain.drive.v_s)
    return _circuit.find_best_match(
        chain.circuit,
        chain.drive.v_s,
        _MATCH_WINDOW[0] * f0,
        _MATCH_WINDOW[1] * f0,
        g_load=load_conductance(chain),
    )


@dataclass
class OperatingPoint:
    f_c_hz: float
    carrier_resolved: bool
    at_boundary: bool
    g_load_s: float
    gamma: complex
    p1_w: float
    p_in_w: float
    regime: str
    t_n_k: float
    compression: float
    delta_c_f: Optional[float]
    delta_g_s: Optional[float]
    delta_q_c: Optional[float]
    carrier_w: float
    sideband_w: float
    floor_psd_w_per_hz: float


def operating_point(chain: Chain) -> OperatingPoint:
    """Evaluate the chain at its current drive settings.

    Line powers are port-referred: carrier |Gamma|^2*P1, each first-order
    sideband P1*(G_X*delta_X)^2/2 times the squared compression factor,
    noise floor density k_B*T_N(P_in).  G_X is the magnitude of the complex
    reflection derivative, which stays finite (and physical: the sidebands
    turn into phase modulation) at a deep match where d|Gamma|/dX vanishes.
    """
    drive = chain.drive
    mod = drive.modulation
    g_load = load_conductance(chain)
    if drive.f_c_hz is not None:
        f_c, resolved, at_boundary = drive.f_c_hz, False, False
    else:
        m = resolve_carrier(chain)
        f_c, resolved, at_boundary = m.f_c_hz, True, m.at_boundary
    gamma = _circuit.reflection_coefficient(chain.circuit, drive.v_s, f_c,
                                            g_load=g_load)
    p1_w = dbm_to_watts(drive.p1_dbm)
    p_in_w = dbm_to_watts(drive.p1_dbm + chain.port_to_squid_offset_db)
    regime = _squid.classify_regime(chain.squid, p_in_w)
    t_n = _squid.noise_vs_power(chain.squid, p_in_w)
    comp = _squid.compression_factor(chain.squid, p_in_w)

    delta_c = delta_g = delta_q = None
    if mod.target == "varactor":
        delta_c = _circuit.capacitance_modulation(chain.circuit, drive.v_s,
                                                  mod.amplitude_vrms)
        slope = _circuit.reflection_derivative(chain.circuit, drive.v_s, f_c,
                                               wrt="c", g_load=g_load)
        excursion = abs(slope) * delta_c
    else:
        delta_g = _dot.conductance_first_harmonic(chain.dot, drive.v_l,
                                                  drive.v_b, mod.amplitude_vrms)
        delta_q = _dot.gate_charge_modulation(chain.dot, mod.amplitude_vrms)
        slope = _circuit.reflection_derivative(chain.circuit, drive.v_s, f_c,
                                               wrt="g", g_load=g_load)
        excursion = abs(slope) * delta_g

    return OperatingPoint(
        f_c_hz=f_c,
        carrier_resolved=resolved,
        at_boundary=at_boundary,
        g_load_s=g_load,
        gamma=complex(gamma),
        p1_w=p1_w,
        p_in_w=p_in_w,
        regime=regime,
        t_n_k=t_n,
        compression=comp,
        delta_c_f=delta_c,
        delta_g_s=delta_g,
        delta_q_c=delta_q,
        carrier_w=p1_w * abs(gamma) ** 2,
        sideband_w=p1_w * excursion**2 / 2.0 * comp**2,
        floor_psd_w_per_hz=BOLTZMANN * t_n,
    )


def analytic_snr_db(op: OperatingPoint, rbw_hz: float) -> float:
    """Expected sideband-over-floor ratio in one resolution bandwidth."""
    if rbw_hz <= 0:
        raise ValueError("bandwidth must be positive")
    if op.sideband_w == 0.0:
        return float("-inf")
    return 10.0 * math.log10(op.sideband_w / (op.floor_psd_w_per_hz * rbw_hz))


def with_drive(chain: Chain, **updates) -> Chain:
    """Copy of the chain with drive fields replaced (modulation fields via
    'target', 'f_m_hz', 'amplitude_vrms' shortcuts)."""
    mod_keys = {k: updates.pop(k) for k in ("target", "f_m_hz", "amplitude_vrms")
                if k in updates}
    drive = replace(chain.drive, **updates)
    if mod_keys:
        drive.modulation = replace(drive.modulation, **mod_keys)
    return replace(chain, drive=drive)
