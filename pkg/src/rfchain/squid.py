"""Phenomenological SQUID amplifier: transfer curve, gain, noise, regimes.

The amplifier is described by a sinusoidal flux-to-voltage transfer and a
handful of measured numbers (gain, optimum noise temperature, saturation
point).  Input drive strength is expressed as an rms flux excursion
delta_Phi = kappa * sqrt(P_in); the excursion relative to the flux quantum
decides whether the device is linear, compressing, or saturated, and drives
both the excess noise and the sideband compression models.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import j1

from .units import BOLTZMANN, PHI0, PLANCK, dbm_to_watts


def calibrate_kappa(saturation_p_in_w):
    """Flux-per-sqrt-watt scale such that saturation (delta_Phi = Phi0/4)
    is reached exactly at the given amplifier input power."""
    if saturation_p_in_w <= 0:
        raise ValueError("saturation power must be positive")
    return (PHI0 / 4.0) / math.sqrt(saturation_p_in_w)


# Saturation anchored at -122 dBm reaching the amplifier input.
_KAPPA_DEFAULT = calibrate_kappa(dbm_to_watts(-122.0))
# Compression onset one decade (10 dB) below saturation.
_LINEAR_FRACTION_DEFAULT = 0.25 * 10.0 ** (-10.0 / 20.0)


@dataclass
class SquidModel:
    """Measured amplifier parameters plus the flux-drive calibration."""

    v_pp: float = 40e-6
    flux_offset_wb: float = 0.0
    power_gain_db: float = 11.7
    t_p_k: float = 3.7
    t_n0_k: float = 0.49
    kappa_wb_per_sqrtw: float = _KAPPA_DEFAULT
    linear_fraction: float = _LINEAR_FRACTION_DEFAULT
    noise_exponent: float = 2.0
    harmonics: Optional[Sequence[Tuple[int, float]]] = None

    def __post_init__(self):
        if self.v_pp <= 0:
            raise ValueError("transfer swing must be positive")
        if self.t_p_k <= 0 or self.t_n0_k <= 0:
            raise ValueError("noise temperatures must be positive")
        if self.kappa_wb_per_sqrtw <= 0:
            raise ValueError("flux calibration must be positive")
        if not 0 < self.linear_fraction < 0.25:
            raise ValueError("linear fraction must be in (0, 0.25)")
        if self.noise_exponent <= 0:
            raise ValueError("noise exponent must be positive")
        if self.harmonics is not None:
            for k, _ in self.harmonics:
                if int(k) < 2:
                    raise ValueError("harmonic indices start at 2")


def transfer_voltage(squid, flux_wb):
    """Output voltage of the flux-to-voltage transfer at the given flux,
    V = (V_pp/2) * sin(2*pi*Phi/Phi0), plus any configured harmonics.
    Broadcasts over arrays."""
    phase = 2.0 * math.pi * (np.asarray(flux_wb, dtype=float)
                             + squid.flux_offset_wb) / PHI0
    v = np.sin(phase)
    if squid.harmonics:
        for k, a in squid.harmonics:
            v = v + a * np.sin(k * phase)
    v = 0.5 * squid.v_pp * v
    return float(v) if v.ndim == 0 else v


def gain_from_transmission(s21_with_db, s21_reference_db):
    """Amplifier gain referred out of a through-line measurement: the
    transmission with the amplifier in line minus the bypass reference,
    in dB."""
    return s21_with_db - s21_reference_db


def noise_power_referred(p_in_w, p2_signal_w, p2_noise_w):
    """Input-referred noise power: scale the known input by the measured
    output noise-to-signal ratio, P_N = P_in * P2_noise / P2_signal."""
    if p_in_w <= 0 or p2_signal_w <= 0 or p2_noise_w < 0:
        raise ValueError("powers must be positive (noise may be zero)")
    return p_in_w * p2_noise_w / p2_signal_w


def noise_temperature(p_n_w, delta_f_hz):
    """Noise temperature of a power P_N in bandwidth delta_f,
    T_N = P_N / (k_B * delta_f)."""
    if delta_f_hz <= 0:
        raise ValueError("bandwidth must be positive")
    if p_n_w < 0:
        raise ValueError("noise power cannot be negative")
    return p_n_w / (BOLTZMANN * delta_f_hz)


def postamp_contribution(t_p_k, gain_db):
    """Second-stage noise referred to the amplifier input,
    T_N2 = T_P / 10^(gain/10)."""
    return t_p_k / 10.0 ** (gain_db / 10.0)


def quantum_limit(f_hz):
    """Standard quantum limit on amplifier noise temperature at f_hz,
    h*f / (2*k_B)."""
    if f_hz <= 0:
        raise ValueError("frequency must be positive")
    return PLANCK * f_hz / (2.0 * BOLTZMANN)


def flux_amplitude(squid, p_in_w):
    """Rms flux excursion driven by an input power, delta_Phi = kappa*sqrt(P)."""
    if p_in_w < 0:
        raise ValueError("input power cannot be negative")
    return squid.kappa_wb_per_sqrtw * math.sqrt(p_in_w)


def classify_regime(squid, p_in_w):
    """Operating regime from the flux excursion: 'linear' below
    linear_fraction*Phi0, 'saturation' at or above Phi0/4, 'compression'
    in between.  Boundary values land in the higher regime."""
    dphi = flux_amplitude(squid, p_in_w)
    if dphi >= PHI0 / 4.0:
        return "saturation"
    if dphi >= squid.linear_fraction * PHI0:
        return "compression"
    return "linear"


def noise_vs_power(squid, p_in_w):
    """Noise temperature versus drive power,

        T_N(P) = T_N0 * (1 + (delta_Phi / (Phi0/4))^p)

    equal to T_N0 at weak drive and 2*T_N0 at saturation onset."""
    dphi = flux_amplitude(squid, p_in_w)
    return squid.t_n0_k * (1.0 + (dphi / (PHI0 / 4.0)) ** squid.noise_exponent)


def compression_factor(squid, p_in_w):
    """Small-signal gain compression of a sideband riding on a strong
    carrier, c(z) = 2*J1(z)/z with z = 2*pi*delta_Phi/Phi0.  Tends to 1
    at weak drive and rolls off smoothly as the carrier sweeps the
    transfer curve."""
    z = 2.0 * math.pi * flux_amplitude(squid, p_in_w) / PHI0
    if z == 0.0:
        return 1.0
    return 2.0 * float(j1(z)) / z


@dataclass
class NoiseReport:
    """Bundle of amplifier noise figures at one operating point."""

    gain_db: float
    t_n_k: float
    t_n2_k: float
    quantum_limit_k: float
    p_n_w: float
    delta_f_hz: float

    def __post_init__(self):
        if not (self.t_n_k >= self.t_n2_k > 0.0):
            raise ValueError(
                "inconsistent noise figures: require T_N >= T_N2 > 0 "
                f"(got T_N={self.t_n_k}, T_N2={self.t_n2_k})"
            )


def make_noise_report(squid, p_in_w, p2_signal_w, p2_noise_w, delta_f_hz, f_hz):
    """Assemble a NoiseReport from a calibrated-injection measurement:
    a known tone p_in_w produces p2_signal_w at the output alongside
    p2_noise_w of noise in delta_f_hz."""
    p_n = noise_power_referred(p_in_w, p2_signal_w, p2_noise_w)
    return NoiseReport(
        gain_db=squid.power_gain_db,
        t_n_k=noise_temperature(p_n, delta_f_hz),
        t_n2_k=postamp_contribution(squid.t_p_k, squid.power_gain_db),
        quantum_limit_k=quantum_limit(f_hz),
        p_n_w=p_n,
        delta_f_hz=delta_f_hz,
    )
