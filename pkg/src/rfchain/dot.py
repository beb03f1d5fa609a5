"""Quantum-dot device models.

Two devices live here: a single-electron transistor described by thermally
broadened conductance peaks (used as the dissipative load of the tank), and
a charge-like double-dot two-level system whose state-dependent quantum
capacitance is the quantity a dispersive readout integrates.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .units import BOLTZMANN, ELEMENTARY_CHARGE

# Three-peak default device: 2.5 mV gate period, moderately transparent
# barriers, 100 mK electron temperature.
_PEAKS_DEFAULT = (-0.3181, -0.3156, -0.3131)


@dataclass
class DotModel:
    """Single-electron transistor with sech^2 Coulomb-blockade peaks."""

    peak_positions_v: tuple = _PEAKS_DEFAULT
    g_max_s: float = 5e-5
    lever_arm: float = 0.05
    charging_energy_j: float = 1e-3 * ELEMENTARY_CHARGE
    electron_temperature_k: float = 0.1
    # Gate period; derived from consecutive peak positions when omitted.
    delta_v_cb_v: float = None

    def __post_init__(self):
        self.peak_positions_v = tuple(float(p) for p in self.peak_positions_v)
        if not self.peak_positions_v:
            raise ValueError("need at least one conductance peak")
        spacings = np.diff(self.peak_positions_v)
        if np.any(spacings <= 0):
            raise ValueError("peak positions must be strictly increasing")
        if self.delta_v_cb_v is None:
            if len(spacings) == 0:
                raise ValueError(
                    "delta_v_cb_v required when only one peak is given"
                )
            self.delta_v_cb_v = float(np.mean(spacings))
        elif len(spacings) and np.any(
            np.abs(spacings - self.delta_v_cb_v) > 1e-9 * self.delta_v_cb_v
        ):
            raise ValueError(
                "delta_v_cb_v inconsistent with consecutive peak positions"
            )
        if self.g_max_s <= 0:
            raise ValueError("peak conductance must be positive")
        if not 0 < self.lever_arm <= 1:
            raise ValueError("lever arm must be in (0, 1]")
        if self.charging_energy_j <= 0:
            raise ValueError("charging energy must be positive")
        if self.electron_temperature_k <= 0:
            raise ValueError("electron temperature must be positive")
        if self.delta_v_cb_v <= 0:
            raise ValueError("gate period must be positive")

    @property
    def thermal_width_v(self):
        """Gate-voltage scale of a thermally broadened peak."""
        return (2.5 * BOLTZMANN * self.electron_temperature_k
                / (self.lever_arm * ELEMENTARY_CHARGE))

    @property
    def bias_slope(self):
        """Gate-voltage shift of each peak branch per volt of bias,
        delta_V_CB * e / (2 * E_C); adjacent branches then cross at the
        diamond apex V_B = E_C / e."""
        return (self.delta_v_cb_v * ELEMENTARY_CHARGE
                / (2.0 * self.charging_energy_j))


def conductance(dot, v_l, v_b=0.0):
    """Differential conductance G(V_L, V_B) in siemens.

    Each peak splits into two half-height branches moving apart linearly
    in bias, which traces out Coulomb-diamond edges; at V_B = 0 the
    branches coincide and restore the full peak.  Broadcasts over numpy
    arrays.
    """
    v_l = np.asarray(v_l, dtype=float)
    v_b = np.asarray(v_b, dtype=float)
    width = dot.thermal_width_v
    kappa = dot.bias_slope
    g = np.zeros(np.broadcast(v_l, v_b).shape)
    for p in dot.peak_positions_v:
        for sgn in (+1.0, -1.0):
            x = (v_l - (p + sgn * kappa * v_b)) / width
            g = g + 0.5 * dot.g_max_s / np.cosh(x) ** 2
    return float(g) if g.ndim == 0 else g


def dc_current(dot, v_l, v_b):
    """Linear-response current I = G(V_L, V_B) * V_B in amperes."""
    return conductance(dot, v_l, v_b) * v_b


def gate_charge_modulation(dot, dv_l_rms):
    """Charge excursion on the island from a gate modulation of dv_l_rms:
    one gate period delta_V_CB moves exactly one electron, so
    delta_Q = e * dV_L / delta_V_CB (coulombs rms)."""
    if dv_l_rms < 0:
        raise ValueError("gate modulation amplitude cannot be negative")
    return ELEMENTARY_CHARGE * dv_l_rms / dot.delta_v_cb_v


def conductance_first_harmonic(dot, v_l, v_b, dv_l_rms, n=256):
    """Rms conductance swing at the modulation frequency for a sinusoidal
    gate drive of dv_l_rms about v_l.

    Computed as the fundamental Fourier amplitude of G(V_L + sqrt(2)*a*
    sin(theta)); for small drives this reduces to |dG/dV_L| * a, and for
    drives wider than the peak it saturates, which is what limits charge
    sensitivity at large modulation depth.
    """
    if dv_l_rms < 0:
        raise ValueError("gate modulation amplitude cannot be negative")
    if dv_l_rms == 0.0:
        return 0.0
    theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    swing = math.sqrt(2.0) * dv_l_rms * np.sin(theta)
    g = conductance(dot, v_l + swing, v_b)
    b1_peak = 2.0 * float(np.mean(g * np.sin(theta)))
    return abs(b1_peak) / math.sqrt(2.0)


def conductance_slope(dot, v_l, v_b=0.0, step=1e-7):
    """Local |dG/dV_L| by central difference (siemens per volt)."""
    return abs(conductance(dot, v_l + step, v_b)
               - conductance(dot, v_l - step, v_b)) / (2.0 * step)


def stability_grid(dot, v_l_values, v_b_values):
    """Conductance and current maps over a (V_L, V_B) grid.

    Returns (G, I) arrays of shape (len(v_b_values), len(v_l_values)).
    """
    v_l = np.asarray(v_l_values, dtype=float)[np.newaxis, :]
    v_b = np.asarray(v_b_values, dtype=float)[:, np.newaxis]
    g = conductance(dot, v_l, v_b)
    return g, g * v_b


@dataclass
class DoubleDotModel:
    """Charge-like two-level system: two dots coupled by tunneling t,
    detuned by a gate voltage through lever arm lambda."""

    tunnel_coupling_j: float = 6.62607015e-34 * 500e6
    lever_arm: float = 0.3

    def __post_init__(self):
        if self.tunnel_coupling_j <= 0:
            raise ValueError("tunnel coupling must be positive")
        if not 0 < self.lever_arm <= 1:
            raise ValueError("lever arm must be in (0, 1]")


def _detuning_ratio(dd, v):
    """u = lambda*e*V / (2t), the detuning in units of the tunnel gap."""
    return (dd.lever_arm * ELEMENTARY_CHARGE * np.asarray(v, dtype=float)
            / (2.0 * dd.tunnel_coupling_j))


def quantum_capacitance(dd, v):
    """Ground-state quantum capacitance at detuning voltage v:

        C_Q(V) = (e*lambda)^2 (2t)^2 / (2 ((lambda e V)^2 + (2t)^2)^{3/2})

    maximal at zero detuning where the band curvature peaks, falling off
    as the avoided crossing flattens.  Broadcasts over arrays.
    """
    le = dd.lever_arm * ELEMENTARY_CHARGE
    eps = le * np.asarray(v, dtype=float)
    gap = 2.0 * dd.tunnel_coupling_j
    cq = le**2 * gap**2 / (2.0 * (eps**2 + gap**2) ** 1.5)
    return float(cq) if cq.ndim == 0 else cq


def stored_charge(dd, v):
    """Gate-referred ground-state polarization charge,
    q(V) = (lambda e / 2) * u / sqrt(u^2 + 1) with u the detuning ratio;
    its derivative is quantum_capacitance."""
    u = _detuning_ratio(dd, v)
    q = 0.5 * dd.lever_arm * ELEMENTARY_CHARGE * u / np.sqrt(u**2 + 1.0)
    return float(q) if np.ndim(q) == 0 else q
