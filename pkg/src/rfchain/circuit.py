"""Tank-circuit model: varactor tuning, resonance, reflection, impedance match.

The resonator is a series inductor feeding a shunt capacitor in parallel with
the device resistance.  Input impedance seen from the feedline:

    Z(f) = j*2*pi*f*L + 1 / (j*2*pi*f*C_total + G_load)

and the voltage reflection coefficient against the line impedance Z0 is
Gamma = (Z - Z0) / (Z + Z0).  The shunt capacitance is set by a varactor
tuned with a bias voltage V_S, so the match condition is electrically
tunable.
"""

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

L_DEFAULT = 223e-9
Z0_DEFAULT = 50.0
# Static device load that nearly matches the default varactor curve at
# V_S = 6.8 V (R ~ L / (Z0 * C) at resonance for this topology).
R_DEVICE_DEFAULT = 1560.0

# Calibration targets for the default tuning curve: reflection dip at
# 196 MHz when V_S = 6.8 V, and a local slope such that a 99 uVrms bias
# modulation corresponds to a 6.7 aF capacitance modulation.
_CAL_V_S = 6.8
_CAL_F_HZ = 196.0e6
_CAL_SLOPE_F_PER_V = -6.7e-18 / 99e-6


class OneSidedDifferenceWarning(UserWarning):
    """Raised when a derivative falls back to a one-sided difference."""


class BoundaryOptimumWarning(UserWarning):
    """Raised when a scan's optimum lands on the edge of its grid."""


@dataclass
class VaractorCurve:
    """Sampled capacitance-vs-bias tuning curve with interpolation.

    order=1 interpolates linearly (evaluated C stays within neighboring
    samples); order=3 uses a cubic spline.
    """

    v_s: np.ndarray
    c_f: np.ndarray
    order: int = 1
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.v_s = np.asarray(self.v_s, dtype=float)
        self.c_f = np.asarray(self.c_f, dtype=float)
        if self.v_s.ndim != 1 or self.v_s.shape != self.c_f.shape:
            raise ValueError("varactor curve needs matching 1-d V_S and C arrays")
        if self.v_s.size < 2:
            raise ValueError("varactor curve needs at least two samples")
        if np.any(np.diff(self.v_s) <= 0):
            raise ValueError("varactor bias samples must be strictly increasing")
        if np.any(self.c_f <= 0):
            raise ValueError("varactor capacitance samples must be positive")
        if self.order not in (1, 3):
            raise ValueError("interpolation order must be 1 or 3")
        if self.order == 3 and self.v_s.size < 4:
            raise ValueError("cubic interpolation needs at least four samples")

    @property
    def domain(self):
        return float(self.v_s[0]), float(self.v_s[-1])

    def evaluate(self, v):
        lo, hi = self.domain
        varr = np.asarray(v, dtype=float)
        if np.any(varr < lo) or np.any(varr > hi):
            raise ValueError(
                f"varactor bias {v!r} outside tuning-curve domain [{lo}, {hi}] V"
            )
        if self.order == 1:
            out = np.interp(varr, self.v_s, self.c_f)
        else:
            if self._spline is None:
                self._spline = CubicSpline(self.v_s, self.c_f)
            out = self._spline(varr)
        return float(out) if np.isscalar(v) else out


def load_varactor_csv(path):
    """Read a two-column tuning curve (bias in volts, capacitance in farads).

    A header line is required; rows must parse as two floats.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty varactor file")
    header = rows[0]
    try:
        float(header[0])
    except (ValueError, IndexError):
        pass  # non-numeric first line: the required header
    else:
        raise ValueError(f"{path}: missing header line")
    v, c = [], []
    for n, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise ValueError(f"{path}:{n}: expected two columns, got {len(row)}")
        try:
            v.append(float(row[0]))
            c.append(float(row[1]))
        except ValueError as exc:
            raise ValueError(f"{path}:{n}: {exc}") from None
    return VaractorCurve(np.array(v), np.array(c), order=1)


def _dip_capacitance(l_h, r_ohm, z0_ohm, f_hz):
    """Shunt capacitance that puts the zero-reactance point of the network
    at f_hz for a resistive load (larger root of w^2*L*R^2*C^2 - R^2*C + L)."""
    w2 = (2.0 * math.pi * f_hz) ** 2
    a = w2 * l_h * r_ohm * r_ohm
    b = -r_ohm * r_ohm
    disc = b * b - 4.0 * a * l_h
    if disc < 0:
        raise ValueError("no real resonance for these L, R, f values")
    return (-b + math.sqrt(disc)) / (2.0 * a)


def default_varactor_curve(n=121, v_max=12.0, order=3):
    """Built-in tuning curve, C(V) = a / (1 + V/phi)^0.5.

    The two free constants are fixed so that with the default inductor and
    device load the reflection dip sits at 196 MHz when V_S = 6.8 V, and the
    local slope converts a 99 uVrms bias modulation into 6.7 aF.
    """
    c_cal = _dip_capacitance(L_DEFAULT, R_DEVICE_DEFAULT, Z0_DEFAULT, _CAL_F_HZ)
    phi = 0.5 * c_cal / abs(_CAL_SLOPE_F_PER_V) - _CAL_V_S
    a = c_cal * math.sqrt(1.0 + _CAL_V_S / phi)
    v = np.linspace(0.0, v_max, n)
    c = a / np.sqrt(1.0 + v / phi)
    return VaractorCurve(v, c, order=order)


@dataclass
class TankCircuit:
    """Series-L, shunt-(C || R_device) resonator on a Z0 feedline."""

    inductance: float = L_DEFAULT
    varactor: VaractorCurve = field(default_factory=default_varactor_curve)
    parasitic_c: float = 0.0
    r_device: float = R_DEVICE_DEFAULT
    z0: float = Z0_DEFAULT

    def __post_init__(self):
        if self.inductance <= 0:
            raise ValueError("inductance must be positive")
        if self.parasitic_c < 0:
            raise ValueError("parasitic capacitance cannot be negative")
        if self.r_device <= 0:
            raise ValueError("device resistance must be positive")
        if self.z0 <= 0:
            raise ValueError("line impedance must be positive")

    def c_total(self, v_s):
        return self.varactor.evaluate(v_s) + self.parasitic_c


def lc_frequency(l_h, c_f):
    """Resonance of a bare LC pair, 1 / (2*pi*sqrt(L*C))."""
    if l_h <= 0 or c_f <= 0:
        raise ValueError("L and C must be positive")
    return 1.0 / (2.0 * math.pi * math.sqrt(l_h * c_f))


def resonant_frequency(circuit, v_s):
    """Tank resonance at bias v_s, using the total shunt capacitance."""
    return lc_frequency(circuit.inductance, circuit.c_total(v_s))


def df0_dvs(circuit, v_s, step=1e-3):
    """Tuning slope df0/dV_S by central finite difference (default 1 mV step).

    At the edge of the tuning-curve domain the difference degrades to
    one-sided and a OneSidedDifferenceWarning is issued.
    """
    if step <= 0:
        raise ValueError("difference step must be positive")
    lo, hi = circuit.varactor.domain
    if not (lo <= v_s <= hi):
        raise ValueError(f"bias {v_s} outside tuning-curve domain [{lo}, {hi}] V")
    below, above = v_s - step, v_s + step
    if below < lo or above > hi:
        warnings.warn(
            "bias too close to tuning-curve edge; using one-sided difference",
            OneSidedDifferenceWarning,
            stacklevel=2,
        )
        if below < lo:
            return (resonant_frequency(circuit, v_s + step)
                    - resonant_frequency(circuit, v_s)) / step
        return (resonant_frequency(circuit, v_s)
                - resonant_frequency(circuit, v_s - step)) / step
    return (resonant_frequency(circuit, above)
            - resonant_frequency(circuit, below)) / (2.0 * step)


def capacitance_modulation(circuit, v_s, v_m_rms, step=1e-3):
    """Capacitance excursion delta-C produced by a bias modulation of
    v_m_rms on the varactor:

        delta_C = V_M / (2*pi^2*L*f0^3) * |df0/dV_S|

    which is the chain rule |dC/dV_S| * V_M expressed through the
    measurable tuning slope.
    """
    if v_m_rms < 0:
        raise ValueError("modulation amplitude cannot be negative")
    if v_m_rms == 0.0:
        return 0.0
    f0 = resonant_frequency(circuit, v_s)
    slope = df0_dvs(circuit, v_s, step=step)
    return v_m_rms / (2.0 * math.pi**2 * circuit.inductance * f0**3) * abs(slope)


def _input_impedance(l_h, c_f, g_s, f_hz):
    w = 2.0 * math.pi * np.asarray(f_hz, dtype=float)
    y = 1j * w * c_f + g_s
    return 1j * w * l_h + 1.0 / y


def reflection_coefficient(circuit, v_s, f_hz, g_load=None):
    """Complex reflection Gamma = (Z - Z0)/(Z + Z0) at frequency f_hz.

    g_load overrides the shunt conductance (otherwise 1/R_device); this is
    how a voltage-dependent device conductance enters.  Vectorized over
    f_hz.
    """
    g = (1.0 / circuit.r_device) if g_load is None else np.asarray(g_load)
    if np.any(np.asarray(g) < 0):
        raise ValueError("load conductance cannot be negative")
    z = _input_impedance(circuit.inductance, circuit.c_total(v_s), g, f_hz)
    return (z - circuit.z0) / (z + circuit.z0)


def reflection_derivative(circuit, v_s, f_hz, wrt="c", g_load=None):
    """Analytic complex derivative of Gamma at f_hz.

    wrt="c": dGamma/dC_total (per farad); wrt="g": dGamma/dG_load (per
    siemens).  Uses dGamma/dZ = 2*Z0/(Z+Z0)^2 with dZ/dC = -j*w/Y^2 and
    dZ/dG = -1/Y^2 for the shunt admittance Y = j*w*C + G.
    """
    g = (1.0 / circuit.r_device) if g_load is None else g_load
    w = 2.0 * math.pi * f_hz
    y = 1j * w * circuit.c_total(v_s) + g
    z = 1j * w * circuit.inductance + 1.0 / y
    dgamma_dz = 2.0 * circuit.z0 / (z + circuit.z0) ** 2
    if wrt == "c":
        return dgamma_dz * (-1j * w / y**2)
    if wrt == "g":
        return dgamma_dz * (-1.0 / y**2)
    raise ValueError("wrt must be 'c' or 'g'")


class MatchResult(NamedTuple):
    f_c_hz: float
    depth_db: float
    at_boundary: bool


def find_best_match(circuit, v_s, f_lo_hz, f_hi_hz, n_coarse=2001, g_load=None):
    """Locate the reflection minimum in [f_lo, f_hi] at fixed bias.

    Coarse grid scan followed by a bounded scalar refinement around the
    best grid point.  Returns the dip frequency, its depth 20*log10|Gamma|
    in dB, and whether the coarse minimum sat on the window edge (flagged,
    since a boundary minimum usually means the window missed the dip).
    """
    if not (f_lo_hz > 0 and f_hi_hz > f_lo_hz):
        raise ValueError("need 0 < f_lo < f_hi")
    if n_coarse < 3:
        raise ValueError("coarse grid needs at least 3 points")
    f = np.linspace(f_lo_hz, f_hi_hz, n_coarse)
    mag = np.abs(reflection_coefficient(circuit, v_s, f, g_load=g_load))
    i = int(np.argmin(mag))
    at_boundary = i in (0, n_coarse - 1)
    if at_boundary:
        warnings.warn(
            "reflection minimum on the scan boundary; widen the window",
            BoundaryOptimumWarning,
            stacklevel=2,
        )
        f_best, m_best = float(f[i]), float(mag[i])
    else:
        res = minimize_scalar(
            lambda x: abs(reflection_coefficient(circuit, v_s, x, g_load=g_load)),
            bounds=(float(f[i - 1]), float(f[i + 1])),
            method="bounded",
            options={"xatol": 1.0},
        )
        f_best, m_best = float(res.x), float(res.fun)
    depth = 20.0 * math.log10(max(m_best, 1e-300))
    return MatchResult(f_best, depth, at_boundary)


@dataclass
class ModulationSpec:
    """Low-frequency modulation applied to one chain knob.

    target "varactor" modulates the tuning bias (amplitude in Vrms on V_S);
    target "gate" modulates the dot gate (amplitude in Vrms on V_L).
    """

    target: str = "varactor"
    f_m_hz: float = 3e3
    amplitude_vrms: float = 99e-6

    def __post_init__(self):
        if self.target not in ("varactor", "gate"):
            raise ValueError("modulation target must be 'varactor' or 'gate'")
        if self.f_m_hz <= 0:
            raise ValueError("modulation frequency must be positive")
        if self.amplitude_vrms < 0:
            raise ValueError("modulation amplitude cannot be negative")
