"""Dispersive readout-time estimation for the double-dot quantum capacitance.

The probe tone sweeps the detuning across the avoided crossing each RF
cycle, so what the reflectometer sees is the quantum capacitance averaged
over the cycle.  Dividing that by the capacitance sensitivity gives the
bandwidth at which the averaged signal reaches unit SNR, and half its
inverse is the readout time.  The power sweep trades a growing probe
amplitude (which dilutes the averaged capacitance once the swing exceeds
the peak width) against the power dependence of the sensitivity.
"""

import math
import warnings
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.integrate import quad

from .dot import quantum_capacitance
from .spectra import v0_from_power
from .units import ELEMENTARY_CHARGE


@dataclass
class ScCurve:
    """Capacitance-sensitivity anchor table versus drive power.

    Piecewise log-linear (dBm is already a log axis, the sensitivity is
    interpolated in log magnitude) between anchors, constant from the last
    anchor up to flat_until_dbm, then degrading by degrade_db_per_db
    (amplitude dB per dB of power).  Powers below the first anchor are
    outside the table's coverage.
    """

    anchors: List[Tuple[float, float]]
    flat_until_dbm: float = -21.0
    degrade_db_per_db: float = 2.0

    def __post_init__(self):
        if not self.anchors:
            raise ValueError("need at least one sensitivity anchor")
        p = [a[0] for a in self.anchors]
        if p != sorted(p) or len(set(p)) != len(p):
            raise ValueError("anchors must be sorted by power without duplicates")
        if any(a[1] <= 0 for a in self.anchors):
            raise ValueError("anchor sensitivities must be positive")
        if self.flat_until_dbm < self.anchors[-1][0]:
            raise ValueError("flat_until_dbm cannot precede the last anchor")

    @property
    def p1_min_dbm(self):
        return self.anchors[0][0]

    def covers(self, p1_dbm):
        return p1_dbm >= self.p1_min_dbm

    def value(self, p1_dbm):
        if not self.covers(p1_dbm):
            raise ValueError(
                f"{p1_dbm} dBm below table coverage ({self.p1_min_dbm} dBm)"
            )
        p = np.array([a[0] for a in self.anchors])
        s = np.array([a[1] for a in self.anchors])
        if p1_dbm <= p[-1]:
            return float(10.0 ** np.interp(p1_dbm, p, np.log10(s)))
        if p1_dbm <= self.flat_until_dbm:
            return float(s[-1])
        return float(s[-1] * 10.0 ** (
            self.degrade_db_per_db * (p1_dbm - self.flat_until_dbm) / 20.0))


def default_sc_curve():
    return ScCurve(anchors=[(-60.0, 0.9e-18), (-31.0, 0.07e-18)],
                   flat_until_dbm=-21.0, degrade_db_per_db=2.0)


def average_capacitance(dd, v0_vrms):
    """Cycle-averaged quantum capacitance,

        C_bar = (1/(2*sqrt(2)*V0)) * integral of C_Q over +/- sqrt(2)*V0

    by adaptive quadrature (relative tolerance 1e-8).  The integrand is a
    peak of width 2t/(lambda*e), typically far narrower than the window,
    so the quadrature is pointed at the peak via breakpoints and the even
    symmetry is used to integrate one half-interval.
    """
    if v0_vrms <= 0:
        raise ValueError("V0 must be positive")
    x_max = math.sqrt(2.0) * v0_vrms
    width = 2.0 * dd.tunnel_coupling_j / (dd.lever_arm * ELEMENTARY_CHARGE)
    points = sorted({min(width, x_max), min(10.0 * width, x_max)} - {x_max})
    half, _ = quad(lambda v: quantum_capacitance(dd, v), 0.0, x_max,
                   points=points or None, epsabs=0.0, epsrel=1e-8, limit=200)
    return 2.0 * half / (2.0 * x_max)


def average_capacitance_closed_form(dd, v0_vrms):
    """Wide-swing limit of the cycle average, lambda*e/(2*sqrt(2)*V0):
    the swing collects the whole integrated peak (total charge lambda*e)
    and dilutes it over the window."""
    if v0_vrms <= 0:
        raise ValueError("V0 must be positive")
    return dd.lever_arm * ELEMENTARY_CHARGE / (2.0 * math.sqrt(2.0) * v0_vrms)


def readout_bandwidth(c_bar_f, s_c):
    """Bandwidth at which c_bar is detected with unit SNR, (C_bar/S_C)^2."""
    if s_c <= 0:
        raise ValueError("sensitivity must be positive")
    return (c_bar_f / s_c) ** 2


@dataclass
class ReadoutEstimate:
    p1_dbm: float
    v0_vrms: float
    c_bar_f: float
    delta_f_hz: float
    tau_s: float
    used_closed_form: bool


class SweepCoverageWarning(UserWarning):
    """A requested power fell outside the sensitivity table."""


def readout_time_sweep(dd, sc_curve, p1_grid_dbm, v0_ref_p1_dbm=-29.0,
                       v0_ref_vrms=192e-6, electrode_scale=1.0,
                       closed_form=False):
    """Readout time across a drive-power grid.

    Per point: V0 = electrode_scale * v0_from_power(P1); C_bar by
    quadrature (or the wide-swing closed form on request); delta_f =
    (C_bar/S_C(P1))^2; tau = 0.5/delta_f.  electrode_scale accounts for
    the fraction of the port-referred amplitude actually reaching the
    detuning electrode.  Returns (estimates, excluded powers); powers not
    covered by the sensitivity table are excluded with a warning, in grid
    order either way.
    """
    if not 0 < electrode_scale <= 1:
        raise ValueError("electrode_scale must be in (0, 1]")
    estimates, excluded = [], []
    for p1 in p1_grid_dbm:
        if not sc_curve.covers(p1):
            excluded.append(float(p1))
            continue
        v0 = electrode_scale * v0_from_power(p1, v0_ref_p1_dbm, v0_ref_vrms)
        if closed_form:
            c_bar = average_capacitance_closed_form(dd, v0)
        else:
            c_bar = average_capacitance(dd, v0)
        delta_f = readout_bandwidth(c_bar, sc_curve.value(p1))
        estimates.append(ReadoutEstimate(
            p1_dbm=float(p1),
            v0_vrms=v0,
            c_bar_f=c_bar,
            delta_f_hz=delta_f,
            tau_s=0.5 / delta_f,
            used_closed_form=bool(closed_form),
        ))
    if excluded:
        warnings.warn(
            f"{len(excluded)} grid points below sensitivity-table coverage "
            "were excluded",
            SweepCoverageWarning,
            stacklevel=2,
        )
    return estimates, excluded


def best_estimate(estimates):
    """Estimate with the smallest readout time (first on ties)."""
    if not estimates:
        raise ValueError("no readout estimates to choose from")
    taus = [e.tau_s for e in estimates]
    return estimates[int(np.argmin(taus))]
