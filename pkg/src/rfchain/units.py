"""Shared physical constants and unit conversion helpers."""

import math

from scipy import constants

ELEMENTARY_CHARGE = constants.e     # C
PLANCK = constants.h                # J s
BOLTZMANN = constants.k             # J / K

# Magnetic flux quantum used by the SQUID transfer model (Wb).
PHI0 = 2.068e-15


def dbm_to_watts(p_dbm):
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watts_to_dbm(p_w):
    if p_w <= 0.0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * math.log10(p_w / 1e-3)


def db_to_power_ratio(db):
    return 10.0 ** (db / 10.0)


def db_to_amplitude_ratio(db):
    return 10.0 ** (db / 20.0)
