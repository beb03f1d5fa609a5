"""Power-spectrum synthesis, ingestion, SNR extraction, sensitivities.

Synthesized spectra contain the reflected carrier, the two first-order
modulation sidebands at f_C +/- f_M, and a white noise floor whose per-bin
power fluctuates exponentially (envelope-detector statistics) from a
deterministic seeded stream.  Measured or synthesized spectra are analyzed
the same way: sideband bin over median floor, then the SNR-to-sensitivity
formulas.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chain import operating_point, with_drive
from .units import ELEMENTARY_CHARGE

_LN2 = math.log(2.0)
# Bins skipped on each side of a known spectral line when collecting
# noise-floor samples.
_GUARD_BINS = 3
# Floor-estimation uncertainty quoted on every sensitivity (dB).
SNR_UNCERTAINTY_DB = 0.5

CSV_REQUIRED_KEYS = ("rbw_hz", "f_start_hz", "f_step_hz", "seed")


@dataclass
class Spectrum:
    f_start_hz: float
    f_step_hz: float
    rbw_hz: float
    power_dbm: np.ndarray
    metadata: dict

    def __post_init__(self):
        self.power_dbm = np.asarray(self.power_dbm, dtype=float)
        if self.f_step_hz <= 0 or self.rbw_hz <= 0:
            raise ValueError("f_step and rbw must be positive")
        if self.power_dbm.size == 0:
            raise ValueError("spectrum has no bins")

    @property
    def frequencies_hz(self):
        return self.f_start_hz + self.f_step_hz * np.arange(self.power_dbm.size)


def v0_from_power(p1_dbm, ref_p1_dbm=-29.0, ref_v0_vrms=192e-6):
    """Device rms voltage at drive power p1_dbm, scaled linearly in
    amplitude from a single calibrated reference point."""
    return ref_v0_vrms * 10.0 ** ((p1_dbm - ref_p1_dbm) / 20.0)


def demodulate(amplitude_v, phase_rad, lo_phase_rad=0.0):
    """Homodyne-detected DC voltage, V_D = A*cos(phase - lo_phase)."""
    return amplitude_v * np.cos(np.asarray(phase_rad) - lo_phase_rad)


def synthesize_spectrum(chain, modulation=None, seed=None, noiseless=None):
    """Simulate the analyzer trace around the carrier.

    Bin powers (port-referred, then shifted by the display chain gain):
    carrier |Gamma|^2*P1; each sideband P1*(G_X*delta_X)^2/2 compressed by
    the squared Bessel factor; noise k_B*T_N(P_in)*rbw per bin, drawn from
    an exponential distribution unless noiseless, in which case the floor
    sits at its exact mean.  The grid is centered on the carrier with bin
    spacing equal to the resolution bandwidth, so the carrier and (when
    f_M is a multiple of rbw) the sidebands land exactly on bins.
    """
    if modulation is not None:
        chain = with_drive(chain, target=modulation.target,
                           f_m_hz=modulation.f_m_hz,
                           amplitude_vrms=modulation.amplitude_vrms)
    mod = chain.drive.modulation
    rbw = chain.analysis.rbw_hz
    span = chain.analysis.span_hz
    if seed is None:
        seed = chain.analysis.seed
    if noiseless is None:
        noiseless = chain.analysis.noiseless
    if rbw > mod.f_m_hz / 10.0:
        raise ValueError("rbw must be at most f_M/10 to resolve the sidebands")
    if span < 2.0 * (mod.f_m_hz + 2.0 * rbw):
        raise ValueError("span too narrow to contain both sidebands")

    op = operating_point(chain)
    half = int(round(span / (2.0 * rbw)))
    n = 2 * half + 1
    f_start = op.f_c_hz - half * rbw

    floor_w = op.floor_psd_w_per_hz * rbw
    if noiseless:
        bins = np.full(n, floor_w)
    else:
        rng = np.random.default_rng(
            np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF))
        bins = rng.exponential(floor_w, n)
    k_sb = int(round(mod.f_m_hz / rbw))
    bins[half] += op.carrier_w
    bins[half - k_sb] += op.sideband_w
    bins[half + k_sb] += op.sideband_w

    gain = 10.0 ** (chain.chain_gain_db / 10.0)
    power_dbm = 10.0 * np.log10(np.maximum(bins * gain, 1e-300) / 1e-3)
    metadata = {
        "rbw_hz": rbw,
        "f_start_hz": f_start,
        "f_step_hz": rbw,
        "seed": int(seed),
        "f_c_hz": op.f_c_hz,
        "f_m_hz": mod.f_m_hz,
        "p1_dbm": chain.drive.p1_dbm,
        "target": mod.target,
        "chain_gain_db": chain.chain_gain_db,
        "noise_model": "none" if noiseless else "exponential",
        "regime": op.regime,
    }
    return Spectrum(f_start, rbw, rbw, power_dbm, metadata)


@dataclass
class SnrMeasurement:
    snr_db: float
    delta_f_hz: float
    flagged: bool
    sideband_dbm: float
    floor_dbm: float
    n_noise_bins: int


def measure_snr(spectrum, f_sideband_hz, noise_windows=None,
                guard_bins=_GUARD_BINS, min_noise_bins=20):
    """Sideband power over the estimated noise floor, in dB.

    The sideband bin is the maximum over +/-1 bin around the requested
    frequency.  The floor is the median of noise-only bins — either the
    given (f_lo, f_hi) windows or everything outside guard regions around
    the known lines (carrier and sidebands from metadata, plus the
    requested frequency).  When the spectrum declares exponential bin
    statistics the median is corrected by ln 2 to estimate the mean floor.
    A non-positive SNR flags the result rather than raising.
    """
    p_w = 1e-3 * 10.0 ** (spectrum.power_dbm / 10.0)
    n = p_w.size
    f = spectrum.frequencies_hz
    idx = int(round((f_sideband_hz - spectrum.f_start_hz) / spectrum.f_step_hz))
    if not 0 <= idx < n:
        raise ValueError(f"sideband frequency {f_sideband_hz} Hz outside span")
    sb_w = float(np.max(p_w[max(0, idx - 1): idx + 2]))

    mask = np.ones(n, dtype=bool)
    if noise_windows is not None:
        mask[:] = False
        for lo, hi in noise_windows:
            mask |= (f >= lo) & (f <= hi)
    line_freqs = [f_sideband_hz]
    meta = spectrum.metadata
    if "f_c_hz" in meta:
        line_freqs.append(meta["f_c_hz"])
        if "f_m_hz" in meta:
            line_freqs.append(meta["f_c_hz"] - meta["f_m_hz"])
            line_freqs.append(meta["f_c_hz"] + meta["f_m_hz"])
    for lf in line_freqs:
        i = int(round((lf - spectrum.f_start_hz) / spectrum.f_step_hz))
        lo, hi = max(0, i - guard_bins), min(n, i + guard_bins + 1)
        if lo < hi:
            mask[lo:hi] = False
    noise = p_w[mask]
    if noise.size < min_noise_bins:
        raise ValueError(
            f"only {noise.size} noise-only bins available, need {min_noise_bins}"
        )
    floor_w = float(np.median(noise))
    if meta.get("noise_model") == "exponential":
        floor_w /= _LN2  # median -> mean of the exponential bin statistics
    snr_db = 10.0 * math.log10(sb_w / floor_w)
    return SnrMeasurement(
        snr_db=snr_db,
        delta_f_hz=spectrum.rbw_hz,
        flagged=snr_db <= 0.0,
        sideband_dbm=10.0 * math.log10(sb_w / 1e-3),
        floor_dbm=10.0 * math.log10(floor_w / 1e-3),
        n_noise_bins=int(noise.size),
    )


def capacitance_sensitivity(snr_db, delta_f_hz, delta_c_f):
    """S_C = delta_C / sqrt(2*delta_f) * 10^(-SNR/20), farads/rtHz."""
    if delta_f_hz <= 0:
        raise ValueError("delta_f must be positive")
    if delta_c_f <= 0:
        raise ValueError("delta_C must be positive")
    return delta_c_f / math.sqrt(2.0 * delta_f_hz) * 10.0 ** (-snr_db / 20.0)


def charge_sensitivity(snr_db, delta_f_hz, delta_q_c):
    """S_Q = (delta_Q/e) / sqrt(2*delta_f) * 10^(-SNR/20), electrons/rtHz."""
    if delta_f_hz <= 0:
        raise ValueError("delta_f must be positive")
    if delta_q_c <= 0:
        raise ValueError("delta_Q must be positive")
    return (delta_q_c / ELEMENTARY_CHARGE) / math.sqrt(2.0 * delta_f_hz) \
        * 10.0 ** (-snr_db / 20.0)


def oscillating_charge_sensitivity(s_c, v0_vrms):
    """S_S = sqrt(2) * V0 * S_C, coulombs/rtHz."""
    if v0_vrms <= 0:
        raise ValueError("V0 must be positive")
    return math.sqrt(2.0) * v0_vrms * s_c


@dataclass
class SensitivityResult:
    snr_db: float
    delta_f_hz: float
    s_c_f_per_rthz: Optional[float]
    s_q_e_per_rthz: Optional[float]
    s_s_c_per_rthz: Optional[float]
    uncertainty: float
    flagged: bool

    def __post_init__(self):
        if self.delta_f_hz <= 0:
            raise ValueError("delta_f must be positive")
        for s in (self.s_c_f_per_rthz, self.s_q_e_per_rthz,
                  self.s_s_c_per_rthz):
            if s is not None and s < 0:
                raise ValueError("sensitivities cannot be negative")


def analyze_spectrum(chain, spectrum):
    """Extract sideband SNR at f_C +/- f_M (averaged in dB over the two
    sidebands) and convert it to the sensitivities the modulation target
    supports: capacitance and oscillating-charge for varactor modulation,
    dot charge for gate modulation.  Parameter excursions come from the
    chain models; drive power prefers the spectrum's own metadata."""
    meta = spectrum.metadata
    missing = [k for k in ("f_c_hz", "f_m_hz") if k not in meta]
    if missing:
        raise ValueError(f"missing metadata keys: {missing}")
    lower = measure_snr(spectrum, meta["f_c_hz"] - meta["f_m_hz"])
    upper = measure_snr(spectrum, meta["f_c_hz"] + meta["f_m_hz"])
    snr_db = 0.5 * (lower.snr_db + upper.snr_db)
    delta_f = spectrum.rbw_hz
    op = operating_point(chain)
    p1_dbm = meta.get("p1_dbm", chain.drive.p1_dbm)

    # Zero excursion (no sideband to attribute) leaves the sensitivities
    # unset and flags the result instead of raising: an undetectable
    # modulation is a measurement outcome, not a usage error.
    s_c = s_q = s_s = None
    if chain.drive.modulation.target == "varactor":
        if op.delta_c_f:
            s_c = capacitance_sensitivity(snr_db, delta_f, op.delta_c_f)
            s_s = oscillating_charge_sensitivity(s_c, v0_from_power(p1_dbm))
    else:
        if op.delta_q_c:
            s_q = charge_sensitivity(snr_db, delta_f, op.delta_q_c)
    return SensitivityResult(
        snr_db=snr_db,
        delta_f_hz=delta_f,
        s_c_f_per_rthz=s_c,
        s_q_e_per_rthz=s_q,
        s_s_c_per_rthz=s_s,
        uncertainty=10.0 ** (SNR_UNCERTAINTY_DB / 20.0) - 1.0,
        flagged=snr_db <= 0.0 or (s_c is None and s_q is None),
    )


def _format_value(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def spectrum_to_csv(spectrum):
    """Render the interchange format: '#'-prefixed key=value metadata
    lines, a column header, then frequency_hz,power_dbm rows."""
    meta = dict(spectrum.metadata)
    meta.setdefault("rbw_hz", spectrum.rbw_hz)
    meta.setdefault("f_start_hz", spectrum.f_start_hz)
    meta.setdefault("f_step_hz", spectrum.f_step_hz)
    lines = []
    for key in CSV_REQUIRED_KEYS:
        if key in meta:
            lines.append(f"# {key}={_format_value(meta[key])}")
    for key in sorted(k for k in meta if k not in CSV_REQUIRED_KEYS):
        lines.append(f"# {key}={_format_value(meta[key])}")
    lines.append("frequency_hz,power_dbm")
    for f, p in zip(spectrum.frequencies_hz, spectrum.power_dbm):
        lines.append(f"{float(f)!r},{float(p)!r}")
    return "\n".join(lines) + "\n"


def _parse_meta_value(text):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def spectrum_from_csv(text):
    """Parse the interchange format back into a Spectrum.

    Raises ValueError with the offending line number for malformed rows,
    and lists any missing required metadata keys.
    """
    meta = {}
    freqs, powers = [], []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" not in body:
                raise ValueError(f"line {lineno}: metadata without '='")
            key, _, value = body.partition("=")
            meta[key.strip()] = _parse_meta_value(value.strip())
            continue
        if not header_seen:
            if line.replace(" ", "") != "frequency_hz,power_dbm":
                raise ValueError(
                    f"line {lineno}: expected header 'frequency_hz,power_dbm'"
                )
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected two columns")
        try:
            freqs.append(float(parts[0]))
            powers.append(float(parts[1]))
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric value") from None
    missing = [k for k in CSV_REQUIRED_KEYS if k not in meta]
    if missing:
        raise ValueError(f"missing metadata keys: {missing}")
    if not freqs:
        raise ValueError("no data rows found")
    f_start, f_step = meta["f_start_hz"], meta["f_step_hz"]
    for i, fval in enumerate(freqs):
        expected = f_start + i * f_step
        if abs(fval - expected) > 1e-3 * f_step:
            lineno = i  # data row i sits i lines after the column header
            raise ValueError(
                f"frequency column inconsistent with metadata grid at row {i + 1}"
                f" (got {fval}, expected {expected})"
            )
    return Spectrum(float(f_start), float(f_step), float(meta["rbw_hz"]),
                    np.array(powers), meta)
