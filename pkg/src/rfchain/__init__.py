"""RF reflectometry readout chain: tank circuit + quantum dot + SQUID
amplifier, with spectrum synthesis/analysis, sensitivity extraction,
readout-time estimation, and a coordinate-descent sweep optimizer.
Exposed as a library, an HTTP service, and a CLI."""

__version__ = "0.1.0"

from .chain import (AnalysisState, Chain, DriveState, analytic_snr_db,
                    build_chain, operating_point, resolve_carrier, with_drive)
from .circuit import (ModulationSpec, TankCircuit, VaractorCurve,
                      capacitance_modulation, default_varactor_curve,
                      find_best_match, reflection_coefficient,
                      resonant_frequency)
from .config import ChainConfig, default_config, load_config
from .dot import (DotModel, DoubleDotModel, conductance, quantum_capacitance,
                  stability_grid, stored_charge)
from .optimize import (ProtocolResult, SweepPlan, SweepRecord, SweepResult,
                       run_pass, run_protocol)
from .readout import (ReadoutEstimate, ScCurve, average_capacitance,
                      average_capacitance_closed_form, readout_bandwidth,
                      readout_time_sweep)
from .spectra import (SensitivityResult, SnrMeasurement, Spectrum,
                      analyze_spectrum, capacitance_sensitivity,
                      charge_sensitivity, measure_snr,
                      oscillating_charge_sensitivity, spectrum_from_csv,
                      spectrum_to_csv, synthesize_spectrum)
from .squid import (NoiseReport, SquidModel, classify_regime,
                    compression_factor, noise_temperature, noise_vs_power,
                    quantum_limit)

__all__ = [
    "__version__",
    "AnalysisState", "Chain", "ChainConfig", "DotModel", "DoubleDotModel",
    "DriveState", "ModulationSpec", "NoiseReport", "ProtocolResult",
    "ReadoutEstimate", "ScCurve", "SensitivityResult", "SnrMeasurement",
    "Spectrum", "SquidModel", "SweepPlan", "SweepRecord", "SweepResult",
    "TankCircuit", "VaractorCurve",
    "analytic_snr_db", "analyze_spectrum", "average_capacitance",
    "average_capacitance_closed_form", "build_chain",
    "capacitance_modulation", "capacitance_sensitivity", "charge_sensitivity",
    "classify_regime", "compression_factor", "conductance", "default_config",
    "default_varactor_curve", "find_best_match", "load_config", "measure_snr",
    "noise_temperature", "noise_vs_power", "operating_point",
    "oscillating_charge_sensitivity", "quantum_capacitance", "quantum_limit",
    "readout_bandwidth", "readout_time_sweep", "reflection_coefficient",
    "resolve_carrier", "resonant_frequency", "run_pass", "run_protocol",
    "spectrum_from_csv", "spectrum_to_csv", "stability_grid", "stored_charge",
    "synthesize_spectrum", "with_drive",
]
