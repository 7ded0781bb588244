"""Phase-difference Doppler disambiguation for TDM-MIMO FMCW radar."""

from .config import DerivedParams, RadarParams, derive, doppler_bin_to_velocity, validate
from .disambiguation import DisambiguationResult, PhaseEstimates, disambiguate, hpc_baseline
from .harness import Scenario, SweepResult, compare_oracle, run_angle_sweep, run_scenario, run_velocity_sweep
from .processing import Detection, RangeDopplerMaps, detect_peaks, extract_snapshot, range_doppler_process
from .synth import DataCube, Target, synthesize_cube, tdm_chirp_start

__all__ = [
    "DataCube", "Detection", "DerivedParams", "DisambiguationResult", "PhaseEstimates",
    "RadarParams", "RangeDopplerMaps", "Scenario", "SweepResult", "Target",
    "compare_oracle", "derive", "detect_peaks", "disambiguate", "doppler_bin_to_velocity",
    "extract_snapshot", "hpc_baseline", "range_doppler_process", "run_angle_sweep",
    "run_scenario", "run_velocity_sweep", "synthesize_cube", "tdm_chirp_start", "validate",
]
