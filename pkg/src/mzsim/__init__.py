"""Time-domain Mach-Zehnder and double-slit simulator with local and nonlocal propagation."""

from .optics import C, SwitchingSchedule, WavePacket, aom_transmission, beam_splitter_scatter, coherence_factor
from .network import OpticalNetwork, build_mzi, enumerate_paths, validate
from .engine import DetectorTrace, PropagationModel, SimParams, analytic_oracle, simulate
from .diffraction import SlitGeometry, classify_regime, fringe_spacing, slit_pattern, transient_transform
from .analysis import detect_onset, discriminate_models, visibility

__version__ = "0.1.0"

__all__ = [
    "C", "DetectorTrace", "OpticalNetwork", "PropagationModel", "SimParams", "SlitGeometry", "SwitchingSchedule",
    "WavePacket", "analytic_oracle", "aom_transmission", "beam_splitter_scatter", "build_mzi", "classify_regime",
    "coherence_factor", "detect_onset", "discriminate_models", "enumerate_paths", "fringe_spacing", "simulate",
    "slit_pattern", "transient_transform", "validate", "visibility",
]
