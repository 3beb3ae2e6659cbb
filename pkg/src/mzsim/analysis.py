"""Post-processing of traces: onsets, visibility, and model discrimination."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import DetectorTrace, SimParams, simulate
from .network import OpticalNetwork
from .optics import SwitchingSchedule

DEFAULT_THRESHOLD = 0.01
DEFAULT_BASELINE_SAMPLES = 20
VISIBILITY_CUTOFF = 0.01  # below this, interference counts as gone
_EPS = 1e-12


class VisibilityError(ValueError):
    pass


@dataclass(frozen=True)
class OnsetReport:
    detector_id: str
    onset_time: float
    settle_time: float
    threshold_used: float
    onset_index: int
    settle_index: int


@dataclass(frozen=True)
class VisibilityReport:
    V: float
    I_max: float
    I_min: float

    @property
    def interference(self) -> bool:
        return self.V >= VISIBILITY_CUTOFF


def detect_onset(trace: DetectorTrace, threshold: float = DEFAULT_THRESHOLD,
                 baseline_window: float | None = None) -> OnsetReport | None:
    """Find where a trace leaves its initial steady state and where it settles.

    The baseline is the mean over the first ``baseline_window`` seconds
    (default: 20 samples). Onset is the first sample deviating from it by more
    than ``threshold`` times the largest deviation; settle is the first sample
    from which the trace stays within the same band of its final value.
    Returns ``None`` when the trace never departs.
    """
    t, p = trace.times, trace.powers
    if len(p) < 3:
        raise ValueError("trace needs at least 3 samples")
    if baseline_window is None:
        n_base = min(DEFAULT_BASELINE_SAMPLES, len(p) - 1)
    else:
        n_base = int(np.count_nonzero(t - t[0] < baseline_window))
    n_base = max(n_base, 1)
    baseline = float(np.mean(p[:n_base]))
    dev = np.abs(p - baseline)
    full_range = float(dev.max())
    if full_range <= _EPS:
        return None
    band = threshold * max(full_range, _EPS)
    departed = np.flatnonzero(dev > band)
    if departed.size == 0:
        return None
    k_on = int(departed[0])
    outside = np.flatnonzero(np.abs(p - p[-1]) > band)
    k_settle = max(int(outside[-1]) + 1 if outside.size else 0, k_on)
    k_settle = min(k_settle, len(p) - 1)
    return OnsetReport(trace.detector_id, float(t[k_on]), float(t[k_settle]), threshold, k_on, k_settle)


def visibility(intensities: Sequence[float]) -> VisibilityReport:
    """Fringe visibility (I_max - I_min)/(I_max + I_min) of a scan or trace."""
    arr = np.asarray(intensities, dtype=float)
    i_max, i_min = float(arr.max()), float(arr.min())
    if i_max + i_min <= 0:
        raise VisibilityError("visibility undefined: I_max + I_min = 0")
    v = (i_max - i_min) / (i_max + i_min)
    return VisibilityReport(min(max(v, 0.0), 1.0), i_max, i_min)


def two_beam_visibility(p1: float, p2: float) -> float:
    """Best-case visibility of two mutually coherent beams of powers p1, p2."""
    if p1 + p2 <= 0:
        raise VisibilityError("visibility undefined for two dark beams")
    return 2.0 * np.sqrt(p1 * p2) / (p1 + p2)


def phase_scan(net: OpticalNetwork, sched: SwitchingSchedule, model, params: SimParams,
               detector_id: str = "det1", component_id: str = "phase",
               n_phases: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Detector power as the phase of ``component_id`` sweeps one period.

    Returns ``(phases, powers)`` with ``powers`` shaped (n_phases, n_samples).
    """
    base = net[component_id].params.get("phase", 0.0)
    phases = 2 * np.pi * np.arange(n_phases) / n_phases
    rows = []
    for phi in phases:
        scanned = net.with_params(component_id, phase=base + phi)
        trace = next(tr for tr in simulate(scanned, sched, model, params) if tr.detector_id == detector_id)
        rows.append(trace.powers)
    return phases, np.array(rows)


def sample_visibility(powers: np.ndarray) -> np.ndarray:
    """Per-sample visibility over the phase axis of a :func:`phase_scan`."""
    i_max, i_min = powers.max(axis=0), powers.min(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        v = np.where(i_max + i_min > 0, (i_max - i_min) / (i_max + i_min), 0.0)
    return np.clip(v, 0.0, 1.0)


@dataclass(frozen=True)
class DiscriminationReport:
    detector_id: str
    onset_local: float | None
    onset_nonlocal: float | None
    difference: float | None
    expected_delay: float
    tolerance: float
    verdict: str  # PASS, FAIL or INCONCLUSIVE

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def summary(self) -> str:
        if self.difference is None:
            return f"{self.detector_id}: INCONCLUSIVE (onset missing in at least one model)"
        return (f"{self.detector_id}: onset local {self.onset_local * 1e9:.3f} ns, "
                f"nonlocal {self.onset_nonlocal * 1e9:.3f} ns, difference {self.difference * 1e9:.3f} ns, "
                f"expected {self.expected_delay * 1e9:.3f} +/- {self.tolerance * 1e9:.3f} ns: {self.verdict}")


def discriminate_models(trace_local: DetectorTrace, trace_nonlocal: DetectorTrace, expected_delay: float,
                        threshold: float = DEFAULT_THRESHOLD) -> DiscriminationReport:
    """Compare onsets of the two models against the expected retardation.

    PASS when ``onset_local - onset_nonlocal`` equals ``expected_delay``
    within two sample steps.
    """
    dt = max(trace_local.dt, trace_nonlocal.dt)
    tol = 2 * dt
    on_l = detect_onset(trace_local, threshold)
    on_n = detect_onset(trace_nonlocal, threshold)
    if on_l is None or on_n is None:
        return DiscriminationReport(trace_local.detector_id, on_l and on_l.onset_time,
                                    on_n and on_n.onset_time, None, expected_delay, tol, "INCONCLUSIVE")
    diff = on_l.onset_time - on_n.onset_time
    verdict = "PASS" if abs(diff - expected_delay) <= tol + 1e-15 else "FAIL"
    return DiscriminationReport(trace_local.detector_id, on_l.onset_time, on_n.onset_time, diff,
                                expected_delay, tol, verdict)
