"""Preset experiments: the interferometer figures and the double-slit runs."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import analysis
from .diffraction import (
    RegimeReport,
    RegimeThresholds,
    ScreenGrid,
    ScreenProfile,
    SlitGeometry,
    classify_regime,
    default_switch,
    fringe_spacing,
    front_arrival,
    slit_pattern,
    transient_transform,
)
from .engine import (
    DetectorTrace,
    PropagationModel,
    SimParams,
    diverted_power,
    simulate,
    warn_incoherent,
)
from .network import OpticalNetwork, build_mzi, enumerate_paths
from .optics import SwitchingSchedule, WavePacket, coherence_factor

MODELS = (PropagationModel.LOCAL, PropagationModel.NONLOCAL)
PASSED_SIGMAS = 5.0  # a packet counts as past an AOM this many envelope widths after its centre


def aom_to_detector_delay(net: OpticalNetwork, aom_id: str, detector_id: str | None = None) -> float:
    dets = [detector_id] if detector_id else net.detectors
    delays = [p.total_delay for d in dets for p in enumerate_paths(net, d, start=aom_id)]
    if not delays:
        raise ValueError(f"no path from {aom_id} to a detector")
    return min(delays)


def source_to_component_delay(net: OpticalNetwork, component_id: str) -> float:
    return min(p.total_delay for p in enumerate_paths(net, component_id))


def first_switched_aom(sched: SwitchingSchedule) -> tuple[str, float] | None:
    if not sched.events:
        return None
    ev = min(sched.events, key=lambda e: e.time)
    return ev.component_id, ev.time


# -- continuous-source transients ------------------------------------------------


@dataclass
class Fig7Result:
    traces: dict[PropagationModel, list[DetectorTrace]]
    onsets: dict[PropagationModel, dict[str, analysis.OnsetReport | None]]
    discrimination: list[analysis.DiscriminationReport]
    expected_delay: float | None
    energy_residual: dict[PropagationModel, float]


def run_fig7_scenario(net: OpticalNetwork, sched: SwitchingSchedule, params: SimParams,
                      models=MODELS, threshold: float = analysis.DEFAULT_THRESHOLD) -> Fig7Result:
    """Detector response to AOM switching under each requested model."""
    models = [PropagationModel(m) for m in models]
    traces, onsets, residual = {}, {}, {}
    for m in models:
        traces[m] = simulate(net, sched, m, params)
        onsets[m] = {tr.detector_id: analysis.detect_onset(tr, threshold) for tr in traces[m]}
        total = sum(tr.powers for tr in traces[m]) + diverted_power(net, sched, m, params)
        residual[m] = float(np.max(np.abs(total - 1.0)))
    switched = first_switched_aom(sched)
    expected, reports = None, []
    if switched is not None:
        expected = aom_to_detector_delay(net, switched[0])
    if len(models) == 2 and expected is not None:
        local, nonlocal_ = traces[PropagationModel.LOCAL], traces[PropagationModel.NONLOCAL]
        for tr_l, tr_n in zip(local, nonlocal_):
            expected_d = aom_to_detector_delay(net, switched[0], tr_l.detector_id)
            reports.append(analysis.discriminate_models(tr_l, tr_n, expected_d, threshold))
    return Fig7Result(traces, onsets, reports, expected, residual)


@dataclass
class InterferenceResult:
    """Per-sample visibility from an arm-phase scan."""

    traces: dict[PropagationModel, list[DetectorTrace]]
    visibility: dict[PropagationModel, np.ndarray]
    window: tuple[float, float]
    min_visibility: dict[PropagationModel, float]
    flatness: dict[PropagationModel, float]  # peak-to-peak of det1 inside the window


def run_interference_scenario(net: OpticalNetwork, sched: SwitchingSchedule, params: SimParams,
                              models=MODELS, window_end: float | None = None,
                              n_phases: int = 16) -> InterferenceResult:
    """Steady or in-flight interference check used by the fig4a/fig4b presets.

    ``window_end`` limits the reported statistics to samples before that
    time, e.g. light already past a switched AOM.
    """
    models = [PropagationModel(m) for m in models]
    t = params.times
    end = t[-1] + params.dt if window_end is None else window_end
    mask = t < end
    if not mask.any():
        raise ValueError("empty analysis window")
    traces, vis, vmin, flat = {}, {}, {}, {}
    for m in models:
        traces[m] = simulate(net, sched, m, params)
        _, scan = analysis.phase_scan(net, sched, m, params, n_phases=n_phases)
        vis[m] = analysis.sample_visibility(scan)
        vmin[m] = float(vis[m][mask].min())
        p1 = traces[m][0].powers[mask]
        flat[m] = float(p1.max() - p1.min())
    return InterferenceResult(traces, vis, (float(t[0]), float(end)), vmin, flat)


# -- pulsed scenarios --------------------------------------------------------------


@dataclass(frozen=True)
class Fig2Params:
    arm_length: float = 15.0
    wavelength: float = 633e-9
    coherence_length: float = 0.6  # short-coherence source: a 2 ns envelope
    pass_time: float = -20e-9  # packet centre at the AOMs
    switch_time: float = 0.0
    switched: tuple[str, ...] = ("aom2",)
    ramp_duration: float = 10e-9
    dt: float = 0.5e-9
    n_phases: int = 16


@dataclass
class PulseResult:
    traces: list[DetectorTrace]
    energies: dict[str, float]  # pulse energy per detector / packet energy
    visibility: analysis.VisibilityReport


def _pulse_energy(trace: DetectorTrace) -> float:
    return float(np.sum(trace.powers) * trace.dt)


def packet_energy(packet: WavePacket) -> float:
    return packet.peak_amp ** 2 * packet.sigma_t * np.sqrt(np.pi)


def _pulse_run(net, sched, model, params: SimParams, n_phases: int) -> PulseResult:
    traces = simulate(net, sched, model, params)
    e_ref = sum(packet_energy(p) for p in params.packets) or 1.0
    energies = {tr.detector_id: float(_pulse_energy(tr) / e_ref) for tr in traces}
    _, scan = analysis.phase_scan(net, sched, model, params, n_phases=n_phases)
    vis = analysis.visibility(scan.sum(axis=1) * params.dt)
    return PulseResult(traces, energies, vis)


def check_packet_passed(net: OpticalNetwork, packet: WavePacket, sched: SwitchingSchedule) -> bool:
    """Warn unless the packet is clear of every switched AOM before it switches."""
    ok = True
    for ev in sched.events:
        passage = packet.t_emit + source_to_component_delay(net, ev.component_id)
        if passage + PASSED_SIGMAS * packet.sigma_t > ev.time:
            warnings.warn(f"packet is not fully past {ev.component_id} when it switches at {ev.time:g} s",
                          stacklevel=3)
            ok = False
    return ok


def run_fig2_scenario(params: Fig2Params = Fig2Params(), models=MODELS, net: OpticalNetwork | None = None,
                      sched: SwitchingSchedule | None = None) -> dict[PropagationModel, PulseResult]:
    """A short packet passes the AOMs, then they switch off before it reaches BS2.

    Under local semantics the in-flight packet still interferes at BS2;
    under nonlocal semantics the switch-off removes the interference.
    ``sched`` overrides the switching given by ``params``.
    """
    net = net or build_mzi(params.arm_length)
    if sched is None:
        sched = SwitchingSchedule.from_tuples([(a, "off", params.switch_time) for a in params.switched],
                                              params.ramp_duration)
    switched = [e.component_id for e in sched.events] or list(params.switched)
    t_aom = min(source_to_component_delay(net, a) for a in switched)
    packet = WavePacket(params.pass_time - t_aom, params.wavelength, params.coherence_length)
    check_packet_passed(net, packet, sched)
    arrival = packet.t_emit + max(p.total_delay for d in net.detectors for p in enumerate_paths(net, d))
    span = 8 * packet.sigma_t
    sim = SimParams(min(params.pass_time, arrival - span) - span, arrival + span, params.dt,
                    "pulsed", (packet,))
    return {PropagationModel(m): _pulse_run(net, sched, m, sim, params.n_phases) for m in models}


@dataclass
class Fig4cResult:
    traces: list[DetectorTrace]
    coherence_weight: float | None
    visibility_packet1: analysis.VisibilityReport
    visibility_packet2: analysis.VisibilityReport | None
    visibility_combined: analysis.VisibilityReport
    energies: dict[str, float]


def run_fig4c_scenario(packet1: WavePacket, packet2: WavePacket | None, sched: SwitchingSchedule, model,
                       net: OpticalNetwork | None = None, dt: float = 0.5e-9,
                       n_phases: int = 16, window: tuple[float, float] | None = None) -> Fig4cResult:
    """Two sequential packets whose envelopes overlap at BS2.

    The cross-packet interference term is weighted by the coherence factor of
    their relative arrival delay; mismatched packets are treated as
    incoherent.
    """
    net = net or build_mzi()
    packets = (packet1,) if packet2 is None else (packet1, packet2)
    weight = None
    if packet2 is not None:
        weight = 0.0 if warn_incoherent(packet1, packet2) else coherence_factor(packet2.t_emit - packet1.t_emit,
                                                                                packet1)
    if window is None:
        delays = [p.total_delay for d in net.detectors for p in enumerate_paths(net, d)]
        lo = min(pk.t_emit - 6 * pk.sigma_t for pk in packets)
        hi = max(pk.t_emit + 6 * pk.sigma_t for pk in packets) + max(delays)
        window = (lo, hi)
    params = SimParams(window[0], window[1], dt, "pulsed", packets)
    combined = _pulse_run(net, sched, model, params, n_phases)
    single = [_pulse_run(net, sched, model, SimParams(window[0], window[1], dt, "pulsed", (pk,)), n_phases)
              for pk in packets]
    return Fig4cResult(combined.traces, weight, single[0].visibility,
                       single[1].visibility if packet2 is not None else None,
                       combined.visibility, combined.energies)


# -- double slit ---------------------------------------------------------------------


@dataclass
class SweepEntry:
    z: float
    profile: ScreenProfile
    regime: RegimeReport
    spacing: float | None
    expected_spacing: float


def run_doubleslit_sweep(geom: SlitGeometry, distances, grid_points: int = 2001,
                         thresholds: RegimeThresholds = RegimeThresholds(),
                         min_nodes: int = 2001) -> list[SweepEntry]:
    entries = []
    for z in distances:
        profile = slit_pattern(geom, z, ScreenGrid.default(geom, z, grid_points), min_nodes)
        regime = classify_regime(profile, geom, thresholds)
        try:
            spacing = fringe_spacing(profile, thresholds.fringe_floor)
        except ValueError:
            spacing = None
        entries.append(SweepEntry(z, profile, regime, spacing, geom.far_field_spacing(z)))
    return entries


@dataclass
class TransientResult:
    before: ScreenProfile
    after: ScreenProfile
    times: np.ndarray
    shows_new: dict[PropagationModel, np.ndarray]  # per sample: True once the new pattern shows
    change_time: dict[PropagationModel, float | None]
    expected: dict[PropagationModel, float]


def run_doubleslit_transient(geom: SlitGeometry, z: float, t_switch: float, times,
                             after=None, models=MODELS, grid_points: int = 2001) -> TransientResult:
    """Sample the screen pattern through a slit opening or closing."""
    after = frozenset(after) if after is not None else default_switch(geom)
    grid = ScreenGrid.default(geom, z, grid_points)
    before_p = slit_pattern(geom, z, grid)
    after_p = slit_pattern(geom.with_slits(*after), z, grid)
    times = np.asarray(times, dtype=float)
    shows, change, expected = {}, {}, {}
    for m in (PropagationModel(x) for x in models):
        flags = np.array([
            not np.array_equal(transient_transform(geom, z, t_switch, float(t), m, after, grid).intensity,
                               before_p.intensity)
            for t in times])
        shows[m] = flags
        change[m] = float(times[np.argmax(flags)]) if flags.any() else None
        expected[m] = front_arrival(z, t_switch, m)
    return TransientResult(before_p, after_p, times, shows, change, expected)


__all__ = [
    "Fig2Params", "Fig4cResult", "Fig7Result", "InterferenceResult", "PulseResult", "SweepEntry",
    "TransientResult", "aom_to_detector_delay", "run_doubleslit_sweep", "run_doubleslit_transient",
    "run_fig2_scenario", "run_fig4c_scenario", "run_fig7_scenario", "run_interference_scenario",
]
