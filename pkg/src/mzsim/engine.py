"""Time-domain field propagation through an optical network.

Detector fields are path sums. Each path contributes its static amplitude
times the current factor of every time-varying component on it (AOM
transmission, drifting phase shifter). The two propagation models differ only
in *when* those components are sampled for light arriving at time ``t``:

* ``local``: at ``t - delay(component -> detector)``, the retarded time
  at which that light actually passed the component.
* ``nonlocal``: at ``t`` itself, so any state change shows up at every
  detector immediately.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .network import NetworkError, OpticalNetwork, PathRecord, enumerate_paths, require_valid, topological_order
from .optics import (
    MIRROR_FACTOR,
    SwitchingSchedule,
    WavePacket,
    aom_transmission,
    beam_splitter_scatter,
    coherence_factor,
    packet_envelope,
)

MAX_SAMPLES = 10_000_000
DEFAULT_DT = 0.5e-9


class SimulationError(RuntimeError):
    """Raised when a simulation cannot run with the given inputs."""


class PropagationModel(str, enum.Enum):
    LOCAL = "local"
    NONLOCAL = "nonlocal"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SimParams:
    t_start: float
    t_end: float
    dt: float = DEFAULT_DT
    source_mode: str = "continuous"
    packets: tuple[WavePacket, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "packets", tuple(self.packets))
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end) and self.t_end > self.t_start):
            raise SimulationError("need finite t_end > t_start")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise SimulationError("dt must be > 0")
        if (self.t_end - self.t_start) / self.dt > MAX_SAMPLES:
            raise SimulationError(f"more than {MAX_SAMPLES} samples requested")
        if self.source_mode not in ("continuous", "pulsed"):
            raise SimulationError(f"unknown source_mode {self.source_mode!r}")
        if self.source_mode == "pulsed" and not self.packets:
            raise SimulationError("pulsed mode needs at least one wave packet")

    @property
    def n_samples(self) -> int:
        return int(math.floor((self.t_end - self.t_start) / self.dt + 1e-9)) + 1

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_samples)


@dataclass(frozen=True)
class DetectorTrace:
    detector_id: str
    times: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        powers = np.array(self.powers, dtype=float)
        if times.shape != powers.shape:
            raise ValueError("times and powers must have equal length")
        times.setflags(write=False)
        powers.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "powers", powers)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


@dataclass
class _Term:
    """A path reduced to what the time loop needs."""

    amplitude: complex
    total_delay: float
    dynamic: list[tuple[str, float]] = field(default_factory=list)  # (component id, delay to end)


def _coerce_model(model) -> PropagationModel:
    try:
        return PropagationModel(model)
    except ValueError:
        raise SimulationError(f"unknown propagation model {model!r}") from None


def check_schedule(net: OpticalNetwork, sched: SwitchingSchedule) -> None:
    for cid in sched.component_ids:
        if cid not in net:
            raise SimulationError(f"schedule references unknown component {cid!r}")
        if net[cid].kind != "aom":
            raise SimulationError(f"schedule references non-AOM component {cid!r}")


def _terms(net: OpticalNetwork, paths: Sequence[PathRecord]) -> list[_Term]:
    terms = []
    for p in paths:
        dyn = [(cid, p.delays_to_end[i]) for i, cid in enumerate(p.component_ids) if net[cid].is_dynamic]
        terms.append(_Term(p.static_amplitude, p.total_delay, dyn))
    return terms


def _dynamic_factor(net: OpticalNetwork, sched: SwitchingSchedule, cid: str, tau: np.ndarray) -> np.ndarray:
    comp = net[cid]
    if comp.kind == "aom":
        return np.asarray(aom_transmission(sched, cid, tau), dtype=complex)
    amp = comp.params.get("drift_amplitude", 0.0)
    period = comp.params.get("drift_period", 1.0)
    return np.exp(1j * amp * np.sin(2 * np.pi * tau / period))


def _sample_times(t: np.ndarray, delay: float, model: PropagationModel) -> np.ndarray:
    return t - delay if model is PropagationModel.LOCAL else t


def _term_amplitude(net, sched, term: _Term, t: np.ndarray, model: PropagationModel) -> np.ndarray:
    amp = np.full(t.shape, term.amplitude, dtype=complex)
    for cid, delay in term.dynamic:
        amp = amp * _dynamic_factor(net, sched, cid, _sample_times(t, delay, model))
    return amp


def _pulsed_power(net, sched, terms, t, model, packets) -> np.ndarray:
    beams = []  # (packet, arrival centre, amplitude array)
    for pk in packets:
        for term in terms:
            env = packet_envelope(t, pk, term.total_delay)
            beams.append((pk, pk.t_emit + term.total_delay, _term_amplitude(net, sched, term, t, model) * env))
    total = np.zeros(t.shape)
    for i, (pk_i, arr_i, a_i) in enumerate(beams):
        total += (a_i * a_i.conj()).real
        for pk_j, arr_j, a_j in beams[i + 1:]:
            if pk_i is not pk_j and not pk_i.coherent_with(pk_j):
                continue
            weight = coherence_factor(arr_i - arr_j, pk_i)
            total += 2.0 * weight * (a_i * a_j.conj()).real
    return np.maximum(total, 0.0)


def simulate(net: OpticalNetwork, sched: SwitchingSchedule, model, params: SimParams) -> list[DetectorTrace]:
    """Detector power traces for every detector in ``net``.

    Powers are fractions of the source power (continuous mode) or of a unit
    packet's peak power (pulsed mode).
    """
    require_valid(net)
    check_schedule(net, sched)
    model = _coerce_model(model)
    t = params.times
    traces = []
    for det in net.detectors:
        terms = _terms(net, enumerate_paths(net, det))
        if params.source_mode == "continuous":
            fld = np.zeros(t.shape, dtype=complex)
            for term in terms:
                fld += _term_amplitude(net, sched, term, t, model)
            powers = (fld * fld.conj()).real
        else:
            powers = _pulsed_power(net, sched, terms, t, model, params.packets)
        traces.append(DetectorTrace(det, t, powers))
    return traces


def diverted_power(net: OpticalNetwork, sched: SwitchingSchedule, model, params: SimParams) -> np.ndarray:
    """Power sent out of the network by AOMs, aligned with detector samples.

    Continuous mode only. For the local model each AOM's diversion is booked
    at the time its light would have reached the nearest detector, so that
    detector powers plus diverted power sum to the source power per sample.
    """
    if params.source_mode != "continuous":
        raise SimulationError("diverted power is only defined for a continuous source")
    require_valid(net)
    check_schedule(net, sched)
    model = _coerce_model(model)
    t = params.times
    out = np.zeros(t.shape)
    for aom in net.of_kind("aom"):
        downstream = [p.total_delay for det in net.detectors for p in enumerate_paths(net, det, start=aom.id)]
        if not downstream:
            continue
        tau_k = _sample_times(t, min(downstream), model)
        fld = np.zeros(t.shape, dtype=complex)
        for term in _terms(net, enumerate_paths(net, aom.id)):
            # upstream components sampled when this light passed them
            shifted = _Term(term.amplitude, term.total_delay,
                            [(cid, d) for cid, d in term.dynamic if cid != aom.id])
            fld += _term_amplitude(net, sched, shifted, tau_k, model)
        trans = np.asarray(aom_transmission(sched, aom.id, tau_k))
        out += (fld * fld.conj()).real * (1.0 - trans * trans)
    return out


def analytic_oracle(net: OpticalNetwork, static_aom_states: Mapping[str, float] | None = None) -> dict[str, float]:
    """Steady-state detector powers for fixed AOM transmissions.

    Propagates port fields through the network in topological order instead
    of summing enumerated paths, so it is an independent check on
    :func:`simulate`. Phase-shifter drift is ignored (its value at t = 0).
    """
    require_valid(net)
    states = dict(static_aom_states or {})
    for cid in states:
        if cid not in net or net[cid].kind != "aom":
            raise SimulationError(f"{cid!r} is not an AOM in this network")
    inputs: dict[tuple[str, int], complex] = {}
    result = {}
    for cid in topological_order(net):
        comp = net[cid]
        a = inputs.get((cid, 0), 0j)
        if comp.kind == "source":
            outs = {0: 1.0 + 0j}
        elif comp.kind == "beam_splitter":
            c, d = beam_splitter_scatter(a, inputs.get((cid, 1), 0j))
            outs = {0: c, 1: d}
        elif comp.kind == "mirror":
            outs = {0: a * MIRROR_FACTOR}
        elif comp.kind == "aom":
            outs = {0: a * states.get(cid, 1.0)}
        elif comp.kind == "delay_line":
            outs = {0: a * complex(math.cos(comp.params.get("phase", 0.0)), math.sin(comp.params.get("phase", 0.0)))}
        else:
            result[cid] = a.real ** 2 + a.imag ** 2
            continue
        for e in net.out_edges(cid):
            key = (e.dst, e.dst_port)
            inputs[key] = inputs.get(key, 0j) + outs.get(e.src_port, 0j)
    return result


def static_schedule(levels: Mapping[str, float], ramp_duration: float = 10e-9) -> SwitchingSchedule:
    """Schedule with no events that holds each AOM at a fixed transmission."""
    return SwitchingSchedule((), ramp_duration, dict(levels))


def warn_incoherent(packet1: WavePacket, packet2: WavePacket) -> bool:
    if not packet1.coherent_with(packet2):
        warnings.warn("wave packets differ in wavelength or coherence length; "
                      "treating them as mutually incoherent", stacklevel=3)
        return True
    return False


__all__ = [
    "DetectorTrace", "NetworkError", "PropagationModel", "SimParams", "SimulationError",
    "analytic_oracle", "check_schedule", "diverted_power", "simulate", "static_schedule",
]
