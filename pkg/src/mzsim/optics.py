"""Elementary optical maths: beam splitters, AOM ramps, packet envelopes.

Field amplitudes are plain Python/numpy complex numbers, normalized so that
``power(a) = |a|**2`` is a fraction of the source power.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

C = 2.99792458e8  # m/s
SQRT_HALF = 1.0 / math.sqrt(2.0)
DEFAULT_RAMP = 10e-9  # s

# Lossless symmetric 50/50 splitter; rows are output ports (c, d), columns input ports (a, b).
BS_MATRIX = np.array([[1.0, 1j], [1j, 1.0]]) * SQRT_HALF
MIRROR_FACTOR = -1.0 + 0.0j


class NumericalDomainError(ValueError):
    """Raised for non-finite or otherwise out-of-domain numeric input."""


class ScheduleError(ValueError):
    """Raised when a switching schedule is malformed."""


def power(a: complex) -> float:
    return a.real * a.real + a.imag * a.imag


def beam_splitter_scatter(in_a: complex, in_b: complex) -> tuple[complex, complex]:
    """Combine two input fields on a lossless 50/50 splitter.

    Returns ``((a + i b)/sqrt2, (i a + b)/sqrt2)``.
    """
    in_a, in_b = complex(in_a), complex(in_b)
    if not (cmath.isfinite(in_a) and cmath.isfinite(in_b)):
        raise NumericalDomainError(f"non-finite beam splitter input: {in_a!r}, {in_b!r}")
    return (in_a + 1j * in_b) * SQRT_HALF, (1j * in_a + in_b) * SQRT_HALF


def beam_splitter_factor(in_port: int, out_port: int) -> complex:
    return complex(BS_MATRIX[out_port, in_port])


@dataclass(frozen=True)
class WavePacket:
    """Gaussian wave packet emitted by the source.

    ``t_emit`` is the envelope centre at the source; the temporal width is
    ``L_c / c``.
    """

    t_emit: float = 0.0
    wavelength: float = 633e-9
    coherence_length: float = 50.0
    peak_amp: float = 1.0

    def __post_init__(self):
        if not self.wavelength > 0:
            raise NumericalDomainError("wavelength must be > 0")
        if not self.coherence_length > 0:
            raise NumericalDomainError("coherence_length must be > 0")
        if not self.peak_amp >= 0:
            raise NumericalDomainError("peak_amp must be >= 0")
        if not math.isfinite(self.t_emit):
            raise NumericalDomainError("t_emit must be finite")

    @property
    def sigma_t(self) -> float:
        return self.coherence_length / C

    def coherent_with(self, other: "WavePacket") -> bool:
        return self.wavelength == other.wavelength and self.coherence_length == other.coherence_length


def coherence_factor(delta, packet: WavePacket):
    """Degree of mutual coherence for a relative delay ``delta`` (seconds).

    ``exp(-(delta / (L_c/c))**2)``; works elementwise on arrays.
    """
    x = np.asarray(delta, dtype=float) / packet.sigma_t
    out = np.exp(-x * x)
    return float(out) if out.ndim == 0 else out


def packet_envelope(t, packet: WavePacket, arrival_offset: float = 0.0):
    """Field envelope of ``packet`` at time ``t`` after a flight of ``arrival_offset``."""
    u = (np.asarray(t, dtype=float) - packet.t_emit - arrival_offset) / packet.sigma_t
    out = packet.peak_amp * np.exp(-0.5 * u * u)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SwitchEvent:
    component_id: str
    on: bool
    time: float


@dataclass(frozen=True)
class SwitchingSchedule:
    """Timed AOM switching events sharing one linear ramp duration.

    ``initial`` maps AOM ids to their amplitude transmission before the first
    event (default 1.0, fully on). Each event ramps linearly from the level
    reached so far to 1.0 (on) or 0.0 (off) over ``ramp_duration``.
    """

    events: tuple[SwitchEvent, ...] = ()
    ramp_duration: float = DEFAULT_RAMP
    initial: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        self.validate()

    @classmethod
    def from_tuples(cls, events: Iterable[tuple[str, bool | str, float]],
                    ramp_duration: float = DEFAULT_RAMP, initial=None) -> "SwitchingSchedule":
        evs = []
        for cid, state, t in events:
            if isinstance(state, str):
                if state not in ("on", "off"):
                    raise ScheduleError(f"event state must be 'on' or 'off', got {state!r}")
                state = state == "on"
            evs.append(SwitchEvent(cid, bool(state), float(t)))
        return cls(tuple(evs), ramp_duration, dict(initial or {}))

    def validate(self) -> None:
        if not (math.isfinite(self.ramp_duration) and self.ramp_duration > 0):
            raise ScheduleError("ramp_duration must be > 0")
        for cid, level in self.initial.items():
            if not 0.0 <= level <= 1.0:
                raise ScheduleError(f"initial transmission of {cid} outside [0, 1]: {level}")
        for cid in self.component_ids:
            times = [e.time for e in self.events_for(cid)]
            for t0, t1 in zip(times, times[1:]):
                if t1 < t0:
                    raise ScheduleError(f"events for {cid} are not time-ordered")
                if t1 - t0 < self.ramp_duration * (1 - 1e-12):
                    raise ScheduleError(
                        f"events for {cid} at {t0:g} s and {t1:g} s overlap the {self.ramp_duration:g} s ramp")
            if any(not math.isfinite(t) for t in times):
                raise ScheduleError(f"non-finite event time for {cid}")

    @property
    def component_ids(self) -> list[str]:
        seen = dict.fromkeys(e.component_id for e in self.events)
        seen.update(dict.fromkeys(self.initial))
        return list(seen)

    def events_for(self, component_id: str) -> list[SwitchEvent]:
        return [e for e in self.events if e.component_id == component_id]

    def transmission(self, component_id: str, t):
        return aom_transmission(self, component_id, t)


def aom_transmission(schedule: SwitchingSchedule, component_id: str, t):
    """Zero-order amplitude transmission of an AOM at time(s) ``t``.

    Piecewise linear: constant between events, linear over each ramp. Power
    not transmitted leaves the network in the first-order beam.
    """
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)):
        raise NumericalDomainError("query time must be finite")
    level = schedule.initial.get(component_id, 1.0)
    out = np.full(t_arr.shape, level, dtype=float)
    ramp = schedule.ramp_duration
    for ev in schedule.events_for(component_id):
        target = 1.0 if ev.on else 0.0
        frac = np.clip((t_arr - ev.time) / ramp, 0.0, 1.0)
        active = t_arr >= ev.time
        out = np.where(active, level + (target - level) * frac, out)
        level = target
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out
