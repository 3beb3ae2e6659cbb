import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mzsim.optics import (
    C,
    NumericalDomainError,
    ScheduleError,
    SwitchingSchedule,
    WavePacket,
    aom_transmission,
    beam_splitter_scatter,
    coherence_factor,
    packet_envelope,
    power,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)
amps = st.builds(complex, finite, finite)


def matrix_oracle(a, b):
    # independent restatement of the (1, i; i, 1)/sqrt2 convention
    m = np.array([[1, 1j], [1j, 1]]) / np.sqrt(2)
    return m @ np.array([a, b])


def test_single_port_input_splits_equally():
    c, d = beam_splitter_scatter(1, 0)
    assert c == pytest.approx(1 / math.sqrt(2))
    assert d == pytest.approx(1j / math.sqrt(2))


def test_balanced_constructive_port():
    a, b = 1 / math.sqrt(2), 1j / math.sqrt(2)
    expected = matrix_oracle(a, b)
    assert np.allclose(expected, [0, 1j])
    c, d = beam_splitter_scatter(a, b)
    assert abs(c - expected[0]) < 1e-15 and abs(d - expected[1]) < 1e-15


def test_zero_input():
    assert beam_splitter_scatter(0, 0) == (0, 0)


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), complex(0, float("-inf"))])
def test_non_finite_rejected(bad):
    with pytest.raises(NumericalDomainError):
        beam_splitter_scatter(bad, 0)


@given(amps, amps)
def test_unitarity(a, b):
    c, d = beam_splitter_scatter(a, b)
    p_in = power(a) + power(b)
    assert abs(power(c) + power(d) - p_in) <= 1e-12 * max(p_in, 1e-300)


@given(amps, amps)
def test_matches_matrix_oracle(a, b):
    c, d = beam_splitter_scatter(a, b)
    ref = matrix_oracle(a, b)
    scale = max(abs(a), abs(b), 1.0)
    assert abs(c - ref[0]) <= 1e-12 * scale and abs(d - ref[1]) <= 1e-12 * scale


def test_double_pass_crosses_over():
    c, d = beam_splitter_scatter(*beam_splitter_scatter(1, 0))
    assert abs(c) < 1e-15
    assert abs(d - 1j) < 1e-15


# -- AOM ramps -----------------------------------------------------------------


def test_static_on():
    assert aom_transmission(SwitchingSchedule(), "aom2", 25e-9) == 1.0


def test_mid_ramp_is_half():
    s = SwitchingSchedule.from_tuples([("aom2", "off", 0.0)], 10e-9)
    assert aom_transmission(s, "aom2", 5e-9) == pytest.approx(0.5, abs=1e-12)


def test_fully_off_after_ramp():
    s = SwitchingSchedule.from_tuples([("aom2", "off", 0.0)], 10e-9)
    assert aom_transmission(s, "aom2", 30e-9) == 0.0
    assert aom_transmission(s, "aom2", -1e-9) == 1.0


def test_off_then_on():
    s = SwitchingSchedule.from_tuples([("aom1", "off", 0.0), ("aom1", "on", 40e-9)], 10e-9)
    ts = np.array([-1, 5, 20, 45, 60]) * 1e-9
    assert np.allclose(aom_transmission(s, "aom1", ts), [1, 0.5, 0, 0.5, 1])


def test_ramp_from_partial_initial_level():
    s = SwitchingSchedule.from_tuples([("aom1", "off", 0.0)], 10e-9, initial={"aom1": 0.4})
    assert aom_transmission(s, "aom1", 5e-9) == pytest.approx(0.2)


def test_overlapping_ramps_rejected():
    with pytest.raises(ScheduleError):
        SwitchingSchedule.from_tuples([("aom2", "off", 0.0), ("aom2", "on", 5e-9)], 10e-9)


def test_unordered_events_rejected():
    with pytest.raises(ScheduleError):
        SwitchingSchedule.from_tuples([("aom2", "off", 50e-9), ("aom2", "on", 0.0)], 10e-9)


def test_nonpositive_ramp_rejected():
    with pytest.raises(ScheduleError):
        SwitchingSchedule(ramp_duration=0.0)


event_times = st.lists(st.floats(-1e-6, 1e-6), min_size=0, max_size=5).map(sorted)


@st.composite
def schedules(draw):
    ramp = draw(st.floats(1e-10, 5e-8))
    times, t = [], draw(st.floats(-1e-6, 0))
    for _ in range(draw(st.integers(0, 5))):
        times.append(t)
        t += ramp + draw(st.floats(0, 1e-7))
    states = draw(st.lists(st.booleans(), min_size=len(times), max_size=len(times)))
    init = draw(st.floats(0, 1))
    return SwitchingSchedule.from_tuples([("a", s, t) for s, t in zip(states, times)], ramp, {"a": init})


@given(schedules(), st.floats(-2e-6, 2e-6), st.floats(0, 1e-9))
def test_transmission_bounded_and_continuous(sched, t, dt):
    t0, t1 = aom_transmission(sched, "a", t), aom_transmission(sched, "a", t + dt)
    assert 0.0 <= t0 <= 1.0
    # piecewise linear with slope at most 1/ramp
    assert abs(t1 - t0) <= dt / sched.ramp_duration + 1e-9


# -- packets and coherence ---------------------------------------------------------


def test_packet_width_from_coherence_length():
    p = WavePacket(coherence_length=50.0)
    assert p.sigma_t == 50.0 / C


def test_coherence_factor_values():
    p = WavePacket(coherence_length=50.0)
    assert coherence_factor(0.0, p) == 1.0
    assert coherence_factor(p.sigma_t, p) == pytest.approx(math.exp(-1), abs=1e-15)
    assert coherence_factor(10 * p.sigma_t, p) < 1e-43


@given(st.floats(-1e-6, 1e-6), st.floats(0.01, 100))
def test_coherence_symmetric(delta, lc):
    p = WavePacket(coherence_length=lc)
    assert coherence_factor(delta, p) == coherence_factor(-delta, p)


@given(st.floats(0, 1e-6), st.floats(0, 1e-6), st.floats(0.01, 100))
def test_coherence_monotone(d1, d2, lc):
    p = WavePacket(coherence_length=lc)
    lo, hi = sorted((d1, d2))
    assert coherence_factor(hi, p) <= coherence_factor(lo, p)


def test_envelope():
    p = WavePacket(t_emit=1e-9, coherence_length=3.0, peak_amp=0.7)
    assert packet_envelope(1e-9 + 2e-9, p, 2e-9) == pytest.approx(0.7)
    assert packet_envelope(3e-9 + p.sigma_t, p, 2e-9) == pytest.approx(0.7 * math.exp(-0.5), rel=1e-12)
    null = WavePacket(peak_amp=0.0)
    assert np.all(packet_envelope(np.linspace(-1e-6, 1e-6, 11), null) == 0)


@pytest.mark.parametrize("kw", [{"wavelength": 0}, {"coherence_length": -1}, {"peak_amp": -0.1}])
def test_invalid_packets(kw):
    with pytest.raises(NumericalDomainError):
        WavePacket(**kw)
