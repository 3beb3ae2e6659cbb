import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mzsim.analysis import detect_onset
from mzsim.engine import (
    PropagationModel,
    SimParams,
    SimulationError,
    analytic_oracle,
    diverted_power,
    simulate,
    static_schedule,
)
from mzsim.network import build_mzi, enumerate_paths
from mzsim.optics import C, SwitchingSchedule, WavePacket


def two_arm_powers(t1, t2, phase=0.0):
    """Hand-derived MZI port powers for AOM transmissions t1 (arm A), t2 (arm B)."""
    b = t2 * cmath.exp(1j * phase)
    return abs(-0.5j * t1 - 0.5j * b) ** 2, abs(-0.5 * t1 + 0.5 * b) ** 2


def within(x, tol):
    # sample times carry float round-off from t_start + k*dt
    return abs(x) <= tol * (1 + 1e-9)


def powers(traces):
    return {tr.detector_id: tr.powers for tr in traces}


def test_two_arm_formula_reference_values():
    assert two_arm_powers(1, 1) == pytest.approx((1.0, 0.0))
    assert two_arm_powers(1, 0) == pytest.approx((0.25, 0.25))
    assert two_arm_powers(1, 0.5) == pytest.approx((0.5625, 0.0625))


@pytest.mark.parametrize("levels, expected", [
    ({}, (1.0, 0.0)),
    ({"aom2": 0.0}, (0.25, 0.25)),
    ({"aom2": 0.5}, (0.5625, 0.0625)),
])
def test_analytic_oracle(mzi, levels, expected):
    out = analytic_oracle(mzi, levels)
    assert out["det1"] == pytest.approx(expected[0], abs=1e-12)
    assert out["det2"] == pytest.approx(expected[1], abs=1e-12)


@pytest.mark.parametrize("model", ["local", "nonlocal"])
def test_all_on_bright_and_dark(mzi, fig7_params, model):
    p = powers(simulate(mzi, SwitchingSchedule(), model, fig7_params))
    assert np.all(np.abs(p["det1"] - 1.0) < 1e-12)
    assert np.all(p["det2"] < 1e-12)


@pytest.mark.parametrize("model", ["local", "nonlocal"])
def test_steady_state_after_switch_off(mzi, fig7_schedule, model):
    p = powers(simulate(mzi, fig7_schedule, model, SimParams(80e-9, 120e-9)))
    assert np.all(np.abs(p["det1"] - 0.25) < 1e-12)
    assert np.all(np.abs(p["det2"] - 0.25) < 1e-12)


def test_nonlocal_onset_and_settle(mzi, fig7_schedule, fig7_params):
    tr = simulate(mzi, fig7_schedule, "nonlocal", fig7_params)[0]
    rep = detect_onset(tr)
    assert within(rep.onset_time - 0.0, fig7_params.dt)
    assert within(rep.settle_time - 10e-9, fig7_params.dt)


def test_local_onset_and_settle(mzi, fig7_schedule, fig7_params):
    tr = simulate(mzi, fig7_schedule, "local", fig7_params)[0]
    rep = detect_onset(tr)
    assert within(rep.onset_time - 15.0 / C, fig7_params.dt)
    assert within(rep.settle_time - (15.0 / C + 10e-9), fig7_params.dt)


def test_mid_ramp_sample_matches_oracle(mzi, fig7_schedule):
    # nonlocal at t = 5 ns: AOM2 transmission 0.5
    p = powers(simulate(mzi, fig7_schedule, "nonlocal", SimParams(5e-9, 6e-9, 1e-9)))
    assert p["det1"][0] == pytest.approx(0.5625, abs=1e-12)
    assert p["det2"][0] == pytest.approx(0.0625, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 2 * np.pi))
def test_simulate_matches_both_oracles(t1, t2, phase):
    net = build_mzi(arm_phase=phase)
    sched = static_schedule({"aom1": t1, "aom2": t2})
    ref = analytic_oracle(net, {"aom1": t1, "aom2": t2})
    hand = two_arm_powers(t1, t2, phase)
    for model in ("local", "nonlocal"):
        p = powers(simulate(net, sched, model, SimParams(0.0, 5e-9, 1e-9)))
        for det, h in zip(("det1", "det2"), hand):
            assert np.all(np.abs(p[det] - ref[det]) < 1e-6)
            assert ref[det] == pytest.approx(h, abs=1e-12)


@pytest.mark.parametrize("model", ["local", "nonlocal"])
def test_energy_accounting(mzi, fig7_schedule, fig7_params, model):
    tr = simulate(mzi, fig7_schedule, model, fig7_params)
    total = tr[0].powers + tr[1].powers + diverted_power(mzi, fig7_schedule, model, fig7_params)
    assert np.max(np.abs(total - 1.0)) < 1e-9


def test_energy_accounting_with_drift_and_both_aoms():
    net = build_mzi(arm_phase=0.4, drift_amplitude=1.0, drift_period=40e-9, fiber=True)
    sched = SwitchingSchedule.from_tuples([("aom1", "off", 5e-9), ("aom2", "off", 0.0), ("aom2", "on", 30e-9)])
    params = SimParams(-10e-9, 120e-9, 0.5e-9)
    for model in ("local", "nonlocal"):
        tr = simulate(net, sched, model, params)
        total = sum(t.powers for t in tr) + diverted_power(net, sched, model, params)
        assert np.max(np.abs(total - 1.0)) < 1e-9


def test_timing_shift_theorem(mzi, fig7_schedule, fig7_params):
    delay = enumerate_paths(mzi, "det1", start="aom2")[0].total_delay
    local = simulate(mzi, fig7_schedule, "local", fig7_params)
    shifted = SimParams(fig7_params.t_start - delay, fig7_params.t_end - delay, fig7_params.dt)
    nonlocal_shifted = simulate(mzi, fig7_schedule, "nonlocal", shifted)
    for a, b in zip(local, nonlocal_shifted):
        assert np.max(np.abs(a.powers - b.powers)) < 1e-9
    # and by whole samples, onsets agree within one step
    k = round(delay / fig7_params.dt)
    nl = simulate(mzi, fig7_schedule, "nonlocal", fig7_params)[0]
    on_l = detect_onset(local[0]).onset_index
    on_n = detect_onset(nl).onset_index
    assert abs(on_l - (on_n + k)) <= 1


def test_deterministic(mzi, fig7_schedule, fig7_params):
    a = simulate(mzi, fig7_schedule, "local", fig7_params)
    b = simulate(mzi, fig7_schedule, "local", fig7_params)
    for x, y in zip(a, b):
        assert x.powers.tobytes() == y.powers.tobytes()
        assert x.times.tobytes() == y.times.tobytes()


@pytest.mark.parametrize("model", ["local", "nonlocal"])
def test_dt_refinement(mzi, fig7_schedule, model):
    dt = 0.5e-9
    coarse = detect_onset(simulate(mzi, fig7_schedule, model, SimParams(-20e-9, 100e-9, dt))[0])
    fine = detect_onset(simulate(mzi, fig7_schedule, model, SimParams(-20e-9, 100e-9, dt / 2))[0],
                        baseline_window=10e-9)
    assert within(coarse.onset_time - fine.onset_time, dt)


def test_traces_are_read_only(mzi, fig7_params):
    tr = simulate(mzi, SwitchingSchedule(), "local", fig7_params)[0]
    with pytest.raises(ValueError):
        tr.powers[0] = 2.0


def test_schedule_on_non_aom_rejected(mzi, fig7_params):
    sched = SwitchingSchedule.from_tuples([("mirror_a", "off", 0.0)])
    with pytest.raises(SimulationError):
        simulate(mzi, sched, "local", fig7_params)


def test_sample_guard():
    with pytest.raises(SimulationError):
        SimParams(0.0, 1.0, 1e-9)


def test_unknown_model(mzi, fig7_params):
    with pytest.raises(SimulationError):
        simulate(mzi, SwitchingSchedule(), "retrocausal", fig7_params)


def test_model_enum_accepted(mzi, fig7_params):
    a = simulate(mzi, SwitchingSchedule(), PropagationModel.LOCAL, fig7_params)
    b = simulate(mzi, SwitchingSchedule(), "local", fig7_params)
    assert np.array_equal(a[0].powers, b[0].powers)


# -- pulsed mode -------------------------------------------------------------------


def test_single_packet_all_on(mzi):
    pk = WavePacket(0.0, coherence_length=3.0, peak_amp=0.8)
    arrival = 15.0 / C
    params = SimParams(arrival - 20e-9, arrival + 20e-9, 0.1e-9, "pulsed", (pk,))
    p = powers(simulate(mzi, SwitchingSchedule(), "local", params))
    assert p["det1"].max() == pytest.approx(0.64, rel=1e-3)
    assert p["det2"].max() < 1e-12


def test_incoherent_packets_add_in_power(mzi):
    p1 = WavePacket(0.0, wavelength=633e-9, coherence_length=3.0)
    p2 = WavePacket(0.0, wavelength=532e-9, coherence_length=3.0)
    window = (40e-9, 60e-9, 0.2e-9)
    sched = static_schedule({"aom2": 0.0})
    both = powers(simulate(mzi, sched, "local", SimParams(*window, "pulsed", (p1, p2))))
    one = powers(simulate(mzi, sched, "local", SimParams(*window, "pulsed", (p1,))))
    two = powers(simulate(mzi, sched, "local", SimParams(*window, "pulsed", (p2,))))
    assert np.allclose(both["det1"], one["det1"] + two["det1"], atol=1e-15)


def test_unbalanced_arms_lose_visibility():
    # a 1 m imbalance with 1 m coherence length: arm cross term weighted by e^-1
    net = build_mzi(15.0, balanced=False, imbalance=1.0)
    pk = WavePacket(0.0, coherence_length=1.0)
    assert abs(pk.sigma_t - 1.0 / C) < 1e-20
    params = SimParams(0.0, 100e-9, 0.05e-9, "pulsed", (pk,))
    p = powers(simulate(net, SwitchingSchedule(), "local", params))
    e1, e2 = p["det1"].sum(), p["det2"].sum()
    assert e1 > e2 > 0


def test_pulsed_requires_packets():
    with pytest.raises(SimulationError):
        SimParams(0.0, 1e-9, source_mode="pulsed")
