import math
import warnings

import pytest

from mzsim.engine import PropagationModel, SimParams

from mzsim.optics import C, SwitchingSchedule, WavePacket
from mzsim.scenarios import (
    Fig2Params,
    aom_to_detector_delay,
    check_packet_passed,
    run_fig2_scenario,
    run_fig4c_scenario,
    run_fig7_scenario,
    run_interference_scenario,
)

LOCAL, NONLOCAL = PropagationModel.LOCAL, PropagationModel.NONLOCAL


def test_aom_delay_is_arm_length_over_c(mzi):
    # 15 m arm: AOM at the start of the arm, plus the 1 mm standoff hops
    assert aom_to_detector_delay(mzi, "aom2", "det1") == pytest.approx(15.0 / C, rel=1e-3)


def test_fig7_discrimination_passes(mzi, fig7_schedule, fig7_params):
    res = run_fig7_scenario(mzi, fig7_schedule, fig7_params)
    assert [r.verdict for r in res.discrimination] == ["PASS", "PASS"]
    assert all(v < 1e-9 for v in res.energy_residual.values())
    assert res.onsets[LOCAL]["det1"].onset_time > res.onsets[NONLOCAL]["det1"].onset_time


def test_fig7_single_model_has_no_discrimination(mzi, fig7_schedule, fig7_params):
    res = run_fig7_scenario(mzi, fig7_schedule, fig7_params, models=("local",))
    assert res.discrimination == []
    assert set(res.traces) == {LOCAL}


def test_fig7_without_switching_is_inconclusive_free(mzi, fig7_params):
    res = run_fig7_scenario(mzi, SwitchingSchedule(), fig7_params)
    assert res.expected_delay is None
    assert all(o is None for m in res.onsets.values() for o in m.values())


def test_steady_interference_full_visibility(mzi):
    res = run_interference_scenario(mzi, SwitchingSchedule(), SimParams(0.0, 10e-9, 1e-9), n_phases=8)
    for m in (LOCAL, NONLOCAL):
        assert res.min_visibility[m] == pytest.approx(1.0, abs=1e-9)
        assert res.flatness[m] < 1e-12


def test_in_flight_window_keeps_visibility_only_locally(mzi, fig7_schedule):
    # samples before the retarded change time: light already past AOM2 still interferes
    res = run_interference_scenario(mzi, fig7_schedule, SimParams(-10e-9, 45e-9, 0.5e-9),
                                    window_end=45e-9, n_phases=8)
    assert res.min_visibility[LOCAL] > 0.99
    assert res.min_visibility[NONLOCAL] < 0.01


def test_fig2_local_vs_nonlocal():
    out = run_fig2_scenario()
    assert out[LOCAL].visibility.V > 0.99
    assert out[NONLOCAL].visibility.V < 0.01
    assert out[LOCAL].energies["det1"] == pytest.approx(1.0, abs=1e-6)
    assert out[LOCAL].energies["det2"] == pytest.approx(0.0, abs=1e-9)
    assert out[NONLOCAL].energies["det1"] == pytest.approx(0.25, abs=1e-6)
    assert out[NONLOCAL].energies["det2"] == pytest.approx(0.25, abs=1e-6)


def test_fig2_warns_when_packet_not_past():
    with pytest.warns(UserWarning, match="not fully past"):
        run_fig2_scenario(Fig2Params(pass_time=0.0), models=("local",))


def test_check_packet_passed_true_for_early_packet(mzi):
    sched = SwitchingSchedule.from_tuples([("aom2", "off", 0.0)])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert check_packet_passed(mzi, WavePacket(-1e-6, coherence_length=0.6), sched)


@pytest.mark.parametrize("shift, expected", [(0.0, 1.0), (1.0, math.exp(-1)), (10.0, 0.0)])
def test_fig4c_coherence_weight(shift, expected):
    p1 = WavePacket(-200e-9, coherence_length=3.0)
    p2 = WavePacket(-200e-9 + shift * p1.sigma_t, coherence_length=3.0)
    res = run_fig4c_scenario(p1, p2, SwitchingSchedule(), "local", n_phases=4)
    if shift < 10:
        assert abs(res.coherence_weight - expected) < 1e-9
    else:
        assert res.coherence_weight < 1e-6


def test_fig4c_without_packet2_matches_single_packet():
    p1 = WavePacket(-200e-9, coherence_length=3.0)
    a = run_fig4c_scenario(p1, None, SwitchingSchedule(), "local", n_phases=4)
    b = run_fig4c_scenario(p1, None, SwitchingSchedule(), "local", n_phases=4)
    assert a.coherence_weight is None
    assert a.visibility_packet2 is None
    assert a.visibility_combined == a.visibility_packet1
    for x, y in zip(a.traces, b.traces):
        assert x.powers.tobytes() == y.powers.tobytes()


def test_fig4c_mismatched_wavelengths_are_incoherent():
    p1 = WavePacket(-200e-9, wavelength=633e-9, coherence_length=3.0)
    p2 = WavePacket(-200e-9, wavelength=532e-9, coherence_length=3.0)
    with pytest.warns(UserWarning):
        res = run_fig4c_scenario(p1, p2, SwitchingSchedule(), "local", n_phases=4)
    assert res.coherence_weight == 0.0


def test_fig4c_overlapping_packets_add_coherently():
    # identical, overlapping packets: fields add, so peak power is four times one packet's
    p1 = WavePacket(0.0, coherence_length=3.0)
    window = (40e-9, 60e-9)
    one = run_fig4c_scenario(p1, None, SwitchingSchedule(), "local", window=window, dt=0.1e-9, n_phases=4)
    two = run_fig4c_scenario(p1, p1, SwitchingSchedule(), "local", window=window, dt=0.1e-9, n_phases=4)
    ratio = two.traces[0].powers.max() / one.traces[0].powers.max()
    assert ratio == pytest.approx(4.0, rel=1e-9)
