"""Command-line scenario runner.

    mzsim run --scenario fig7 --model both --out out/
    mzsim run --scenario doubleslit_sweep --diffraction.distances "[0.005, 3.0]"
    mzsim run --scenario fig2 --dump-config > fig2.toml

Any ``--section.key=value`` flag overrides the matching config key.
Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from typing import Mapping, Sequence

import numpy as np

from . import config as cfgmod
from .analysis import VisibilityReport
from .config import ConfigError, ScenarioConfig
from .diffraction import DiffractionError, RegimeThresholds, SlitGeometry
from .engine import SimParams, SimulationError, check_schedule, simulate
from .network import NetworkError, OpticalNetwork, build_mzi
from .optics import NumericalDomainError, ScheduleError, SwitchingSchedule, WavePacket
from . import scenarios

log = logging.getLogger("mzsim")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
SIG_DIGITS = 9


class OutputError(RuntimeError):
    pass


def emit_csv(columns: Mapping[str, Sequence[float]], path: str) -> str:
    """Write equal-length numeric columns as CSV with a header row.

    Values carry 9 significant digits, so identical inputs give identical bytes.
    """
    if not columns:
        raise OutputError("no columns to write")
    lengths = {len(v) for v in columns.values()}
    if len(lengths) != 1 or 0 in lengths:
        raise OutputError("series must be non-empty and of equal length")
    rows = zip(*columns.values())
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(columns))
            for row in rows:
                writer.writerow([f"{float(v):.{SIG_DIGITS}g}" for v in row])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def trace_columns(traces) -> dict[str, np.ndarray]:
    cols = {"time_s": traces[0].times}
    for tr in traces:
        cols[f"power_{tr.detector_id}"] = tr.powers
    return cols


def profile_columns(profile) -> dict[str, np.ndarray]:
    peak = float(profile.intensity.max())
    return {"x_m": profile.xs, "intensity_rel": profile.intensity / peak if peak > 0 else profile.intensity}


def _ns(t: float | None) -> str:
    return "none" if t is None else f"{t * 1e9:.3f} ns"


def _interference_word(v: float, cutoff: float) -> str:
    if v >= 1.0 - cutoff:
        return "Interference appears"
    if v < cutoff:
        return "Interference disappears"
    return "Partial interference"


# -- building domain objects from the config (failures are configuration errors) --


def build_network(cfg: ScenarioConfig) -> OpticalNetwork:
    n = cfg.network
    return build_mzi(n.arm_length, tuple(n.aom_positions), n.balanced, n.imbalance, n.standoff,
                     n.arm_phase, n.drift_amplitude, n.drift_period, n.fiber)


def build_schedule(cfg: ScenarioConfig) -> SwitchingSchedule:
    s = cfg.schedule
    sched = SwitchingSchedule.from_tuples([(e["component"], e["state"], float(e["time"])) for e in s.events],
                                          s.ramp_duration, s.initial)
    try:
        check_schedule(build_network(cfg), sched)
    except SimulationError as exc:
        raise ConfigError(str(exc)) from exc
    return sched


def build_packets(cfg: ScenarioConfig) -> tuple[WavePacket, ...]:
    n = cfg.network
    return tuple(WavePacket(t, n.wavelength, n.coherence_length, cfg.sim.packet_peak) for t in cfg.sim.packet_times)


def build_params(cfg: ScenarioConfig) -> SimParams:
    s = cfg.sim
    packets = build_packets(cfg) if s.source_mode == "pulsed" else ()
    return SimParams(s.t_start, s.t_end, s.dt, s.source_mode, packets)


def build_geometry(cfg: ScenarioConfig, slits=None) -> SlitGeometry:
    d = cfg.diffraction
    return SlitGeometry(d.d, d.a, d.wavelength, frozenset(slits if slits is not None else d.open_before))


# -- scenario runners: each returns (csv files, summary lines) --------------------


def _run_fig7(cfg):
    net, sched, params = build_network(cfg), build_schedule(cfg), build_params(cfg)
    if params.source_mode != "continuous":
        return _run_pulsed_custom(cfg, net, sched, params)
    res = scenarios.run_fig7_scenario(net, sched, params, cfg.models, cfg.analysis.threshold)
    files, lines = {}, [f"scenario {cfg.scenario}: dt = {params.dt * 1e9:g} ns"]
    if res.expected_delay is not None:
        lines.append(f"switched AOM to detector delay: {_ns(res.expected_delay)}")
    for m, traces in res.traces.items():
        files[f"{cfg.scenario}_{m}.csv"] = trace_columns(traces)
        for det, rep in res.onsets[m].items():
            if rep is None:
                lines.append(f"[{m}] {det}: no transient")
            else:
                lines.append(f"[{m}] {det}: onset {_ns(rep.onset_time)}, settle {_ns(rep.settle_time)}")
        lines.append(f"[{m}] max energy residual: {res.energy_residual[m]:.3e}")
    for rep in res.discrimination:
        lines.append("discrimination " + rep.summary())
    return files, lines


def _run_pulsed_custom(cfg, net, sched, params):
    files, lines = {}, [f"scenario {cfg.scenario}: pulsed source, {len(params.packets)} packet(s)"]
    for m in cfg.models:
        traces = simulate(net, sched, m, params)
        files[f"{cfg.scenario}_{m}.csv"] = trace_columns(traces)
        for tr in traces:
            lines.append(f"[{m}] {tr.detector_id}: peak power {float(tr.powers.max()):.6g}")
    return files, lines


def _run_fig4ab(cfg):
    net, sched, params = build_network(cfg), build_schedule(cfg), build_params(cfg)
    window_end = None
    switched = scenarios.first_switched_aom(sched)
    if switched is not None:
        # only light already past the switched AOM
        window_end = switched[1] + scenarios.aom_to_detector_delay(net, switched[0])
    res = scenarios.run_interference_scenario(net, sched, params, cfg.models, window_end, cfg.sim.n_phases)
    files = {f"{cfg.scenario}_{m}.csv": trace_columns(tr) for m, tr in res.traces.items()}
    lines = [f"scenario {cfg.scenario}: window {_ns(res.window[0])} .. {_ns(res.window[1])}"]
    for m in res.traces:
        v = res.min_visibility[m]
        lines.append(f"[{m}] minimum visibility {v:.6f}, det1 peak-to-peak {res.flatness[m]:.3e}: "
                     f"{_interference_word(v, cfg.analysis.visibility_cutoff)}")
    return files, lines


def _vis_line(label: str, rep: VisibilityReport | None, cutoff: float) -> str:
    if rep is None:
        return f"{label}: n/a"
    return f"{label}: V = {rep.V:.6f} ({_interference_word(rep.V, cutoff)})"


def _run_fig2(cfg):
    net, sched = build_network(cfg), build_schedule(cfg)
    if not cfg.sim.packet_times:
        raise ConfigError("fig2 needs one entry in sim.packet_times")
    switched = [e.component_id for e in sched.events] or ["aom2"]
    t_aom = min(scenarios.source_to_component_delay(net, a) for a in switched)
    n = cfg.network
    params = scenarios.Fig2Params(n.arm_length, n.wavelength, n.coherence_length,
                                  cfg.sim.packet_times[0] + t_aom, dt=cfg.sim.dt, n_phases=cfg.sim.n_phases)
    res = scenarios.run_fig2_scenario(params, cfg.models, net, sched)
    files, lines = {}, ["scenario fig2: short packet past the AOMs before switch-off"]
    for m, r in res.items():
        files[f"fig2_{m}.csv"] = trace_columns(r.traces)
        energies = ", ".join(f"{k} {v:.6f}" for k, v in r.energies.items())
        lines.append(f"[{m}] pulse energy fractions: {energies}")
        lines.append(_vis_line(f"[{m}] visibility", r.visibility, cfg.analysis.visibility_cutoff))
    return files, lines


def _run_fig4c(cfg):
    net, sched = build_network(cfg), build_schedule(cfg)
    packets = build_packets(cfg)
    if not 1 <= len(packets) <= 2:
        raise ConfigError("fig4c needs one or two entries in sim.packet_times")
    p2 = packets[1] if len(packets) == 2 else None
    files, lines = {}, ["scenario fig4c: overlapping packets at BS2"]
    for m in cfg.models:
        r = scenarios.run_fig4c_scenario(packets[0], p2, sched, m, net, cfg.sim.dt, cfg.sim.n_phases,
                                         (cfg.sim.t_start, cfg.sim.t_end))
        files[f"fig4c_{m}.csv"] = trace_columns(r.traces)
        if r.coherence_weight is not None:
            lines.append(f"[{m}] interference-term weight: {r.coherence_weight:.9f}")
        cut = cfg.analysis.visibility_cutoff
        lines.append(_vis_line(f"[{m}] packet 1 visibility", r.visibility_packet1, cut))
        lines.append(_vis_line(f"[{m}] packet 2 visibility", r.visibility_packet2, cut))
        lines.append(_vis_line(f"[{m}] combined visibility", r.visibility_combined, cut))
    return files, lines


def _thresholds(cfg) -> RegimeThresholds:
    d = cfg.diffraction
    return RegimeThresholds(d.lobe_level, d.separation_tol, d.fringe_floor, d.min_fringes, d.spacing_tol)


def _run_sweep(cfg):
    geom = build_geometry(cfg)
    if geom.open_slits != {1, 2}:
        raise ConfigError("doubleslit_sweep classifies two-slit profiles; open_before must be [1, 2]")
    d = cfg.diffraction
    entries = scenarios.run_doubleslit_sweep(geom, d.distances, d.grid_points, _thresholds(cfg), d.min_nodes)
    files, lines = {}, [f"scenario doubleslit_sweep: lambda {geom.wavelength:g} m, d {geom.d:g} m, a {geom.a:g} m"]
    for e in entries:
        files[f"doubleslit_z{e.z:g}m.csv"] = profile_columns(e.profile)
        spacing = "n/a" if e.spacing is None else f"{e.spacing * 1e3:.4f} mm"
        lobes = ", ".join(f"{x * 1e3:.4f}" for x in e.regime.lobe_positions)
        lines.append(f"z = {e.z:g} m: {e.regime.regime} ({e.regime.n_lobes} bright lobes [{lobes}] mm, "
                     f"{e.regime.n_maxima} maxima, spacing {spacing}, lambda z/d {e.expected_spacing * 1e3:.4f} mm, "
                     f"{e.profile.nodes} nodes, convergence {e.profile.convergence:.1e})")
    return files, lines


def _run_slit_transient(cfg):
    d = cfg.diffraction
    geom = build_geometry(cfg)
    after = frozenset(d.open_after)
    if after == geom.open_slits:
        raise ConfigError("open_after must differ from open_before")
    times = build_params(cfg).times
    res = scenarios.run_doubleslit_transient(geom, d.z_transient, d.t_switch, times, after, cfg.models,
                                             d.grid_points)
    files = {"doubleslit_before.csv": profile_columns(res.before),
             "doubleslit_after.csv": profile_columns(res.after)}
    lines = [f"scenario doubleslit_transient: slits {sorted(geom.open_slits)} -> {sorted(after)} "
             f"at {_ns(d.t_switch)}, z = {d.z_transient:g} m"]
    for m, t in res.change_time.items():
        lines.append(f"[{m}] pattern changes at {_ns(t)} (front arrival {_ns(res.expected[m])})")
    return files, lines


RUNNERS = {
    "fig7": _run_fig7, "custom": _run_fig7, "fig4a": _run_fig4ab, "fig4b": _run_fig4ab,
    "fig2": _run_fig2, "fig4c": _run_fig4c,
    "doubleslit_sweep": _run_sweep, "doubleslit_transient": _run_slit_transient,
}

_CONFIG_ERRORS = (ConfigError, NetworkError, ScheduleError, NumericalDomainError, DiffractionError)


def run(cfg: ScenarioConfig) -> tuple[dict[str, dict], list[str]]:
    return RUNNERS[cfg.scenario](cfg)


def write_outputs(cfg: ScenarioConfig, files: Mapping[str, Mapping], lines: Sequence[str]) -> list[str]:
    out = cfg.output.dir
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out}: {exc}") from exc
    written = [emit_csv(cols, os.path.join(out, name)) for name, cols in files.items()]
    summary = os.path.join(out, f"{cfg.scenario}_summary.txt")
    try:
        with open(summary, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {summary}: {exc}") from exc
    return written + [summary]


def _split_overrides(extra: list[str]) -> dict[str, object]:
    pairs, i = {}, 0
    while i < len(extra):
        arg = extra[i]
        if not arg.startswith("--") or "." not in arg.split("=", 1)[0]:
            raise ConfigError(f"unrecognized argument {arg!r}")
        key = arg[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"missing value for --{key}")
            i += 1
            value = extra[i]
        pairs[key] = cfgmod.parse_value(value)
        i += 1
    return pairs


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mzsim", description="Transient interferometer and double-slit scenarios")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a named scenario")
    run_p.add_argument("--scenario", help=f"one of: {', '.join(cfgmod.SCENARIOS)}")
    run_p.add_argument("--model", choices=cfgmod.MODELS)
    run_p.add_argument("--config", help="TOML config file")
    run_p.add_argument("--out", help="output directory (output.dir)")
    run_p.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    run_p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    try:
        overrides = _split_overrides(extra)
        if args.model:
            overrides["model"] = args.model
        if args.out:
            overrides["output.dir"] = args.out
        cfg = cfgmod.load(args.scenario, args.config, overrides)
    except ConfigError as exc:
        print(f"mzsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.dump_config:
        sys.stdout.write(cfgmod.dumps(cfg))
        return EXIT_OK

    try:
        files, lines = run(cfg)
    except _CONFIG_ERRORS as exc:
        print(f"mzsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, ValueError, RuntimeError) as exc:
        print(f"mzsim: simulation error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    try:
        written = write_outputs(cfg, files, lines)
    except OutputError as exc:
        print(f"mzsim: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print("\n".join(lines))
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
