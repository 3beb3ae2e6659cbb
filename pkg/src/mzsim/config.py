"""Scenario configuration: TOML sections, presets, and dotted overrides.

Resolution order is preset defaults for the scenario, then the config file,
then ``--section.key=value`` flags.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

SCENARIOS = ("fig2", "fig4a", "fig4b", "fig4c", "fig7", "doubleslit_sweep", "doubleslit_transient", "custom")
MODELS = ("local", "nonlocal", "both")


class ConfigError(ValueError):
    pass


@dataclass
class NetworkConfig:
    arm_length: float = 15.0
    aom_positions: list[float] = field(default_factory=lambda: [0.0, 0.0])
    balanced: bool = True
    imbalance: float = 0.0
    standoff: float = 1e-3
    arm_phase: float = 0.0
    drift_amplitude: float = 0.0
    drift_period: float = 1.0
    fiber: bool = False
    wavelength: float = 633e-9
    coherence_length: float = 50.0


@dataclass
class ScheduleConfig:
    ramp_duration: float = 10e-9
    # each event: {component = "aom2", state = "off", time = 0.0}
    events: list[dict] = field(default_factory=list)
    initial: dict[str, float] = field(default_factory=dict)


@dataclass
class SimConfig:
    t_start: float = -20e-9
    t_end: float = 100e-9
    dt: float = 0.5e-9
    source_mode: str = "continuous"
    packet_times: list[float] = field(default_factory=list)  # emission times, pulsed mode
    packet_peak: float = 1.0
    n_phases: int = 16


@dataclass
class DiffractionConfig:
    wavelength: float = 633e-9
    d: float = 0.6e-3
    a: float = 0.1e-3
    distances: list[float] = field(default_factory=lambda: [5e-3, 0.3, 3.0])
    grid_points: int = 2001
    min_nodes: int = 2001
    z_transient: float = 3.0
    t_switch: float = 0.0
    open_before: list[int] = field(default_factory=lambda: [1, 2])
    open_after: list[int] = field(default_factory=lambda: [1])
    lobe_level: float = 0.5
    separation_tol: float = 0.2
    fringe_floor: float = 0.1
    min_fringes: int = 5
    spacing_tol: float = 0.1


@dataclass
class AnalysisConfig:
    threshold: float = 0.01
    visibility_cutoff: float = 0.01


@dataclass
class OutputConfig:
    dir: str = "out"


@dataclass
class ScenarioConfig:
    scenario: str = "fig7"
    model: str = "both"
    network: NetworkConfig = field(default_factory=NetworkConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    diffraction: DiffractionConfig = field(default_factory=DiffractionConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def models(self) -> tuple[str, ...]:
        return ("local", "nonlocal") if self.model == "both" else (self.model,)


SECTIONS = {f.name: f.type for f in fields(ScenarioConfig) if f.name not in ("scenario", "model")}
_SECTION_CLASSES = {
    "network": NetworkConfig, "schedule": ScheduleConfig, "sim": SimConfig,
    "diffraction": DiffractionConfig, "analysis": AnalysisConfig, "output": OutputConfig,
}

_FLOAT_LISTS = {"network.aom_positions", "sim.packet_times", "diffraction.distances"}

_AOM2_OFF = [{"component": "aom2", "state": "off", "time": 0.0}]

PRESETS: dict[str, dict[str, Any]] = {
    "fig7": {"schedule": {"events": _AOM2_OFF}},
    "fig4a": {},
    "fig4b": {"schedule": {"events": _AOM2_OFF}},
    "fig2": {"network": {"coherence_length": 0.6},
             "schedule": {"events": _AOM2_OFF},
             "sim": {"source_mode": "pulsed", "packet_times": [-20e-9]}},
    "fig4c": {"schedule": {"events": _AOM2_OFF},
              "sim": {"source_mode": "pulsed", "packet_times": [-200e-9, -100e-9],
                      "t_start": -1.3e-6, "t_end": 1.2e-6}},
    "doubleslit_sweep": {},
    "doubleslit_transient": {"sim": {"t_start": -5e-9, "t_end": 20e-9}},
    "custom": {},
}


def _merge(base: dict, extra: Mapping) -> dict:
    out = dict(base)
    for key, value in extra.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _coerce(value: Any, default: Any, where: str) -> Any:
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{where} must be finite")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer")
        return value
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be a list")
        if where in _FLOAT_LISTS:
            if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
                raise ConfigError(f"{where} must be a list of numbers")
            return [float(v) for v in value]
        return list(value)
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{where} must be a table")
        return dict(value)
    return value


def _build_section(name: str, values: Mapping) -> Any:
    cls = _SECTION_CLASSES[name]
    default = cls()
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    kwargs = {k: _coerce(v, getattr(default, k), f"{name}.{k}") for k, v in values.items()}
    return cls(**kwargs)


def from_mapping(data: Mapping) -> ScenarioConfig:
    """Build and check a config from already merged values."""
    unknown = set(data) - {"scenario", "model"} - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    scenario = data.get("scenario", "fig7")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; valid scenarios: {', '.join(SCENARIOS)}")
    model = data.get("model", "both")
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}; valid models: {', '.join(MODELS)}")
    sections = {}
    for name in SECTIONS:
        values = data.get(name, {})
        if not isinstance(values, Mapping):
            raise ConfigError(f"[{name}] must be a table")
        sections[name] = _build_section(name, values)
    cfg = ScenarioConfig(scenario=scenario, model=model, **sections)
    check(cfg)
    return cfg


def check(cfg: ScenarioConfig) -> None:
    """Physical sanity of overrides, mirroring the owning modules' invariants."""
    n, s, sim, dif = cfg.network, cfg.schedule, cfg.sim, cfg.diffraction
    if n.arm_length <= 0 or n.standoff <= 0:
        raise ConfigError("network.arm_length and network.standoff must be > 0")
    if len(n.aom_positions) != 2:
        raise ConfigError("network.aom_positions needs two entries")
    if n.wavelength <= 0 or n.coherence_length <= 0:
        raise ConfigError("network.wavelength and network.coherence_length must be > 0")
    if s.ramp_duration <= 0:
        raise ConfigError("schedule.ramp_duration must be > 0")
    for ev in s.events:
        if not isinstance(ev, Mapping) or set(ev) != {"component", "state", "time"}:
            raise ConfigError("schedule.events entries need exactly component, state, time")
        if ev["state"] not in ("on", "off"):
            raise ConfigError("schedule event state must be 'on' or 'off'")
    if sim.dt <= 0 or sim.t_end <= sim.t_start:
        raise ConfigError("sim needs dt > 0 and t_end > t_start")
    if sim.source_mode not in ("continuous", "pulsed"):
        raise ConfigError("sim.source_mode must be 'continuous' or 'pulsed'")
    if sim.n_phases < 3:
        raise ConfigError("sim.n_phases must be >= 3")
    if dif.wavelength <= 0 or dif.a <= 0 or dif.d <= dif.a:
        raise ConfigError("diffraction needs wavelength > 0, a > 0 and d > a")
    if any(z <= 0 for z in dif.distances) or dif.z_transient <= 0:
        raise ConfigError("diffraction distances must be > 0")
    for key in ("open_before", "open_after"):
        slits = getattr(dif, key)
        if not slits or not set(slits) <= {1, 2}:
            raise ConfigError(f"diffraction.{key} must be a non-empty subset of [1, 2]")
    if dif.grid_points < 3 or dif.grid_points % 2 == 0:
        raise ConfigError("diffraction.grid_points must be odd and >= 3")
    if dif.min_nodes < 3 or dif.min_nodes % 2 == 0:
        raise ConfigError("diffraction.min_nodes must be odd and >= 3")
    if not 0 < cfg.analysis.threshold < 1:
        raise ConfigError("analysis.threshold must be in (0, 1)")


def parse_value(text: str) -> Any:
    """Interpret a flag value as a TOML value, falling back to a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def overrides_to_mapping(pairs: Mapping[str, Any]) -> dict:
    out: dict = {}
    for dotted, value in pairs.items():
        parts = dotted.split(".")
        if len(parts) == 1:
            out[parts[0]] = value
        elif len(parts) == 2:
            out.setdefault(parts[0], {})[parts[1]] = value
        else:
            raise ConfigError(f"override {dotted!r} must be section.key")
    return out


def load(scenario: str | None = None, path: str | None = None,
         overrides: Mapping[str, Any] | None = None) -> ScenarioConfig:
    """Resolve the effective configuration."""
    file_data: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                file_data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
    over = overrides_to_mapping(overrides or {})
    name = over.get("scenario", scenario or file_data.get("scenario", "fig7"))
    if name not in PRESETS:
        raise ConfigError(f"unknown scenario {name!r}; valid scenarios: {', '.join(SCENARIOS)}")
    merged = _merge(_merge(_merge({"scenario": name}, PRESETS[name]), file_data), over)
    merged["scenario"] = name
    return from_mapping(merged)


def to_dict(cfg: ScenarioConfig) -> dict:
    return dataclasses.asdict(cfg)


def dumps(cfg: ScenarioConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))


def loads(text: str) -> ScenarioConfig:
    try:
        return from_mapping(tomllib.loads(text))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
