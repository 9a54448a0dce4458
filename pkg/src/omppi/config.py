"""Scenario files (YAML) and their mapping to :class:`ScenarioConfig`.

A file may start from a preset and override any section::

    preset: 3
    seed: 7
    mppi:
      rollouts: 500
      horizon: 6.0
    obstacles:
      - {lane: outer, speed: 10, xy: [85, 50]}

Section and key names mirror the dataclass fields. Errors name the
offending key path, e.g. ``scenario.yaml: mppi.rollouts: ...``.
"""
import dataclasses
import math
from dataclasses import fields, replace
from pathlib import Path

import yaml

from .controller import MppiParams, TaskModel
from .cost import CollisionGeom, CostParams
from .dynamics import BotState, DynamicsParams
from .harness import ObstacleSpec, ScenarioConfig, case_preset
from .track import LaneId, TrackSpec


class ConfigError(ValueError):
    pass


_MODEL_SECTIONS = {
    "dynamics": DynamicsParams,
    "track": TrackSpec,
    "cost": CostParams,
    "collision": CollisionGeom,
}
_MODEL_ATTR = {"dynamics": "dynamics", "track": "track", "cost": "cost", "collision": "geom"}
_TOP_KEYS = {
    "preset",
    "name",
    "controller",
    "seed",
    "stop_on_failure",
    "target_travel",
    "max_duration",
    "mppi",
    "bot",
    "obstacles",
    *_MODEL_SECTIONS,
}


def _coerce(value, like, path):
    if isinstance(like, bool):
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{path}: expected true/false, got {value!r}")
    if isinstance(like, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return int(value)
    if isinstance(like, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if isinstance(like, tuple):
        if not isinstance(value, (list, tuple)) or len(value) != len(like):
            raise ConfigError(f"{path}: expected a list of {len(like)} numbers, got {value!r}")
        return tuple(_coerce(v, l, f"{path}[{i}]") for i, (v, l) in enumerate(zip(value, like)))
    return value


def _update(obj, data, path):
    """Return ``obj`` with the keys of mapping ``data`` applied, type-checked."""
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(data).__name__}")
    names = {f.name for f in fields(obj)}
    changes = {}
    for key, value in data.items():
        if key not in names:
            raise ConfigError(f"{path}.{key}: unknown key (expected one of {sorted(names)})")
        changes[key] = _coerce(value, getattr(obj, key), f"{path}.{key}")
    try:
        return replace(obj, **changes)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _obstacle(data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(data).__name__}")
    extra = set(data) - {"lane", "speed", "s", "xy"}
    if extra:
        raise ConfigError(f"{path}.{sorted(extra)[0]}: unknown key (expected lane, speed, s or xy)")
    try:
        lane = LaneId(str(data.get("lane", "outer")).lower())
    except ValueError:
        raise ConfigError(f"{path}.lane: expected 'inner' or 'outer', got {data.get('lane')!r}") from None
    if "speed" not in data:
        raise ConfigError(f"{path}.speed: missing")
    speed = _coerce(data["speed"], 0.0, f"{path}.speed")
    s = _coerce(data["s"], 0.0, f"{path}.s") if data.get("s") is not None else None
    xy = _coerce(data["xy"], (0.0, 0.0), f"{path}.xy") if data.get("xy") is not None else None
    try:
        return ObstacleSpec(lane, speed, s=s, xy=xy)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def scenario_from_dict(data: dict, where: str = "config") -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: top level must be a mapping")
    for key in data:
        if key not in _TOP_KEYS:
            raise ConfigError(f"{where}: {key}: unknown key (expected one of {sorted(_TOP_KEYS)})")
    preset = data.get("preset")
    try:
        cfg = case_preset(preset, data.get("controller")) if preset is not None else None
    except ValueError as exc:
        raise ConfigError(f"{where}: preset: {exc}") from None
    if cfg is None:
        if "bot" not in data:
            raise ConfigError(f"{where}: bot: missing (required without a preset)")
        cfg = ScenarioConfig(max_duration=1.0)

    changes = {}
    model = cfg.model
    for section, cls in _MODEL_SECTIONS.items():
        if section in data:
            attr = _MODEL_ATTR[section]
            model = replace(model, **{attr: _update(getattr(model, attr), data[section], f"{where}: {section}")})
    changes["model"] = TaskModel(model.dynamics, model.track, model.cost, model.geom)
    if "mppi" in data:
        changes["mppi"] = _update(cfg.mppi, data["mppi"], f"{where}: mppi")
    if "bot" in data:
        changes["bot"] = _update(cfg.bot, data["bot"], f"{where}: bot")
    if "obstacles" in data:
        obs = data["obstacles"] or []
        if not isinstance(obs, list):
            raise ConfigError(f"{where}: obstacles: expected a list")
        changes["obstacles"] = tuple(_obstacle(o, f"{where}: obstacles[{i}]") for i, o in enumerate(obs))
    if "controller" in data:
        changes["controller"] = data["controller"]
    if "seed" in data:
        changes["seed"] = _coerce(data["seed"], 0, f"{where}: seed")
    if "stop_on_failure" in data:
        changes["stop_on_failure"] = _coerce(data["stop_on_failure"], False, f"{where}: stop_on_failure")
    if "name" in data:
        changes["name"] = str(data["name"])
    if "target_travel" in data:
        tt = data["target_travel"]
        changes["target_travel"] = tt if tt in (None, "corner") else _coerce(tt, 0.0, f"{where}: target_travel")
    if "max_duration" in data:
        md = data["max_duration"]
        changes["max_duration"] = None if md is None else _coerce(md, 0.0, f"{where}: max_duration")
    elif preset is None:
        changes["max_duration"] = None
    try:
        return replace(cfg, **changes)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown location"
        raise ConfigError(f"{path}: malformed YAML at {loc}") from None
    return scenario_from_dict(data or {}, str(path))


def _plain(obj):
    if isinstance(obj, LaneId):
        return obj.value
    if dataclasses.is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    """Fully resolved scenario in the file layout (round-trips through ``scenario_from_dict``)."""
    out = {
        "name": cfg.name,
        "controller": cfg.controller,
        "seed": cfg.seed,
        "stop_on_failure": cfg.stop_on_failure,
        "target_travel": cfg.target_travel,
        "max_duration": cfg.max_duration,
        "mppi": _plain(cfg.mppi),
        "bot": _plain(cfg.bot),
        "obstacles": [
            {k: v for k, v in _plain(o).items() if v is not None} for o in cfg.obstacles
        ],
    }
    for section, attr in _MODEL_ATTR.items():
        out[section] = _plain(getattr(cfg.model, attr))
    return out


def dump_scenario(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario_to_dict(cfg), sort_keys=False))
