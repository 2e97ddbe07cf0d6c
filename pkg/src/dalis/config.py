"""Scenario and sweep configuration files.

Format: one ``key = value`` per line, ``#`` starts a comment, optional
``[section]`` headers group keys. Keys given before any header may come from
any section. Every key has a default; unknown keys are errors. See the README
for the full schema.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from .channel import PathLossEnvironment
from .errors import ConfigError
from .geometry import Point2D
from .mobility import MODES, Area, MobilityParams
from .sim import (BlindSpec, ReferenceSpec, ScenarioConfig, generate_grid, square_positions,
                  triangle_positions)

DEPLOYMENTS = ("triangle", "square", "grid", "explicit")


def _float(s: str) -> float:
    v = float(s)
    if math.isnan(v):
        raise ValueError("nan is not allowed")
    return v


def _int(s: str) -> int:
    return int(s)


def _window(s: str) -> float:
    if s.strip().lower() in ("inf", "infinity", "all"):
        return math.inf
    v = float(s)
    if v != int(v):
        raise ValueError(f"window size must be an integer, got {s}")
    return float(int(v))


def _window_or_auto(s: str) -> Optional[float]:
    return None if s.strip().lower() in ("auto", "same") else _window(s)


def _int_or_auto(s: str) -> Optional[int]:
    return None if s.strip().lower() == "auto" else int(s)


def _float_or_none(s: str) -> Optional[float]:
    return None if s.strip().lower() in ("none", "auto", "") else _float(s)


def _sensitivity(s: str) -> float:
    if s.strip().lower() in ("none", "off", "-inf"):
        return -math.inf
    return _float(s)


def _point(s: str) -> Point2D:
    parts = [p.strip() for p in s.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'x, y', got {s!r}")
    return Point2D(_float(parts[0]), _float(parts[1]))


def _blind_position(s: str):
    return "center" if s.strip().lower() in ("center", "centre") else _point(s)


def _points(s: str) -> Tuple[Point2D, ...]:
    return tuple(_point(p) for p in s.split(";") if p.strip())


def _mode(s: str) -> str:
    s = s.strip().lower()
    if s not in MODES:
        raise ValueError(f"mobility must be one of {MODES}, got {s!r}")
    return s


def _deployment(s: str) -> str:
    s = s.strip().lower()
    if s not in DEPLOYMENTS:
        raise ValueError(f"deployment must be one of {DEPLOYMENTS}, got {s!r}")
    return s


def _speed_range(s: str) -> Tuple[float, float]:
    parts = s.replace(":", ",").split(",")
    if len(parts) != 2:
        raise ValueError(f"expected 'min:max', got {s!r}")
    return (_float(parts[0]), _float(parts[1]))


# key: (section, parser, default)
SCHEMA: Dict[str, Tuple[str, Callable, object]] = {
    "area_width": ("scenario", _float, 50.0),
    "area_height": ("scenario", _float, 50.0),
    "duration": ("scenario", _float, 60.0),
    "beacon_rate": ("scenario", _float, 10.0),
    "trials": ("scenario", _int, 100),
    "base_seed": ("scenario", _int, 0),
    "warmup": ("scenario", _int_or_auto, None),
    "tx_power": ("channel", _float, 20.0),
    "pl_d0": ("channel", _float, 40.0),
    "d0": ("channel", _float, 1.0),
    "n_true": ("channel", _float, 3.0),
    "sigma": ("channel", _float, 4.0),
    "rx_sensitivity": ("channel", _sensitivity, -90.0),
    "w_r": ("windows", _window, 1.0),
    "w_d": ("windows", _window, 1.0),
    "w_l": ("windows", _window, 1.0),
    "ref_w_r": ("windows", _window_or_auto, None),
    "bootstrap_ple": ("windows", _float, 2.0),
    "deployment": ("references", _deployment, "triangle"),
    "ref_positions": ("references", _points, ()),
    "grid_spacing": ("references", _float, 4.0),
    "grid_per_side": ("references", _int_or_auto, None),
    "ref_mobility": ("references", _mode, "stationary"),
    "blind_position": ("blind", _blind_position, "center"),
    "blind_mobility": ("blind", _mode, "stationary"),
    "speed_range": ("mobility", _speed_range, (1.0, 3.0)),
    "pause_time": ("mobility", _float, 0.0),
    "locality_fraction": ("mobility", _float, 0.10),
}

SWEEP_SECTION = "sweep"
SWEEP_KEYS = ("axis", "values", "base")
SWEEP_AXES = ("w_r", "w_d", "w_l", "combined_w", "sigma", "area_side", "grid_spacing",
              "pause_time", "speed_range")
SECTIONS = tuple(dict.fromkeys(sec for sec, _, _ in SCHEMA.values())) + (SWEEP_SECTION,)


def defaults() -> Dict[str, object]:
    return {k: d for k, (_, _, d) in SCHEMA.items()}


def build_scenario(values: Dict[str, object]) -> ScenarioConfig:
    """Resolve a flat key -> value mapping (missing keys take defaults)."""
    v = defaults()
    unknown = set(values) - set(v)
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    v.update(values)
    try:
        env = PathLossEnvironment(
            pl_d0=v["pl_d0"], d0=v["d0"], n_true=v["n_true"], sigma=v["sigma"],
            default_tx_power=v["tx_power"], rx_sensitivity=v["rx_sensitivity"],
        )
        mob = MobilityParams(tuple(v["speed_range"]), v["pause_time"], v["locality_fraction"])
        dep = v["deployment"]
        if dep == "grid":
            spacing = v["grid_spacing"]
            if v["grid_per_side"] is not None:
                if v["grid_per_side"] < 2:
                    raise ConfigError("grid_per_side must be >= 2")
                side = spacing * (v["grid_per_side"] - 1)
                area = Area(side, side)
            else:
                area = Area(v["area_width"], v["area_height"])
            positions = generate_grid(area, spacing)
        else:
            area = Area(v["area_width"], v["area_height"])
            if dep == "triangle":
                positions = triangle_positions(area)
            elif dep == "square":
                positions = square_positions(area)
            else:
                positions = list(v["ref_positions"])
                if not positions:
                    raise ConfigError("deployment = explicit needs ref_positions")
        refs = tuple(ReferenceSpec(i, p, v["tx_power"], v["ref_mobility"]) for i, p in enumerate(positions))
        bp = area.center if v["blind_position"] == "center" else v["blind_position"]
        cfg = ScenarioConfig(
            area=area, env=env, references=refs, blind=BlindSpec(Point2D(*bp), v["blind_mobility"]),
            w_r=v["w_r"], w_d=v["w_d"], w_l=v["w_l"], ref_w_r=v["ref_w_r"], mobility=mob,
            beacon_rate=v["beacon_rate"], duration=v["duration"], trials=v["trials"],
            base_seed=v["base_seed"], warmup=v["warmup"], bootstrap_ple=v["bootstrap_ple"],
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from None
    cfg.validate()
    return cfg


def apply_axis(values: Dict[str, object], axis: str, value) -> Dict[str, object]:
    out = dict(values)
    if axis == "combined_w":
        out["w_r"] = out["w_d"] = out["w_l"] = value
    elif axis == "area_side":
        out["area_width"] = out["area_height"] = value
    elif axis in SWEEP_AXES:
        out[axis] = value
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}")
    return out


def _axis_parser(axis: str) -> Callable:
    if axis in ("w_r", "w_d", "w_l", "combined_w"):
        return _window
    if axis == "speed_range":
        return _speed_range
    return _float


@dataclass
class SweepSpec:
    base: Dict[str, object]
    axis: str
    values: List[object]

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}; expected one of {', '.join(SWEEP_AXES)}")
        if not self.values:
            raise ConfigError("sweep needs at least one value")

    def scenarios(self) -> List[Tuple[object, ScenarioConfig]]:
        return [(val, build_scenario(apply_axis(self.base, self.axis, val))) for val in self.values]


def parse_lines(text: str, source: str = "<string>") -> Dict[str, Dict[str, Tuple[str, int]]]:
    """Split text into {section: {key: (raw value, line number)}}; '' is the headerless part."""
    out: Dict[str, Dict[str, Tuple[str, int]]] = {"": {}}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{source}:{lineno}: malformed section header {raw.strip()!r}")
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ConfigError(f"{source}:{lineno}: unknown section [{section}]")
            out.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if not key:
            raise ConfigError(f"{source}:{lineno}: missing key")
        for sec in out.values():
            if key in sec:
                raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first set on line {sec[key][1]})")
        out[section][key] = (val, lineno)
    return out


def _scenario_values(parsed, source: str) -> Dict[str, object]:
    values: Dict[str, object] = {}
    for section, entries in parsed.items():
        if section == SWEEP_SECTION:
            continue
        for key, (raw, lineno) in entries.items():
            if key not in SCHEMA or (section == "" and key in SWEEP_KEYS):
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
            expected = SCHEMA[key][0]
            if section and section != expected:
                raise ConfigError(f"{source}:{lineno}: key {key!r} belongs in [{expected}], not [{section}]")
            try:
                values[key] = SCHEMA[key][1](raw)
            except ValueError as e:
                raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {e}") from None
    return values


def loads(text: str, source: str = "<string>", base_dir: str = ".") -> "ScenarioConfig | SweepSpec":
    parsed = parse_lines(text, source)
    values = _scenario_values(parsed, source)
    if SWEEP_SECTION not in parsed:
        cfg = build_scenario(values)
        return cfg

    sweep = parsed[SWEEP_SECTION]
    for key, (_, lineno) in sweep.items():
        if key not in SWEEP_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown sweep key {key!r}")
    for key in ("axis", "values"):
        if key not in sweep:
            raise ConfigError(f"{source}: [sweep] needs '{key}'")
    axis, axis_line = sweep["axis"][0].strip().lower(), sweep["axis"][1]
    if axis not in SWEEP_AXES:
        raise ConfigError(f"{source}:{axis_line}: unknown sweep axis {axis!r}")
    base: Dict[str, object] = {}
    if "base" in sweep:
        path = os.path.join(base_dir, sweep["base"][0])
        if not os.path.isfile(path):
            raise ConfigError(f"{source}:{sweep['base'][1]}: sweep base not found: {path}")
        with open(path) as f:
            base_parsed = parse_lines(f.read(), path)
        if SWEEP_SECTION in base_parsed:
            raise ConfigError(f"{path}: a sweep base must be a scenario file")
        base = _scenario_values(base_parsed, path)
    base.update(values)
    raw_vals, vals_line = sweep["values"]
    parse = _axis_parser(axis)
    try:
        vals = [parse(s.strip()) for s in raw_vals.split(";" if axis == "speed_range" else ",") if s.strip()]
    except ValueError as e:
        raise ConfigError(f"{source}:{vals_line}: bad sweep value: {e}") from None
    spec = SweepSpec(base, axis, vals)
    spec.scenarios()  # surface invariant violations now
    return spec


def load_config(path: str) -> "ScenarioConfig | SweepSpec":
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as f:
        text = f.read()
    return loads(text, path, os.path.dirname(os.path.abspath(path)))
