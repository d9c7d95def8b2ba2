"""Flat key-value scenario configuration.

Format: one ``key = value`` per line, ``#`` starts a comment, lists are comma
separated. Keys are ``section.name``; the packaged ``defaults.cfg`` defines
every legal key and its type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..contact import DetectionConfig
from ..kinematics import ArmParams
from ..observer import AllocationMap, BodyInertia


class ConfigError(ValueError):
    pass


def _parse_scalar(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _coerce(key: str, text: str, like, where: str):
    text = text.strip()
    try:
        if isinstance(like, bool):
            if text.lower() not in ("true", "false", "1", "0"):
                raise ValueError(text)
            return text.lower() in ("true", "1")
        if isinstance(like, int):
            return int(text)
        if isinstance(like, float):
            v = float(text)
            if not math.isfinite(v):
                raise ValueError(text)
            return v
        if isinstance(like, tuple):
            vals = tuple(float(p) for p in text.split(","))
            if len(vals) != len(like):
                raise ValueError(f"expected {len(like)} values")
            return vals
        return text
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {text!r} ({exc})") from None


def parse_lines(text: str, source: str = "<string>"):
    """Yield (key, raw value, line number) from config text."""
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{n}: expected 'key = value', got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{n}: empty key")
        yield key, val, n


def _load_defaults() -> dict:
    text = resources.files("uam_landing").joinpath("defaults.cfg").read_text()
    out = {}
    for key, val, _ in parse_lines(text, "defaults.cfg"):
        if "," in val:
            out[key] = tuple(float(p) for p in val.split(","))
        else:
            out[key] = _parse_scalar(val)
    return out


DEFAULTS = _load_defaults()


@dataclass(frozen=True)
class WorldPlane:
    incline_deg: float
    downhill_deg: float = 0.0
    centroid: tuple = (0.0, 0.0, 0.0)
    extent: tuple = (2.0, 2.0)

    def __post_init__(self):
        if not 0.0 <= self.incline_deg <= 45.0:
            raise ConfigError(f"world incline {self.incline_deg} deg outside [0, 45]")

    @property
    def downhill(self) -> np.ndarray:
        h = math.radians(self.downhill_deg)
        return np.array([-math.sin(h), math.cos(h), 0.0])

    @property
    def true_normal(self) -> np.ndarray:
        a = math.radians(self.incline_deg)
        d = self.downhill
        return np.array([math.sin(a) * d[0], math.sin(a) * d[1], -math.cos(a)])

    def height_above(self, p) -> float:
        """Signed distance along the upward normal; negative means penetration."""
        return float((np.asarray(p, float) - np.asarray(self.centroid)) @ self.true_normal)

    def surface_z(self, x: float, y: float) -> float:
        c = self.centroid
        a = math.radians(self.incline_deg)
        d = self.downhill
        return c[2] + math.tan(a) * ((x - c[0]) * d[0] + (y - c[1]) * d[1])

    def contains_xy(self, p) -> bool:
        c = self.centroid
        d = self.downhill
        dx, dy = p[0] - c[0], p[1] - c[1]
        across = dx * d[1] - dy * d[0]
        along = dx * d[0] + dy * d[1]
        return abs(across) <= self.extent[0] and abs(along) <= self.extent[1]


@dataclass(frozen=True)
class SensorModel:
    gyro_noise_sigma: float = 0.0
    gyro_bias: tuple = (0.0, 0.0, 0.0)
    position_noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.gyro_noise_sigma < 0 or self.position_noise_sigma < 0:
            raise ConfigError("sensor noise sigmas must be >= 0")


class ScenarioConfig:
    """Validated flat configuration with typed views onto its sections."""

    def __init__(self, values: dict | None = None):
        self.values = dict(DEFAULTS)
        if values:
            for k, v in values.items():
                if k not in DEFAULTS:
                    raise ConfigError(f"unknown key {k!r}")
                self.values[k] = v
        self._validate()

    def __getitem__(self, key: str):
        return self.values[key]

    def _validate(self):
        if not self["sim.dt"] > 0:
            raise ConfigError("sim.dt must be positive")
        if not self["probe.search_step_down"] > 0:
            raise ConfigError("probe.search_step_down must be positive")
        if self["probe.contacts"] not in (2, 3):
            raise ConfigError("probe.contacts must be 2 or 3")
        d = np.asarray(self["probe.direction"])
        if abs(float(np.linalg.norm(d)) - 1.0) > 1e-9:
            raise ConfigError("probe.direction must be a unit vector")
        self.world()
        self.sensor()
        self.detection()
        self.arms()

    def with_values(self, overrides: dict) -> ScenarioConfig:
        v = dict(self.values)
        v.update(overrides)
        return ScenarioConfig(v)

    def world(self) -> WorldPlane:
        return WorldPlane(self["world.incline_deg"], self["world.downhill_deg"],
                          self["world.centroid"], self["world.extent"])

    def sensor(self) -> SensorModel:
        return SensorModel(self["sensor.gyro_noise_sigma"], self["sensor.gyro_bias"],
                           self["sensor.position_noise_sigma"], self["sensor.seed"])

    def detection(self) -> DetectionConfig:
        return DetectionConfig(self["detection.threshold"], self["detection.timeout"], True)

    def arms(self) -> tuple[ArmParams, ArmParams]:
        lims = (self["arm.q1_limits"], self["arm.q2_limits"], self["arm.q3_limits"])
        L = (self["arm.L1"], self["arm.L2"], self["arm.L3"])
        return (ArmParams(*L, lims, "left", self["arm.left_mount"]),
                ArmParams(*L, lims, "right", self["arm.right_mount"]))

    def inertia(self) -> BodyInertia:
        reach = 2.0 * self["vehicle.rotor_arm"] * math.cos(math.pi / 4)
        return BodyInertia.box(self["vehicle.body_mass"] + 2 * self["vehicle.battery_mass"],
                               self["vehicle.body_length"] + reach,
                               self["vehicle.body_width"] + reach,
                               self["vehicle.body_height"])

    def allocation(self) -> AllocationMap:
        return AllocationMap.x_quad(self["vehicle.body_length"], self["vehicle.body_width"],
                                    self["vehicle.rotor_arm"], self["vehicle.yaw_coeff"])

    def dump(self) -> str:
        lines = []
        for k, v in self.values.items():
            if isinstance(v, tuple):
                v = ", ".join(repr(float(x)) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


def parse_overrides(pairs, source: str = "--set") -> dict:
    out = {}
    for i, pair in enumerate(pairs, 1):
        if "=" not in pair:
            raise ConfigError(f"{source} #{i}: expected key=value, got {pair!r}")
        k, v = (s.strip() for s in pair.split("=", 1))
        if k not in DEFAULTS:
            raise ConfigError(f"{source} #{i}: unknown key {k!r}")
        out[k] = _coerce(k, v, DEFAULTS[k], f"{source} #{i}")
    return out


def parse_config_text(text: str, source: str = "<string>", extra_keys=()) -> tuple[dict, dict]:
    """Split config text into (scenario values, extra values for ``extra_keys``)."""
    values, extra = {}, {}
    for key, val, n in parse_lines(text, source):
        where = f"{source}:{n}"
        if key in extra_keys:
            extra[key] = val
        elif key in DEFAULTS:
            values[key] = _coerce(key, val, DEFAULTS[key], where)
        else:
            raise ConfigError(f"{where}: unknown key {key!r}")
    return values, extra


def load_config(path=None, overrides=None) -> ScenarioConfig:
    values = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc.strerror or exc}") from None
        values, _ = parse_config_text(text, str(p))
    if overrides:
        values.update(overrides)
    try:
        return ScenarioConfig(values)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
