"""Scenario description and YAML config loading."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .channel import Blockage

VARIANTS = ("BACKHAUL_1", "BACKHAUL_2", "OUTDOOR_MU", "INDOOR_MU")
DEFAULT_SEED = 20170101


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration."""


@dataclass(frozen=True)
class Scenario:
    name: str
    variant: str
    tx_power_dbm: float
    bandwidth: float = 2e9
    frequency: float = 28e9
    noise_figure_db: float = 5.0
    # backhaul
    distance: float | None = None
    los: bool = True
    excess_loss_db: float | None = None   # None: calibrated NLoS value
    # multi-user geometry
    tx_position: tuple[float, float] = (0.0, 0.0)
    tx_height: float = 3.0
    rx_height: float = 3.0
    boresight_azimuth_deg: float = 0.0
    downtilt_deg: float | str = 0.0
    area_origin: tuple[float, float] = (0.0, 0.0)
    area_size: tuple[float, float] = (1.0, 1.0)
    spacing: float = 1.0
    lattice: tuple[str, str] = ("centers", "centers")
    users_per_trial: int = 5
    trials: int = 1
    seed: int = DEFAULT_SEED
    beam_counts: tuple[int, ...] = (8, 16, 32, 64)
    beam_directions: tuple[float, ...] = ()
    power_split: str = "equal"
    bandwidth_mode: str = "reuse"
    rx_gain_dbi: float = 0.0
    blockages: tuple[Blockage, ...] = ()
    lens_size: int = 3
    source_port: int = 11

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.power_split not in ("equal", "per-beam"):
            raise ConfigError("power_split must be 'equal' or 'per-beam'")
        if self.bandwidth_mode not in ("reuse", "partition"):
            raise ConfigError("bandwidth_mode must be 'reuse' or 'partition'")
        if not self.bandwidth > 0 or not self.frequency > 0:
            raise ConfigError("bandwidth and frequency must be positive")
        if self.variant.startswith("BACKHAUL") and not (self.distance and self.distance > 0):
            raise ConfigError("backhaul scenarios need a positive distance")
        if isinstance(self.downtilt_deg, str) and self.downtilt_deg != "auto":
            raise ConfigError("downtilt_deg must be a number or 'auto'")
        if self.los and self.excess_loss_db:
            raise ConfigError("line-of-sight scenarios cannot carry excess loss")

    def resolved_downtilt(self) -> float:
        """Downtilt in degrees; ``auto`` aims boresight at the centre of the user area."""
        if self.downtilt_deg != "auto":
            return float(self.downtilt_deg)
        cx = self.area_origin[0] + self.area_size[0] / 2 - self.tx_position[0]
        cy = self.area_origin[1] + self.area_size[1] / 2 - self.tx_position[1]
        return math.degrees(math.atan2(self.tx_height - self.rx_height, math.hypot(cx, cy)))

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["blockages"] = [dataclasses.asdict(b) for b in self.blockages]
        return d

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_FLOAT_FIELDS = {"tx_power_dbm", "bandwidth", "frequency", "noise_figure_db", "distance",
                 "excess_loss_db", "tx_height", "rx_height", "boresight_azimuth_deg",
                 "spacing", "rx_gain_dbi"}
_TUPLE_FIELDS = {"tx_position", "area_origin", "area_size", "lattice", "beam_counts", "beam_directions"}


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ConfigError("scenario config must be a mapping")
    known = {f.name for f in dataclasses.fields(Scenario)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown scenario keys: {', '.join(unknown)}")
    kw = {}
    for key, value in data.items():
        if key in _FLOAT_FIELDS and value is not None:
            try:
                value = float(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: expected a number, got {value!r}") from exc
        elif key in _TUPLE_FIELDS:
            value = tuple(value)
        elif key == "blockages":
            try:
                value = tuple(Blockage(tuple(b["x"]), tuple(b["y"]), float(b["loss_db"])) for b in value)
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"bad blockage entry: {exc}") from exc
        kw[key] = value
    try:
        return Scenario(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_yaml(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return data


def load_scenario(path) -> Scenario:
    return scenario_from_dict(load_yaml(path))


def preset_path(name: str) -> Path:
    return Path(str(resources.files("lensbeam") / "presets" / f"{name}.yaml"))


def load_preset(name: str) -> Scenario:
    path = preset_path(name)
    if not path.exists():
        raise ConfigError(f"no preset named {name!r}")
    return load_scenario(path)
