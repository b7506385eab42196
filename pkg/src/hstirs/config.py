"""Scenario configuration and JSON scenario files.

Unspecified fields fall back to the simulation defaults below (bandwidth
20 MHz, -100 dBm noise, 10 dBm transmit power, 10x10 panel, ...). Values
given as strings with a ``dB`` or ``dBm`` suffix are converted to linear
units (``dBm`` to watts); plain numbers are taken as linear.
"""
from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import IrsPanel
from .exceptions import ConfigError, DomainError

_DB_RE = re.compile(r"^\s*([-+]?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)\s*(dBm|dB)\s*$")

# Base station of the reference scene, stored y-up as (x, height, depth).
REFERENCE_BS_Y_UP = (550.0, 0.0, 350.0)
# Fixed ground IRS sites of the reference scene (y-up); informational only.
REFERENCE_FIXED_IRS_Y_UP = ((300.0, 100.0, 200.0), (800.0, 100.0, 200.0), (800.0, 100.0, 400.0))


def swap_y_up(triple):
    """Convert a y-up (x, height, depth) triple to z-up (x, depth, height)."""
    x, y, z = triple
    return (float(x), float(z), float(y))


def db_to_linear(value: float) -> float:
    return 10.0 ** (value / 10.0)


def dbm_to_watts(value: float) -> float:
    return 10.0 ** (value / 10.0) * 1e-3


def parse_power(value, name="value") -> float:
    """Parse ``"-20 dB"``, ``"10 dBm"`` or a plain linear number."""
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number or a dB/dBm string, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        match = _DB_RE.match(value)
        if match is None:
            try:
                return float(value)
            except ValueError:
                raise ConfigError(f"{name}: cannot parse {value!r}; use a number or '<x> dB' / '<x> dBm'") from None
        number, unit = float(match.group(1)), match.group(2)
        return dbm_to_watts(number) if unit == "dBm" else db_to_linear(number)
    raise ConfigError(f"{name}: expected a number or a dB/dBm string, got {value!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    # link budget
    rho0: float = 0.01            # -20 dB at d0
    d0: float = 1.0
    bandwidth: float = 20e6
    sigma2: float = 1e-13         # -100 dBm
    tx_power: float = 0.01        # 10 dBm
    delta_bu: float = 2.6
    delta_ut: float = 2.8
    wavelength: float = 0.1
    panel: IrsPanel = field(default_factory=IrsPanel)
    # trains and UAV
    n_trains: int = 4
    v_train: float = 100.0
    v_max: float = 55.0
    l_min: float = 50.0
    l_max: float = 400.0
    r0: float = 100.0
    # time
    n_slots: int = 6
    slot_dt: float = 1.0
    inner_steps: int = 10
    # scene (z-up, metres)
    bs_position: tuple = swap_y_up(REFERENCE_BS_Y_UP)
    track_start: tuple = (250.0, 150.0, 0.0)
    track_end: tuple = (1100.0, 150.0, 0.0)
    train_spacing: float = 20.0
    train_offsets: Optional[tuple] = None
    uav_start: tuple = (420.0, 250.0, 200.0)
    static_uav: Optional[tuple] = None
    scene_low: tuple = (0.0, 0.0, 0.0)
    scene_high: tuple = (1100.0, 700.0, 500.0)
    # learning / evaluation
    reward_scale: float = 1e-2
    solver_node_limit: int = 2000
    uav_jitter: float = 10.0
    check_phase_limit: bool = False
    seed: int = 0

    def __post_init__(self):
        try:
            self.validate()
        except DomainError as exc:
            raise ConfigError(str(exc)) from None

    def validate(self):
        positive = ("rho0", "d0", "bandwidth", "sigma2", "tx_power", "wavelength", "v_train",
                    "v_max", "slot_dt", "reward_scale")
        for name in positive:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite, got {value!r}")
        if not self.l_min < self.l_max:
            raise ConfigError(f"l_min ({self.l_min}) must be below l_max ({self.l_max})")
        if self.l_min <= 0:
            raise ConfigError("l_min must be above ground")
        for name in ("n_slots", "inner_steps", "n_trains", "solver_node_limit"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.r0 < 0:
            raise ConfigError("r0 must be non-negative")
        if self.delta_bu < 0 or self.delta_ut < 0:
            raise ConfigError("path loss exponents must be non-negative")
        for name in ("bs_position", "track_start", "track_end", "uav_start", "scene_low", "scene_high"):
            value = getattr(self, name)
            if len(value) != 3 or not all(np.isfinite(v) for v in value):
                raise ConfigError(f"{name} must be a finite (x, y, z) triple")
        if self.static_uav is not None and len(self.static_uav) != 3:
            raise ConfigError("static_uav must be an (x, y, z) triple")
        if self.bs_position[2] != 0 or self.track_start[2] != 0 or self.track_end[2] != 0:
            raise ConfigError("base station and track must be on the ground (z = 0)")
        if np.allclose(self.track_start, self.track_end):
            raise ConfigError("track_start and track_end coincide")
        if not all(lo < hi for lo, hi in zip(self.scene_low, self.scene_high)):
            raise ConfigError("scene_low must be below scene_high on every axis")
        if self.train_offsets is not None and len(self.train_offsets) != self.n_trains:
            raise ConfigError(f"train_offsets has {len(self.train_offsets)} entries for {self.n_trains} trains")
        if self.uav_jitter < 0:
            raise ConfigError("uav_jitter must be non-negative")

    # derived quantities
    @property
    def n_reflectors(self) -> int:
        return self.panel.n_reflectors

    @property
    def step_length(self) -> float:
        """Largest UAV displacement in one inner step."""
        return self.v_max * self.slot_dt / self.inner_steps

    def offsets(self) -> np.ndarray:
        if self.train_offsets is not None:
            return np.asarray(self.train_offsets, dtype=float)
        return self.train_spacing * np.arange(self.n_trains, dtype=float)[::-1]

    def static_position(self) -> np.ndarray:
        """UAV position of the static baseline: midway between the BS and the
        track midpoint, 100 m up (clamped into the altitude band)."""
        if self.static_uav is not None:
            return np.asarray(self.static_uav, dtype=float)
        mid = (np.asarray(self.track_start) + np.asarray(self.track_end)) / 2.0
        pos = (np.asarray(self.bs_position, dtype=float) + mid) / 2.0
        pos[2] = min(max(100.0, self.l_min), self.l_max)
        return pos

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["panel"] = dataclasses.asdict(self.panel)
        return out


_POWER_FIELDS = {"rho0", "sigma2", "tx_power"}
_TRIPLE_FIELDS = {"bs_position", "track_start", "track_end", "uav_start", "static_uav"}
_INT_FIELDS = {"n_trains", "n_slots", "inner_steps", "solver_node_limit", "seed"}
_ALIASES = {"B": "bandwidth", "p": "tx_power", "M": "n_trains", "K": "n_slots", "T_max": "inner_steps",
            "R0": "r0", "lambda": "wavelength"}
_PANEL_KEYS = {f.name for f in dataclasses.fields(IrsPanel)}
_IGNORED = {"comment", "comments", "y_up", "fixed_irs_sites"}


def config_from_dict(data: dict) -> ScenarioConfig:
    """Build a config from a parsed scenario mapping."""
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a JSON object")
    y_up = bool(data.get("y_up", False))
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    kwargs = {}
    for raw_key, value in data.items():
        key = _ALIASES.get(raw_key, raw_key)
        if raw_key in _IGNORED or raw_key.startswith("_"):
            continue
        if key not in known:
            raise ConfigError(f"unknown field {raw_key!r}")
        try:
            if key in _POWER_FIELDS:
                value = parse_power(value, key)
            elif key == "panel":
                if not isinstance(value, dict):
                    raise ConfigError("panel must be an object")
                extra = set(value) - _PANEL_KEYS
                if extra:
                    raise ConfigError(f"panel: unknown field(s) {sorted(extra)}")
                value = IrsPanel(**value)
            elif key in _TRIPLE_FIELDS:
                if value is not None:
                    value = tuple(float(v) for v in value)
                    if len(value) != 3:
                        raise ConfigError(f"{key}: expected 3 components")
                    if y_up:
                        value = swap_y_up(value)
            elif key in ("scene_low", "scene_high"):
                value = tuple(float(v) for v in value)
                if y_up and len(value) == 3:
                    value = swap_y_up(value)
            elif key == "train_offsets":
                value = None if value is None else tuple(float(v) for v in value)
            elif key == "check_phase_limit":
                value = bool(value)
            elif key in _INT_FIELDS:
                if isinstance(value, bool) or int(value) != value:
                    raise ConfigError(f"{key}: expected an integer, got {value!r}")
                value = int(value)
            else:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    value = parse_power(value, key)
                value = float(value)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{key}: {exc}") from None
        kwargs[key] = value
    return ScenarioConfig(**kwargs)


def load_scenario(path) -> ScenarioConfig:
    """Read a JSON scenario file; an empty file yields the default scenario."""
    with open(path) as fh:
        text = fh.read()
    if not text.strip():
        return ScenarioConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def dump_scenario(cfg: ScenarioConfig, path) -> None:
    """Write a config as linear-unit JSON that :func:`load_scenario` reads back."""
    with open(path, "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
