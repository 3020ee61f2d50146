"""Scenario configuration: flat ``section.key = value`` text files.

Human-facing units (GHz, degrees, cm) are converted to SI here and
nowhere else.  Example::

    array.rows = 20
    array.cols = 20
    array.period_cm = 0.235
    design.f_ghz = 27.5
    scene.tx.angle_deg = 45
    scene.tx.distance_cm = 20     # omit for plane-wave incidence
    scene.rx.angle_deg = 0        # no distance: far-field direction
    optimizer.method = exhaustive
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import (ArrayLayout, DirectionTerminal, Frequency, PointTerminal, Scene,
                   Terminal)
from .synthesis import OPTIMIZERS
from .unitcell import UnitCellResponse, default_response, read_response_csv


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration."""


# key -> (type, default); None default means required
_SCHEMA: dict[str, tuple[type, object]] = {
    "array.rows": (int, None),
    "array.cols": (int, None),
    "array.period_cm": (float, None),
    "array.period_y_cm": (float, float("nan")),
    "design.f_ghz": (float, 27.5),
    "band.f_start_ghz": (float, 23.5),
    "band.f_stop_ghz": (float, 29.5),
    "band.n_points": (int, 13),
    "scene.tx.angle_deg": (float, 45.0),
    "scene.tx.distance_cm": (float, float("nan")),
    "scene.rx.angle_deg": (float, 0.0),
    "scene.rx.distance_cm": (float, float("nan")),
    "scene.horn_q": (float, 49.0),
    "scene.element_q": (float, 1.0),
    "unitcell.table": (str, ""),
    "optimizer.method": (str, "exhaustive"),
    "optimizer.seed": (int, 0),
    "sweep.mode": (str, "reoptimize"),
    "sweep.pattern": (str, ""),
    "cut.start_deg": (float, -90.0),
    "cut.stop_deg": (float, 90.0),
    "cut.step_deg": (float, 0.5),
    "link.r1_cm": (float, float("nan")),
    "link.r2_cm": (float, float("nan")),
    "link.gain_dbi": (float, 20.0),
    "link.efficiency": (float, 1.0),
    "link.pattern": (str, ""),
    "output.pattern": (str, ""),
    "output.summary": (str, ""),
    "output.csv": (str, ""),
}


def parse_config_text(text: str) -> dict[str, str]:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _isset(x: float) -> bool:
    return not np.isnan(x)


@dataclass
class ScenarioConfig:
    values: dict[str, object]
    base_dir: Path = field(default_factory=Path.cwd)

    @classmethod
    def from_text(cls, text: str, base_dir: Path | None = None) -> "ScenarioConfig":
        raw = parse_config_text(text)
        values: dict[str, object] = {}
        for key, (typ, default) in _SCHEMA.items():
            if key in raw:
                try:
                    values[key] = typ(raw[key])
                except ValueError:
                    raise ConfigError(f"{key}: cannot parse {raw[key]!r} as {typ.__name__}") from None
            elif default is None:
                raise ConfigError(f"missing required key {key!r}")
            else:
                values[key] = default
        cfg = cls(values, base_dir or Path.cwd())
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text, path.parent)

    def __getitem__(self, key: str):
        return self.values[key]

    def validate(self) -> None:
        v = self.values
        if v["array.rows"] < 1 or v["array.cols"] < 1:
            raise ConfigError("array dimensions must be positive")
        if not v["array.period_cm"] > 0:
            raise ConfigError("array.period_cm must be positive")
        if v["band.n_points"] < 1:
            raise ConfigError("band.n_points must be at least 1")
        if v["band.n_points"] == 1:
            if v["band.f_start_ghz"] > v["band.f_stop_ghz"]:
                raise ConfigError("band.f_start_ghz must not exceed band.f_stop_ghz")
        elif not v["band.f_start_ghz"] < v["band.f_stop_ghz"]:
            raise ConfigError("band.f_start_ghz must be below band.f_stop_ghz")
        for key in ("design.f_ghz", "band.f_start_ghz", "band.f_stop_ghz"):
            if not v[key] > 0:
                raise ConfigError(f"{key} must be positive")
        for key in ("scene.tx.angle_deg", "scene.rx.angle_deg"):
            if not -90.0 < v[key] < 90.0:
                raise ConfigError(f"{key} must lie strictly within +-90 deg")
        for key in ("scene.tx.distance_cm", "scene.rx.distance_cm", "link.r1_cm", "link.r2_cm"):
            if _isset(v[key]) and not v[key] > 0:
                raise ConfigError(f"{key} must be positive")
        if v["optimizer.method"] not in OPTIMIZERS:
            raise ConfigError(f"optimizer.method must be one of {', '.join(OPTIMIZERS)}")
        if v["sweep.mode"] not in ("reoptimize", "fixed"):
            raise ConfigError("sweep.mode must be 'reoptimize' or 'fixed'")
        if not v["cut.step_deg"] > 0 or v["cut.stop_deg"] < v["cut.start_deg"]:
            raise ConfigError("cut range needs start <= stop and a positive step")
        if not 0 <= v["link.efficiency"] <= 1:
            raise ConfigError("link.efficiency must lie in [0, 1]")

    # -- derived SI objects --

    def layout(self) -> ArrayLayout:
        px = self["array.period_cm"] / 100
        py = self["array.period_y_cm"] / 100 if _isset(self["array.period_y_cm"]) else px
        return ArrayLayout(self["array.rows"], self["array.cols"], px, py)

    @property
    def design_frequency(self) -> Frequency:
        return Frequency(self["design.f_ghz"] * 1e9)

    def band(self) -> np.ndarray:
        return np.linspace(self["band.f_start_ghz"], self["band.f_stop_ghz"],
                           self["band.n_points"]) * 1e9

    def _terminal(self, side: str, far: bool = False) -> Terminal:
        theta = np.deg2rad(self[f"scene.{side}.angle_deg"])
        dist = self[f"scene.{side}.distance_cm"]
        if far or not _isset(dist):
            return DirectionTerminal.at_angle(theta)
        return PointTerminal.at_angle(theta, dist / 100, self["scene.horn_q"])

    def scene(self, f_hz: float | None = None, far: bool = False) -> Scene:
        f = self.design_frequency if f_hz is None else Frequency(f_hz)
        return Scene(self._terminal("tx", far), self._terminal("rx", far), f,
                     element_q=self["scene.element_q"])

    def resolve(self, key: str) -> Optional[Path]:
        s = self[key]
        if not s:
            return None
        p = Path(s)
        return p if p.is_absolute() else self.base_dir / p

    def response(self) -> UnitCellResponse:
        path = self.resolve("unitcell.table")
        if path is None:
            return default_response()
        try:
            return read_response_csv(path)
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"unit-cell table {path}: {exc}") from None
