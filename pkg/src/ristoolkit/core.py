"""Units, coordinate frames and array geometry.

Conventions used throughout the package: the surface lies in the z = 0
plane centered at the origin, scattering happens into z > 0 and the
incidence plane is x-z with angles measured from +z.  Column ``j`` of the
array sits at a fixed x, so column-level biasing can only shape the phase
along x.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

SPEED_OF_LIGHT = 299792458.0
"Speed of light in vacuum, m/s."

_UNIT_TOL = 1e-12


def wrap_phase(x):
    """Wrap angles (rad) into the half-open interval (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)


@dataclass(frozen=True)
class Frequency:
    hz: float

    def __post_init__(self):
        if not np.isfinite(self.hz) or self.hz <= 0:
            raise ValueError(f"frequency must be positive, got {self.hz!r} Hz")

    @classmethod
    def ghz(cls, value: float) -> "Frequency":
        return cls(value * 1e9)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.hz


FrequencyLike = Union[Frequency, float]


def as_frequency(f: FrequencyLike) -> Frequency:
    """Accept either a :class:`Frequency` or a bare value in Hz."""
    return f if isinstance(f, Frequency) else Frequency(float(f))


def wavelength(f: FrequencyLike) -> float:
    return as_frequency(f).wavelength


def wavenumber(f: FrequencyLike) -> float:
    """Free-space wavenumber 2*pi*f/c in rad/m."""
    return 2 * np.pi * as_frequency(f).hz / SPEED_OF_LIGHT


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def direction_from_angle(theta: float, phi: float = 0.0) -> np.ndarray:
    """Unit vector at polar angle ``theta`` from +z and azimuth ``phi`` from +x (rad).

    With ``phi = 0`` the vector lies in the x-z incidence plane, positive
    angles on the +x side.
    """
    return np.array([np.sin(theta) * np.cos(phi),
                     np.sin(theta) * np.sin(phi),
                     np.cos(theta)])


def _check_unit(v: np.ndarray, what: str):
    if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
        raise ValueError(f"{what} must be unit length, got norm {np.linalg.norm(v)!r}")


@dataclass(frozen=True)
class ArrayLayout:
    """Rectangular grid of unit cells in the z = 0 plane, centered at the origin.

    Element ``(i, j)`` (row ``i``, column ``j``) sits at
    ``((j - (n_cols-1)/2) * period_x, (i - (n_rows-1)/2) * period_y, 0)``.
    """

    n_rows: int
    n_cols: int
    period_x: float
    period_y: float

    def __post_init__(self):
        if int(self.n_rows) != self.n_rows or int(self.n_cols) != self.n_cols:
            raise ValueError("row and column counts must be integers")
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError(f"layout needs at least one row and one column, "
                             f"got {self.n_rows}x{self.n_cols}")
        if not (self.period_x > 0 and self.period_y > 0):
            raise ValueError("periods must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def size_x(self) -> float:
        return self.n_cols * self.period_x

    @property
    def size_y(self) -> float:
        return self.n_rows * self.period_y

    @property
    def area(self) -> float:
        return self.size_x * self.size_y

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.size_x, self.size_y))

    @property
    def cell_area(self) -> float:
        return self.period_x * self.period_y

    def column_x(self) -> np.ndarray:
        return (np.arange(self.n_cols) - (self.n_cols - 1) / 2) * self.period_x

    def row_y(self) -> np.ndarray:
        return (np.arange(self.n_rows) - (self.n_rows - 1) / 2) * self.period_y

    def positions(self) -> np.ndarray:
        """Element positions as an ``(n_rows, n_cols, 3)`` array in meters."""
        x, y = np.meshgrid(self.column_x(), self.row_y())
        return np.stack([x, y, np.zeros_like(x)], axis=-1)


def make_layout(n_rows: int, n_cols: int, period_x: float,
                period_y: float | None = None) -> ArrayLayout:
    return ArrayLayout(n_rows, n_cols, period_x,
                       period_x if period_y is None else period_y)


def electrical_size(layout: ArrayLayout, f: FrequencyLike) -> tuple[float, float]:
    """Aperture extents (x, y) in wavelengths."""
    lam = wavelength(f)
    return (layout.size_x / lam, layout.size_y / lam)


def element_distances(layout: ArrayLayout, point) -> np.ndarray:
    """Euclidean distance (m) from every element to ``point``, shape ``(n_rows, n_cols)``."""
    point = np.asarray(point, dtype=float)
    return np.linalg.norm(layout.positions() - point, axis=-1)


# --- scene description -----------------------------------------------------

@dataclass(frozen=True)
class PointTerminal:
    """Antenna at a finite position, radiating a spherical wave.

    The antenna boresight is aimed at the array center and its power
    pattern is modeled as ``cos(theta)**horn_q`` off boresight.
    """

    position: tuple[float, float, float]
    horn_q: float = 49.0

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float)
        if p.shape != (3,):
            raise ValueError("position must be a 3-vector")
        if not p[2] > 0:
            raise ValueError("terminal must lie in front of the surface (z > 0)")
        if self.horn_q < 0:
            raise ValueError("horn_q must be non-negative")
        object.__setattr__(self, "position", tuple(float(c) for c in p))

    @classmethod
    def at_angle(cls, theta: float, distance: float, horn_q: float = 49.0,
                 phi: float = 0.0) -> "PointTerminal":
        return cls(tuple(distance * direction_from_angle(theta, phi)), horn_q)


@dataclass(frozen=True)
class DirectionTerminal:
    """Far-field terminal: plane-wave incidence from, or observation toward, ``direction``."""

    direction: tuple[float, float, float]

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,):
            raise ValueError("direction must be a 3-vector")
        _check_unit(d, "direction")
        if not d[2] > 0:
            raise ValueError("direction must point into the z > 0 half-space")
        object.__setattr__(self, "direction", tuple(float(c) for c in d))

    @classmethod
    def at_angle(cls, theta: float, phi: float = 0.0) -> "DirectionTerminal":
        return cls(tuple(direction_from_angle(theta, phi)))


Terminal = Union[PointTerminal, DirectionTerminal]


@dataclass(frozen=True)
class Scene:
    """Transmitter/receiver placement around the surface.

    ``element_q`` is the exponent of the unit-cell element pattern
    ``cos(theta)**element_q`` applied on both the incident and scattered
    legs.
    """

    feed: Terminal
    observation: Terminal
    frequency: Frequency
    polarization_tx: tuple[float, float, float] = (1.0, 0.0, 0.0)
    polarization_rx: tuple[float, float, float] = (1.0, 0.0, 0.0)
    element_q: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "frequency", as_frequency(self.frequency))
        for name in ("polarization_tx", "polarization_rx"):
            p = np.asarray(getattr(self, name), dtype=float)
            _check_unit(p, name)
            object.__setattr__(self, name, tuple(float(c) for c in p))
        if self.element_q < 0:
            raise ValueError("element_q must be non-negative")

    @property
    def polarization_match(self) -> float:
        return float(abs(np.dot(self.polarization_tx, self.polarization_rx)))

    def swapped(self) -> "Scene":
        """The reciprocal scene: transmitter and receiver exchanged."""
        return Scene(self.observation, self.feed, self.frequency,
                     self.polarization_rx, self.polarization_tx, self.element_q)
