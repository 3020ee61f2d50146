"""Scattered field of the surface by coherent element summation.

Every element contributes ``w_t * Gamma_state * w_r``.  For a point
terminal at distance ``R`` from the element the leg weight is::

    cos(theta_e)**element_q * cos(theta_h)**horn_q * exp(-1j*k*R) / R

where ``theta_e`` is measured off the surface normal and ``theta_h`` off
the horn boresight (aimed at the array center).  For a far-field terminal
along unit vector ``u`` it is ``cos(theta_e)**element_q * exp(1j*k*u.r)``.
Amplitudes are relative: one element with Gamma = 1 and both terminals on
boresight at 1 m gives |E| = 1.  Mutual coupling is ignored.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import (ArrayLayout, DirectionTerminal, FrequencyLike, PointTerminal,
                   Scene, Terminal, as_frequency, direction_from_angle,
                   wavelength, wavenumber)
from .unitcell import State, UnitCellResponse, reflection


class ReferenceNullWarning(RuntimeWarning):
    """The all-OFF reference field vanished; enhancement reported as +inf."""


def leg_weights(layout: ArrayLayout, terminal: Terminal, f: FrequencyLike,
                element_q: float = 1.0) -> np.ndarray:
    """Complex weight of the terminal-to-element leg for every element, ``(n_rows, n_cols)``."""
    k = wavenumber(f)
    r = layout.positions()
    if isinstance(terminal, PointTerminal):
        p = np.asarray(terminal.position)
        d = p - r
        dist = np.linalg.norm(d, axis=-1)
        if np.any(dist == 0):
            raise ValueError("terminal coincides with an array element")
        cos_e = d[..., 2] / dist
        boresight = -p / np.linalg.norm(p)
        cos_h = np.clip(-(d @ boresight) / dist, 0.0, None)
        return (cos_e ** element_q) * (cos_h ** terminal.horn_q) * np.exp(-1j * k * dist) / dist
    if isinstance(terminal, DirectionTerminal):
        u = np.asarray(terminal.direction)
        return np.full(layout.shape, u[2] ** element_q) * np.exp(1j * k * (r @ u))
    raise TypeError(f"unsupported terminal {terminal!r}")


def element_terms(layout: ArrayLayout, scene: Scene, f: FrequencyLike | None = None) -> np.ndarray:
    """Product of both leg weights (without Gamma) for every element."""
    f = scene.frequency if f is None else as_frequency(f)
    wt = leg_weights(layout, scene.feed, f, scene.element_q)
    wr = leg_weights(layout, scene.observation, f, scene.element_q)
    return wt * wr * scene.polarization_match


def _column_states(layout: ArrayLayout, mask) -> np.ndarray:
    cols = np.asarray(getattr(mask, "columns", mask), dtype=bool)
    if cols.shape != (layout.n_cols,):
        raise ValueError(f"mask has {cols.size} columns, layout has {layout.n_cols}")
    return cols


def gamma_map(layout: ArrayLayout, mask, resp: UnitCellResponse, f: FrequencyLike) -> np.ndarray:
    cols = _column_states(layout, mask)
    g_on = reflection(resp, State.ON, f)
    g_off = reflection(resp, State.OFF, f)
    return np.broadcast_to(np.where(cols, g_on, g_off), layout.shape)


@dataclass(frozen=True)
class FieldResult:
    value: complex
    frequency_hz: float
    scene: Scene

    @property
    def magnitude(self) -> float:
        return abs(self.value)


def scattered_field(layout: ArrayLayout, mask, resp: UnitCellResponse, scene: Scene,
                    f: FrequencyLike | None = None) -> FieldResult:
    """Total field at the scene's observation terminal for a column mask.

    ``f`` defaults to the scene frequency.  Raises ``ValueError`` for
    out-of-band frequencies or an element placed on a terminal.
    """
    f = scene.frequency if f is None else as_frequency(f)
    terms = element_terms(layout, scene, f)
    gam = gamma_map(layout, mask, resp, f)
    return FieldResult(complex(np.sum(gam * terms)), f.hz, scene)


def gain_enhancement(layout: ArrayLayout, mask, resp: UnitCellResponse, scene: Scene,
                     f: FrequencyLike | None = None) -> float:
    """Field gain of ``mask`` over the all-OFF surface, dB.

    A vanishing reference returns ``+inf`` and emits
    :class:`ReferenceNullWarning`.
    """
    e = scattered_field(layout, mask, resp, scene, f).magnitude
    ref = scattered_field(layout, np.zeros(layout.n_cols, bool), resp, scene, f).magnitude
    if ref == 0:
        warnings.warn("all-OFF reference field is zero", ReferenceNullWarning, stacklevel=2)
        return float("inf")
    with np.errstate(divide="ignore"):
        return float(20 * np.log10(e / ref))


@dataclass(frozen=True)
class PatternCut:
    angles_deg: np.ndarray
    power_db: np.ndarray

    @property
    def peak_angle_deg(self) -> float:
        return float(self.angles_deg[np.argmax(self.power_db)])

    def rows(self):
        return zip(self.angles_deg.tolist(), self.power_db.tolist())


def cut_angles(start_deg: float, stop_deg: float, step_deg: float) -> np.ndarray:
    if step_deg <= 0:
        raise ValueError("step must be positive")
    if stop_deg < start_deg:
        raise ValueError("angle range must be increasing")
    n = int(np.floor((stop_deg - start_deg) / step_deg + 1e-9)) + 1
    return start_deg + step_deg * np.arange(n)


def pattern_cut(layout: ArrayLayout, mask, resp: UnitCellResponse, incidence: Terminal,
                f: FrequencyLike, angle_range: tuple[float, float] = (-90.0, 90.0),
                step: float = 0.5, element_q: float = 1.0) -> PatternCut:
    """Far-field power over observation angles in the x-z plane, dB relative to peak.

    Angles are given in degrees since the cut is an output table.  Grazing
    directions near +-90 deg are suppressed by the element pattern.
    """
    angles = cut_angles(angle_range[0], angle_range[1], step)
    f = as_frequency(f)
    gam = gamma_map(layout, mask, resp, f)
    wt = leg_weights(layout, incidence, f, element_q)
    k = wavenumber(f)
    pos = layout.positions()
    th = np.deg2rad(angles)
    u = np.stack([np.sin(th), np.zeros_like(th), np.cos(th)], axis=-1)
    src = (gam * wt).reshape(-1)
    steer = np.exp(1j * k * (pos.reshape(-1, 3) @ u.T))
    elem = np.clip(u[:, 2], 0.0, None) ** element_q
    amp = np.abs(src @ steer) * elem
    with np.errstate(divide="ignore"):
        p = 20 * np.log10(amp)
    p = p - np.max(p)
    return PatternCut(angles, p)


def far_field_factor(layout: ArrayLayout, mask, resp: UnitCellResponse, inc_dir, obs_dir,
                     f: FrequencyLike, element_q: float = 1.0) -> complex:
    """Scattering amplitude F with sigma = 4*pi*|F|^2.

    Scaled by cell area over wavelength so that a uniform Gamma = 1
    aperture viewed at normal incidence and observation gives the
    flat-plate value A/lambda.
    """
    f = as_frequency(f)
    inc = DirectionTerminal(tuple(inc_dir))
    obs = DirectionTerminal(tuple(obs_dir))
    gam = gamma_map(layout, mask, resp, f)
    terms = leg_weights(layout, inc, f, element_q) * leg_weights(layout, obs, f, element_q)
    return complex(layout.cell_area / wavelength(f) * np.sum(gam * terms))


def rcs(layout: ArrayLayout, mask, resp: UnitCellResponse, inc_dir, obs_dir,
        f: FrequencyLike, element_q: float = 1.0) -> float:
    """Bistatic radar cross section in m^2."""
    F = far_field_factor(layout, mask, resp, inc_dir, obs_dir, f, element_q)
    return float(4 * np.pi * abs(F) ** 2)


def plane_wave_scene(inc_angle: float, obs_angle: float, f: FrequencyLike,
                     element_q: float = 1.0) -> Scene:
    """Far-field scene in the x-z plane; angles in radians from +z."""
    return Scene(DirectionTerminal(tuple(direction_from_angle(inc_angle))),
                 DirectionTerminal(tuple(direction_from_angle(obs_angle))),
                 as_frequency(f), element_q=element_q)
