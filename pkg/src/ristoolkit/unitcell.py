"""Two-state reflection model of the column-biased unit cell.

The response is a table of complex reflection coefficients per state,
interpolated piecewise-linearly in magnitude and unwrapped phase.  The
built-in table is anchored to published magnitude envelopes and ON/OFF
phase differences; absolute phases are a reference choice (see
:func:`default_response`) that does not affect pattern selection.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from .core import FrequencyLike, as_frequency


class State(IntEnum):
    OFF = 0
    ON = 1


CSV_COLUMNS = ("f_hz", "mag_on", "phase_on_deg", "mag_off", "phase_off_deg")

_PASSIVITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class UnitCellResponse:
    """Tabulated reflection coefficient per state.

    Attributes
    ----------
    freqs_hz : ndarray
        Strictly increasing sample frequencies.
    mag_on, mag_off : ndarray
        Linear reflection magnitudes, each in [0, 1].
    phase_on, phase_off : ndarray
        Unwrapped reflection phases in radians.
    """

    freqs_hz: np.ndarray
    mag_on: np.ndarray
    phase_on: np.ndarray
    mag_off: np.ndarray
    phase_off: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("freqs_hz", "mag_on", "phase_on", "mag_off", "phase_off"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 1:
                raise ValueError(f"{name} must be one-dimensional")
            a.setflags(write=False)
            arrays[name] = a
        n = arrays["freqs_hz"].size
        if n < 1 or any(a.size != n for a in arrays.values()):
            raise ValueError("response columns must be non-empty and equally long")
        if np.any(np.diff(arrays["freqs_hz"]) <= 0):
            raise ValueError("sample frequencies must be strictly increasing")
        if arrays["freqs_hz"][0] <= 0:
            raise ValueError("sample frequencies must be positive")
        for name in ("mag_on", "mag_off"):
            m = arrays[name]
            if np.any(m < 0) or np.any(m > 1 + _PASSIVITY_TOL):
                raise ValueError(f"{name} must lie in [0, 1] (passive cell)")
        for name, a in arrays.items():
            object.__setattr__(self, name, a)
        object.__setattr__(self, "_gamma", {
            State.ON: arrays["mag_on"] * np.exp(1j * arrays["phase_on"]),
            State.OFF: arrays["mag_off"] * np.exp(1j * arrays["phase_off"]),
        })

    @property
    def band(self) -> tuple[float, float]:
        return (float(self.freqs_hz[0]), float(self.freqs_hz[-1]))

    def contains(self, f: FrequencyLike) -> bool:
        hz = as_frequency(f).hz
        return self.band[0] <= hz <= self.band[1]

    def samples(self, state: State) -> np.ndarray:
        """Complex sample values of ``state`` at :attr:`freqs_hz`."""
        return self._gamma[State(state)].copy()

    def _mag_phase(self, state: State):
        if State(state) is State.ON:
            return self.mag_on, self.phase_on
        return self.mag_off, self.phase_off

    def phase(self, state: State, f: FrequencyLike) -> float:
        """Interpolated unwrapped phase (rad) of ``state`` at ``f``."""
        hz = self._check_band(f)
        return float(np.interp(hz, self.freqs_hz, self._mag_phase(state)[1]))

    def magnitude(self, state: State, f: FrequencyLike) -> float:
        hz = self._check_band(f)
        return float(np.interp(hz, self.freqs_hz, self._mag_phase(state)[0]))

    def phase_difference(self, f: FrequencyLike) -> float:
        """arg(Gamma_OFF) - arg(Gamma_ON) at ``f``, radians, from the unwrapped tables."""
        return self.phase(State.OFF, f) - self.phase(State.ON, f)

    def _check_band(self, f: FrequencyLike) -> float:
        hz = as_frequency(f).hz
        lo, hi = self.band
        if not lo <= hz <= hi:
            raise ValueError(f"{hz / 1e9:.6g} GHz is outside the tabulated band "
                             f"[{lo / 1e9:.6g}, {hi / 1e9:.6g}] GHz")
        return hz

    def reflection(self, state: State, f: FrequencyLike) -> complex:
        return reflection(self, state, f)


def reflection(resp: UnitCellResponse, state: State, f: FrequencyLike) -> complex:
    """Interpolated complex reflection coefficient of ``state`` at ``f``.

    Frequencies outside the tabulated band raise ``ValueError``; the table
    is never extrapolated.  At a sample frequency the stored sample is
    returned unchanged.
    """
    hz = resp._check_band(f)
    idx = np.searchsorted(resp.freqs_hz, hz)
    if idx < resp.freqs_hz.size and resp.freqs_hz[idx] == hz:
        return complex(resp._gamma[State(state)][idx])
    mag, ph = resp._mag_phase(state)
    m = np.interp(hz, resp.freqs_hz, mag)
    p = np.interp(hz, resp.freqs_hz, ph)
    return complex(m * np.exp(1j * p))


# anchor frequencies with the published ON/OFF phase difference (deg)
_ANCHOR_GHZ = np.array([22.5, 23.5, 29.5, 30.0])
_ANCHOR_DPHI_DEG = np.array([224.0, 220.0, 170.0, 160.0])


def default_response() -> UnitCellResponse:
    """Built-in response of the printed H-resonator cell, 22.5-30 GHz.

    Magnitudes fall linearly across the band: OFF from 0.94 to 0.87, ON
    from 0.74 to 0.50.  The OFF phase is a linear ramp from 0 to -90 deg
    and the ON phase trails it by the interpolated phase difference.
    """
    f = _ANCHOR_GHZ * 1e9
    t = (f - f[0]) / (f[-1] - f[0])
    phase_off = np.deg2rad(-90.0 * t)
    return UnitCellResponse(
        freqs_hz=f,
        mag_on=0.74 - 0.24 * t,
        phase_on=phase_off - np.deg2rad(_ANCHOR_DPHI_DEG),
        mag_off=0.94 - 0.07 * t,
        phase_off=phase_off,
    )


def uniform_response(gamma: complex, band_hz: tuple[float, float]) -> UnitCellResponse:
    """Frequency-flat response with the same ``gamma`` in both states.

    Mostly useful for reference plates (Gamma = 1) and sanity checks.
    """
    lo, hi = band_hz
    mag = np.full(2, abs(gamma))
    ph = np.full(2, np.angle(gamma))
    return UnitCellResponse(np.array([lo, hi], dtype=float), mag, ph, mag, ph)


def read_response_csv(path) -> UnitCellResponse:
    """Load a response table with columns f_hz, mag_on, phase_on_deg, mag_off, phase_off_deg."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        rows = [[float(r[c]) for c in CSV_COLUMNS] for r in reader]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    a = np.array(rows)
    return UnitCellResponse(
        freqs_hz=a[:, 0],
        mag_on=a[:, 1],
        phase_on=np.unwrap(np.deg2rad(a[:, 2])),
        mag_off=a[:, 3],
        phase_off=np.unwrap(np.deg2rad(a[:, 4])),
    )


def write_response_csv(resp: UnitCellResponse, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in zip(resp.freqs_hz, resp.mag_on, np.rad2deg(resp.phase_on),
                       resp.mag_off, np.rad2deg(resp.phase_off)):
            w.writerow([repr(float(v)) for v in row])


def sensitivity_acceptable(r_on: float, r_off: float) -> bool:
    """Whether a printed switch keeps the cell within its validated window.

    The window is 4-10 ohm ON and at least 1 kohm OFF, both inclusive.
    """
    if r_on <= 0 or r_off <= 0:
        raise ValueError("resistances must be positive")
    return 4.0 <= r_on <= 10.0 and r_off >= 1000.0
