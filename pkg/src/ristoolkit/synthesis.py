"""Column pattern synthesis for the 1-bit surface.

Pipeline: target phase per cell from the feed and reflection geometry,
1-bit quantization against the two cell states, majority collapse to one
state per bias column, then optionally a direct search over column masks
that maximizes the received field magnitude.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fields
from .core import (ArrayLayout, DirectionTerminal, FrequencyLike, PointTerminal,
                   Scene, Terminal, as_frequency, wavenumber, wrap_phase)
from .unitcell import State, UnitCellResponse

EXHAUSTIVE_MAX_COLUMNS = 24
_CHUNK = 1 << 20  # complex values evaluated per block in the exhaustive search


@dataclass(frozen=True)
class PatternMask:
    """Bias state per column (True = ON), plus the pre-collapse cell states if known."""

    columns: tuple[bool, ...]
    cells: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        cols = tuple(bool(c) for c in np.asarray(self.columns, dtype=bool).ravel())
        if not cols:
            raise ValueError("mask needs at least one column")
        object.__setattr__(self, "columns", cols)
        if self.cells is not None:
            cells = np.asarray(self.cells, dtype=bool)
            if cells.ndim != 2 or cells.shape[1] != len(cols):
                raise ValueError("cell states must be (rows, n_cols)")
            object.__setattr__(self, "cells", cells)

    def __len__(self):
        return len(self.columns)

    @property
    def n_on(self) -> int:
        return sum(self.columns)

    def as_array(self) -> np.ndarray:
        return np.array(self.columns, dtype=bool)

    def to_bitstring(self) -> str:
        return "".join("1" if c else "0" for c in self.columns)

    @classmethod
    def from_bitstring(cls, s: str) -> "PatternMask":
        s = s.strip()
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a 0/1 pattern string: {s!r}")
        return cls(tuple(ch == "1" for ch in s))

    def to_json(self) -> str:
        return json.dumps({"columns": [int(c) for c in self.columns]})

    @classmethod
    def from_json(cls, text: str) -> "PatternMask":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"pattern is not valid JSON: {exc}") from None
        cols = obj.get("columns") if isinstance(obj, dict) else None
        if not isinstance(cols, list) or any(c not in (0, 1) or isinstance(c, bool) for c in cols):
            raise ValueError('expected {"columns": [0|1, ...]}')
        return cls(tuple(c == 1 for c in cols))

    @classmethod
    def all_off(cls, n: int) -> "PatternMask":
        return cls((False,) * n)

    @classmethod
    def all_on(cls, n: int) -> "PatternMask":
        return cls((True,) * n)


def _path_phase(layout: ArrayLayout, terminal: Terminal, k: float) -> np.ndarray:
    r = layout.positions()
    if isinstance(terminal, PointTerminal):
        d = np.linalg.norm(r - np.asarray(terminal.position), axis=-1)
        if np.any(d == 0):
            raise ValueError("feed coincides with an array element")
        return k * d
    if isinstance(terminal, DirectionTerminal):
        return -k * (r @ np.asarray(terminal.direction))
    raise TypeError(f"unsupported terminal {terminal!r}")


def phase_profile(layout: ArrayLayout, feed, u_r, f: FrequencyLike) -> np.ndarray:
    """Required reflection phase per cell, wrapped to (-pi, pi].

    ``phi = k*|r_e - r_f| - k*(u_r . r_e)`` evaluated with the exact
    spherical distance to the feed.  ``feed`` may be a 3-vector position, a
    :class:`PointTerminal`, or a :class:`DirectionTerminal` (plane-wave
    feed, whose distance term reduces to ``-k*(u_f . r_e)``).  ``u_r`` is a
    unit direction or a terminal; a :class:`PointTerminal` observer uses its
    spherical distance instead of the plane-wave term.
    """
    k = wavenumber(f)
    if not isinstance(feed, (PointTerminal, DirectionTerminal)):
        feed = PointTerminal(tuple(np.asarray(feed, dtype=float)))
    if not isinstance(u_r, (PointTerminal, DirectionTerminal)):
        u_r = DirectionTerminal(tuple(np.asarray(u_r, dtype=float)))
    return wrap_phase(_path_phase(layout, feed, k) + _path_phase(layout, u_r, k))


def quantize_1bit(profile: np.ndarray, resp: UnitCellResponse, f: FrequencyLike) -> np.ndarray:
    """Cell states (True = ON) whose phase is closest to the target; ties go OFF."""
    err_on = np.abs(wrap_phase(profile - resp.phase(State.ON, f)))
    err_off = np.abs(wrap_phase(profile - resp.phase(State.OFF, f)))
    return err_on < err_off


def collapse_columns(cell_states: np.ndarray) -> PatternMask:
    """Majority vote per column; an even split goes OFF."""
    cells = np.atleast_2d(np.asarray(cell_states, dtype=bool))
    n_on = cells.sum(axis=0)
    return PatternMask(tuple(2 * n_on > cells.shape[0]), cells=cells)


def quantized_mask(layout: ArrayLayout, scene: Scene, resp: UnitCellResponse,
                   f: FrequencyLike | None = None) -> PatternMask:
    """Phase-profile design for the scene, quantized then collapsed to columns."""
    f = scene.frequency if f is None else as_frequency(f)
    prof = phase_profile(layout, scene.feed, scene.observation, f)
    return collapse_columns(quantize_1bit(prof, resp, f))


@dataclass(frozen=True)
class ColumnContribution:
    """Field contributed by each column in each state at the observation point."""

    c_on: np.ndarray
    c_off: np.ndarray

    def __post_init__(self):
        on = np.asarray(self.c_on, dtype=complex).ravel()
        off = np.asarray(self.c_off, dtype=complex).ravel()
        if on.shape != off.shape or on.size == 0:
            raise ValueError("ON and OFF contributions must be equally long and non-empty")
        if not (np.all(np.isfinite(on)) and np.all(np.isfinite(off))):
            raise ValueError("contributions must be finite")
        object.__setattr__(self, "c_on", on)
        object.__setattr__(self, "c_off", off)

    @property
    def n_cols(self) -> int:
        return self.c_on.size

    def total(self, mask) -> complex:
        cols = np.asarray(getattr(mask, "columns", mask), dtype=bool)
        return complex(np.sum(np.where(cols, self.c_on, self.c_off)))

    def rotated(self, phase: float) -> "ColumnContribution":
        rot = np.exp(1j * phase)
        return ColumnContribution(self.c_on * rot, self.c_off * rot)


def column_contributions(layout: ArrayLayout, scene: Scene, resp: UnitCellResponse,
                         f: FrequencyLike | None = None) -> ColumnContribution:
    f = scene.frequency if f is None else as_frequency(f)
    col = fields.element_terms(layout, scene, f).sum(axis=0)
    return ColumnContribution(col * resp.reflection(State.ON, f),
                              col * resp.reflection(State.OFF, f))


def _bits(n_bits: int) -> np.ndarray:
    """All 2**n_bits masks as rows, first column most significant."""
    idx = np.arange(1 << n_bits)
    return ((idx[:, None] >> (n_bits - 1 - np.arange(n_bits))) & 1).astype(bool)


def _decode_index(index: int, n: int) -> tuple[bool, ...]:
    return tuple(bool((index >> (n - 1 - j)) & 1) for j in range(n))


def optimize_exhaustive(contrib: ColumnContribution) -> PatternMask:
    """Column mask maximizing |sum of contributions| over all 2**n assignments.

    Among exactly tied maxima the lexicographically smallest mask wins,
    with OFF < ON and column 0 most significant.

    The search splits the columns in two halves, tabulates every partial
    sum of each half and scans the outer sum block by block, so memory
    stays bounded for the 24-column cap.
    """
    n = contrib.n_cols
    if n > EXHAUSTIVE_MAX_COLUMNS:
        raise ValueError(f"exhaustive search is capped at {EXHAUSTIVE_MAX_COLUMNS} columns "
                         f"(got {n}); use optimize_greedy instead")
    delta = contrib.c_on - contrib.c_off
    base = complex(np.sum(contrib.c_off))
    n_hi = n // 2
    n_lo = n - n_hi
    hi = base + _bits(n_hi) @ delta[:n_hi]
    lo = _bits(n_lo) @ delta[n_hi:]
    rows_per_block = max(1, _CHUNK // lo.size)
    best_val, best_idx = -1.0, 0
    for start in range(0, hi.size, rows_per_block):
        block = np.abs(hi[start:start + rows_per_block, None] + lo[None, :])
        i = int(np.argmax(block))
        if block.flat[i] > best_val:
            best_val = float(block.flat[i])
            best_idx = (start + i // lo.size) * lo.size + i % lo.size
    return PatternMask(_decode_index(best_idx, n))


def contribution_quantized(contrib: ColumnContribution) -> PatternMask:
    """Per column, the state whose contribution phase lies closest to zero; ties go OFF.

    This is the quantized design expressed in contribution space: each
    element term carries the phase ``arg(gamma) - phi_target``, so for a
    single-row array it reproduces ``collapse_columns(quantize_1bit(...))``.
    """
    return PatternMask(tuple(np.abs(np.angle(contrib.c_on)) < np.abs(np.angle(contrib.c_off))))


def optimize_greedy(contrib: ColumnContribution, start=None) -> PatternMask:
    """Cyclic single-column flips from ``start`` until a full sweep improves nothing.

    ``start`` is the quantized mask; when omitted it is rebuilt from the
    contributions with :func:`contribution_quantized`.  A flip is taken
    only if it strictly increases |sum|, so the search terminates at a
    one-flip local optimum.
    """
    n = contrib.n_cols
    if start is None:
        start = contribution_quantized(contrib)
    cols = np.array(getattr(start, "columns", start), dtype=bool)
    if cols.shape != (n,):
        raise ValueError("start mask length does not match the contributions")
    delta = contrib.c_on - contrib.c_off
    total = complex(np.sum(np.where(cols, contrib.c_on, contrib.c_off)))
    while True:
        flipped = False
        for j in range(n):
            cand = total - delta[j] if cols[j] else total + delta[j]
            if abs(cand) > abs(total):
                cols[j] = not cols[j]
                total = cand
                flipped = True
        if not flipped:
            return PatternMask(tuple(cols))


OPTIMIZERS = ("quantized", "greedy", "exhaustive")


def synthesize(layout: ArrayLayout, scene: Scene, resp: UnitCellResponse,
               optimizer: str = "exhaustive", f: FrequencyLike | None = None) -> PatternMask:
    """Design a column mask for the scene with the chosen optimizer."""
    if optimizer not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {optimizer!r}; expected one of {OPTIMIZERS}")
    f = scene.frequency if f is None else as_frequency(f)
    q = quantized_mask(layout, scene, resp, f)
    if optimizer == "quantized":
        return q
    contrib = column_contributions(layout, scene, resp, f)
    if optimizer == "greedy":
        return optimize_greedy(contrib, q)
    return optimize_exhaustive(contrib)
