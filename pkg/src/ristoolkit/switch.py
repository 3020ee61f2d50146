"""Electrical model of a printed VO2 (or PIN) shunt switch.

The switch loads a matched line as a shunt impedance
``Z = (R || C) + j*omega*L`` with ``R`` set by the state.  Also here: a
least-squares fit of the parasitics to measured isolation, a piecewise
I-V model with a negative-resistance transition and its bias operating
points, and the thermal hysteresis of the metal-insulator transition.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares

from .core import FrequencyLike, as_frequency
from .unitcell import State

log = logging.getLogger(__name__)

TRANSITION_TIME_S = 0.4e-6
"OFF-to-ON switching time of the printed VO2 switch (metadata only)."

HEATING_THRESHOLD_C = 67.0
COOLING_THRESHOLD_C = 56.0


@dataclass(frozen=True)
class SwitchParams:
    r_on: float = 3.5
    r_off: float = 1000.0
    c_shunt: float = 0.0
    l_series: float = 0.0
    z0: float = 50.0

    def __post_init__(self):
        if not self.r_on > 0:
            raise ValueError("r_on must be positive")
        if not self.r_off > self.r_on:
            raise ValueError("r_off must exceed r_on")
        if self.c_shunt < 0 or self.l_series < 0:
            raise ValueError("parasitics must be non-negative")
        if not self.z0 > 0:
            raise ValueError("z0 must be positive")

    @property
    def on_off_ratio(self) -> float:
        return self.r_off / self.r_on


PIN_DATASHEET = SwitchParams(r_on=4.0, r_off=10e3, c_shunt=37e-15, l_series=1e-12)
"Nominal PIN diode parasitics (shunt C across R, series L)."


def shunt_impedance(params: SwitchParams, state: State, f: FrequencyLike) -> complex:
    w = 2 * np.pi * as_frequency(f).hz
    r = params.r_on if State(state) is State.ON else params.r_off
    z_rc = r / (1 + 1j * w * r * params.c_shunt)
    return complex(z_rc + 1j * w * params.l_series)


def shunt_s21(params: SwitchParams, state: State, f: FrequencyLike) -> complex:
    """Linear S21 of the shunt element on a matched line: 2Z / (2Z + z0)."""
    z = shunt_impedance(params, state, f)
    return 2 * z / (2 * z + params.z0)


def s21_db(params: SwitchParams, state: State, f: FrequencyLike) -> float:
    return float(20 * np.log10(abs(shunt_s21(params, state, f))))


# --- fitting ---------------------------------------------------------------

@dataclass(frozen=True)
class Measurement:
    """|S21| of one state at one frequency, dB (isolation/insertion loss as negative dB)."""

    f_hz: float
    state: State
    s21_db: float


FIT_PARAMETERS = ("r_on", "r_off", "c_shunt", "l_series")

# fit bounds and coarse-grid spans in convenient units: ohm, ohm, pF, pH
# optimizer variables: ohms, pF, pH, and log10(ohms) for r_off, whose
# plausible range spans several decades
_SCALE = {"r_on": 1.0, "r_off": 1.0, "c_shunt": 1e-12, "l_series": 1e-12}
_LOG = frozenset({"r_off"})
_BOUNDS = {"r_on": (0.1, 100.0), "r_off": (1.0, 6.0), "c_shunt": (0.0, 10.0),
           "l_series": (0.0, 500.0)}
_N_STARTS = 8
_GRID = {"r_on": np.linspace(1.0, 10.0, 19), "r_off": np.linspace(2.0, 5.0, 13),
         "c_shunt": np.linspace(0.0, 5.0, 26), "l_series": np.linspace(0.0, 200.0, 41)}


@dataclass(frozen=True)
class SwitchFit:
    params: SwitchParams
    residuals_db: np.ndarray
    converged: bool
    message: str = ""

    @property
    def max_residual_db(self) -> float:
        return float(np.max(np.abs(self.residuals_db)))


def _to_si(name: str, x):
    return 10.0 ** x * _SCALE[name] if name in _LOG else x * _SCALE[name]


def _model_db(values: np.ndarray, names: Sequence[str], base: SwitchParams,
              freqs: np.ndarray, on: np.ndarray) -> np.ndarray:
    """Vectorized |S21| dB for parameter rows ``values`` (scaled units) at every measurement."""
    p = {n: np.full(values.shape[0], getattr(base, n)) for n in FIT_PARAMETERS}
    for i, n in enumerate(names):
        p[n] = _to_si(n, values[:, i])
    w = 2 * np.pi * freqs[None, :]
    r = np.where(on[None, :], p["r_on"][:, None], p["r_off"][:, None])
    z = r / (1 + 1j * w * r * p["c_shunt"][:, None]) + 1j * w * p["l_series"][:, None]
    return 20 * np.log10(np.abs(2 * z / (2 * z + base.z0)))


def fit_switch_params(measurements: Iterable[Measurement], initial: SwitchParams = SwitchParams(),
                      free: Sequence[str] = ("r_on", "c_shunt", "l_series"),
                      max_nfev: int = 2000) -> SwitchFit:
    """Least-squares fit of shunt parameters to measured |S21| in dB.

    A deterministic coarse grid over the free parameters picks the start
    point (ties go to the smallest scaled parameter vector), then a
    bounded trust-region refinement polishes it.  Parameters not listed in
    ``free`` are held at their ``initial`` values.

    Parameters
    ----------
    measurements : iterable of Measurement
        At least two, spanning at least two frequencies.
    initial : SwitchParams
        Fixed values for the non-free parameters and the reference z0.
    free : sequence of str
        Subset of ``FIT_PARAMETERS``.

    Returns
    -------
    SwitchFit
        Best parameters found, per-measurement residuals (model - target, dB)
        and whether the refinement converged.  A fit that hits the
        iteration cap is still returned with its best point.
    """
    ms = list(measurements)
    if len(ms) < 2 or len({m.f_hz for m in ms}) < 2:
        raise ValueError("need at least two measurements at two or more frequencies")
    names = tuple(free)
    unknown = set(names) - set(FIT_PARAMETERS)
    if unknown or not names:
        raise ValueError(f"free parameters must be a non-empty subset of {FIT_PARAMETERS}")
    freqs = np.array([m.f_hz for m in ms], dtype=float)
    on = np.array([State(m.state) is State.ON for m in ms])
    target = np.array([m.s21_db for m in ms], dtype=float)

    mesh = np.meshgrid(*[_GRID[n] for n in names], indexing="ij")
    cand = np.stack([g.ravel() for g in mesh], axis=-1)
    if "r_on" in names and "r_off" in names:
        cand = cand[10.0 ** cand[:, names.index("r_off")] > cand[:, names.index("r_on")]]
    cost = np.sum((_model_db(cand, names, initial, freqs, on) - target) ** 2, axis=1)
    norms = np.linalg.norm(cand, axis=1)
    order = np.lexsort((norms, cost))

    lo = np.array([_BOUNDS[n][0] for n in names])
    hi = np.array([_BOUNDS[n][1] for n in names])

    def resid_fn(x):
        return _model_db(x[None, :], names, initial, freqs, on)[0] - target

    # polish the few best grid points; the landscape has shallow valleys
    # along which a single start can stall against a bound
    best_x, best_cost, sol = cand[order[0]], cost[order[0]], None
    for k in order[:_N_STARTS]:
        s = least_squares(resid_fn, np.clip(cand[k], lo, hi), bounds=(lo, hi), method="trf",
                          x_scale="jac", xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=max_nfev)
        if sol is None:
            sol = s
        if 2 * s.cost < best_cost:
            best_x, best_cost, sol = s.x, 2 * s.cost, s
    x = best_x
    fitted = replace(initial, **{n: float(_to_si(n, v)) for n, v in zip(names, x)})
    resid = resid_fn(x)
    converged = bool(sol.success)
    if not converged:
        log.warning("switch fit did not converge: %s", sol.message)
    return SwitchFit(fitted, resid, converged, str(sol.message))


def synthetic_measurements(params: SwitchParams, freqs_hz: Iterable[float],
                           states: Iterable[State] = (State.ON,)) -> list[Measurement]:
    states = tuple(states)
    return [Measurement(float(f), s, s21_db(params, s, f)) for f in freqs_hz for s in states]


# --- key-value parameter files ---------------------------------------------

_KV_KEYS = {"r_on_ohm": "r_on", "r_off_ohm": "r_off", "c_shunt_f": "c_shunt",
            "l_series_h": "l_series", "z0_ohm": "z0"}


def format_switch_params(params: SwitchParams) -> str:
    d = asdict(params)
    return "".join(f"{k} = {d[attr]!r}\n" for k, attr in _KV_KEYS.items())


def parse_switch_params(text: str) -> SwitchParams:
    """Parse ``key = value`` lines; ``#`` starts a comment, missing keys keep defaults."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep or key not in _KV_KEYS:
            raise ValueError(f"line {lineno}: expected one of {sorted(_KV_KEYS)} = <number>")
        values[_KV_KEYS[key]] = float(val)
    return SwitchParams(**values)


def read_switch_params(path) -> SwitchParams:
    with open(path) as fh:
        return parse_switch_params(fh.read())


def write_switch_params(params: SwitchParams, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_switch_params(params))


# --- I-V model ---------------------------------------------------------------

@dataclass(frozen=True)
class IVModel:
    """Piecewise-linear I-V curve of the switch, traced with increasing current.

    OFF branch ``I = V / r_off_branch`` up to ``v_threshold``; a transition
    segment with negative dV/dI down to ``(i_hold * r_on_branch, i_hold)``;
    then the ON branch ``V = I * r_on_branch`` for ``I >= i_hold``.
    """

    r_off_branch: float = 1000.0
    v_threshold: float = 2.0
    i_hold: float = 0.1
    r_on_branch: float = 4.0

    def __post_init__(self):
        if min(self.r_off_branch, self.v_threshold, self.i_hold, self.r_on_branch) <= 0:
            raise ValueError("I-V parameters must be positive")
        if not self.i_hold * self.r_on_branch < self.v_threshold:
            raise ValueError("ON-branch hold voltage must sit below the threshold "
                             "(otherwise there is no negative-resistance segment)")
        if not self.v_threshold / self.r_off_branch < self.i_hold:
            raise ValueError("threshold current must sit below the hold current")

    @property
    def threshold_point(self) -> tuple[float, float]:
        return (self.v_threshold, self.v_threshold / self.r_off_branch)

    @property
    def hold_point(self) -> tuple[float, float]:
        return (self.i_hold * self.r_on_branch, self.i_hold)

    @property
    def transition_slope(self) -> float:
        """dV/dI along the transition segment, ohm (negative)."""
        (v1, i1), (v2, i2) = self.threshold_point, self.hold_point
        return (v2 - v1) / (i2 - i1)

    def segments(self):
        """(label, start (V, I), direction (dV, dI), t_max) with t in [0, t_max]."""
        v_t, i_t = self.threshold_point
        v_h, i_h = self.hold_point
        return [
            ("off", (0.0, 0.0), (v_t, i_t), 1.0),
            ("transition", (v_t, i_t), (v_h - v_t, i_h - i_t), 1.0),
            ("on", (v_h, i_h), (self.r_on_branch, 1.0), np.inf),
        ]


class Bias(str, Enum):
    VOLTAGE = "voltage"
    CURRENT = "current"


def operating_points(iv: IVModel, bias: Bias | str, value: float,
                     source_resistance: float | None = None) -> list[tuple[float, float, str]]:
    """Intersections of the source load line with the I-V curve.

    A voltage source ``value`` with series ``source_resistance`` (default
    0) gives the load line ``V = value - I*Rs``; a current source with
    shunt ``source_resistance`` (default infinite) gives
    ``I = value - V/Rs``.  Returns ``(V, I, branch)`` triples sorted by
    current; points shared by adjacent branches are reported once, under
    the lower-current branch label.
    """
    if value < 0:
        raise ValueError("bias value must be non-negative")
    bias = Bias(bias)
    # load line a*V + b*I = c
    if bias is Bias.VOLTAGE:
        rs = 0.0 if source_resistance is None else float(source_resistance)
        a, b, c = 1.0, rs, value
    else:
        if source_resistance is None or np.isinf(source_resistance):
            a, b, c = 0.0, 1.0, value
        else:
            a, b, c = 1.0 / source_resistance, 1.0, value
    pts: list[tuple[float, float, str]] = []
    for label, (v0, i0), (dv, di), t_max in iv.segments():
        denom = a * dv + b * di
        resid = c - (a * v0 + b * i0)
        if denom == 0:
            if abs(resid) <= 1e-15 * max(1.0, abs(c)):
                # load line runs along the segment; report its finite ends
                ends = [0.0] + ([t_max] if np.isfinite(t_max) else [])
                for t in ends:
                    pts.append((v0 + t * dv, i0 + t * di, label))
            continue
        t = resid / denom
        tol = 1e-12
        if -tol <= t <= t_max + tol:
            t = min(max(t, 0.0), t_max)
            pts.append((v0 + t * dv, i0 + t * di, label))
    out: list[tuple[float, float, str]] = []
    for p in sorted(pts, key=lambda p: p[1]):
        if out and abs(p[0] - out[-1][0]) <= 1e-12 and abs(p[1] - out[-1][1]) <= 1e-15:
            continue
        out.append(p)
    return out


# --- thermal hysteresis ----------------------------------------------------

class Phase(str, Enum):
    INSULATING = "insulating"
    METALLIC = "metallic"


def thermal_phase(trajectory: Sequence[float], initial: Phase | str | None = None,
                  heating: float = HEATING_THRESHOLD_C,
                  cooling: float = COOLING_THRESHOLD_C) -> list[Phase]:
    """Phase of the VO2 film along a temperature trajectory (deg C).

    The film turns metallic once the temperature reaches ``heating`` and
    insulating once it falls to ``cooling``; in between it keeps its phase.
    The first temperature decides the initial phase unless it lies inside
    the hysteresis window, where ``initial`` must be given.
    """
    temps = list(trajectory)
    if not temps:
        raise ValueError("empty temperature trajectory")
    if not heating > cooling:
        raise ValueError("heating threshold must exceed the cooling threshold")
    t0 = temps[0]
    if initial is not None:
        phase = Phase(initial)
    elif t0 < cooling:
        phase = Phase.INSULATING
    elif t0 > heating:
        phase = Phase.METALLIC
    else:
        raise ValueError(f"initial temperature {t0} degC lies in the hysteresis window "
                         f"[{cooling}, {heating}]; pass the initial phase explicitly")
    out = []
    for t in temps:
        if phase is Phase.INSULATING and t >= heating:
            phase = Phase.METALLIC
        elif phase is Phase.METALLIC and t <= cooling:
            phase = Phase.INSULATING
        out.append(phase)
    return out
