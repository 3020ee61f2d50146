"""Tx - surface - Rx link budget from the bistatic radar range equation."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import ArrayLayout, FrequencyLike, direction_from_angle, wavelength
from .fields import rcs
from .unitcell import UnitCellResponse


@dataclass(frozen=True)
class RadarLinkParams:
    """Every quantity of the bistatic radar range equation.

    Directivities are linear, distances in meters, ``pol_dot`` is the
    magnitude of the dot product of the Tx wave and Rx antenna
    polarization unit vectors.
    """

    lambda_m: float
    r1_m: float
    r2_m: float
    sigma_m2: float
    d_t: float = 100.0
    d_r: float = 100.0
    e_cdt: float = 1.0
    e_cdr: float = 1.0
    gamma_t: complex = 0.0
    gamma_r: complex = 0.0
    pol_dot: float = 1.0

    def __post_init__(self):
        for name in ("e_cdt", "e_cdr", "pol_dot"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in ("gamma_t", "gamma_r"):
            if abs(getattr(self, name)) > 1.0:
                raise ValueError(f"|{name}| must not exceed 1")
        for name in ("lambda_m", "r1_m", "r2_m", "d_t", "d_r"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.sigma_m2 < 0:
            raise ValueError("sigma_m2 must be non-negative")


def radar_received_ratio(p: RadarLinkParams) -> float:
    """Received-to-transmitted power ratio P_r/P_t (linear)."""
    return (p.e_cdt * p.e_cdr
            * (1 - abs(p.gamma_t) ** 2) * (1 - abs(p.gamma_r) ** 2)
            * p.sigma_m2 * p.d_t * p.d_r / (4 * np.pi)
            * (p.lambda_m / (4 * np.pi * p.r1_m * p.r2_m)) ** 2
            * p.pol_dot ** 2)


def ratio_db(x: float) -> float:
    """10*log10 with -inf for a zero ratio."""
    return float("-inf") if x == 0 else float(10 * np.log10(x))


def far_field_distance(layout: ArrayLayout, f: FrequencyLike) -> float:
    """2 D^2 / lambda with D the aperture diagonal."""
    return 2 * layout.diagonal ** 2 / wavelength(f)


def enhancement_far(layout: ArrayLayout, mask, resp: UnitCellResponse, inc_angle: float,
                    f: FrequencyLike, obs_angle: float = 0.0, element_q: float = 1.0,
                    link: RadarLinkParams | None = None) -> float:
    """Far-field received-power gain of ``mask`` over the all-OFF surface, dB.

    Both powers come from :func:`radar_received_ratio` with the RCS of the
    respective mask, so everything except sigma cancels.  Angles in
    radians in the x-z plane.
    """
    inc = direction_from_angle(inc_angle)
    obs = direction_from_angle(obs_angle)
    s_mask = rcs(layout, mask, resp, inc, obs, f, element_q)
    s_ref = rcs(layout, np.zeros(layout.n_cols, bool), resp, inc, obs, f, element_q)
    if link is None:
        d = far_field_distance(layout, f)
        link = RadarLinkParams(wavelength(f), d, d, 0.0)
    p_mask = radar_received_ratio(replace(link, sigma_m2=s_mask))
    p_ref = radar_received_ratio(replace(link, sigma_m2=s_ref))
    if p_ref == 0:
        return float("inf") if p_mask > 0 else 0.0
    with np.errstate(divide="ignore"):
        return float(10 * np.log10(p_mask / p_ref))
