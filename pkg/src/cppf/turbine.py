"""Wind-turbine kinematics and per-turbine complex-field columns."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .environment import TerrainProfile, terrain_height_at
from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class TurbineSpec:
    rotor_diameter: float
    hub_height: float
    rpm_nominal: float
    rpm_range: tuple
    n_blades: int = 3

    def __post_init__(self):
        lo, hi = self.rpm_range
        if not self.rotor_diameter > 0 or not self.hub_height > 0:
            raise ConfigurationError("rotor diameter and hub height must be positive")
        if self.n_blades < 1:
            raise ConfigurationError("a turbine needs at least one blade")
        if not lo <= self.rpm_nominal <= hi:
            raise ConfigurationError("nominal rpm must lie inside rpm_range")

    @property
    def rotor_radius(self) -> float:
        return self.rotor_diameter / 2.0


VESTAS_V66 = TurbineSpec(rotor_diameter=66.0, hub_height=67.0, rpm_nominal=21.3, rpm_range=(10.5, 24.5), n_blades=3)
# radius 55.1 m as used for the quoted tip speed; hub height is the quoted maximum
GE_36 = TurbineSpec(rotor_diameter=110.2, hub_height=100.0, rpm_nominal=15.3, rpm_range=(8.5, 15.3), n_blades=3)


@dataclass(frozen=True)
class TurbinePlacement:
    distance: float  # m
    azimuth: float  # deg
    id: str = ""

    def __post_init__(self):
        if not self.distance > 0:
            raise ConfigurationError("turbine distance must be positive")


def blade_tip_speed(spec: TurbineSpec, rpm: float) -> float:
    """Linear speed of the blade tip, m/s."""
    if rpm < 0:
        raise DomainError("rpm must be non-negative")
    lo, hi = spec.rpm_range
    if not lo <= rpm <= hi and rpm != 0:
        warnings.warn(f"{rpm} rpm lies outside the operating interval {lo}-{hi} rpm", stacklevel=2)
    return 2.0 * math.pi * (rpm / 60.0) * spec.rotor_radius


def extraction_window(spec: TurbineSpec, margin_below: float, margin_above: float, step: float) -> np.ndarray:
    """Nacelle-relative heights from the tower foot minus ``margin_below`` up
    to the blade tip plus ``margin_above``, inclusive, at ``step``."""
    if not step > 0:
        raise DomainError("step must be positive")
    lo = -(spec.hub_height + margin_below)
    hi = spec.rotor_radius + margin_above
    n = int(round((hi - lo) / step))
    heights = np.round(lo + np.arange(n + 1) * step, 9)
    if abs(heights[-1] - hi) <= 1e-9 * max(1.0, abs(hi)):
        heights[-1] = hi
    return heights


def field_column_at_turbine(grid, placement: TurbinePlacement, window, terrain: TerrainProfile, hub_height: float) -> np.ndarray:
    """Complex field at nacelle-relative ``window`` heights above a turbine.

    Absolute height is local ground + hub height + window height; samples
    under the local ground are exact zeros.
    """
    ground = terrain_height_at(terrain, placement.distance)
    absolute = ground + hub_height + np.asarray(window, dtype=float)
    column = grid.sample(placement.distance, np.maximum(absolute, ground))
    return np.where(absolute <= ground, 0.0 + 0.0j, column)
