"""Refractivity, terrain, ground, atmosphere and antenna-pattern models."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .domain import SPEED_OF_LIGHT, ComplexSample, Polarization, principal_phase
from .errors import ConfigurationError


@dataclass(frozen=True)
class RefractivityProfile:
    """Modified refractivity (M-units) against height at one range (km)."""

    start_range: float
    levels: tuple  # ((height_m, m_unit), ...)

    def __post_init__(self):
        levels = tuple((float(h), float(m)) for h, m in self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels:
            raise ConfigurationError("a refractivity profile needs at least one level")
        heights = [h for h, _ in levels]
        if any(b <= a for a, b in zip(heights, heights[1:])):
            raise ConfigurationError("refractivity levels must have strictly ascending heights")
        if not all(math.isfinite(m) for _, m in levels):
            raise ConfigurationError("M-unit values must be finite")

    @property
    def heights(self) -> np.ndarray:
        return np.array([h for h, _ in self.levels])

    @property
    def m_units(self) -> np.ndarray:
        return np.array([m for _, m in self.levels])

    def at(self, heights):
        # np.interp clamps to the end values, giving constant extrapolation
        return np.interp(heights, self.heights, self.m_units)


@dataclass(frozen=True)
class RefractivityField:
    profiles: tuple

    def __post_init__(self):
        profiles = tuple(self.profiles)
        object.__setattr__(self, "profiles", profiles)
        if not profiles:
            raise ConfigurationError("at least one refractivity profile is required")
        starts = [p.start_range for p in profiles]
        if starts[0] != 0:
            raise ConfigurationError("the first refractivity profile must start at range 0 km")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigurationError("refractivity profile ranges must be strictly ascending")

    @classmethod
    def uniform(cls, m_unit: float = 0.0) -> "RefractivityField":
        return cls((RefractivityProfile(0.0, ((0.0, m_unit),)),))

    @property
    def range_independent(self) -> bool:
        return len(self.profiles) == 1


def m_unit_at(field: RefractivityField, range_m, height):
    """Bilinear M-unit lookup: linear in height, then linear in range.

    Constant extrapolation above the top level and beyond the last profile.
    """
    heights = np.asarray(height, dtype=float)
    profiles = field.profiles
    if len(profiles) == 1:
        out = profiles[0].at(heights)
    else:
        r_km = float(range_m) / 1000.0
        starts = [p.start_range for p in profiles]
        if r_km >= starts[-1]:
            out = profiles[-1].at(heights)
        else:
            i = int(np.searchsorted(starts, r_km, side="right")) - 1
            lo, hi = profiles[i], profiles[i + 1]
            w = (r_km - lo.start_range) / (hi.start_range - lo.start_range)
            out = (1.0 - w) * lo.at(heights) + w * hi.at(heights)
    return float(out) if np.ndim(out) == 0 else out


def phase_screen_column(field: RefractivityField, range_m, heights, k0):
    """Per-metre phase rate k0 * M * 1e-6 at each height bin."""
    return k0 * 1e-6 * np.asarray(m_unit_at(field, range_m, np.asarray(heights, dtype=float)))


@dataclass(frozen=True)
class GroundComposition:
    start_range: float  # km
    ground_type: int
    permittivity: float
    conductivity: float  # S/m


@dataclass(frozen=True)
class TerrainProfile:
    """Piecewise-linear terrain; an empty point list is flat ground at height 0."""

    points: tuple = ()  # ((range_m, height_m), ...)
    compositions: tuple = ()

    def __post_init__(self):
        points = tuple((float(r), float(h)) for r, h in self.points)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "compositions", tuple(self.compositions))
        ranges = [r for r, _ in points]
        if any(b <= a for a, b in zip(ranges, ranges[1:])):
            raise ConfigurationError("terrain ranges must be strictly ascending")
        if not all(math.isfinite(h) for _, h in points):
            raise ConfigurationError("terrain heights must be finite")

    @property
    def is_flat(self) -> bool:
        return len({h for _, h in self.points}) <= 1

    @property
    def ranges(self) -> np.ndarray:
        return np.array([r for r, _ in self.points], dtype=float)

    @property
    def heights(self) -> np.ndarray:
        return np.array([h for _, h in self.points], dtype=float)

    def max_slope(self) -> float:
        if len(self.points) < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(self.heights) / np.diff(self.ranges))))

    def composition_at(self, range_m: float):
        """Ground composition in force at a range, or None if none given."""
        current = None
        for comp in self.compositions:
            if comp.start_range * 1000.0 <= range_m:
                current = comp
        if current is None and self.compositions:
            current = self.compositions[0]
        return current


def terrain_height_at(terrain: TerrainProfile, range_m):
    if not terrain.points:
        return 0.0 if np.ndim(range_m) == 0 else np.zeros(np.shape(range_m))
    out = np.interp(range_m, terrain.ranges, terrain.heights)
    return float(out) if np.ndim(out) == 0 else out


def segment_slope(terrain: TerrainProfile, range_m: float) -> float:
    """Slope of the linear segment containing ``range_m``; 0 outside the profile."""
    if len(terrain.points) < 2:
        return 0.0
    r = terrain.ranges
    if range_m < r[0] or range_m >= r[-1]:
        return 0.0
    i = int(np.searchsorted(r, range_m, side="right")) - 1
    h = terrain.heights
    return float((h[i + 1] - h[i]) / (r[i + 1] - r[i]))


@dataclass(frozen=True)
class Atmosphere:
    surface_humidity: float = 0.0  # g/m^3
    surface_temperature: float = 0.0  # deg C
    gaseous_absorption: float = 0.0  # dB/km
    wind_speeds: tuple = ()  # ((range_km, speed_m_s), ...)

    def __post_init__(self):
        if self.surface_humidity < 0:
            raise ConfigurationError("surface humidity must be non-negative")
        if self.gaseous_absorption < 0:
            raise ConfigurationError("gaseous absorption must be non-negative")


class AntennaKind(enum.Enum):
    OMNI = 1
    GAUSS = 2
    SINCX = 3
    COSEC2 = 4
    USER_DEFINED = 7


# sinc(x) = sin(pi x)/(pi x) falls to 1/sqrt(2) at x = 0.44295
_SINC_HALF_POWER = 0.442946470689452


@dataclass(frozen=True)
class AntennaPattern:
    """Vertical-plane antenna pattern, angles in degrees."""

    kind: AntennaKind = AntennaKind.OMNI
    beam_width: float = 0.0
    elevation: float = 0.0
    table: tuple = ()  # ((angle_deg, factor), ...) for USER_DEFINED

    def __post_init__(self):
        table = tuple((float(a), float(f)) for a, f in self.table)
        object.__setattr__(self, "table", table)
        if self.kind is AntennaKind.USER_DEFINED:
            if not table:
                raise ConfigurationError("user-defined antenna pattern needs a table")
            angles = [a for a, _ in table]
            if any(b <= a for a, b in zip(angles, angles[1:])):
                raise ConfigurationError("pattern table angles must be strictly ascending")
            if any(not 0.0 <= f <= 1.0 for _, f in table):
                raise ConfigurationError("pattern table factors must lie in [0, 1]")
        elif self.kind is not AntennaKind.OMNI and not self.beam_width > 0:
            raise ConfigurationError(f"{self.kind.name} pattern needs a positive beam width")


OMNI = AntennaPattern()


def pattern_factor(pattern: AntennaPattern | None, angle):
    """Normalised field pattern at elevation ``angle`` (degrees), in [0, 1]."""
    angle = np.asarray(angle, dtype=float)
    if pattern is None or pattern.kind is AntennaKind.OMNI:
        out = np.ones_like(angle)
    elif pattern.kind is AntennaKind.USER_DEFINED:
        a = np.array([t[0] for t in pattern.table])
        f = np.array([t[1] for t in pattern.table])
        out = np.interp(angle, a, f)
    else:
        d = angle - pattern.elevation
        bw = pattern.beam_width
        if pattern.kind is AntennaKind.GAUSS:
            out = np.exp(-2.0 * math.log(2.0) * (d / bw) ** 2)
        elif pattern.kind is AntennaKind.SINCX:
            out = np.abs(np.sinc(2.0 * _SINC_HALF_POWER * d / bw))
        else:
            out = _cosec2(angle, pattern.elevation, bw)
    return float(out) if out.ndim == 0 else out


def _cosec2(angle, elevation, bw):
    # Gaussian skirt below the beam maximum, flat to the upper half-power
    # edge, then 1/sin shaping (cosec^2 in power) above it.
    top = elevation + bw / 2.0
    below = np.exp(-2.0 * math.log(2.0) * ((angle - elevation) / bw) ** 2)
    ref = math.radians(max(top, bw / 2.0))
    arg = np.minimum(ref + np.radians(np.maximum(angle - top, 0.0)), math.pi / 2)
    above = math.sin(ref) / np.sin(arg)
    return np.where(angle < elevation, below, np.where(angle <= top, 1.0, above))


def complex_permittivity(permittivity: float, conductivity: float, frequency: float) -> complex:
    """Relative permittivity eps_r + i 60 lambda sigma (fields vary as exp(+ikr))."""
    wavelength = SPEED_OF_LIGHT / (frequency * 1e6)
    return complex(permittivity, 60.0 * wavelength * conductivity)


def reflection_coefficient(
    pol: Polarization,
    grazing_angle: float,
    permittivity: float,
    conductivity: float,
    frequency: float,
) -> ComplexSample:
    """Fresnel specular reflection coefficient of a smooth half-space.

    ``conductivity=math.inf`` gives the perfect-conductor limit.
    """
    if not 0.0 < grazing_angle <= math.pi / 2 + 1e-15:
        raise ValueError("grazing angle must lie in (0, pi/2]")
    if math.isinf(conductivity):
        return ComplexSample(-1.0, 0.0) if pol is Polarization.HORIZONTAL else ComplexSample(1.0, 0.0)
    eps = complex_permittivity(permittivity, conductivity, frequency)
    s = math.sin(grazing_angle)
    c2 = math.cos(grazing_angle) ** 2
    root = np.sqrt(eps - c2)
    if pol is Polarization.HORIZONTAL:
        gamma = (s - root) / (s + root)
    else:
        gamma = (eps * s - root) / (eps * s + root)
    rho = min(abs(gamma), 1.0)
    return ComplexSample.from_polar(rho, principal_phase(math.atan2(gamma.imag, gamma.real)))
