"""Core value types and unit conventions.

Units are fixed throughout the package: metres for lengths and heights
(except where a field says km), MHz for frequency, dB for levels and radians
for phase.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from dataclasses import field as dc_field
from typing import Any

import numpy as np

from .errors import ConfigurationError, DomainError

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact
MAG_FLOOR = 1e-30


@dataclass(frozen=True)
class ComplexSample:
    """A single complex field value."""

    re: float
    im: float

    def magnitude(self) -> float:
        return math.hypot(self.re, self.im)

    def phase(self) -> float:
        return principal_phase(math.atan2(self.im, self.re))

    @classmethod
    def from_polar(cls, magnitude: float, phase: float) -> "ComplexSample":
        return cls(magnitude * math.cos(phase), magnitude * math.sin(phase))

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexSample":
        return cls(float(z.real), float(z.imag))

    def __complex__(self) -> complex:
        return complex(self.re, self.im)


def principal_phase(angle):
    """Map an atan2 result onto (-pi, pi].

    atan2 returns -pi for a negative real axis approached from below (signed
    zero imaginary part); that value is folded onto +pi.
    """
    if np.ndim(angle) == 0:
        return math.pi if angle <= -math.pi else float(angle)
    angle = np.asarray(angle, dtype=float)
    return np.where(angle <= -np.pi, np.pi, angle)


class Polarization(enum.Enum):
    HORIZONTAL = 0
    VERTICAL = 1


@dataclass(frozen=True)
class SourceSpec:
    """Radar source: frequency in MHz, antenna height above local ground in m."""

    frequency: float
    antenna_height: float
    polarization: Polarization = Polarization.HORIZONTAL
    antenna: Any = None  # environment.AntennaPattern; None means omni
    elevation_angle: float = 0.0
    beam_width: float = 0.0

    def __post_init__(self):
        if not self.frequency > 0:
            raise ConfigurationError(f"frequency must be positive, got {self.frequency}")
        if not self.antenna_height >= 0:
            raise ConfigurationError(
                f"antenna_height must be non-negative, got {self.antenna_height}"
            )

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / (self.frequency * 1e6)

    @property
    def k0(self) -> float:
        return 2.0 * math.pi / self.wavelength


@dataclass(frozen=True)
class OutputWindow:
    """Output lattice.

    Heights and ranges are the ``n`` points ``lo + (i + 1) * (hi - lo) / n``,
    so the lower bound itself is not an output point; this is how the
    classic input file lays out its ``Minimum/Maximum output height`` pair.
    """

    min_height: float
    max_height: float
    max_range: float  # km
    n_height_points: int
    n_range_points: int

    def __post_init__(self):
        if not self.min_height < self.max_height:
            raise ConfigurationError("min_height must be below max_height")
        if not self.max_range > 0:
            raise ConfigurationError("max_range must be positive")
        if self.n_height_points < 2 or self.n_range_points < 2:
            raise ConfigurationError("output point counts must be at least 2")

    @property
    def height_step(self) -> float:
        return (self.max_height - self.min_height) / self.n_height_points

    @property
    def range_step(self) -> float:
        """Output range spacing in metres."""
        return self.max_range * 1000.0 / self.n_range_points

    def heights(self) -> np.ndarray:
        i = np.arange(1, self.n_height_points + 1)
        return self.min_height + i * self.height_step

    def ranges(self) -> np.ndarray:
        """Output ranges in metres."""
        return np.arange(1, self.n_range_points + 1) * self.range_step


@dataclass
class PpfResult:
    """Amplitude and absolute phase of the pattern propagation factor.

    Grids are indexed ``[height, range]``.  ``magnitude`` is the linear
    amplitude path before conversion to dB and ``field`` the complex value
    it was taken from.
    """

    ranges: np.ndarray
    heights: np.ndarray
    amplitude_db: np.ndarray
    phase_rad: np.ndarray
    loss_db: np.ndarray
    scenario_digest: str = ""
    magnitude: np.ndarray | None = None
    field: np.ndarray | None = None
    metadata: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        shape = (len(self.heights), len(self.ranges))
        for name in ("amplitude_db", "phase_rad", "loss_db"):
            if np.shape(getattr(self, name)) != shape:
                raise ValueError(f"{name} has shape {np.shape(getattr(self, name))}, expected {shape}")


def db_from_linear(x):
    """20*log10(x) for strictly positive amplitudes."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("db_from_linear needs strictly positive input")
    out = 20.0 * np.log10(arr)
    return float(out) if out.ndim == 0 else out


def _magnitude(u):
    if isinstance(u, ComplexSample):
        return u.magnitude()
    return np.abs(u)


def ppf_pe_db(u, range_m, floor=MAG_FLOOR):
    """PPF in dB as 20 lg|u| + 10 lg r, range in metres."""
    if np.any(np.asarray(range_m) <= 0):
        raise DomainError("range must be positive")
    mag = np.maximum(_magnitude(u), floor)
    out = 20.0 * np.log10(mag) + 10.0 * np.log10(range_m)
    return float(out) if np.ndim(out) == 0 else out


def ppf_free_space_db(u, range_m, wavelength, floor=MAG_FLOOR):
    """PPF in dB normalised by both range and wavelength:
    20 log|u| - 10 log r - 10 log lambda.
    """
    if np.any(np.asarray(range_m) <= 0) or np.any(np.asarray(wavelength) <= 0):
        raise DomainError("range and wavelength must be positive")
    mag = np.maximum(_magnitude(u), floor)
    out = 20.0 * np.log10(mag) - 10.0 * np.log10(range_m) - 10.0 * np.log10(wavelength)
    return float(out) if np.ndim(out) == 0 else out


def free_space_loss_db(slant_range, wavelength):
    """One-way free-space path loss 20 log10(4 pi R / lambda)."""
    return 20.0 * np.log10(4.0 * np.pi * np.asarray(slant_range, dtype=float) / wavelength)
