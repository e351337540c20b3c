"""Flat-earth two-ray model with absolute phase.

The field at a point is the coherent sum of the direct ray and the ray
reflected by flat ground (image method).  Both the amplitude and the
absolute phase of that sum are returned, rather than the amplitude alone.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .domain import (
    MAG_FLOOR,
    ComplexSample,
    PpfResult,
    SourceSpec,
    free_space_loss_db,
    principal_phase,
)
from .environment import (
    GroundComposition,
    pattern_factor,
    reflection_coefficient,
    terrain_height_at,
)
from .errors import DomainError

FE_MAX_RANGE = 2500.0  # m
FE_MIN_ELEVATION = 5.0  # deg


@dataclass(frozen=True)
class TwoRayGeometry:
    r1: float
    r2: float
    alpha_d: float
    alpha_r: float
    grazing: float
    # r2 - r1 evaluated without cancellation; nan when only r1, r2 are known
    path_difference: float = math.nan


@dataclass(frozen=True)
class FeFieldSample:
    value: ComplexSample
    amplitude_db: float
    phase_rad: float


def trace_two_ray(antenna_height: float, target_height: float, ground_range: float) -> TwoRayGeometry:
    """Direct and ground-reflected path geometry over flat ground."""
    if not ground_range > 0:
        raise DomainError("ground range must be positive")
    if antenna_height < 0 or target_height < 0:
        raise DomainError("heights must be non-negative")
    if antenna_height + target_height == 0:
        raise DomainError("antenna and target both on the ground: grazing angle is zero")
    a, z, x = antenna_height, target_height, ground_range
    return TwoRayGeometry(
        r1=math.hypot(x, z - a),
        r2=math.hypot(x, z + a),
        alpha_d=math.atan2(z - a, x),
        alpha_r=-math.atan2(z + a, x),
        grazing=math.atan2(z + a, x),
        path_difference=4.0 * a * z / (math.hypot(x, z - a) + math.hypot(x, z + a)),
    )


def total_phase_lag(geometry: TwoRayGeometry, k0: float, reflection_phase: float) -> float:
    """Phase of the reflected ray relative to the direct ray."""
    delta = getattr(geometry, "path_difference", math.nan)
    if math.isnan(delta):
        delta = geometry.r2 - geometry.r1
    return delta * k0 + reflection_phase


PEC_GROUND = GroundComposition(0.0, 0, 1.0, math.inf)


def fe_complex_field(
    source: SourceSpec,
    pattern,
    ground: GroundComposition | None,
    target_height: float,
    ground_range: float,
    floor: float = MAG_FLOOR,
) -> FeFieldSample:
    """Complex two-ray field at one point.

    ``ground=None`` removes the reflected ray entirely (free space).
    """
    geom = trace_two_ray(source.antenna_height, target_height, ground_range)
    k0 = source.k0
    e_d = pattern_factor(pattern, math.degrees(geom.alpha_d))
    if ground is None:
        rho, phi = 0.0, 0.0
    else:
        gamma = reflection_coefficient(
            source.polarization, geom.grazing, ground.permittivity, ground.conductivity, source.frequency
        )
        rho, phi = gamma.magnitude(), gamma.phase()
    e_r = rho * pattern_factor(pattern, math.degrees(geom.alpha_r))
    # factor out the direct-path phase so the interference term uses the
    # well-conditioned path difference rather than two large phases
    omega = total_phase_lag(geom, k0, phi)
    value = complex(np.exp(1j * geom.r1 * k0) * (e_d + e_r * np.exp(1j * omega)))
    mag = max(abs(value), floor)
    return FeFieldSample(
        value=ComplexSample.from_complex(value),
        amplitude_db=20.0 * math.log10(mag),
        phase_rad=principal_phase(math.atan2(value.imag, value.real)),
    )


def fe_magnitude_closed_form(e_d: float, e_r: float, omega: float) -> float:
    """|E_p| from the cosine law E_d^2 + E_r^2 + 2 E_d E_r cos(omega).

    Evaluated as (E_d - E_r)^2 + 4 E_d E_r cos^2(omega / 2), the same sum
    without the cancellation near a null.
    """
    return math.sqrt((e_d - e_r) ** 2 + 4.0 * e_d * e_r * math.cos(0.5 * omega) ** 2)


def fe_region_valid(elevation_angle: float, range_m: float) -> bool:
    return elevation_angle > FE_MIN_ELEVATION or range_m < FE_MAX_RANGE


def run_fe(scenario, heights=None, ranges=None) -> PpfResult:
    """Evaluate the two-ray model over a scenario's output lattice.

    Terrain is ignored (the model needs flat ground); a warning is issued
    and recorded in the result metadata when the scenario has relief.
    """
    source = scenario.source
    window = scenario.output
    heights = window.heights() if heights is None else np.asarray(heights, dtype=float)
    ranges = window.ranges() if ranges is None else np.asarray(ranges, dtype=float)
    notes = []
    if not scenario.terrain.is_flat:
        msg = "flat-earth model evaluated over height 0; scenario terrain ignored"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    # a flat but raised ground is a datum shift; relief is evaluated over height 0
    base = terrain_height_at(scenario.terrain, 0.0) if scenario.terrain.is_flat else 0.0
    shape = (len(heights), len(ranges))
    values = np.zeros(shape, dtype=complex)
    amp = np.empty(shape)
    phase = np.empty(shape)
    outside = 0
    for j, r in enumerate(ranges):
        ground = scenario.terrain.composition_at(r) or PEC_GROUND
        for i, z in enumerate(heights):
            s = fe_complex_field(source, source.antenna, ground, max(z - base, 0.0), r)
            values[i, j] = complex(s.value)
            amp[i, j] = s.amplitude_db
            phase[i, j] = s.phase_rad
            elev = math.degrees(math.atan2(z - base - source.antenna_height, r))
            if not fe_region_valid(elev, r):
                outside += 1
    if outside:
        notes.append(f"{outside} output points lie outside the flat-earth validity region")
    slant = np.hypot(ranges[None, :], heights[:, None] - base - source.antenna_height)
    loss = free_space_loss_db(slant, source.wavelength) - amp
    loss += scenario.atmosphere.gaseous_absorption * slant / 1000.0
    return PpfResult(
        ranges=ranges,
        heights=heights,
        amplitude_db=amp,
        phase_rad=phase,
        loss_db=loss,
        scenario_digest=scenario.digest(),
        magnitude=np.abs(values),
        field=values,
        metadata={"model": "fe", "magnitude_floor": MAG_FLOOR, "warnings": notes},
    )
