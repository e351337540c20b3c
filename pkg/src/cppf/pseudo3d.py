"""Pseudo-3D volumes: independent 2-D marches along a fan of azimuths.

Each azimuth samples its own terrain profile from an elevation grid and is
run as a standalone 2-D problem; there is no coupling between slices.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .environment import TerrainProfile
from .errors import ConfigurationError, CppfError, OutOfRangeError
from .pe_engine import run_pe

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ElevationGrid:
    """Node-registered height grid in local metric coordinates.

    ``heights[row, col]`` sits at ``(x_origin + col * cell_size,
    y_origin + row * cell_size)``; rows run northwards.
    """

    origin: tuple
    cell_size: float
    heights: np.ndarray
    nodata: float = -9999.0

    def __post_init__(self):
        h = np.array(self.heights, dtype=float)
        if h.ndim != 2 or h.shape[0] < 2 or h.shape[1] < 2:
            raise ConfigurationError("elevation grid needs at least 2 rows and 2 columns")
        if not self.cell_size > 0:
            raise ConfigurationError("cell_size must be positive")
        if not np.all(np.isfinite(h)):
            raise ConfigurationError("elevation grid heights must be finite")
        h.setflags(write=False)
        object.__setattr__(self, "heights", h)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def n_rows(self) -> int:
        return self.heights.shape[0]

    @property
    def n_cols(self) -> int:
        return self.heights.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ElevationGrid):
            return NotImplemented
        return (
            self.origin == other.origin
            and self.cell_size == other.cell_size
            and self.nodata == other.nodata
            and np.array_equal(self.heights, other.heights)
        )

    __hash__ = None


@dataclass(frozen=True)
class AzimuthFan:
    """Radar position (local metres) and the azimuths to run, degrees clockwise from north."""

    origin: tuple
    azimuths: tuple
    max_range: float
    range_step: float

    def __post_init__(self):
        az = tuple(float(a) for a in self.azimuths)
        object.__setattr__(self, "azimuths", az)
        if len(set(az)) != len(az):
            raise ConfigurationError("azimuths must be distinct")
        if not self.max_range > 0 or not self.range_step > 0:
            raise ConfigurationError("max_range and range_step must be positive")


@dataclass
class VolumeResult:
    slices: dict = field(default_factory=dict)  # azimuth -> PpfResult
    grids: dict = field(default_factory=dict)  # azimuth -> ComplexFieldGrid
    errors: dict = field(default_factory=dict)  # azimuth -> message
    scenario_digest: str = ""

    @property
    def partial(self) -> bool:
        return bool(self.errors)


def sample_terrain_along_azimuth(grid: ElevationGrid, origin, azimuth: float, max_range: float, range_step: float) -> TerrainProfile:
    """Bilinear heights every ``range_step`` along a straight ray from ``origin``."""
    n = int(math.floor(max_range / range_step + 1e-9))
    s = np.arange(n + 1) * range_step
    if s[-1] < max_range - 1e-9:
        s = np.append(s, max_range)
    a = math.radians(azimuth)
    x = origin[0] + s * math.sin(a)
    y = origin[1] + s * math.cos(a)
    cols = (x - grid.origin[0]) / grid.cell_size
    rows = (y - grid.origin[1]) / grid.cell_size
    eps = 1e-9
    if (
        np.any(cols < -eps)
        or np.any(rows < -eps)
        or np.any(cols > grid.n_cols - 1 + eps)
        or np.any(rows > grid.n_rows - 1 + eps)
    ):
        raise OutOfRangeError(f"azimuth {azimuth} deg: ray leaves the elevation grid before {max_range} m")
    cols = np.clip(cols, 0, grid.n_cols - 1)
    rows = np.clip(rows, 0, grid.n_rows - 1)
    c0 = np.minimum(np.floor(cols).astype(int), grid.n_cols - 2)
    r0 = np.minimum(np.floor(rows).astype(int), grid.n_rows - 2)
    fc = cols - c0
    fr = rows - r0
    h = grid.heights
    corners = np.stack([h[r0, c0], h[r0, c0 + 1], h[r0 + 1, c0], h[r0 + 1, c0 + 1]])
    weights = np.stack([(1 - fr) * (1 - fc), (1 - fr) * fc, fr * (1 - fc), fr * fc])
    # a nodata corner only matters if it carries weight
    bad = (corners == grid.nodata) & (weights > 0)
    if np.any(bad):
        k = int(np.argmax(np.any(bad, axis=0)))
        raise OutOfRangeError(f"azimuth {azimuth} deg: nodata cell at range {s[k]:.1f} m")
    # nested lerps reproduce constant cells exactly; zero-weight corners drop out
    lower = corners[0] + fc * (corners[1] - corners[0])
    upper = corners[2] + fc * (corners[3] - corners[2])
    heights = lower + fr * (upper - lower)
    return TerrainProfile(tuple(zip(s.tolist(), heights.tolist())))


def _slice_scenario(scenario, terrain: TerrainProfile):
    comps = scenario.terrain.compositions
    return replace(scenario, terrain=TerrainProfile(terrain.points, comps))


def run_volume(scenario, grid: ElevationGrid, fan: AzimuthFan, config=None, capture_ranges=(), max_workers: int | None = None) -> VolumeResult:
    """Run every azimuth of the fan; failures are recorded and the rest continue."""
    result = VolumeResult(scenario_digest=scenario.digest())

    def one(az):
        profile = sample_terrain_along_azimuth(grid, fan.origin, az, fan.max_range, fan.range_step)
        return run_pe(_slice_scenario(scenario, profile), config=config, capture_ranges=capture_ranges)

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {az: pool.submit(one, az) for az in fan.azimuths}
    for az, fut in futures.items():
        try:
            g, r = fut.result()
        except CppfError as exc:
            log.warning("azimuth %s failed: %s", az, exc)
            result.errors[az] = str(exc)
            continue
        result.slices[az] = r
        result.grids[az] = g
    return result


def export_volume(volume: VolumeResult, path, quantity: str = "amplitude_db") -> list:
    """Write one plot grid per azimuth and a JSON manifest; returns the paths."""
    from .scenario_io import write_plot_grid

    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        entries = []
        for az in sorted(volume.slices):
            sl = volume.slices[az]
            name = f"slice_az{az:+09.3f}.csv"
            (out / name).write_text(write_plot_grid(sl, quantity))
            written.append(out / name)
            entries.append({"azimuth": az, "file": name})
        first = next(iter(volume.slices.values()), None)
        manifest = {
            "scenario_digest": volume.scenario_digest,
            "quantity": quantity,
            "azimuths": [e["azimuth"] for e in entries],
            "slices": entries,
            "partial": volume.partial,
            "errors": {str(k): v for k, v in sorted(volume.errors.items())},
            "window": None
            if first is None
            else {"heights_m": list(map(float, first.heights)), "ranges_m": list(map(float, first.ranges))},
        }
        mpath = out / "manifest.json"
        mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        written.append(mpath)
    except OSError as exc:
        raise CppfError(f"cannot write volume export under {out}: {exc}") from exc
    return written
