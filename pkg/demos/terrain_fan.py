"""Pseudo-3D: a fan of azimuths over a synthetic hill grid, exported as one
plot grid per azimuth plus a manifest.

    python demos/terrain_fan.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from cppf import AzimuthFan, ElevationGrid, OutputWindow, PeConfig, Scenario, SourceSpec, export_volume, run_volume

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output/fan")
xs = np.arange(0.0, 20_001.0, 200.0)
x, y = np.meshgrid(xs, xs)
grid = ElevationGrid((0.0, 0.0), 200.0, 60 + 50 * np.sin(x / 2500.0) * np.cos(y / 3100.0))

scenario = Scenario(SourceSpec(2800.0, 15.0), OutputWindow(0.0, 200.0, 8.0, 40, 16))
fan = AzimuthFan((10_000.0, 10_000.0), tuple(range(0, 360, 30)), 8000.0, 200.0)
volume = run_volume(scenario, grid, fan, PeConfig(2048, 600.0, 50.0, max_angle=3.0))
paths = export_volume(volume, out)
print(f"{len(volume.slices)} slices, partial={volume.partial}, {len(paths)} files under {out}")
for az, sl in sorted(volume.slices.items()):
    print(f"azimuth {az:5.1f}: mean PPF at 8 km {np.mean(sl.amplitude_db[:, -1]):6.1f} dB")
