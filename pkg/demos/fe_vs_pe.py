"""Flat perfectly conducting ground: the parabolic-equation march against
the two-ray closed form, amplitude and absolute phase.

    python demos/fe_vs_pe.py
"""

import math

import numpy as np

from cppf import (
    GroundComposition,
    OutputWindow,
    Polarization,
    RefractivityField,
    Scenario,
    SourceSpec,
    TerrainProfile,
    default_pe_config,
    run_fe,
    run_pe,
)

PEC = GroundComposition(0.0, 0, 1.0, math.inf)

scenario = Scenario(
    SourceSpec(2800.0, 15.0, Polarization.HORIZONTAL),
    OutputWindow(19.0, 100.0, 10.0, 81, 40),
    refractivity=RefractivityField.uniform(0.0),
    terrain=TerrainProfile((), (PEC,)),
)
config = default_pe_config(scenario, transform_size=4096)
print(f"PE column: N={config.transform_size}, z_max={config.z_max:.1f} m, dz={config.delta_z:.3f} m, dr={config.delta_r:.2f} m")

_, pe = run_pe(scenario, config)
fe = run_fe(scenario)

far = pe.ranges >= 3000
strong = (fe.amplitude_db > -3)[:, far]
err = np.abs(pe.amplitude_db - fe.amplitude_db)[:, far]
print(f"amplitude: max |PE - FE| = {err.max():.3f} dB overall, {err[strong].max():.3f} dB where FE > -3 dB")

# The march drops the exp(i k0 x) carrier and the starter's pi/4; put them back.
k0 = scenario.source.k0
dphi = np.angle(np.exp(1j * (pe.phase_rad + k0 * pe.ranges[None, :] + math.pi / 4 - fe.phase_rad)))[:, far]
print(f"phase: max difference {np.abs(dphi[strong]).max():.4f} rad where FE > -3 dB")

print("\nheight  FE dB   PE dB   at 10 km")
for i in range(0, len(pe.heights), 10):
    print(f"{pe.heights[i]:6.1f} {fe.amplitude_db[i, -1]:7.2f} {pe.amplitude_db[i, -1]:7.2f}")
