"""Surface duct against an isotropic profile and a standard atmosphere.

Mean PPF at 0-30 m beyond the 4/3-earth horizon of a 15 m antenna.
The isotropic profile (constant M) bends rays exactly with the earth, so it
has no horizon at all and out-scores the duct.  Against the standard
gradient the duct wins by about 27 dB for horizontal polarization.  With
vertical polarization the creeping wave over a conducting ground decays
slowly enough that the two end up level at these heights.

    python demos/duct.py
"""

import math

import numpy as np

from cppf import OutputWindow, PeConfig, Polarization, RefractivityField, RefractivityProfile, Scenario, SourceSpec, run_pe

PROFILES = {
    "duct": ((0.0, 330.0), (300.0, 370.0), (400.0, 320.0), (2000.0, 500.0)),
    "isotropic": ((0.0, 330.0), (2000.0, 330.0)),
    "standard": ((0.0, 330.0), (2000.0, 330.0 + 0.118 * 2000.0)),
}

re = 4 / 3 * 6_371_000.0
horizon = (math.sqrt(2 * re * 15.0) + math.sqrt(2 * re * 30.0)) / 1000.0
config = PeConfig(4096, 1500.0, 50.0, max_angle=1.0)

for pol in Polarization:
    means = {}
    for name, levels in PROFILES.items():
        sc = Scenario(
            SourceSpec(2800.0, 15.0, pol),
            OutputWindow(0.0, 30.0, 100.0, 30, 50),
            refractivity=RefractivityField((RefractivityProfile(0.0, levels),)),
        )
        _, res = run_pe(sc, config)
        means[name] = float(np.mean(res.amplitude_db[:, res.ranges >= horizon * 1000.0]))
    row = ", ".join(f"{k} {v:7.1f} dB" for k, v in means.items())
    print(f"{pol.name.lower():10s} beyond {horizon:.1f} km: {row}")
