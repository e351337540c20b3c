"""Complex-field columns at the 17 turbines of a wind farm ~32 km out,
through the command-line front end.

    python demos/turbines.py [out_dir]
"""

import json
import sys
from pathlib import Path

from cppf.cli import main

here = Path(__file__).parent / "data"
out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output/turbines")
status = main(["extract-turbines", str(here / "turbine_site.in"), str(here / "beinn_tharsuinn.csv"), "--out-dir", str(out)])
summary = json.loads((out / "summary.json").read_text())
print(f"exit {status}: {len(summary['exports'])} exports, window {summary['window']}")
print(f"tip speed {summary['tip_speed']['m_per_s']:.1f} m/s ({summary['tip_speed']['km_per_h']:.0f} km/h)")
print("first lines of", summary["exports"][0]["file"])
print("".join((out / summary["exports"][0]["file"]).read_text().splitlines(keepends=True)[:4]))
