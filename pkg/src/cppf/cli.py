"""Command-line front end.

Exit codes: 0 success, 2 input or validation problem, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from .domain import Polarization, SourceSpec
from .errors import (
    ConfigurationError,
    CppfError,
    DomainError,
    DomainOverflowError,
    FormatError,
    OutOfRangeError,
)
from .fe_model import run_fe
from .pe_engine import default_pe_config, phase_continuity_report, required_height, run_pe, validate_pe
from .pseudo3d import AzimuthFan, export_volume, run_volume
from .scenario_io import (
    parse_input_file,
    read_elevation_grid,
    write_complex_field_export,
    write_output_file,
    write_plot_grid,
)
from .turbine import GE_36, VESTAS_V66, TurbinePlacement, blade_tip_speed, extraction_window, field_column_at_turbine

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 2, 3
TURBINES = {"v66": VESTAS_V66, "ge36": GE_36}

log = logging.getLogger("cppf")


class InputProblem(Exception):
    """Raised for bad command-line input; maps to exit status 2."""


# -- helpers -----------------------------------------------------------------


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputProblem(f"{path}: {exc.strerror or exc}") from exc


def _load_scenario(args):
    """Parse the input file and apply source overrides.

    Returns ``(scenario, precedence)`` where ``precedence`` maps each
    overridable field to ``"flag"`` or ``"file"``.
    """
    text = _read_text(args.input)
    try:
        scenario = parse_input_file(text)
    except FormatError as exc:
        raise InputProblem(f"{args.input}: {exc}") from exc
    src = scenario.source
    changes, precedence = {}, {}
    for name, attr in (("frequency", "frequency_mhz"), ("antenna_height", "antenna_height")):
        value = getattr(args, attr, None)
        precedence[name] = "file" if value is None else "flag"
        if value is not None:
            changes[name] = value
    pol = getattr(args, "polarization", None)
    precedence["polarization"] = "file" if pol is None else "flag"
    if pol is not None:
        changes["polarization"] = Polarization.HORIZONTAL if pol == "h" else Polarization.VERTICAL
    if changes:
        try:
            scenario = replace(scenario, source=SourceSpec(**{**src.__dict__, **changes}))
        except ConfigurationError as exc:
            raise InputProblem(str(exc)) from exc
    scenario.validate()
    return scenario, precedence


def _pe_config(args, scenario, extra_height: float = 0.0):
    keys = ("transform_size", "z_max", "delta_r", "max_angle", "absorber_fraction")
    given = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    precedence = {k: ("flag" if k in given else "default") for k in keys}
    config = default_pe_config(scenario, extra_height=extra_height, **given)
    return config, precedence


def _write(out_dir: Path, name: str, text: str, written: list) -> None:
    path = out_dir / name
    path.write_text(text)
    written.append(name)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _config_dict(config) -> dict:
    return {
        "transform_size": config.transform_size,
        "z_max": config.z_max,
        "delta_r": config.delta_r,
        "delta_z": config.delta_z,
        "max_angle": config.max_angle,
        "absorber_fraction": config.absorber_fraction,
    }


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputProblem(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    return out


# -- commands ----------------------------------------------------------------


def cmd_validate(args) -> int:
    scenario, _ = _load_scenario(args)
    if args.model == "pe":
        config, _ = _pe_config(args, scenario)
        validate_pe(scenario, config)
    print(f"ok {scenario.digest()}")
    return EXIT_OK


def _compute(args, scenario):
    """Run the selected model; returns ``(result, config, config_precedence, warnings)``."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.model == "fe":
            result = run_fe(scenario)
            config = precedence = None
        else:
            config, precedence = _pe_config(args, scenario)
            _, result = run_pe(scenario, config)
    notes = list(result.metadata.get("warnings", []))
    for w in caught:
        msg = str(w.message)
        if msg not in notes:
            notes.append(msg)
    return result, config, precedence, notes


def cmd_run(args) -> int:
    scenario, precedence = _load_scenario(args)
    out = _out_dir(args.out_dir)
    started = time.perf_counter()
    result, config, cfg_prec, notes = _compute(args, scenario)
    elapsed = time.perf_counter() - started
    written = []
    try:
        _write(out, "output.txt", write_output_file(result), written)
        _write(out, "amplitude_db.csv", write_plot_grid(result, "amplitude_db"), written)
        _write(out, "phase_rad.csv", write_plot_grid(result, "phase_rad"), written)
        manifest = {
            "scenario_digest": result.scenario_digest,
            "model": args.model.upper(),
            "files": written + ["manifest.json"],
            "timing": _timing(args, elapsed, result),
            "warnings": notes,
            "precedence": {**precedence, **(cfg_prec or {})},
            "pe_config": None if config is None else _config_dict(config),
        }
        _write(out, "manifest.json", _dump_json(manifest), [])
    except OSError as exc:
        raise CppfError(f"cannot write outputs under {out}: {exc.strerror or exc}") from exc
    for note in notes:
        log.warning("%s", note)
    return EXIT_OK


def _timing(args, elapsed: float, result) -> dict:
    # wall time would break byte-identical reruns, so it is opt-in
    timing = {"march_steps": result.metadata.get("steps")}
    if getattr(args, "record_timing", False):
        timing["wall_seconds"] = round(elapsed, 3)
    return timing


def _parse_azimuths(spec: str) -> tuple:
    """``"a,b,c"`` or ``"start:stop:step"`` (stop inclusive)."""
    try:
        if ":" in spec:
            start, stop, step = (float(t) for t in spec.split(":"))
            if step <= 0:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9))
            return tuple(round(start + k * step, 9) for k in range(n + 1))
        return tuple(float(t) for t in spec.split(",") if t.strip())
    except ValueError:
        raise InputProblem(f"cannot parse azimuth list {spec!r}") from None


def cmd_volume(args) -> int:
    scenario, _ = _load_scenario(args)
    try:
        grid = read_elevation_grid(_read_text(args.grid))
    except FormatError as exc:
        raise InputProblem(f"{args.grid}: {exc}") from exc
    max_range = scenario.output.max_range * 1000.0
    fan = AzimuthFan(tuple(args.origin), _parse_azimuths(args.azimuths), max_range, args.range_step or grid.cell_size)
    config, _ = _pe_config(args, scenario)
    volume = run_volume(scenario, grid, fan, config=config, max_workers=args.workers)
    export_volume(volume, args.out_dir, args.quantity)
    for az, msg in sorted(volume.errors.items()):
        log.warning("azimuth %s: %s", az, msg)
    if not volume.slices:
        log.error("no azimuth completed")
        return EXIT_RUNTIME
    return EXIT_OK


def _read_turbine_table(path) -> list:
    """CSV with columns ``id, distance`` (m) and ``azimuth`` (deg); a header row is required."""
    text = _read_text(path)
    rows = list(csv.reader(line for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")))
    if not rows:
        return []
    header = [h.strip().lower() for h in rows[0]]
    try:
        cols = [header.index(k) for k in ("id", "distance", "azimuth")]
    except ValueError:
        raise InputProblem(f"{path}: header must name columns id, distance, azimuth") from None
    placements, seen = [], set()
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            tid, dist, az = (row[c].strip() for c in cols)
            placement = TurbinePlacement(float(dist), float(az.replace(" ", "")), tid)
        except (IndexError, ValueError) as exc:
            raise InputProblem(f"{path}: line {lineno}: {exc}") from None
        if tid in seen:
            raise InputProblem(f"{path}: line {lineno}: duplicate turbine id {tid!r}")
        seen.add(tid)
        placements.append(placement)
    return placements


def cmd_extract_turbines(args) -> int:
    scenario, precedence = _load_scenario(args)
    placements = _read_turbine_table(args.table)
    spec = TURBINES[args.turbine]
    out = _out_dir(args.out_dir)
    window = extraction_window(spec, args.margin_below, args.margin_above, args.step)
    top = spec.hub_height + window[-1]
    extra = max(0.0, top + float(np.max(np.asarray(scenario.terrain.heights) if scenario.terrain.points else 0.0)) - required_height(scenario))
    config, cfg_prec = _pe_config(args, scenario, extra_height=extra)
    max_range = scenario.output.max_range * 1000.0
    inside = [p for p in placements if p.distance <= max_range]
    skipped = {p.id: f"distance {p.distance} m beyond the computed range {max_range} m" for p in placements if p.distance > max_range}

    exports = []
    if inside:
        grid, _ = run_pe(scenario, config, capture_ranges=sorted({p.distance for p in inside}))
        for k, p in enumerate(inside, start=1):
            try:
                column = field_column_at_turbine(grid, p, window, scenario.terrain, spec.hub_height)
            except (OutOfRangeError, DomainError) as exc:
                skipped[p.id] = str(exc)
                continue
            name = f"turbine_{p.id}.txt"
            (out / name).write_text(write_complex_field_export(window, column, profile_index=k))
            exports.append({"id": p.id, "distance_m": p.distance, "azimuth_deg": p.azimuth, "file": name})

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        tip = blade_tip_speed(spec, args.rpm if args.rpm is not None else spec.rpm_nominal)
    summary = {
        "scenario_digest": scenario.digest(),
        "model": "PE",
        "turbine": args.turbine,
        "window": {"from_m": float(window[0]), "to_m": float(window[-1]), "step_m": args.step, "samples": int(window.size)},
        "tip_speed": {
            "rpm": args.rpm if args.rpm is not None else spec.rpm_nominal,
            "m_per_s": round(tip, 6),
            "km_per_h": round(tip * 3.6, 6),
        },
        "exports": exports,
        "outside_domain": [{"id": k, "reason": v} for k, v in skipped.items()],
        "warnings": [str(w.message) for w in caught],
        "precedence": {**precedence, **cfg_prec},
        "pe_config": _config_dict(config),
        "files": [e["file"] for e in exports] + ["summary.json"],
    }
    (out / "summary.json").write_text(_dump_json(summary))
    for tid, reason in skipped.items():
        log.warning("turbine %s not exported: %s", tid, reason)
    return EXIT_OK


def cmd_phase_report(args) -> int:
    scenario, _ = _load_scenario(args)
    result, _, _, _ = _compute(args, scenario)
    jumps = phase_continuity_report(result, null_db=args.null_db, axis=args.axis)
    report = {
        "scenario_digest": result.scenario_digest,
        "model": args.model.upper(),
        "null_db": args.null_db,
        "axis": "height" if args.axis == 0 else "range",
        "count": len(jumps),
        "jumps": [
            {"height_m": float(result.heights[j.height_index]), "range_m": float(result.ranges[j.range_index]), "jump_rad": j.jump}
            for j in jumps
        ],
    }
    text = _dump_json(report)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise CppfError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


def _add_source_flags(p):
    p.add_argument("input", help="scenario input file")
    p.add_argument("--frequency-mhz", type=float, help="override the file's frequency")
    p.add_argument("--antenna-height", type=float, help="override the file's antenna height (m)")
    p.add_argument("--polarization", choices=("h", "v"), help="override the file's polarization")


def _add_pe_flags(p):
    g = p.add_argument_group("parabolic-equation numerics (default: sized from the scenario)")
    g.add_argument("--transform-size", type=int, help="number of height bins, a power of two")
    g.add_argument("--z-max", type=float, help="column height (m)")
    g.add_argument("--delta-r", type=float, help="range step (m)")
    g.add_argument("--max-angle", type=float, help="starter angular limit (deg)")
    g.add_argument("--absorber-fraction", type=float, help="fraction of the column used as absorber")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cppf", description="Complex pattern propagation factor engine.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario and write output, plot grids and manifest")
    _add_source_flags(p)
    p.add_argument("--model", choices=("fe", "pe"), default="pe")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--record-timing", action="store_true", help="store wall time in the manifest (breaks byte-identical reruns)")
    _add_pe_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="parse and check a scenario without running it")
    _add_source_flags(p)
    p.add_argument("--model", choices=("fe", "pe"), default="pe")
    _add_pe_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("volume", help="run a fan of azimuths through an elevation grid")
    _add_source_flags(p)
    p.add_argument("--grid", required=True, help="ASCII elevation grid")
    p.add_argument("--origin", type=float, nargs=2, required=True, metavar=("X", "Y"), help="radar position (m)")
    p.add_argument("--azimuths", required=True, help="'a,b,c' or 'start:stop:step' in degrees clockwise from north")
    p.add_argument("--range-step", type=float, help="terrain sampling step (m); default the grid cell size")
    p.add_argument("--quantity", choices=("amplitude_db", "phase_rad", "loss_db"), default="amplitude_db")
    p.add_argument("--workers", type=int, help="worker threads")
    p.add_argument("--out-dir", required=True)
    _add_pe_flags(p)
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("extract-turbines", help="export the complex field column at every turbine")
    _add_source_flags(p)
    p.add_argument("table", help="CSV with columns id, distance (m), azimuth (deg)")
    p.add_argument("--turbine", choices=sorted(TURBINES), default="v66")
    p.add_argument("--margin-below", type=float, default=1.0)
    p.add_argument("--margin-above", type=float, default=1.1)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--rpm", type=float, help="rotor speed for the tip-speed figure; default nominal")
    p.add_argument("--out-dir", required=True)
    _add_pe_flags(p)
    p.set_defaults(func=cmd_extract_turbines)

    p = sub.add_parser("phase-report", help="list phase jumps larger than pi away from nulls")
    _add_source_flags(p)
    p.add_argument("--model", choices=("fe", "pe"), default="pe")
    p.add_argument("--null-db", type=float, default=-40.0)
    p.add_argument("--axis", type=int, choices=(0, 1), default=0, help="0 along height, 1 along range")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    _add_pe_flags(p)
    p.set_defaults(func=cmd_phase_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (InputProblem, FormatError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainOverflowError, OutOfRangeError, DomainError, CppfError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
