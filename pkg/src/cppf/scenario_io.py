"""Readers and writers for the scenario input file, the loss/PPF output
file, the complex-field export and the ASCII elevation grid.

Input file grammar: one record per line, ``values :comment``.  Values are
separated by whitespace and/or commas; text after the first ``:`` is a
comment.  Lines without a ``:`` that do not start with a number are comment
continuations and are skipped.  Records appear in this order::

    frequency (MHz)
    antenna height (m)
    antenna type (1=OMNI 2=GAUSS 3=SINC(X) 4=COSEC2 5=HTFIND 6=USRHTFIND 7=USRDEF)
    polarization (0=HOR 1=VER)
    beam width (deg)
    antenna elevation angle (deg)
    number of cut-back angles C, then C records "angle, factor"
    [type 7 only] number of pattern points P, then P records "angle, factor"
    minimum output height (m)
    maximum output height (m)
    maximum output range (km)
    number of output height points
    number of output range points
    extrapolation flag
    surface absolute humidity (g/m3)
    surface air temperature (deg C)
    gaseous absorption (dB/km)
    number of wind speeds W, then W records "range_km, speed_m_s"
    number of refractivity profiles R
    number of levels per profile L
    R times: profile range (km), then L records "height_m M-units"
    number of ground composition types G, then G records
        "range_km, ground_type, permittivity, conductivity"
    number of terrain points T, then T records "range_m, height_m"
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .domain import OutputWindow, Polarization, SourceSpec
from .environment import (
    AntennaKind,
    AntennaPattern,
    Atmosphere,
    GroundComposition,
    RefractivityField,
    RefractivityProfile,
    TerrainProfile,
)
from .errors import CppfError, FormatError, UnsupportedError, ValidationError

_ANTENNA_CODES = {1: AntennaKind.OMNI, 2: AntennaKind.GAUSS, 3: AntennaKind.SINCX, 4: AntennaKind.COSEC2, 7: AntennaKind.USER_DEFINED}
_UNSUPPORTED_ANTENNAS = {5: "HTFIND", 6: "USRHTFIND"}


@dataclass
class Scenario:
    source: SourceSpec
    output: OutputWindow
    atmosphere: Atmosphere = field(default_factory=Atmosphere)
    refractivity: RefractivityField = field(default_factory=RefractivityField.uniform)
    terrain: TerrainProfile = field(default_factory=TerrainProfile)
    extrapolation_flag: int = 0
    cut_back: tuple = ()
    pe_config: object = None

    def __post_init__(self):
        if self.source.antenna is None:
            self.source = SourceSpec(
                self.source.frequency,
                self.source.antenna_height,
                self.source.polarization,
                AntennaPattern(),
                self.source.elevation_angle,
                self.source.beam_width,
            )

    def validate(self) -> None:
        problems = []
        if not self.source.antenna_height < self.output.max_height:
            problems.append(("antenna_height", "antenna must lie below the maximum output height"))
        if self.output.n_height_points < 2:
            problems.append(("n_height_points", "at least 2 output heights are required"))
        if self.output.n_range_points < 2:
            problems.append(("n_range_points", "at least 2 output ranges are required"))
        if problems:
            raise ValidationError(problems)
        if self.pe_config is not None:
            from .pe_engine import validate_pe

            validate_pe(self, self.pe_config)

    def digest(self) -> str:
        h = hashlib.sha256(write_input_file(self).encode())
        if self.pe_config is not None:
            h.update(repr(self.pe_config).encode())
        return h.hexdigest()[:16]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


class _Records:
    def __init__(self, text: str):
        self.records = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            value, sep, _ = line.partition(":")
            tokens = value.replace(",", " ").split()
            if not sep:
                if not tokens or not _is_number(tokens[0]):
                    continue
            self.records.append((lineno, tokens))
        self.pos = 0

    def take(self, name: str, kinds: str):
        if self.pos >= len(self.records):
            raise FormatError("unexpected end of file", field=name)
        lineno, tokens = self.records[self.pos]
        self.pos += 1
        if len(tokens) != len(kinds):
            raise FormatError(f"expected {len(kinds)} value(s), found {len(tokens)}", line=lineno, field=name)
        out = []
        for tok, kind in zip(tokens, kinds):
            out.append(_convert(tok, kind, lineno, name))
        return out[0] if len(out) == 1 else out, lineno

    def one(self, name, kind="f"):
        return self.take(name, kind)[0]

    def count(self, name):
        n, lineno = self.take(name, "i")
        if n < 0:
            raise FormatError("count must be non-negative", line=lineno, field=name)
        return n


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _convert(tok, kind, lineno, name):
    try:
        x = float(tok)
    except ValueError:
        raise FormatError(f"cannot parse {tok!r} as a number", line=lineno, field=name) from None
    if not math.isfinite(x):
        raise FormatError(f"non-finite value {tok!r}", line=lineno, field=name)
    if kind == "i":
        if x != int(x):
            raise FormatError(f"expected an integer, found {tok!r}", line=lineno, field=name)
        return int(x)
    return x


def parse_input_file(text: str) -> Scenario:
    """Parse input-file text into a Scenario; errors carry line and field."""
    rec = _Records(text)
    freq = rec.one("frequency")
    ant_ht = rec.one("antenna_height")
    code, code_line = rec.take("antenna_type", "i")
    if code in _UNSUPPORTED_ANTENNAS:
        raise UnsupportedError(f"antenna type {code}: {_UNSUPPORTED_ANTENNAS[code]} unsupported", line=code_line, field="antenna_type")
    if code not in _ANTENNA_CODES:
        raise FormatError(f"unknown antenna type code {code}", line=code_line, field="antenna_type")
    pol_code, pol_line = rec.take("polarization", "i")
    if pol_code not in (0, 1):
        raise FormatError(f"unknown polarization code {pol_code}", line=pol_line, field="polarization")
    beam_width = rec.one("beam_width")
    elevation = rec.one("elevation_angle")
    cut_back = tuple(tuple(rec.take("cut_back", "ff")[0]) for _ in range(rec.count("n_cut_back")))
    table = ()
    if code == 7:
        table = tuple(tuple(rec.take("pattern_point", "ff")[0]) for _ in range(rec.count("n_pattern_points")))
    min_h = rec.one("min_height")
    max_h = rec.one("max_height")
    max_r = rec.one("max_range")
    n_h = rec.count("n_height_points")
    n_r = rec.count("n_range_points")
    extrap = rec.one("extrapolation_flag", "i")
    humidity = rec.one("surface_humidity")
    temperature = rec.one("surface_temperature")
    absorption = rec.one("gaseous_absorption")
    winds = tuple(tuple(rec.take("wind", "ff")[0]) for _ in range(rec.count("n_wind")))
    n_prof = rec.count("n_refractivity_profiles")
    n_lev = rec.count("n_refractivity_levels")
    profiles = []
    for _ in range(n_prof):
        start = rec.one("profile_range")
        levels = tuple(tuple(rec.take("refractivity_level", "ff")[0]) for _ in range(n_lev))
        profiles.append((start, levels))
    comps = tuple(
        GroundComposition(*rec.take("ground_composition", "fiff")[0]) for _ in range(rec.count("n_ground_types"))
    )
    points = tuple(tuple(rec.take("terrain_point", "ff")[0]) for _ in range(rec.count("n_terrain_points")))
    if rec.pos < len(rec.records):
        raise FormatError("unexpected trailing values", line=rec.records[rec.pos][0])

    kind = _ANTENNA_CODES[code]
    try:
        pattern = AntennaPattern(kind, beam_width, elevation, table) if kind is not AntennaKind.OMNI else AntennaPattern(AntennaKind.OMNI, beam_width, elevation)
        source = SourceSpec(freq, ant_ht, Polarization(pol_code), pattern, elevation, beam_width)
        window = OutputWindow(min_h, max_h, max_r, n_h, n_r)
        atmos = Atmosphere(humidity, temperature, absorption, winds)
        refr = RefractivityField(tuple(RefractivityProfile(s, lv) for s, lv in profiles))
        terrain = TerrainProfile(points, comps)
    except CppfError as exc:
        raise FormatError(str(exc)) from exc
    scenario = Scenario(source, window, atmos, refr, terrain, extrap, cut_back)
    scenario.validate()
    return scenario


def write_input_file(s: Scenario) -> str:
    src = s.source
    pat = src.antenna or AntennaPattern()
    code = {v: k for k, v in _ANTENNA_CODES.items()}[pat.kind]
    out = []

    def put(values, comment):
        if not isinstance(values, (tuple, list)):
            values = (values,)
        out.append(f"{', '.join(_fmt(v) for v in values)} :{comment}")

    put(src.frequency, "Frequency in MHz")
    put(src.antenna_height, "Antenna height in m")
    put(code, "Antenna type (1=OMNI,2=GAUSS,3=SINC(X),4=COSEC2,5=HTFIND,6=USRHTFIND,7=USRDEF)")
    put(src.polarization.value, "Polarization (0=HOR,1=VER)")
    put(float(pat.beam_width), "Beam width in deg")
    put(float(pat.elevation), "Antenna elevation angle in deg")
    put(len(s.cut_back), "Number of cut-back angles and factors")
    for a, f in s.cut_back:
        put((float(a), float(f)), "Cut-back angle (deg), factor")
    if pat.kind is AntennaKind.USER_DEFINED:
        put(len(pat.table), "Number of user-defined antenna pattern points")
        for a, f in pat.table:
            put((a, f), "Pattern angle (deg), normalised factor")
    w = s.output
    put(float(w.min_height), "Minimum output height in m")
    put(float(w.max_height), "Maximum output height in m")
    put(float(w.max_range), "Maximum output range in km")
    put(int(w.n_height_points), "Number of output height points")
    put(int(w.n_range_points), "Number of output range points")
    put(int(s.extrapolation_flag), "Extrapolation flag")
    a = s.atmosphere
    put(float(a.surface_humidity), " Surface absolute humidity in g/m3")
    put(float(a.surface_temperature), " Surface air temperature in degrees")
    put(float(a.gaseous_absorption), " Gaseous absorption attenuation rate in dB/km")
    put(len(a.wind_speeds), " Number of wind speeds/ranges specified")
    for r, v in a.wind_speeds:
        put((float(r), float(v)), " Wind range (km), speed (m/s)")
    profs = s.refractivity.profiles
    n_lev = len(profs[0].levels)
    if any(len(p.levels) != n_lev for p in profs):
        raise FormatError("all refractivity profiles must have the same number of levels")
    put(len(profs), " Number of refractivity profiles")
    put(n_lev, " Number of levels in refractivity profiles")
    for k, p in enumerate(profs, start=1):
        put(float(p.start_range), f" Range of refractivity profile {k} in km")
        for lv, (h, m) in enumerate(p.levels, start=1):
            out.append(f"{_fmt(h)} {_fmt(m)} : Height & M-unit value of ref. profile {k}, level {lv}")
    comps = s.terrain.compositions
    put(len(comps), " Number of ground composition types")
    for c in comps:
        put((float(c.start_range), int(c.ground_type), float(c.permittivity), float(c.conductivity)),
            " Range (km), ground type (integer), permittivity, conductivity")
    pts = s.terrain.points
    put(len(pts), " Number of terrain range/height points")
    for r, h in pts:
        out.append(f"{_fmt(r)} {_fmt(h)} : Terrain range (m), height (m)")
    return "\n".join(out) + "\n"


OUTPUT_BANNER = "********Output Loss and Prop. Factor Values********"


def _fmt2(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def write_output_file(result) -> str:
    """Per-range blocks of height, loss and propagation factor (2 decimals)."""
    lines = [OUTPUT_BANNER, ""]
    for j, r in enumerate(result.ranges):
        lines.append(f"range in km = {r / 1000.0:.2f}")
        lines.append("Height(m) Loss(dB) PFac(dB)")
        for i, h in enumerate(result.heights):
            lines.append(f"{_fmt2(h)} {_fmt2(result.loss_db[i, j])} {_fmt2(result.amplitude_db[i, j])}")
        lines.append("")
    return "\n".join(lines) + "\n"


def parse_output_file(text: str) -> dict:
    """Inverse of write_output_file: ranges (km) and per-range rows."""
    blocks = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if line.startswith("range in km"):
            try:
                blocks.append((float(line.split("=")[1]), []))
            except (IndexError, ValueError):
                raise FormatError("bad range line", line=lineno) from None
        elif line and blocks and not line.startswith("Height"):
            try:
                blocks[-1][1].append(tuple(float(t) for t in line.split()))
            except ValueError:
                raise FormatError("bad data line", line=lineno) from None
    return {"ranges_km": [b[0] for b in blocks], "rows": [b[1] for b in blocks]}


def _fmt_height(h: float) -> str:
    h = round(float(h), 9)
    if h == 0:
        return "0"
    return f"{h:.10g}"


def _fmt_value(x: float) -> str:
    s = f"{x:.12f}"
    return "0.000000000000" if s == "-0.000000000000" else s


def write_complex_field_export(heights, values, profile_index: int = 1) -> str:
    """``<profile_index> <count>`` then ``h ( re , im )`` per height."""
    heights = np.asarray(heights, dtype=float)
    values = np.asarray([complex(v) for v in values])
    if heights.shape != values.shape:
        raise FormatError("heights and values differ in length")
    if heights.size >= 2:
        step = np.diff(heights)
        if step[0] <= 0 or not np.allclose(step, step[0], rtol=1e-6, atol=1e-9):
            raise FormatError("heights must be ascending with a uniform step")
    lines = [f"{int(profile_index)} {heights.size}"]
    for h, v in zip(heights, values):
        lines.append(f"{_fmt_height(h)} ( {_fmt_value(v.real)} , {_fmt_value(v.imag)} )")
    return "\n".join(lines) + "\n"


def read_complex_field_export(text: str):
    """Return ``(profile_index, heights, values)``."""
    lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), start=1) if ln.strip()]
    if not lines:
        raise FormatError("empty export")
    lineno, head = lines[0]
    parts = head.split()
    if len(parts) != 2:
        raise FormatError("header must be '<profile_index> <count>'", line=lineno)
    try:
        index, count = int(parts[0]), int(parts[1])
    except ValueError:
        raise FormatError("header values must be integers", line=lineno) from None
    if count != len(lines) - 1:
        raise FormatError(f"header announces {count} samples, found {len(lines) - 1}", line=lineno)
    heights = np.empty(count)
    values = np.empty(count, dtype=complex)
    for k, (lineno, ln) in enumerate(lines[1:]):
        try:
            h, rest = ln.split("(", 1)
            re_s, im_s = rest.rstrip(")").split(",")
            heights[k] = float(h)
            values[k] = complex(float(re_s), float(im_s))
        except ValueError:
            raise FormatError("expected 'h ( re , im )'", line=lineno) from None
    return index, heights, values


def write_elevation_grid(grid) -> str:
    lines = [
        f"n_cols {grid.n_cols}",
        f"n_rows {grid.n_rows}",
        f"x_origin {_fmt(float(grid.origin[0]))}",
        f"y_origin {_fmt(float(grid.origin[1]))}",
        f"cell_size {_fmt(float(grid.cell_size))}",
        f"nodata {_fmt(float(grid.nodata))}",
    ]
    for row in np.asarray(grid.heights, dtype=float):
        lines.append(" ".join(_fmt(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def read_elevation_grid(text: str):
    """Parse the ASCII elevation grid.

    Six ``key value`` header lines (n_cols, n_rows, x_origin, y_origin,
    cell_size, nodata) then ``n_rows`` rows of ``n_cols`` heights.  Row 0
    lies at ``y_origin`` and rows advance northwards; column 0 lies at
    ``x_origin`` and columns advance eastwards.
    """
    from .pseudo3d import ElevationGrid

    lines = [(i, ln.split()) for i, ln in enumerate(text.splitlines(), start=1) if ln.strip()]
    keys = ["n_cols", "n_rows", "x_origin", "y_origin", "cell_size", "nodata"]
    if len(lines) < len(keys):
        raise FormatError("truncated header")
    header = {}
    for key, (lineno, toks) in zip(keys, lines):
        if len(toks) != 2 or toks[0] != key:
            raise FormatError(f"expected '{key} <value>'", line=lineno, field=key)
        header[key] = _convert(toks[1], "i" if key in ("n_cols", "n_rows") else "f", lineno, key)
    rows = lines[len(keys):]
    if len(rows) != header["n_rows"]:
        raise FormatError(f"header declares {header['n_rows']} rows, found {len(rows)}")
    data = np.empty((header["n_rows"], header["n_cols"]))
    for r, (lineno, toks) in enumerate(rows):
        if len(toks) != header["n_cols"]:
            raise FormatError(f"row {r} has {len(toks)} values, expected {header['n_cols']}", line=lineno, field=f"row {r}")
        for c, tok in enumerate(toks):
            data[r, c] = _convert(tok, "f", lineno, f"row {r}")
    try:
        return ElevationGrid(
            origin=(header["x_origin"], header["y_origin"]),
            cell_size=header["cell_size"],
            heights=data,
            nodata=header["nodata"],
        )
    except CppfError as exc:
        raise FormatError(str(exc)) from exc


def write_plot_grid(result, quantity: str = "amplitude_db") -> str:
    """Comma-delimited grid: a header of ranges (m), then one row per height."""
    values = getattr(result, quantity)
    lines = ["height_m," + ",".join(f"{r:.3f}" for r in result.ranges)]
    for i, h in enumerate(result.heights):
        lines.append(f"{h:.3f}," + ",".join(f"{v:.6f}" for v in values[i]))
    return "\n".join(lines) + "\n"
