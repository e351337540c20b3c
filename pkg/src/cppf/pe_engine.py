"""Split-step parabolic-equation march with complex field output.

The vertical field column is held relative to the local ground on a uniform
grid of ``transform_size`` bins spanning ``z_max``.  Horizontal polarisation
uses a type-I discrete sine transform, so the field vanishes at the ground
bin; vertical polarisation uses a type-I cosine transform (zero normal
derivative at the ground).  Terrain is followed with the tilt/untilt
phase factors of the staircase method.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from dataclasses import field as dc_field

import numpy as np
from scipy.fft import dct, dst, idct, idst

from .domain import (
    MAG_FLOOR,
    Polarization,
    PpfResult,
    SourceSpec,
    free_space_loss_db,
    principal_phase,
)
from .environment import (
    RefractivityField,
    TerrainProfile,
    pattern_factor,
    phase_screen_column,
    terrain_height_at,
)
from .errors import (
    ConfigurationError,
    DomainOverflowError,
    OutOfRangeError,
    ValidationError,
)

DEFAULT_ABSORBER_FRACTION = 0.25
STARTER_TAPER_FRACTION = 0.25
BIN_OVERSAMPLE = 4


@dataclass(frozen=True)
class PeConfig:
    """Numerical parameters of the march.

    ``max_angle`` (degrees) bounds the starter's angular spectrum; the grid
    itself may represent steeper angles to leave room for terrain tilt.
    """

    transform_size: int
    z_max: float
    delta_r: float
    absorber_fraction: float = DEFAULT_ABSORBER_FRACTION
    max_angle: float | None = None
    f_norm: float = 1.0

    def __post_init__(self):
        n = self.transform_size
        if n < 4 or n & (n - 1):
            raise ConfigurationError(f"transform_size must be a power of two >= 4, got {n}")
        if not self.z_max > 0:
            raise ConfigurationError("z_max must be positive")
        if not self.delta_r > 0:
            raise ConfigurationError("delta_r must be positive")
        if not 0.0 <= self.absorber_fraction < 0.5:
            raise ConfigurationError("absorber_fraction must lie in [0, 0.5)")
        if self.max_angle is not None and not 0 < self.max_angle <= 90:
            raise ConfigurationError("max_angle must lie in (0, 90] degrees")

    @property
    def delta_p(self) -> float:
        return math.pi / self.z_max

    @property
    def delta_z(self) -> float:
        return self.z_max / self.transform_size

    def column_size(self, polarization: Polarization = Polarization.HORIZONTAL) -> int:
        """Stored bins: ``N`` for horizontal polarisation, whose top bin
        would be a Dirichlet zero anyway, and ``N + 1`` for vertical, whose
        cosine basis is only orthogonal with the top bin included."""
        return self.transform_size + (polarization is Polarization.VERTICAL)

    def zeta(self, polarization: Polarization = Polarization.HORIZONTAL) -> np.ndarray:
        """Bin heights above local ground."""
        return np.arange(self.column_size(polarization)) * self.delta_z


@dataclass
class PeState:
    """Field column at one range.  Treated as immutable: steps return new states."""

    range: float
    field: np.ndarray
    local_ground: float
    propagator: np.ndarray
    config: PeConfig
    k0: float
    polarization: Polarization = Polarization.HORIZONTAL
    screen: np.ndarray | None = None
    taper: np.ndarray | None = None


@dataclass
class ComplexFieldGrid:
    """Field columns captured at a set of ranges.

    ``field[i]`` is the column at ``ranges[i]``, bin ``n`` sitting at
    ``datum + ground[i] + n * delta_z``.  The march runs in heights relative
    to ``datum`` (the ground under the source) so that shifting a whole
    scenario vertically does not change its rounding.
    """

    ranges: np.ndarray
    ground: np.ndarray
    field: np.ndarray
    delta_z: float
    wavelength: float
    source_height: float  # absolute height of the antenna
    config: PeConfig | None = None
    metadata: dict = dc_field(default_factory=dict)
    datum: float = 0.0

    def column_index(self, range_m: float, tol: float = 1e-6) -> int:
        i = int(np.argmin(np.abs(self.ranges - range_m)))
        if abs(self.ranges[i] - range_m) > tol:
            raise OutOfRangeError(f"range {range_m} m was not captured in this grid")
        return i

    def bracket(self, range_index: int, heights):
        """Neighbouring bins and interpolation fraction for absolute heights.

        Returns ``(u0, u1, fr, below)`` where ``below`` marks heights under
        the local ground.
        """
        heights = np.asarray(heights, dtype=float)
        col = self.field[range_index]
        n = col.shape[0]
        rel = (heights - self.datum) - self.ground[range_index]
        # a height on the ground must not pick up rounding from the datum
        rel = np.where(np.abs(rel) < 1e-9, 0.0, rel)
        q = rel / self.delta_z
        below = q < 0
        if np.any(q > n - 1):
            raise OutOfRangeError("requested height lies above the computed column")
        q = np.where(below, 0.0, q)
        nb = np.minimum(np.floor(q).astype(int), n - 2)
        fr = q - nb
        return col[nb], col[nb + 1], fr, below

    def interpolate(self, range_index: int, heights) -> np.ndarray:
        """Complex field linearly interpolated in height; exact zero below ground."""
        u0, u1, fr, below = self.bracket(range_index, heights)
        out = u0 + fr * (u1 - u0)
        return np.where(below, 0.0 + 0.0j, out)

    def sample(self, range_m: float, heights) -> np.ndarray:
        """Complex field at absolute heights and an arbitrary range.

        Between captured ranges the two neighbouring columns are each
        interpolated in height and then blended linearly in range.
        """
        r = self.ranges
        if range_m < r[0] - 1e-6 or range_m > r[-1] + 1e-6:
            raise OutOfRangeError(f"range {range_m} m lies outside the grid [{r[0]}, {r[-1]}]")
        hit = np.flatnonzero(np.abs(r - range_m) <= 1e-6)
        if hit.size:
            return self.interpolate(int(hit[0]), heights)
        j = int(np.searchsorted(r, range_m)) - 1
        w = (range_m - r[j]) / (r[j + 1] - r[j])
        return (1.0 - w) * self.interpolate(j, heights) + w * self.interpolate(j + 1, heights)


def _n_modes(config: PeConfig) -> int:
    # mode indices 0..N; sine transforms use 1..N-1, cosine transforms 0..N
    return config.transform_size + 1


def build_free_space_propagator(config: PeConfig, k0: float, delta_r: float | None = None) -> np.ndarray:
    """Wide-angle free-space phase factors for mode indices ``0..N``.

    Evanescent modes (``j * delta_p > k0``) are set to zero.
    """
    dr = config.delta_r if delta_r is None else delta_r
    p = np.arange(_n_modes(config)) * config.delta_p
    prop = np.zeros(p.shape, dtype=complex)
    ok = p <= k0
    prop[ok] = config.f_norm * np.exp(1j * dr * (np.sqrt(k0 * k0 - p[ok] ** 2) - k0))
    return prop


def absorber_taper(config: PeConfig, polarization: Polarization = Polarization.HORIZONTAL) -> np.ndarray | None:
    """Raised-cosine amplitude taper over the top of the column."""
    if config.absorber_fraction == 0:
        return None
    zeta = config.zeta(polarization)
    start = (1.0 - config.absorber_fraction) * config.z_max
    x = np.clip((zeta - start) / (config.z_max - start), 0.0, 1.0)
    return 0.5 * (1.0 + np.cos(np.pi * x))


def starter_spectrum(source: SourceSpec, pattern, config: PeConfig, taper: bool = True) -> np.ndarray:
    """Angular spectrum ``U_j`` of the source and its ground image, j = 0..N.

    ``p_j = j * dtheta`` is the sine of the propagation angle.  The image
    term enters with a minus sign for horizontal and a plus sign for
    vertical polarisation.  Angles beyond ``max_angle`` (or beyond the
    grid) are removed with a cosine taper over the last quarter of the band;
    ``taper=False`` returns the raw spectrum.
    """
    lam = source.wavelength
    k0 = source.k0
    dtheta = lam / (2.0 * config.z_max)
    p = np.arange(_n_modes(config)) * dtheta
    prop = p < 1.0
    alpha = np.degrees(np.arcsin(np.where(prop, p, 0.0)))
    c_a = np.where(prop, np.clip(1.0 - p * p, 0.0, None) ** 0.75, 0.0)
    s_gain = math.sqrt(lam) / config.z_max
    antk0 = k0 * source.antenna_height
    direct = pattern_factor(pattern, alpha) * np.exp(-1j * p * antk0)
    image = pattern_factor(pattern, -alpha) * np.exp(1j * p * antk0)
    if source.polarization is Polarization.HORIZONTAL:
        u = c_a * s_gain * (direct - image)
    else:
        u = c_a * s_gain * (direct + image)
    return u * _spectral_window(p, config) if taper else u


def _spectral_window(p: np.ndarray, config: PeConfig) -> np.ndarray:
    top = p[config.transform_size - 1]
    if config.max_angle is not None:
        top = min(top, math.sin(math.radians(config.max_angle)))
    top = min(top, 1.0)
    start = (1.0 - STARTER_TAPER_FRACTION) * top
    x = np.clip((p - start) / (top - start), 0.0, 1.0)
    w = 0.5 * (1.0 + np.cos(np.pi * x))
    return np.where(p <= top, w, 0.0)


def _to_z_space(spectrum: np.ndarray, pol: Polarization, n: int) -> np.ndarray:
    if pol is Polarization.HORIZONTAL:
        # odd spectrum: u(z) = i * sum_j U_j sin(pi j m / N)
        out = np.zeros(n, dtype=complex)
        out[1:] = 1j * 0.5 * dst(spectrum[1:n], type=1)
        return out
    # even spectrum: u(z) = sum_j w_j U_j cos(pi j m / N), end weights 1/2
    return 0.5 * dct(spectrum[: n + 1], type=1)


def init_field(source: SourceSpec, pattern, config: PeConfig, terrain: TerrainProfile | None = None) -> PeState:
    """Starting column at range zero."""
    if source.antenna_height >= config.z_max:
        raise ConfigurationError(
            f"antenna height {source.antenna_height} m is not below z_max {config.z_max} m"
        )
    n = config.transform_size
    u = _to_z_space(starter_spectrum(source, pattern, config), source.polarization, n)
    return PeState(
        range=0.0,
        field=u,
        local_ground=terrain_height_at(terrain, 0.0) if terrain is not None else 0.0,
        propagator=build_free_space_propagator(config, source.k0),
        config=config,
        k0=source.k0,
        polarization=source.polarization,
        taper=absorber_taper(config, source.polarization),
    )


def _spectral_step(v: np.ndarray, propagator: np.ndarray, pol: Polarization) -> np.ndarray:
    n = v.shape[0]
    out = np.empty_like(v)
    if pol is Polarization.HORIZONTAL:
        spec = dst(v[1:], type=1, norm="ortho") * propagator[1:n]
        out[0] = 0.0
        out[1:] = idst(spec, type=1, norm="ortho")
    else:
        spec = dct(v, type=1, norm="ortho") * propagator[:n]
        out[:] = idct(spec, type=1, norm="ortho")
    return out


def _advance(state: PeState, dr: float, propagator, terrain, refractivity) -> PeState:
    cfg = state.config
    k0 = state.k0
    r1 = state.range + dr
    h0 = state.local_ground
    h1 = terrain_height_at(terrain, r1) if terrain is not None else h0
    ref = terrain_height_at(terrain, 0.0) if terrain is not None else h0
    if abs(h1 - ref) >= cfg.z_max:
        raise DomainOverflowError(
            f"terrain height change {h1 - ref:.1f} m at range {r1:.1f} m exceeds z_max {cfg.z_max} m"
        )
    zeta = cfg.zeta(state.polarization)
    # chord slope: equals the segment slope inside a segment and keeps the
    # column registered to the terrain at every step end
    alpha = (h1 - h0) / dr
    v = state.field
    if alpha != 0.0:
        v = v * np.exp(-1j * k0 * alpha * zeta)
    v = _spectral_step(v, propagator, state.polarization)
    if alpha != 0.0:
        v = v * (np.exp(1j * k0 * alpha * zeta) * np.exp(0.5j * k0 * alpha * alpha * dr))
    screen = state.screen
    if refractivity is not None:
        if screen is None or not refractivity.range_independent:
            screen = phase_screen_column(refractivity, r1, zeta, k0)
        v = v * np.exp(1j * dr * screen)
    if state.taper is not None:
        v = v * state.taper
    return replace(state, range=r1, field=v, local_ground=h1, screen=screen)


def march_step(state: PeState, terrain: TerrainProfile | None, refractivity: RefractivityField | None) -> PeState:
    """Advance the column by one range step.

    Order: tilt by the terrain slope, free-space propagation in the
    transform domain, untilt (the column is now registered to the ground at
    the new range), refractivity phase screen, absorbing taper.
    """
    return _advance(state, state.config.delta_r, state.propagator, terrain, refractivity)


def default_pe_config(
    scenario,
    transform_size: int | None = None,
    z_max: float | None = None,
    delta_r: float | None = None,
    max_angle: float | None = None,
    absorber_fraction: float = DEFAULT_ABSORBER_FRACTION,
    extra_height: float = 0.0,
) -> PeConfig:
    """Size a configuration for a scenario.

    The maximum angle defaults to the elevation of the top of the output
    window seen from the antenna image at a tenth of the maximum range.
    The bin size is a quarter of the sampling limit
    lambda / (2 sin(theta_max + alpha_max)): output heights are linearly
    interpolated between bins, and at the bare limit the phase turns by
    about pi per bin, which costs several dB near nulls.  The column must
    hold the window below the absorber.  The range step
    defaults to sqrt(lambda * z_max), shortened so that it divides the
    output range spacing.
    """
    src = scenario.source
    win = scenario.output
    lam = src.wavelength
    need = required_height(scenario) + extra_height
    if max_angle is None:
        max_angle = math.degrees(math.atan2(need + src.antenna_height, 0.1 * win.max_range * 1000.0))
        max_angle = min(max(max_angle, 0.5), 60.0)
    slope_deg = math.degrees(math.atan(scenario.terrain.max_slope()))
    total = min(max_angle + slope_deg, 89.0)
    dz = lam / (2.0 * math.sin(math.radians(total))) / BIN_OVERSAMPLE
    usable = 1.0 - absorber_fraction
    target = 1.2 * need / usable
    if transform_size is None and z_max is None:
        transform_size = max(64, 1 << math.ceil(math.log2(max(target / dz, 1.0))))
    if z_max is None:
        z_max = max(target, transform_size * dz)
    elif transform_size is None:
        transform_size = max(64, 1 << math.ceil(math.log2(z_max / dz)))
    if delta_r is None:
        step = win.range_step
        dr0 = math.sqrt(lam * z_max)
        delta_r = step / math.ceil(step / dr0)
    return PeConfig(
        transform_size=int(transform_size),
        z_max=float(z_max),
        delta_r=float(delta_r),
        absorber_fraction=absorber_fraction,
        max_angle=max_angle,
    )


def required_height(scenario) -> float:
    """Largest output height above local ground over the output ranges."""
    win = scenario.output
    r = np.linspace(0.0, win.max_range * 1000.0, 512)
    lowest = float(np.min(terrain_height_at(scenario.terrain, r)))
    return max(win.max_height - lowest, scenario.source.antenna_height)


def validate_pe(scenario, config: PeConfig) -> None:
    problems = []
    src = scenario.source
    win = scenario.output
    lam = src.wavelength
    usable = (1.0 - config.absorber_fraction) * config.z_max
    need = required_height(scenario)
    if need > usable:
        problems.append(
            ("transform_size", f"column holds {usable:.1f} m below the absorber but the window needs {need:.1f} m; transform_size too small")
        )
    if src.antenna_height >= config.z_max:
        problems.append(("antenna_height", "antenna lies above the computational column"))
    if config.max_angle is not None:
        slope = math.degrees(math.atan(scenario.terrain.max_slope()))
        total = min(config.max_angle + slope, 90.0)
        limit = lam / (2.0 * math.sin(math.radians(total)))
        if config.delta_z > limit * (1 + 1e-9):
            problems.append(
                ("transform_size", f"bin size {config.delta_z:.4g} m exceeds {limit:.4g} m needed for {total:.2f} deg; transform_size too small")
            )
    # phase sampling: output finer than lambda/2 cannot be recovered by
    # interpolation, so the bins must be at least that fine
    if win.height_step < lam / 2 and config.delta_z > win.height_step:
        problems.append(
            ("n_height_points", f"output height step {win.height_step:.4g} m is finer than lambda/2 but bins are {config.delta_z:.4g} m")
        )
    if problems:
        raise ValidationError(problems)


def extract_complex_ppf(
    grid: ComplexFieldGrid,
    heights,
    ranges=None,
    amplitude_path: str = "complex",
    floor: float = MAG_FLOOR,
    absorption_db_km: float = 0.0,
    digest: str = "",
) -> PpfResult:
    """Amplitude (dB) and absolute phase of the PPF at output points.

    The complex field is interpolated between the bins bracketing each
    height and the phase is its angle.  ``amplitude_path="complex"`` takes
    the magnitude of that same interpolated value, so amplitude and phase
    describe one complex number; ``"magnitude"`` interpolates the bin
    magnitudes instead, as the legacy amplitude-only code did.
    """
    heights = np.asarray(heights, dtype=float)
    ranges = grid.ranges if ranges is None else np.asarray(ranges, dtype=float)
    if amplitude_path not in ("complex", "magnitude"):
        raise ValueError(f"unknown amplitude_path {amplitude_path!r}")
    shape = (len(heights), len(ranges))
    values = np.zeros(shape, dtype=complex)
    mags = np.zeros(shape)
    for j, r in enumerate(ranges):
        idx = grid.column_index(r)
        u0, u1, fr, below = grid.bracket(idx, heights)
        c = np.where(below, 0.0, u0 + fr * (u1 - u0))
        values[:, j] = c
        if amplitude_path == "complex":
            mags[:, j] = np.abs(c)
        else:
            mags[:, j] = np.where(below, 0.0, np.abs(u0) + fr * (np.abs(u1) - np.abs(u0)))
    pmag = np.maximum(mags, floor)
    r_row = ranges[None, :]
    amp_db = 20.0 * np.log10(pmag) + 10.0 * np.log10(r_row)
    phase = principal_phase(np.arctan2(values.imag, values.real))
    slant = np.hypot(r_row, heights[:, None] - grid.source_height)
    loss = free_space_loss_db(slant, grid.wavelength) - amp_db + absorption_db_km * slant / 1000.0
    return PpfResult(
        ranges=ranges.copy(),
        heights=heights.copy(),
        amplitude_db=amp_db,
        phase_rad=phase,
        loss_db=loss,
        scenario_digest=digest,
        magnitude=mags,
        field=values,
        metadata={
            "model": "pe",
            "normalization": "20*log10(|u|) + 10*log10(r), r in metres",
            "magnitude_floor": floor,
            "amplitude_path": amplitude_path,
        },
    )


def run_pe(scenario, config: PeConfig | None = None, capture_ranges=(), validate: bool = True):
    """March a scenario to its maximum output range.

    Returns ``(grid, result)``.  The grid holds the column at every output
    range and at each of ``capture_ranges``; the latter are reached with a
    shortened final sub-step branched off the main march, so the output
    columns do not depend on which extra ranges were requested.
    """
    config = config or scenario.pe_config or default_pe_config(scenario)
    if validate:
        validate_pe(scenario, config)
    src = scenario.source
    datum = terrain_height_at(scenario.terrain, 0.0)
    terrain = scenario.terrain
    if datum != 0.0:
        terrain = TerrainProfile(tuple((r, h - datum) for r, h in terrain.points), terrain.compositions)
    refr = scenario.refractivity
    dr = config.delta_r

    out_ranges = scenario.output.ranges()
    out_steps = np.maximum(np.rint(out_ranges / dr).astype(int), 1)
    targets = {int(m): [] for m in out_steps}
    branches = {}
    for rc in capture_ranges:
        m = int(math.floor(rc / dr + 1e-9))
        rem = rc - m * dr
        if rem <= 1e-6 * dr:
            targets.setdefault(m, [])
        else:
            branches.setdefault(m, []).append(rem)
    last = max(list(targets) + [m + 1 for m in branches] + [1])

    state = init_field(src, src.antenna, config, terrain)
    captured = {}
    if 0 in branches:
        for rem in branches[0]:
            _capture_branch(state, rem, terrain, refr, captured)
    for m in range(1, last + 1):
        state = march_step(state, terrain, refr)
        if m in targets:
            captured[m * dr] = (state.local_ground, state.field)
        if m in branches:
            for rem in branches[m]:
                _capture_branch(state, rem, terrain, refr, captured)

    keys = sorted(captured)
    grid = ComplexFieldGrid(
        ranges=np.array(keys),
        ground=np.array([captured[k][0] for k in keys]),
        field=np.array([captured[k][1] for k in keys]),
        delta_z=config.delta_z,
        wavelength=src.wavelength,
        source_height=datum + src.antenna_height,
        config=config,
        metadata={"delta_r": dr, "steps": last},
        datum=datum,
    )
    result = extract_complex_ppf(
        grid,
        scenario.output.heights(),
        ranges=out_steps * dr,
        absorption_db_km=scenario.atmosphere.gaseous_absorption,
        digest=scenario.digest(),
    )
    result.metadata.update(
        {
            "transform_size": config.transform_size,
            "z_max": config.z_max,
            "delta_r": dr,
            "max_angle": config.max_angle,
            "absorber_fraction": config.absorber_fraction,
            "steps": last,
        }
    )
    return grid, result


def _capture_branch(state: PeState, rem: float, terrain, refr, captured: dict) -> None:
    prop = build_free_space_propagator(state.config, state.k0, rem)
    sub = _advance(state, rem, prop, terrain, refr)
    captured[sub.range] = (sub.local_ground, sub.field)


@dataclass(frozen=True)
class PhaseJump:
    height_index: int
    range_index: int
    jump: float


def phase_continuity_report(result: PpfResult, null_db: float = -40.0, threshold: float = math.pi, axis: int = 0):
    """Adjacent-sample phase jumps larger than ``threshold`` away from nulls.

    ``axis=0`` compares vertically adjacent samples (along height),
    ``axis=1`` horizontally adjacent ones.  A jump is reported at the lower
    index of the pair.
    """
    phase = np.asarray(result.phase_rad)
    amp = np.asarray(result.amplitude_db)
    d = np.diff(phase, axis=axis)
    strong = amp > null_db
    if axis == 0:
        both = strong[:-1, :] & strong[1:, :]
    else:
        both = strong[:, :-1] & strong[:, 1:]
    hits = np.argwhere((np.abs(d) > threshold) & both)
    return [PhaseJump(int(i), int(j), float(d[i, j])) for i, j in hits]


def unwrap_phase(phase, axis: int = 0) -> np.ndarray:
    """Remove 2*pi steps along ``axis`` (cumulative correction per column)."""
    return np.unwrap(np.asarray(phase, dtype=float), axis=axis)


def grid_digest(grid: ComplexFieldGrid) -> str:
    h = hashlib.sha256()
    for arr in (grid.ranges, grid.ground, grid.field):
        h.update(np.ascontiguousarray(arr).tobytes())
    h.update(repr(grid.datum).encode())
    return h.hexdigest()
