import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cppf import (
    AntennaKind,
    AntennaPattern,
    Polarization,
    RefractivityField,
    RefractivityProfile,
    TerrainProfile,
    m_unit_at,
    pattern_factor,
    phase_screen_column,
    reflection_coefficient,
    segment_slope,
    terrain_height_at,
)
from cppf.environment import Atmosphere, complex_permittivity
from cppf.errors import ConfigurationError

C = 299_792_458.0
DUCT = ((0.0, 330.0), (300.0, 370.0), (400.0, 320.0), (2000.0, 500.0))
NON_ISOTROPIC = ((0.0, 330.0), (100.0, 430.0), (230.0, 530.0), (2000.0, 630.0))


def field(*levels, start=0.0):
    return RefractivityField((RefractivityProfile(start, levels),))


# -- refractivity ------------------------------------------------------------


def test_isotropic_profile_is_constant():
    assert m_unit_at(field((0.0, 330.0), (2000.0, 330.0)), 10_000.0, 500.0) == 330.0


def test_linear_midpoint_between_levels():
    assert m_unit_at(field((0.0, 330.0), (100.0, 430.0)), 0.0, 50.0) == pytest.approx(380.0)


def test_constant_extrapolation_above_top_level():
    assert m_unit_at(field(*NON_ISOTROPIC), 0.0, 5000.0) == 630.0


def test_linear_in_range_between_profiles():
    f = RefractivityField(
        (RefractivityProfile(0.0, ((0.0, 300.0),)), RefractivityProfile(10.0, ((0.0, 400.0),)))
    )
    assert m_unit_at(f, 5000.0, 10.0) == pytest.approx(350.0)
    assert m_unit_at(f, 50_000.0, 10.0) == pytest.approx(400.0)


@given(st.floats(0.0, 3000.0))
def test_monotone_profile_interpolates_between_neighbours(h):
    f = field(*NON_ISOTROPIC)
    m = m_unit_at(f, 0.0, h)
    heights = [lv[0] for lv in NON_ISOTROPIC]
    i = min(int(np.searchsorted(heights, h, side="right")) - 1, len(heights) - 2)
    lo, hi = NON_ISOTROPIC[i][1], NON_ISOTROPIC[i + 1][1]
    assert min(lo, hi) - 1e-9 <= m <= max(lo, hi) + 1e-9


@pytest.mark.parametrize(
    "levels",
    [(), ((10.0, 300.0), (5.0, 310.0)), ((0.0, float("inf")),)],
)
def test_profile_invariants(levels):
    with pytest.raises(ConfigurationError):
        RefractivityProfile(0.0, levels)


def test_field_invariants():
    p = RefractivityProfile(1.0, ((0.0, 300.0),))
    with pytest.raises(ConfigurationError):
        RefractivityField((p,))


def test_phase_screen_vacuum_is_zero():
    col = phase_screen_column(RefractivityField.uniform(0.0), 0.0, np.arange(10.0), 58.68)
    assert np.all(col == 0.0)


def test_phase_screen_isotropic_value():
    col = phase_screen_column(RefractivityField.uniform(330.0), 0.0, np.arange(0.0, 1000.0, 10.0), 58.68)
    np.testing.assert_allclose(col, 0.019364, atol=1e-6)


def test_phase_screen_duct_composes_with_lookup():
    f = field(*DUCT)
    z = np.linspace(0.0, 600.0, 301)
    col = phase_screen_column(f, 0.0, z, 58.68)
    expected = np.array([58.68 * m_unit_at(f, 0.0, h) * 1e-6 for h in z])
    np.testing.assert_allclose(col, expected, rtol=1e-14)
    assert np.any(np.diff(col) < 0) and np.any(np.diff(col) > 0)


# -- terrain -----------------------------------------------------------------


@pytest.mark.parametrize(
    "points, r, expected",
    [(((0, 0), (1000, 50)), 500.0, 25.0), ((), 1234.0, 0.0), (((0, 10), (100, 10)), 50.0, 10.0), (((0, 0), (1000, 50)), 5000.0, 50.0)],
)
def test_terrain_height(points, r, expected):
    assert terrain_height_at(TerrainProfile(points), r) == pytest.approx(expected)


@pytest.mark.parametrize(
    "points, r, expected",
    [(((0, 0), (1000, 50)), 500.0, 0.05), ((), 10.0, 0.0), (((0, 50), (1000, 0)), 200.0, -0.05), (((0, 0), (1000, 50)), 2000.0, 0.0)],
)
def test_segment_slope(points, r, expected):
    assert segment_slope(TerrainProfile(points), r) == pytest.approx(expected)


def test_terrain_ranges_must_ascend():
    with pytest.raises(ConfigurationError):
        TerrainProfile(((0, 0), (0, 5)))


@given(
    st.lists(st.tuples(st.floats(1.0, 500.0), st.floats(-100.0, 100.0)), min_size=2, max_size=8),
    st.floats(0.05, 0.95),
)
def test_slope_matches_finite_difference(steps, frac):
    r, pts = 0.0, []
    for dr, h in steps:
        pts.append((r, h))
        r += dr
    t = TerrainProfile(tuple(pts))
    k = len(pts) // 2 - 1 if len(pts) > 2 else 0
    x = pts[k][0] + frac * (pts[k + 1][0] - pts[k][0])
    eps = 1e-4 * (pts[k + 1][0] - pts[k][0]) * min(frac, 1 - frac)
    fd = (terrain_height_at(t, x + eps) - terrain_height_at(t, x - eps)) / (2 * eps)
    assert fd == pytest.approx(segment_slope(t, x), abs=1e-6)


def test_atmosphere_invariants():
    with pytest.raises(ConfigurationError):
        Atmosphere(surface_humidity=-1.0)
    with pytest.raises(ConfigurationError):
        Atmosphere(gaseous_absorption=-0.1)


# -- antenna patterns --------------------------------------------------------

BUILTIN = [
    AntennaPattern(AntennaKind.GAUSS, 3.0, 1.0),
    AntennaPattern(AntennaKind.SINCX, 3.0, 1.0),
    AntennaPattern(AntennaKind.COSEC2, 3.0, 1.0),
]


def test_omni_is_unity():
    assert pattern_factor(AntennaPattern(), 37.0) == 1.0


@pytest.mark.parametrize("pattern", BUILTIN, ids=lambda p: p.kind.name)
def test_beam_maximum_is_unity(pattern):
    assert pattern_factor(pattern, pattern.elevation) == pytest.approx(1.0)


@pytest.mark.parametrize("pattern", BUILTIN[:2], ids=lambda p: p.kind.name)
def test_half_power_width_equals_beam_width(pattern):
    edge = pattern_factor(pattern, pattern.elevation + pattern.beam_width / 2)
    assert edge == pytest.approx(1 / math.sqrt(2), rel=1e-3)


def test_user_table_interpolates_and_clamps():
    p = AntennaPattern(AntennaKind.USER_DEFINED, table=((-10.0, 0.2), (0.0, 1.0)))
    assert pattern_factor(p, -5.0) == pytest.approx(0.6)
    assert pattern_factor(p, -40.0) == pytest.approx(0.2)
    assert pattern_factor(p, 40.0) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "table", [(), ((0.0, 0.5), (-1.0, 0.5)), ((0.0, 1.5),)]
)
def test_user_table_invariants(table):
    with pytest.raises(ConfigurationError):
        AntennaPattern(AntennaKind.USER_DEFINED, table=table)


@pytest.mark.parametrize("pattern", BUILTIN, ids=lambda p: p.kind.name)
def test_builtin_patterns_are_bounded_and_continuous(pattern):
    a = np.linspace(-90.0, 90.0, 180_001)
    f = pattern_factor(pattern, a)
    assert np.all((f >= 0) & (f <= 1 + 1e-12))
    assert np.max(np.abs(np.diff(f))) < 1e-2


# -- Fresnel -----------------------------------------------------------------


def fresnel_oracle(pol, grazing, eps_r, sigma, f_mhz):
    """Snell's-law form on the complex refractive index."""
    lam = C / (f_mhz * 1e6)
    n = cmath.sqrt(complex(eps_r, 60.0 * lam * sigma))
    cos_i = math.sin(grazing)
    sin_i = math.cos(grazing)
    cos_t = cmath.sqrt(1.0 - (sin_i / n) ** 2)
    if pol is Polarization.HORIZONTAL:
        return (cos_i - n * cos_t) / (cos_i + n * cos_t)
    return (n * cos_i - cos_t) / (n * cos_i + cos_t)


def test_perfect_conductor_limit():
    g = reflection_coefficient(Polarization.HORIZONTAL, 0.3, 15.0, math.inf, 2800.0)
    assert g.magnitude() == 1.0 and g.phase() == pytest.approx(math.pi)
    v = reflection_coefficient(Polarization.VERTICAL, 0.3, 15.0, math.inf, 2800.0)
    assert v.magnitude() == 1.0 and v.phase() == 0.0


@pytest.mark.parametrize("pol", list(Polarization))
@pytest.mark.parametrize("grazing", [0.01, 0.5, math.pi / 2])
def test_free_space_has_no_reflection(pol, grazing):
    assert reflection_coefficient(pol, grazing, 1.0, 0.0, 2800.0).magnitude() == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("pol", list(Polarization))
def test_fresnel_against_snell_oracle(pol):
    psi = math.radians(1.0)
    g = complex(reflection_coefficient(pol, psi, 15.0, 0.012, 2800.0))
    expected = fresnel_oracle(pol, psi, 15.0, 0.012, 2800.0)
    assert abs(g - expected) < 1e-12


@given(
    st.sampled_from(list(Polarization)),
    st.floats(1e-4, math.pi / 2),
    st.floats(1.0, 100.0),
    st.floats(0.0, 100.0),
    st.floats(1.0, 1e5),
)
def test_fresnel_property_matches_oracle_and_is_bounded(pol, psi, eps_r, sigma, f):
    g = reflection_coefficient(pol, psi, eps_r, sigma, f)
    assert 0.0 <= g.magnitude() <= 1.0
    assert abs(complex(g) - fresnel_oracle(pol, psi, eps_r, sigma, f)) < 1e-9


def test_lossy_permittivity_sign_follows_outgoing_wave_convention():
    assert complex_permittivity(15.0, 0.012, 2800.0).imag > 0


def test_horizontal_reflection_tends_to_minus_one_at_grazing():
    g = reflection_coefficient(Polarization.HORIZONTAL, 1e-4, 15.0, 0.012, 2800.0)
    assert g.magnitude() == pytest.approx(1.0, abs=1e-3)
    assert abs(abs(g.phase()) - math.pi) < 1e-2
