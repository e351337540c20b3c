import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from cppf import (
    AntennaKind,
    AntennaPattern,
    GroundComposition,
    Polarization,
    SourceSpec,
    fe_complex_field,
    fe_region_valid,
    reflection_coefficient,
    run_fe,
    total_phase_lag,
    trace_two_ray,
)
from cppf.errors import DomainError
from cppf.fe_model import PEC_GROUND, fe_magnitude_closed_form

from .conftest import make_scenario

OMNI = AntennaPattern()
SRC = SourceSpec(2800.0, 15.0, Polarization.HORIZONTAL, OMNI)


def test_equal_heights_geometry():
    g = trace_two_ray(15.0, 15.0, 1000.0)
    assert g.r1 == 1000.0
    assert g.r2 == math.hypot(1000.0, 30.0)
    assert g.r2 == pytest.approx(1000.44995, abs=1e-4)
    assert g.path_difference == pytest.approx(g.r2 - g.r1, rel=1e-9)


def test_ground_level_pair_is_rejected():
    with pytest.raises(DomainError):
        trace_two_ray(0.0, 0.0, 1000.0)


@pytest.mark.parametrize("x", [0.0, -5.0])
def test_non_positive_range_is_rejected(x):
    with pytest.raises(DomainError):
        trace_two_ray(10.0, 10.0, x)


@given(st.floats(0.1, 500), st.floats(0.1, 500), st.floats(1.0, 1e5))
def test_image_symmetry_and_ordering(a, z, x):
    g, h = trace_two_ray(a, z, x), trace_two_ray(z, a, x)
    assert g.r1 == pytest.approx(h.r1) and g.r2 == pytest.approx(h.r2)
    assert g.r2 >= g.r1 > 0
    assert g.grazing == pytest.approx(-g.alpha_r)


def test_phase_lag_examples():
    lam = SRC.wavelength
    g0 = trace_two_ray(15.0, 0.0001, 1000.0)
    assert total_phase_lag(g0, SRC.k0, math.pi) == pytest.approx(math.pi, abs=1e-3)

    class G:
        r1, r2 = 100.0, 100.0 + lam / 2

    assert total_phase_lag(G, SRC.k0, math.pi) == pytest.approx(2 * math.pi)

    class H:
        r1, r2 = 0.0, 0.45

    assert total_phase_lag(H, 58.68, math.pi) == pytest.approx(29.548, abs=1e-3)


def test_pec_cancels_at_zero_path_difference():
    s = fe_complex_field(SRC, OMNI, PEC_GROUND, 0.0, 1000.0)
    assert abs(complex(s.value)) < 1e-9


def test_no_ground_is_free_space():
    g = trace_two_ray(15.0, 50.0, 2000.0)
    s = fe_complex_field(SRC, OMNI, None, 50.0, 2000.0)
    assert abs(complex(s.value)) == pytest.approx(1.0)
    expected = math.remainder(g.r1 * SRC.k0, 2 * math.pi)
    assert math.remainder(s.phase_rad - expected, 2 * math.pi) == pytest.approx(0.0, abs=1e-9)


def test_against_independent_two_ray_script():
    # direct superposition with an explicit image source and a -1 reflection
    k = 2 * math.pi * 2.8e9 / 299_792_458.0
    a, z, x = 15.0, 50.0, 2000.0
    d = math.sqrt(x * x + (z - a) ** 2)
    r = math.sqrt(x * x + (z + a) ** 2)
    expected = cmath.exp(1j * k * d) - cmath.exp(1j * k * r)
    s = fe_complex_field(SRC, OMNI, PEC_GROUND, z, x)
    assert abs(complex(s.value) - expected) < 1e-9
    assert s.amplitude_db == pytest.approx(20 * math.log10(abs(expected)), abs=1e-6)
    assert s.phase_rad == pytest.approx(cmath.phase(expected), abs=1e-9)


@given(
    st.sampled_from(list(Polarization)),
    st.floats(0.5, 300),
    st.floats(0.0, 300),
    st.floats(10.0, 50_000),
    st.floats(1.0, 80.0),
    st.floats(0.0, 50.0),
)
def test_magnitude_matches_cosine_law(pol, a, z, x, eps, sigma):
    src = SourceSpec(2800.0, a, pol, OMNI)
    ground = GroundComposition(0.0, 0, eps, sigma)
    s = fe_complex_field(src, OMNI, ground, z, x)
    g = trace_two_ray(a, z, x)
    gamma = reflection_coefficient(pol, g.grazing, eps, sigma, 2800.0)
    omega = total_phase_lag(g, src.k0, gamma.phase())
    closed = fe_magnitude_closed_form(1.0, gamma.magnitude(), omega)
    # relative to the size of the two interfering terms
    assert abs(abs(complex(s.value)) - closed) <= 1e-12 * (1.0 + gamma.magnitude())


def test_nulls_fall_where_lag_is_odd_pi():
    lam, a, x = SRC.wavelength, 15.0, 5000.0
    z = brentq(lambda h: trace_two_ray(a, h, x).r2 - trace_two_ray(a, h, x).r1 - 3 * lam, 1.0, 200.0, xtol=1e-14)
    s = fe_complex_field(SRC, OMNI, PEC_GROUND, z, x)
    assert abs(complex(s.value)) < 1e-8
    assert abs(complex(fe_complex_field(SRC, OMNI, PEC_GROUND, z + 1.0, x).value)) > 0.1


@given(st.floats(1.0, 500.0))
def test_no_reflection_is_height_independent_at_fixed_direct_path(z):
    x = math.sqrt(5000.0**2 - (z - 15.0) ** 2)
    s = fe_complex_field(SRC, OMNI, None, z, x)
    assert s.amplitude_db == pytest.approx(0.0, abs=1e-12)


def test_pattern_weights_the_two_rays():
    beam = AntennaPattern(AntennaKind.GAUSS, 2.0, 0.0)
    src = SourceSpec(2800.0, 15.0, Polarization.HORIZONTAL, beam)
    s = fe_complex_field(src, beam, PEC_GROUND, 200.0, 2000.0)
    assert abs(complex(s.value)) < 2.0


@pytest.mark.parametrize("elev, r, ok", [(0.0, 2000.0, True), (6.0, 3000.0, True), (1.0, 3000.0, False)])
def test_validity_region(elev, r, ok):
    assert fe_region_valid(elev, r) is ok


def test_run_fe_warns_and_records_relief():
    sc = make_scenario(terrain_points=((0, 0), (5000, 40)))
    with pytest.warns(UserWarning, match="flat-earth"):
        res = run_fe(sc)
    assert any("flat-earth" in w for w in res.metadata["warnings"])


def test_run_fe_counts_points_outside_validity():
    sc = make_scenario(max_range=10.0, max_height=100.0, n_heights=5, n_ranges=5)
    res = run_fe(sc)
    assert any("validity" in w for w in res.metadata["warnings"])


def test_run_fe_raised_flat_ground_is_a_datum_shift():
    a = run_fe(make_scenario(n_heights=10, n_ranges=5))
    b = run_fe(make_scenario(min_height=50.0, max_height=150.0, n_heights=10, n_ranges=5, terrain_points=((0, 50), (10_000, 50))))
    np.testing.assert_allclose(a.amplitude_db, b.amplitude_db, atol=1e-9)
    np.testing.assert_allclose(a.loss_db, b.loss_db, atol=1e-9)


def test_run_fe_phase_is_principal_and_grids_match():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = run_fe(make_scenario(n_heights=7, n_ranges=9))
    assert res.amplitude_db.shape == res.phase_rad.shape == (7, 9)
    assert np.all((res.phase_rad > -math.pi) & (res.phase_rad <= math.pi))
