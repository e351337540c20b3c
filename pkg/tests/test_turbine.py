import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cppf import (
    GE_36,
    VESTAS_V66,
    ComplexFieldGrid,
    TerrainProfile,
    TurbinePlacement,
    TurbineSpec,
    blade_tip_speed,
    extract_complex_ppf,
    extraction_window,
    field_column_at_turbine,
    read_complex_field_export,
    run_pe,
    write_complex_field_export,
)
from cppf.errors import ConfigurationError, DomainError, OutOfRangeError

from .conftest import make_scenario


def test_vestas_tip_speed():
    v = blade_tip_speed(VESTAS_V66, 21.3)
    assert v == pytest.approx(73.6, abs=0.1)
    assert v * 3.6 == pytest.approx(265.0, abs=0.5)


def test_ge_tip_speed():
    v = blade_tip_speed(GE_36, 15.3)
    assert v == pytest.approx(88.3, abs=0.1)
    assert v * 3.6 == pytest.approx(317.8, abs=0.5)


def test_stopped_rotor_has_no_tip_speed():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert blade_tip_speed(VESTAS_V66, 0.0) == 0.0


def test_rpm_outside_operating_interval_warns_but_computes():
    with pytest.warns(UserWarning, match="outside"):
        v = blade_tip_speed(VESTAS_V66, 30.0)
    assert v == pytest.approx(2 * math.pi * 0.5 * 33.0)


def test_negative_rpm_is_rejected():
    with pytest.raises(DomainError):
        blade_tip_speed(VESTAS_V66, -1.0)


@given(st.floats(1.0, 200.0), st.floats(0.0, 30.0), st.floats(0.1, 5.0))
def test_tip_speed_is_linear_in_rpm_and_radius(d, rpm, k):
    spec = TurbineSpec(d, 50.0, 10.0, (0.0, 1000.0))
    bigger = TurbineSpec(d * k, 50.0, 10.0, (0.0, 1000.0))
    v = blade_tip_speed(spec, rpm)
    assert blade_tip_speed(spec, rpm * k) == pytest.approx(v * k)
    assert blade_tip_speed(bigger, rpm) == pytest.approx(v * k)


@pytest.mark.parametrize(
    "kw",
    [
        dict(rotor_diameter=0.0),
        dict(hub_height=-1.0),
        dict(n_blades=0),
        dict(rpm_nominal=30.0),
    ],
)
def test_spec_invariants(kw):
    base = dict(rotor_diameter=66.0, hub_height=67.0, rpm_nominal=21.3, rpm_range=(10.5, 24.5))
    with pytest.raises(ConfigurationError):
        TurbineSpec(**{**base, **kw})


def test_placement_needs_positive_distance():
    with pytest.raises(ConfigurationError):
        TurbinePlacement(0.0, -30.0)


# -- extraction window -------------------------------------------------------


def test_window_with_documented_margins():
    # margins as stated: 1 m below the foot, 1.1 m above the tip
    w = extraction_window(VESTAS_V66, 1.0, 1.1, 0.1)
    assert w[0] == -68.0 and w[-1] == pytest.approx(34.1)
    assert len(w) == 1022


def test_window_without_margins_spans_hub_plus_radius():
    w = extraction_window(VESTAS_V66, 0.0, 0.0, 0.1)
    assert (w[0], w[-1]) == (-67.0, 33.0)
    assert len(w) == 1001


def test_step_equal_to_span_gives_endpoints():
    w = extraction_window(VESTAS_V66, 0.0, 0.0, 100.0)
    assert list(w) == [-67.0, 33.0]


def test_non_positive_step_is_rejected():
    with pytest.raises(DomainError):
        extraction_window(VESTAS_V66, 1.0, 1.0, 0.0)


@given(st.floats(0.0, 5.0), st.floats(0.0, 5.0), st.sampled_from([0.05, 0.1, 0.25, 0.5, 1.0]))
def test_window_count_and_bounds(below, above, step):
    below, above = round(below / step) * step, round(above / step) * step
    w = extraction_window(VESTAS_V66, below, above, step)
    span = 100.0 + below + above
    assert len(w) == round(span / step) + 1
    assert w[0] == pytest.approx(-(67.0 + below), abs=1e-9)
    assert w[-1] == pytest.approx(33.0 + above, abs=1e-9)
    assert np.allclose(np.diff(w), step, atol=1e-8)


# -- field columns -----------------------------------------------------------


def unit_grid(ground=0.0):
    return ComplexFieldGrid(
        ranges=np.array([0.0, 2000.0]),
        ground=np.full(2, ground),
        field=np.ones((2, 400), dtype=complex),
        delta_z=1.0,
        wavelength=0.1,
        source_height=10.0,
    )


def test_unit_field_gives_unit_column_above_ground():
    w = extraction_window(VESTAS_V66, 0.0, 0.0, 1.0)
    col = field_column_at_turbine(unit_grid(), TurbinePlacement(1000.0, 0.0), w, TerrainProfile(), 67.0)
    assert col[0] == 0
    assert np.all(col[1:] == 1.0)


def test_below_ground_samples_are_exact_zero():
    w = extraction_window(VESTAS_V66, 3.0, 0.0, 0.5)
    terrain = TerrainProfile(((0.0, 5.0), (2000.0, 5.0)))
    col = field_column_at_turbine(unit_grid(5.0), TurbinePlacement(1000.0, 0.0), w, terrain, 67.0)
    below = w <= -67.0
    assert np.sum(below) == 7
    assert np.all(col[below] == 0) and np.all(col[~below] == 1.0)
    text = write_complex_field_export(w, col)
    assert text.splitlines()[1] == "-70 ( 0.000000000000 , 0.000000000000 )"


def test_turbine_beyond_grid_is_a_range_error():
    with pytest.raises(OutOfRangeError):
        field_column_at_turbine(unit_grid(), TurbinePlacement(5000.0, 0.0), [0.0], TerrainProfile(), 67.0)


def test_column_matches_grid_interpolation_oracle():
    pts = ((0.0, 0.0), (2000.0, 12.0), (4000.0, 3.0))
    sc = make_scenario(max_height=200.0, max_range=4.0, n_heights=20, n_ranges=8, terrain_points=pts)
    place = TurbinePlacement(3000.0, -30.0, "t1")
    grid, _ = run_pe(sc, capture_ranges=(place.distance,))
    w = extraction_window(VESTAS_V66, 1.0, 1.1, 0.1)
    col = field_column_at_turbine(grid, place, w, sc.terrain, VESTAS_V66.hub_height)
    ground = 7.5
    absolute = ground + 67.0 + w
    oracle = extract_complex_ppf(grid, absolute, ranges=[place.distance]).field[:, 0]
    np.testing.assert_array_equal(col[absolute > ground], oracle[absolute > ground])
    assert np.all(col[absolute <= ground] == 0)


def test_column_export_round_trip():
    sc = make_scenario(max_height=200.0, max_range=2.0, n_heights=10, n_ranges=4)
    grid, _ = run_pe(sc, capture_ranges=(1500.0,))
    w = extraction_window(VESTAS_V66, 1.0, 1.1, 0.1)
    col = field_column_at_turbine(grid, TurbinePlacement(1500.0, 0.0), w, sc.terrain, 67.0)
    _, h, back = read_complex_field_export(write_complex_field_export(w, col))
    np.testing.assert_allclose(h, w, atol=1e-9)
    assert np.max(np.abs(back - col)) <= 1e-12
