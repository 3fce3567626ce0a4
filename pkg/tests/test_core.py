from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mirrorqm.core import (
    Grid1D,
    JointDensity,
    MomentumSpectrum,
    PhysicalConstants,
    SpectrumTruncationError,
    gaussian_spectrum,
    make_grid,
    normalize_spectrum,
    trapezoid,
)


def test_make_grid_two_endpoints():
    g = make_grid(0, 1, 2)
    np.testing.assert_array_equal(g.points, [0.0, 1.0])


def test_make_grid_integer_lattice():
    g = make_grid(0, 10, 11)
    assert g.step == 1.0
    np.testing.assert_array_equal(g.points, np.arange(11.0))


def test_make_grid_symmetric_midpoint():
    g = make_grid(-5, 5, 101)
    assert g.step == pytest.approx(0.1, abs=1e-15)
    assert g.point(50) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize(
    "args", [(0, 1, 1), (1, 0, 5), (0, 0, 5), (0, math.inf, 5), (math.nan, 1, 5)]
)
def test_make_grid_rejects_bad_input(args):
    with pytest.raises(ValueError):
        make_grid(*args)


@given(
    start=st.floats(-1e3, 1e3),
    span=st.floats(1e-3, 1e3),
    count=st.integers(2, 5000),
    data=st.data(),
)
def test_grid_index_round_trip(start, span, count, data):
    g = make_grid(start, start + span, count)
    i = data.draw(st.integers(0, count - 1))
    assert g.index_of(g.point(i)) == i


def test_index_of_rejects_off_grid_value():
    g = make_grid(0, 1, 11)
    with pytest.raises(ValueError):
        g.index_of(0.05)
    with pytest.raises(IndexError):
        g.point(11)


def test_constants_validation():
    with pytest.raises(ValueError):
        PhysicalConstants(hbar=0.0)
    with pytest.raises(ValueError):
        PhysicalConstants(mass=-1.0)


def test_gaussian_spectrum_plus_is_normalized(gaussian_plus):
    wp, wm = gaussian_plus.branch_weights()
    assert abs(wp - 1.0) < 1e-6
    assert wm == 0.0
    assert not np.any(gaussian_plus.c_minus)


def test_gaussian_spectrum_both_splits_evenly():
    spec = gaussian_spectrum(5.0, 0.25, make_grid(0.01, 10.0, 2048), "both")
    wp, wm = spec.branch_weights()
    assert wp == pytest.approx(0.5, abs=1e-12)
    assert wm == pytest.approx(0.5, abs=1e-12)


def test_gaussian_spectrum_peak_at_p0():
    grid = make_grid(0.01, 10.0, 1000)  # 5.0 is a grid point: 0.01 + 500 * 0.01
    spec = gaussian_spectrum(5.0, 0.25, grid, "plus")
    assert grid.point(int(np.argmax(np.abs(spec.c_plus)))) == pytest.approx(5.0)


def test_gaussian_spectrum_rejects_truncation():
    with pytest.raises(SpectrumTruncationError):
        gaussian_spectrum(5.0, 2.0, make_grid(0.01, 10.0, 512), "plus")


def test_gaussian_spectrum_is_already_normalized(gaussian_plus):
    again = normalize_spectrum(gaussian_plus)
    np.testing.assert_allclose(again.c_plus, gaussian_plus.c_plus, rtol=1e-12, atol=0)


def test_momentum_grid_must_be_positive():
    grid = make_grid(0.0, 1.0, 11)
    with pytest.raises(ValueError):
        MomentumSpectrum(grid, np.ones(11), np.zeros(11))
    with pytest.raises(ValueError):
        gaussian_spectrum(0.5, 0.1, grid)


def test_normalize_scales_by_root_weight():
    grid = make_grid(1.0, 2.0, 101)
    c = np.full(101, 2.0, dtype=complex)  # weight 4 over unit length
    spec = normalize_spectrum(MomentumSpectrum(grid, c, np.zeros(101)))
    np.testing.assert_allclose(spec.c_plus, 1.0, rtol=1e-14)


@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False), min_size=3, max_size=40))
def test_normalize_is_idempotent(values):
    c = np.array(values, dtype=complex)
    if not np.any(np.abs(c) > 1e-100):
        return
    grid = make_grid(1.0, 2.0, c.size)
    spec = MomentumSpectrum(grid, c, c[::-1])
    if not spec.total_weight() > 0:
        return
    once = normalize_spectrum(spec)
    twice = normalize_spectrum(once)
    assert once.total_weight() == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(twice.c_plus, once.c_plus, rtol=1e-12, atol=1e-300)


def test_normalize_single_bin():
    grid = make_grid(1.0, 2.0, 11)
    c = np.zeros(11, dtype=complex)
    c[5] = 3.0
    spec = normalize_spectrum(MomentumSpectrum(grid, c, np.zeros(11)))
    assert abs(spec.c_plus[5]) ** 2 * grid.step == pytest.approx(1.0, rel=1e-12)


def test_normalize_rejects_zero_spectrum():
    grid = make_grid(1.0, 2.0, 11)
    with pytest.raises(ValueError):
        normalize_spectrum(MomentumSpectrum(grid, np.zeros(11), np.zeros(11)))


def test_fields_are_read_only(gaussian_plus):
    with pytest.raises(ValueError):
        gaussian_plus.c_plus[0] = 1.0


def test_trapezoid_matches_closed_form():
    g = make_grid(0.0, 1.0, 1001)
    assert trapezoid(g.points**2, g) == pytest.approx(1 / 3, abs=1e-6)


def test_joint_density_rejects_negative():
    g = make_grid(0.0, 1.0, 3)
    with pytest.raises(ValueError):
        JointDensity(g, g, -np.ones((3, 3)))


def test_grid_is_frozen():
    g = Grid1D(0.0, 1.0, 3)
    with pytest.raises(AttributeError):
        g.step = 2.0  # type: ignore[misc]
