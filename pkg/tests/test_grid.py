import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from besovcap.grid import (
    BallFamily,
    Translation,
    build_grid,
    campanato_norm,
    difference_norm,
    directional_derivative_lp,
    gradient_lp,
    load_grid_function,
    lp_norm,
    sample_function,
    save_grid_function,
    split_offset,
)


@pytest.fixture(scope="module")
def line():
    return build_grid(1, 6.0, 2048)


def test_build_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        build_grid(3, 1.0, 16)
    with pytest.raises(ValueError):
        build_grid(1, -1.0, 16)
    with pytest.raises(ValueError):
        build_grid(1, 1.0, 17)
    with pytest.raises(ValueError):
        build_grid(2, 1.0, 4096, max_cells=1000)


def test_grid_geometry():
    g = build_grid(2, 2.0, 16)
    assert g.dx == pytest.approx(0.25)
    assert g.shape == (16, 16)
    c = g.centers
    assert c[0] == pytest.approx(-2.0 + 0.125)
    assert np.allclose(c, -c[::-1])


def test_gaussian_l2_norm_matches_closed_form(line):
    f = sample_function("gaussian", {}, line)
    # int exp(-2 x^2) dx = sqrt(pi / 2)
    assert lp_norm(f, 2) ** 2 == pytest.approx(math.sqrt(math.pi / 2), rel=1e-12)
    assert lp_norm(f, math.inf) == pytest.approx(1.0, abs=1e-5)


def test_gaussian_gradient_l1_is_twice_the_peak(line):
    f = sample_function("gaussian", {"amplitude": 3.0}, line)
    assert gradient_lp(f, 1.0) == pytest.approx(6.0, rel=1e-4)


def test_directional_derivative_matches_axis_gradient():
    g = build_grid(2, 3.0, 128)
    f = sample_function("tensor-product", {"radii": [1.0, 1.0]}, g)
    dx = directional_derivative_lp(f, (1.0, 0.0), 2.0)
    dy = directional_derivative_lp(f, (0.0, 1.0), 2.0)
    assert dx == pytest.approx(dy, rel=1e-10)


def test_unknown_family_rejected(line):
    with pytest.raises(ValueError):
        sample_function("sawtooth", {}, line)


def test_values_are_immutable(line):
    f = sample_function("smooth-bump", {}, line)
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_support_overflow_is_flagged():
    g = build_grid(1, 1.0, 64)
    f = sample_function("gaussian", {}, g)
    assert f.meta.get("support_overflow")


def test_split_offset_roundtrip():
    k, frac = split_offset(np.array([0.37, -1.2]), 0.1)
    assert np.allclose(k * 0.1 + frac * 0.1, [0.37, -1.2])
    assert np.all((frac >= 0) & (frac < 1))


def test_lattice_translation_is_exact_shift(line):
    f = sample_function("smooth-bump", {}, line)
    T = Translation(line, 5 * line.dx)
    assert T.lattice_aligned
    shifted = np.zeros_like(f.values)
    shifted[:-5] = f.values[5:]
    assert np.allclose(T.shifted(f.values), shifted)


offsets = st.floats(0.01, 2.0) | st.floats(-2.0, -0.01)


def test_zero_offset_rejected(line):
    f = sample_function("smooth-bump", {}, line)
    with pytest.raises(ValueError):
        difference_norm(f, 0.0, 2.0)


@settings(max_examples=30, deadline=None)
@given(h=offsets, c=st.floats(-3.0, 3.0))
def test_difference_norm_homogeneous(h, c):
    g = build_grid(1, 4.0, 256)
    f = sample_function("smooth-bump", {"radius": 1.5}, g)
    assert difference_norm(c * f, h, 2.0) == pytest.approx(abs(c) * difference_norm(f, h, 2.0), rel=1e-10, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(h=offsets)
def test_difference_norm_triangle(h):
    g = build_grid(1, 4.0, 256)
    f = sample_function("smooth-bump", {"radius": 1.5}, g)
    u = sample_function("gaussian", {"sigma": 0.5, "center": 0.3}, g)
    lhs = difference_norm(f + u, h, 1.5)
    assert lhs <= difference_norm(f, h, 1.5) + difference_norm(u, h, 1.5) + 1e-12


@settings(max_examples=25, deadline=None)
@given(p=st.floats(1.0, 6.0))
def test_lp_norm_monotone_under_pointwise_order(p):
    g = build_grid(1, 4.0, 256)
    f = sample_function("smooth-bump", {}, g)
    u = sample_function("smooth-bump", {"radius": 1.3}, g)
    assert lp_norm(f, p) <= lp_norm(u, p) + 1e-14


def test_campanato_homogeneous_and_shift_invariant():
    g = build_grid(1, 4.0, 512)
    f = sample_function("smooth-bump", {}, g)
    balls = BallFamily.dyadic(g, stride=1, r_max=1.0)
    base = campanato_norm(f, 1.0, 0.5, balls)
    assert base > 0
    assert campanato_norm(-2.5 * f, 1.0, 0.5, balls) == pytest.approx(2.5 * base, rel=1e-12)
    moved = f.with_values(np.roll(f.values, 40))
    assert campanato_norm(moved, 1.0, 0.5, balls) == pytest.approx(base, rel=1e-12)


@pytest.mark.parametrize("fmt", ["npy", "csv"])
def test_save_load_roundtrip(tmp_path, fmt):
    g = build_grid(2, 1.0, 16)
    f = sample_function("gaussian", {"sigma": 0.3}, g)
    header, data = save_grid_function(f, tmp_path / "f", fmt=fmt)
    assert header.exists() and data.exists()
    back = load_grid_function(header)
    assert back.grid == g
    assert np.allclose(back.values, f.values, rtol=0, atol=1e-15)
