import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from besovcap.grid import build_grid, sample_function
from besovcap.heat import (
    carleson_check,
    cone_integral,
    default_levels,
    gaussian_heat_closed_form,
    hardy_littlewood_maximal,
    heat_at_time,
    heat_extend,
    kernel_1d,
    kernel_mass,
    level_set_inclusion,
    majorant_constant,
    matched_density_exponent,
    maximal_domination,
    maximum_principle,
    nontangential_maximal,
    semigroup_check,
    slab_weights,
    tent_indicator,
    tent_measure,
)
from besovcap.regions import Ball, Box
from besovcap.seminorm import BesovParams


@pytest.fixture(scope="module")
def line():
    return build_grid(1, 6.0, 512)


@pytest.mark.parametrize("n,N", [(1, 1024), (2, 128)])
@pytest.mark.parametrize("s", [0.0, 0.02, 0.3, 2.0])
def test_gaussian_heat_matches_closed_form(n, N, s):
    g = build_grid(n, 6.0, N)
    f = sample_function("gaussian", {}, g)
    num = heat_at_time(f, s)
    assert np.max(np.abs(num - gaussian_heat_closed_form(g, 1.0, s))) < 1e-6


@pytest.mark.parametrize("s", [0.001, 0.01])
def test_heat_below_two_cells_is_second_order(s):
    # kernel std under 2 dx: cell-integrated weights, error of order dx^2
    g = build_grid(2, 6.0, 128)
    f = sample_function("gaussian", {}, g)
    err = np.max(np.abs(heat_at_time(f, s) - gaussian_heat_closed_form(g, 1.0, s)))
    assert err < 0.5 * g.dx**2


def test_closed_form_preserves_mass():
    # int exp(-x^2 / (1 + 4 s)) / sqrt(1 + 4 s) dx = sqrt(pi) for every s
    g = build_grid(1, 30.0, 6000)
    for s in (0.1, 1.0, 5.0):
        assert gaussian_heat_closed_form(g, 1.0, s).sum() * g.dx == pytest.approx(math.sqrt(math.pi), rel=1e-9)


@pytest.mark.parametrize("std_cells", [0.3, 1.0, 2.0, 5.0])
def test_kernel_mass_is_one(line, std_cells):
    assert kernel_mass(line, std_cells * line.dx) == pytest.approx(1.0, abs=1e-12)


def test_zero_std_kernel_is_identity(line):
    k = kernel_1d(line, 0.0)
    assert k.sum() == 1.0 and k[line.N - 1] == 1.0


def test_negative_time_rejected(line):
    with pytest.raises(ValueError):
        heat_at_time(sample_function("gaussian", {}, line), -1.0)


@settings(max_examples=15, deadline=None)
@given(s1=st.floats(0.002, 0.5), s2=st.floats(0.002, 0.5))
def test_semigroup(s1, s2):
    # kernels at least 2 cells wide; the box is wide enough that the
    # intermediate solution loses no mass through the walls
    f = sample_function("smooth-bump", {"radius": 1.5}, build_grid(1, 12.0, 1024))
    r = semigroup_check(f, s1, s2)
    assert r["max_err"] < 1e-10 and r["direct_err"] < 1e-10


def test_maximum_principle_and_levels(line):
    f = sample_function("indicator-mollified", {"lo": -1.0, "hi": 1.0, "eps": 0.2}, line)
    fld = heat_extend(f)
    assert maximum_principle(fld, f)
    assert np.allclose(fld.levels, default_levels(line))
    assert fld.level(0).meta["t"] == pytest.approx(fld.levels[0])
    with pytest.raises(ValueError):
        heat_extend(f, levels=[0.5, 0.2])


def test_slab_weights_integrate_the_density():
    levels = np.geomspace(0.01, 2.0, 40)
    s = 0.7
    top = levels[-1] * math.sqrt(levels[-1] / levels[-2])
    assert slab_weights(levels, s).sum() == pytest.approx(top**s / s, rel=1e-12)
    with pytest.raises(ValueError):
        slab_weights(levels, 0.0)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("s", [0.25, 1.0, 2.5])
def test_cone_integral_routes_agree(n, s):
    r = 1.3
    c = cone_integral(r, s, n)
    w = 2.0 if n == 1 else math.pi
    ref, _ = integrate.quad(lambda t: t ** (s - 1) * w * (r - t) ** n, 0, r)
    assert c["closed_form"] == pytest.approx(c["quadrature"], rel=1e-9)
    assert c["closed_form"] == pytest.approx(ref, rel=1e-7)


@pytest.mark.parametrize("r", [0.5, 1.0])
def test_tent_measure_matches_cone_integral_1d(r):
    g = build_grid(1, 3.0, 2048)
    num = tent_measure(Ball((0.0,), r), g, 0.5)
    assert num == pytest.approx(cone_integral(r, 0.5, 1)["closed_form"], rel=0.01)


def test_tent_indicator_ball_and_box_agree_for_interval():
    g = build_grid(1, 2.0, 256)
    levels = np.geomspace(g.dx, 1.0, 10)
    a = tent_indicator(Ball((0.0,), 0.5), g, levels)
    b = tent_indicator(Box((-0.5,), (0.5,)), g, levels)
    assert np.array_equal(a, b)


def test_majorant_constants():
    assert majorant_constant(1) == pytest.approx(1 + 1 / math.sqrt(math.pi))
    assert majorant_constant(2) == pytest.approx(1.25 + math.sqrt(math.pi) / 2)


def test_maximal_domination_and_level_sets(line):
    f = sample_function("radial-power-cutoff", {}, line)
    d = maximal_domination(f)
    assert d["pass"] and d["c0"] >= 1.0 - 1e-12
    assert level_set_inclusion(f, d["bound"])["pass"]


def test_maximal_function_dominates_absolute_value(line):
    f = sample_function("smooth-bump", {"amplitude": -2.0}, line)
    M = hardy_littlewood_maximal(f).values
    assert np.all(M >= np.abs(f.values) - 1e-12)
    assert np.all(nontangential_maximal(heat_extend(f)).values >= 0)


def test_matched_exponent():
    assert matched_density_exponent(2, 0.5, 1.5, 3.0) == pytest.approx(3 * 1.25 / 1.5 - 2)


def test_carleson_check_requires_positive_density(line):
    with pytest.raises(ValueError):
        carleson_check(line, BesovParams(0.5, 1.5, math.inf), 1.0, [0.5], [])
    with pytest.raises(ValueError):
        carleson_check(line, BesovParams(0.5, 1.0, math.inf), 3.0, [0.5], [])


def test_carleson_geometry_1d():
    g = build_grid(1, 3.0, 1024)
    rep = carleson_check(g, BesovParams(0.25, 2.0, math.inf), 6.0, [0.5, 1.0], [])
    assert rep["s"] == pytest.approx(6 * 0.5 / 2 - 1)
    assert all(row["rel_err"] < 0.01 for row in rep["geometry"])
