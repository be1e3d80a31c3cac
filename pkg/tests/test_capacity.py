import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from besovcap.capacity import (
    Objective,
    boundary_band,
    capacity_h_sample,
    capacity_lower_bound,
    capacity_minimize,
    coarea_check,
    constant_degeneracy_check,
    default_outer_pairs,
    initial_admissible,
    rasterize_constraint,
    scaling_ratio_check,
    translation_check,
    weak_type_check,
)
from besovcap.grid import build_grid, sample_function
from besovcap.regions import Ball, Box, Union, perimeter
from besovcap.seminorm import BesovParams

INF = math.inf
P_HALF_ONE = BesovParams(0.5, 1.0, INF)


@pytest.fixture(scope="module")
def plane():
    return build_grid(2, 1.4, 32)


@pytest.fixture(scope="module")
def disk_estimate(plane):
    return capacity_minimize(Ball((0.0, 0.0), 1.0), P_HALF_ONE, plane, max_iter=60, restarts=1)


def test_isocapacitary_lower_bound_closed_form():
    # |B|^(3/4) / (2 * 2 / 1.5) for the unit disk, alpha = 1/2, p = 1
    assert capacity_lower_bound(Ball((0.0, 0.0), 1.0), 0.5, 1.0) == pytest.approx(math.pi**0.75 / (8 / 3), rel=1e-14)
    assert capacity_lower_bound(Ball((0.0, 0.0), 1.0), 0.5, 1.0) == pytest.approx(0.8848989346555114, rel=1e-12)
    with pytest.raises(ValueError):
        capacity_lower_bound(Box((0.0,), (1.0,)), 0.5, 2.0)


def test_constraint_mask_covers_dilated_set(plane):
    cons = rasterize_constraint(Ball((0.0, 0.0), 1.0), plane)
    d = np.linalg.norm(plane.points(), axis=-1)
    assert np.array_equal(cons.mask, d <= 1.0 + 2 * plane.dx)
    assert not np.any(cons.mask & cons.band)


def test_constraint_rejects_set_touching_band(plane):
    with pytest.raises(ValueError):
        rasterize_constraint(Ball((0.0, 0.0), 1.3), plane)
    with pytest.raises(ValueError):
        rasterize_constraint(Ball((0.0, 0.0), 0.5), plane, delta=plane.dx / 2)


def test_boundary_band_layers():
    g = build_grid(1, 1.0, 16)
    assert boundary_band(g).sum() == 4


@settings(max_examples=30, deadline=None)
@given(v=arrays(float, (32, 32), elements=st.floats(-3.0, 3.0)))
def test_projection_is_idempotent_and_admissible(plane, v):
    cons = rasterize_constraint(Ball((0.0, 0.0), 0.6), plane)
    w = cons.project(v)
    assert np.array_equal(cons.project(w), w)
    assert cons.violation(w) == 0.0
    assert w.min() >= 0.0 and w.max() <= 1.0


@settings(max_examples=20, deadline=None)
@given(lam=st.floats(0.0, 1.0), seed=st.integers(0, 1000))
def test_objective_is_convex(plane, lam, seed):
    rng = np.random.default_rng(seed)
    E = Ball((0.0, 0.0), 0.6)
    obj = Objective(plane, 0.5, 1.5, capacity_h_sample(plane, E, K=16, M=16).offsets())
    u = rng.random(plane.shape)
    v = rng.random(plane.shape)
    assert obj(lam * u + (1 - lam) * v) <= lam * obj(u) + (1 - lam) * obj(v) + 1e-12


def test_initial_profile(plane):
    f = initial_admissible(Ball((0.0, 0.0), 0.5), plane, 0.2)
    d = np.linalg.norm(plane.points(), axis=-1)
    assert np.allclose(f.values, np.clip(1 - np.maximum(d - 0.5, 0) / 0.2, 0, 1))


def test_minimizer_is_admissible_and_bracketed(plane, disk_estimate):
    est = disk_estimate
    cons = rasterize_constraint(Ball((0.0, 0.0), 1.0), plane)
    assert cons.violation(est.minimizer.values) <= 1e-9
    assert est.lower <= est.upper
    assert est.history and est.upper > 0
    assert est.to_dict()["provenance"]["delta_N"] == pytest.approx(2 * plane.dx)


def test_solver_is_deterministic(plane, disk_estimate):
    again = capacity_minimize(Ball((0.0, 0.0), 1.0), P_HALF_ONE, plane, max_iter=60, restarts=1)
    assert again.upper == disk_estimate.upper


def test_empty_set_has_zero_capacity(plane):
    assert capacity_minimize(Union((), 2), P_HALF_ONE, plane).upper == 0.0


def test_rejects_degenerate_parameters(plane):
    with pytest.raises(ValueError):
        capacity_minimize(Ball((0.0, 0.0), 0.5), BesovParams(0.9, 3.0, INF), plane)
    with pytest.raises(ValueError):
        capacity_minimize(Ball((0.0, 0.0), 0.5), BesovParams(0.5, 1.0, 2.0), plane)
    with pytest.raises(ValueError):
        capacity_minimize(Ball((0.0,), 0.5), P_HALF_ONE, plane)


def test_nested_intervals_are_monotone():
    g = build_grid(1, 2.0, 256)
    P = BesovParams(0.5, 1.5, INF)
    small = capacity_minimize(Box((-0.4,), (0.4,)), P, g)
    big = capacity_minimize(Box((-0.8,), (0.8,)), P, g, warm_starts=[small.minimizer])
    assert small.upper <= big.upper * 1.02


def test_interval_capacity_below_perimeter():
    g = build_grid(1, 2.0, 1024)
    E = Box((-0.5,), (0.5,))
    est = capacity_minimize(E, P_HALF_ONE, g)
    assert est.upper <= perimeter(E, 0.5, 1.0).value * 1.02


def test_scaling_law_on_small_grid():
    r = scaling_ratio_check(Ball((0.0, 0.0), 1.0), 1.0, 2.0, P_HALF_ONE, N=48, max_iter=60, restarts=1)
    assert r["target"] == pytest.approx(2**-1.5)
    assert r["pass"]


def test_translation_invariance(plane):
    shift = (4 * plane.dx, -2 * plane.dx)
    r = translation_check(0.5, shift, P_HALF_ONE, plane, max_iter=60, restarts=1)
    assert r["pass"]


def test_constant_functions_have_zero_seminorm():
    assert constant_degeneracy_check(build_grid(1, 2.0, 128), 0.5, INF)["pass"]


@pytest.mark.parametrize("family", ["gaussian", "smooth-bump"])
def test_weak_type_and_coarea(family):
    g = build_grid(1, 4.0, 512)
    f = sample_function(family, {"sigma": 0.75} if family == "gaussian" else {}, g)
    assert weak_type_check(f, P_HALF_ONE)["pass"]
    assert coarea_check(f, P_HALF_ONE)["pass"]


def test_default_outer_pairs_shape():
    nested, overlapping = default_outer_pairs()
    assert len(nested) + len(overlapping) == 12
    for small, big in nested:
        pts = np.random.default_rng(0).uniform(-1.2, 1.2, (4000, 2))
        assert not np.any(small.contains(pts) & ~big.contains(pts))
