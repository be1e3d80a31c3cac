import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize, special

from besovcap.grid import BallFamily, build_grid, sample_function
from besovcap.seminorm import (
    BesovParams,
    besov_bmo_seminorm,
    besov_seminorm,
    default_h_sample,
    difference_norms,
    lyapunov_interpolation_check,
    make_h_sample,
    q_monotonicity_constant,
    sphere_measure,
)

INF = math.inf
GAUSS_L2_SQ = math.sqrt(math.pi / 2)  # int exp(-2 x^2) dx


@pytest.fixture(scope="module")
def gauss():
    g = build_grid(1, 6.0, 2048)
    return sample_function("gaussian", {}, g)


@pytest.fixture(scope="module")
def small():
    g = build_grid(1, 4.0, 256)
    return sample_function("smooth-bump", {"radius": 1.5}, g), sample_function("gaussian", {"sigma": 0.5, "center": 0.4}, g)


def gaussian_diff_sq(h):
    # ||f(. + h) - f||_2^2 for f = exp(-x^2)
    return 2 * GAUSS_L2_SQ * (1 - math.exp(-h * h / 2))


def test_params_validation():
    for a, p, q in ((0.0, 2, 2), (1.0, 2, 2), (0.5, 0.5, 2), (0.5, 2, 0.9)):
        with pytest.raises(ValueError):
            BesovParams(a, p, q)
    assert BesovParams(0.5, 2, INF).to_dict()["q"] == "inf"


def test_sphere_measure():
    assert sphere_measure(1) == pytest.approx(2.0)
    assert sphere_measure(2) == pytest.approx(2 * math.pi)


def test_h_sample_cell_weights_are_exact():
    hs = make_h_sample(2, 0.01, 3.0, K=20, M=24)
    assert hs.weights.sum() == pytest.approx(math.pi * (3.0**2 - 0.01**2), rel=1e-12)
    assert np.all(hs.radii > hs.edges[:-1]) and np.all(hs.radii < hs.edges[1:])


def test_h_sample_rejects_bad_input():
    with pytest.raises(ValueError):
        make_h_sample(1, 0.1, 1.0, K=8)
    with pytest.raises(ValueError):
        make_h_sample(1, 0.1, 1.0, M=4)
    with pytest.raises(ValueError):
        make_h_sample(2, 0.1, 1.0, M=8)
    with pytest.raises(ValueError):
        make_h_sample(1, 1.0, 0.1)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_gaussian_q2_matches_gamma_closed_form(gauss, alpha):
    # 2 * int_0^inf r^(-2a-1) * 2 sqrt(pi/2) (1 - exp(-r^2/2)) dr = 2 sqrt(pi/2) 2^-a Gamma(1-a)/a
    oracle = math.sqrt(2 * GAUSS_L2_SQ * 2**-alpha * special.gamma(1 - alpha) / alpha)
    val = besov_seminorm(gauss, BesovParams(alpha, 2, 2), default_h_sample(gauss))
    assert val == pytest.approx(oracle, rel=1e-3)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_gaussian_qinf_matches_scalar_maximization(gauss, alpha):
    res = optimize.minimize_scalar(lambda h: -(h**-alpha) * math.sqrt(gaussian_diff_sq(h)), bounds=(1e-3, 20),
                                   method="bounded", options={"xatol": 1e-12})
    val = besov_seminorm(gauss, BesovParams(alpha, 2, INF), default_h_sample(gauss))
    assert val == pytest.approx(-res.fun, rel=1e-5)


def test_detail_reports_pieces(gauss):
    res = besov_seminorm(gauss, BesovParams(0.5, 2, 2), default_h_sample(gauss), detail=True)
    assert res.value == pytest.approx((res.quadrature + res.tail + res.small_h) ** 0.5)
    assert 0 < res.tail < res.quadrature
    d = res.to_dict()
    assert d["params"]["alpha"] == 0.5


def test_dimension_mismatch_rejected(gauss):
    with pytest.raises(ValueError):
        besov_seminorm(gauss, BesovParams(0.5, 2, 2), make_h_sample(2, 0.1, 1.0))


def test_batched_norms_match_translation_loop():
    from besovcap.grid import Translation

    g = build_grid(2, 2.0, 64)
    f = sample_function("tensor-product", {"radii": [1.0, 0.7]}, g)
    hs = make_h_sample(2, 0.07, 2.0, K=16, M=16)
    norms = difference_norms(f, hs, 1.5)
    offs = hs.offsets()
    for k, m in ((0, 0), (5, 3), (15, 11)):
        assert norms[k, m] == pytest.approx(Translation(g, offs[k, m]).diff_norm(f.values, 1.5), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(c=st.floats(-4.0, 4.0), alpha=st.floats(0.05, 0.95), q=st.sampled_from([1.0, 2.0, 3.5, INF]))
def test_homogeneity(small, c, alpha, q):
    f, _ = small
    hs = default_h_sample(f, K=24)
    P = BesovParams(alpha, 2.0, q)
    assert besov_seminorm(c * f, P, hs) == pytest.approx(abs(c) * besov_seminorm(f, P, hs), rel=1e-9, abs=1e-13)


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(0.05, 0.95), p=st.floats(1.0, 4.0), q=st.sampled_from([1.0, 2.0, INF]))
def test_triangle_inequality(small, alpha, p, q):
    f, u = small
    hs = default_h_sample(f, K=24)
    P = BesovParams(alpha, p, q)
    # refinement picks a different radius per function, so compare on the raw offset set
    kw = {"refine": False} if math.isinf(q) else {}
    lhs = besov_seminorm(f + u, P, hs, **kw)
    assert lhs <= besov_seminorm(f, P, hs, **kw) + besov_seminorm(u, P, hs, **kw) + 1e-12


@settings(max_examples=15, deadline=None)
@given(shift=st.integers(-40, 40))
def test_lattice_translation_invariance(small, shift):
    f, _ = small
    hs = default_h_sample(f, K=24)
    moved = f.with_values(np.roll(f.values, shift))
    P = BesovParams(0.5, 2.0, 2.0)
    assert besov_seminorm(moved, P, hs) == pytest.approx(besov_seminorm(f, P, hs), rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(theta=st.floats(0.05, 0.95), p0=st.floats(1.0, 2.0), p1=st.floats(2.5, 6.0))
def test_lyapunov_interpolation(small, theta, p0, p1):
    f, _ = small
    r = lyapunov_interpolation_check(f, 0.5, p0, p1, theta, default_h_sample(f, K=24))
    assert r["pass"]


@settings(max_examples=15, deadline=None)
@given(alpha=st.floats(0.1, 0.9), q=st.floats(1.0, 6.0))
def test_q_monotonicity(small, alpha, q):
    f, _ = small
    assert q_monotonicity_constant(f, BesovParams(alpha, 2.0, q), default_h_sample(f, K=24))["pass"]


def test_bmo_seminorm_homogeneous(small):
    f, _ = small
    hs = make_h_sample(1, 0.1, 2.0, K=16)
    balls = BallFamily.dyadic(f.grid, r_max=1.0)
    a = besov_bmo_seminorm(f, 0.5, INF, hs, balls)
    assert a > 0
    assert besov_bmo_seminorm(3 * f, 0.5, INF, hs, balls) == pytest.approx(3 * a, rel=1e-12)
