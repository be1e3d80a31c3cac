import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from besovcap.grid import build_grid, sample_function
from besovcap.limits import (
    LimitScan,
    bbm_scan,
    bv_limsup_scan,
    cos_power_integral,
    ms_scan,
    richardson,
    sobolev_strong_ratio,
    weak_sobolev_check,
    weak_sobolev_exponent,
)

GAUSS_L2_SQ = math.sqrt(math.pi / 2)


@pytest.fixture(scope="module")
def gauss():
    return sample_function("gaussian", {}, build_grid(1, 6.0, 2048))


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_cos_power_integral_2d_closed_form(p):
    oracle = 2 * math.sqrt(math.pi) * special.gamma((p + 1) / 2) / special.gamma(p / 2 + 1)
    assert cos_power_integral(2, p) == pytest.approx(oracle, rel=1e-10)
    assert cos_power_integral(1, p) == 2.0


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5), c=st.floats(-5, 5))
def test_richardson_exact_on_quadratics(a, b, c):
    x = [0.1, 0.05, 0.01]
    y = [a + b * t + c * t * t for t in x]
    assert richardson(x, y) == pytest.approx(a, abs=1e-9)


def test_richardson_needs_three_nodes():
    with pytest.raises(ValueError):
        richardson([0.1, 0.2], [1, 2])


def test_scan_validation():
    with pytest.raises(ValueError):
        LimitScan("bbm", 1.0, [0.9, 0.95], [1, 1], [1, 1], 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        LimitScan("bbm", 1.0, [0.9, 0.99, 0.95], [1, 1, 1], [1, 1, 1], 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        LimitScan("bbm", 1.0, [0.9, 0.95, 0.99], [1, math.nan, 1], [1, 1, 1], 1.0, 1.0, 0.0)


def test_bbm_gaussian_p1(gauss):
    # c(1, 1) ||f'||_1 = 2 * 2
    s = bbm_scan(gauss, 1.0)
    assert s.target == pytest.approx(4.0, rel=1e-4)
    assert s.rel_err < 0.01
    assert s.extra["target_stated"] == pytest.approx(s.target)


def test_bbm_gaussian_p2(gauss):
    # c(1, 2) / 2 * ||f'||_2^2 with ||f'||_2^2 = sqrt(pi / 2)
    s = bbm_scan(gauss, 2.0)
    assert s.target == pytest.approx(GAUSS_L2_SQ, rel=1e-4)
    assert s.rel_err < 0.01
    assert s.extra["target_stated"] == pytest.approx(2 * s.target)


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_ms_gaussian(gauss, p):
    # 2 sigma_0 ||f||_p^p / p with sigma_0 = 2 and ||f||_p^p = sqrt(pi / p)
    s = ms_scan(gauss, p)
    assert s.target == pytest.approx(4 / p * math.sqrt(math.pi / p), rel=1e-10)
    assert s.rel_err < 0.01


def test_scan_rejects_alphas_outside_window(gauss):
    with pytest.raises(ValueError):
        bbm_scan(gauss, 1.0, alphas=(0.5, 0.6, 0.7))
    with pytest.raises(ValueError):
        ms_scan(gauss, 1.0, alphas=(0.3, 0.4, 0.5))


def test_scan_csv_uses_crlf(gauss):
    text = bbm_scan(gauss, 1.0).to_csv()
    assert text.startswith("alpha,raw,weighted,target,rel_err\r\n")
    assert text.count("\r\n") == 5


def test_bv_scan_bounded(gauss):
    r = bv_limsup_scan(gauss)
    assert r["bounded"] and r["far_ok"]


def test_weak_sobolev_exponent():
    assert weak_sobolev_exponent(1, 0.5, 1.0) == pytest.approx(2.0)
    assert weak_sobolev_exponent(2, 0.5, 2.0) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        weak_sobolev_exponent(1, 0.5, 2.0)


@pytest.mark.parametrize("family", ["gaussian", "smooth-bump", "radial-power-cutoff", "indicator-mollified"])
@pytest.mark.parametrize("alpha,p", [(0.5, 1.0), (0.25, 2.0)])
def test_weak_sobolev_holds(family, alpha, p):
    f = sample_function(family, {}, build_grid(1, 6.0, 512))
    r = weak_sobolev_check(f, alpha, p)
    assert r["pass"]
    assert r["lhs"] >= r["lhs_grid"] * (1 - 1e-12)


def test_strong_ratio_stable_in_alpha(gauss):
    ratios = [sobolev_strong_ratio(gauss, a, 1.0)["ratio"] for a in (0.3, 0.5, 0.7)]
    assert max(ratios) / min(ratios) < 3.0
    assert np.all(np.isfinite(ratios))
