"""Acceptance criteria, one test each, at the stated tolerances.

Each test prints a ``criterion k: PASS/FAIL`` line (also collected in the
terminal summary).  Full-tier grids are used where the criterion asks for
them; the whole module takes roughly ten minutes on one core.
"""

import shutil
import subprocess
import sys
import time

import pytest

from besovcap import limits
from besovcap.grid import gradient_lp
from besovcap import verify as V

pytestmark = pytest.mark.slow


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def test_criterion_01_interval_perimeter(record_criterion):
    rep, secs = timed(V.check_interval_perimeter, "full", 0.01)
    worst = max(abs(r["value"] / 2 - 1) for r in rep["rows"])
    ok = rep["pass"] and secs < 1.0
    record_criterion(1, ok, f"max rel err {worst:.2e}, {secs:.2f} s")
    assert ok


def test_criterion_02_divergence_slopes(record_criterion):
    rep, secs = timed(V.check_divergence_slopes, "full", 0.03)
    products = [r["alpha_p"] for r in rep["rows"]]
    assert min(products) < 1 < max(products) and len(rep["rows"]) == 6
    worst = max(abs(r["slope"] - r["expected"]) for r in rep["rows"])
    ok = rep["pass"] and secs < 10.0
    record_criterion(2, ok, f"max slope error {worst:.2e}, {secs:.2f} s")
    assert ok


def test_criterion_03_capacity_scaling(record_criterion):
    rep, secs = timed(V.check_capacity_scaling, "full", 0.10)
    ok = rep["pass"] and secs < 300.0
    record_criterion(3, ok, f"ratio {rep['ratio']:.4f} vs {rep['target']:.4f}, {secs:.0f} s")
    assert ok


def test_criterion_04_perimeter_dominates_capacity(record_criterion):
    rep = V.check_perimeter_dominates("full", 0.02)
    assert rep["asserted_2d"] and any(r["n"] == 2 for r in rep["rows"])
    worst = max(r["ratio"] for r in rep["rows"])
    record_criterion(4, rep["pass"], f"max upper / perimeter^p = {worst:.4f} over {len(rep['rows'])} regions")
    assert rep["pass"]


def test_criterion_05_weak_type_and_coarea(record_criterion):
    rep = V.check_weak_type_coarea("full", 0.02)
    worst = max(max(r["weak_ratios"]) for r in rep["rows"])
    record_criterion(5, rep["pass"], f"max weak-type ratio {worst:.4f}, {len(rep['rows'])} function/parameter pairs")
    assert rep["pass"]


def test_criterion_06_outer_measure(record_criterion):
    rep = V.check_outer_measure("full", 0.02)
    n_pairs = len(rep["monotonicity"]) + len(rep["subadditivity"])
    assert n_pairs == 12
    ok = rep["pass"] and rep["empty"] == 0.0
    record_criterion(6, ok, f"{n_pairs} pairs, nested limit gap {rep['limit']['rel_gap']:.2e}")
    assert ok


def test_criterion_07_bbm_limit(record_criterion):
    # literal target: c(1, p) ||f'||_p^p with c(1, p) = 2
    t0 = time.perf_counter()
    _, fs = V.smooth_1d(V.TIERS["full"]["n1_fine"])
    rows = []
    for f in fs:
        for p in (1.0, 2.0):
            s = limits.bbm_scan(f, p)
            target = 2.0 * gradient_lp(f, p) ** p
            rows.append((f.meta["family"], p, s.extrapolated, target, abs(s.extrapolated / target - 1)))
    secs = time.perf_counter() - t0
    failing = sorted({p for _, p, _, _, e in rows if e > 0.05})
    ok = not failing and secs < 120.0
    worst = max(e for *_, e in rows)
    record_criterion(7, ok, f"max rel err {worst:.3f}; failing p: {failing or 'none'}; {secs:.1f} s")
    assert ok, rows


def test_criterion_08_ms_limit(record_criterion):
    rep = V.check_ms("full", 0.05)
    worst = max(r["rel_err"] for r in rep["rows"])
    record_criterion(8, rep["pass"], f"max rel err {worst:.2e}")
    assert rep["pass"]


def test_criterion_09_weak_sobolev(record_criterion):
    rep = V.check_weak_sobolev("full", 1e-6)
    record_criterion(9, rep["pass"], f"max lhs / rhs {rep['max_ratio']:.4f} over {len(rep['rows'])} cases")
    assert rep["pass"]


def test_criterion_10_lyapunov(record_criterion):
    rep = V.check_lyapunov("full", 1e-9)
    record_criterion(10, rep["pass"], f"{len(rep['rows'])} suite functions")
    assert rep["pass"]


def test_criterion_11_heat(record_criterion):
    rep = V.check_heat("full", 0.01)
    closed = max(r["max_err"] for r in rep["closed_form"])
    geo = max(r["rel_err"] for r in rep["carleson_geometry"]["rows"])
    c0 = rep["domination"]["suite_c0"]
    record_criterion(11, rep["pass"], f"closed form {closed:.1e}, suite c0 {c0}, tent rel err {geo:.2e}")
    assert rep["pass"]


def test_criterion_12_trace_dichotomy(record_criterion):
    rep = V.check_trace_dichotomy("full", None)
    ok = rep["pass"]
    record_criterion(12, ok, f"cap {rep['satisfied']['cap']:.3g} vs witness max "
                             f"{max(w['ratio'] for w in rep['satisfied']['witnesses']):.3g} (bounded); "
                             f"violating cap {rep['violating']['cap']:.3g} vs "
                             f"{max(w['ratio'] for w in rep['violating']['witnesses']):.3g}")
    assert ok


def test_criterion_13_campanato_stability(record_criterion):
    rep = V.check_campanato("full", 0.20)
    record_criterion(13, rep["pass"], f"variation {rep['variation']:.3f}")
    assert rep["pass"]


def test_criterion_14_quick_verify_cli(record_criterion, tmp_path):
    exe = shutil.which("besovcap")
    cmd = [exe] if exe else [sys.executable, "-m", "besovcap"]
    t0 = time.perf_counter()
    proc = subprocess.run(cmd + ["verify", "--tier", "quick", "--out", str(tmp_path)], capture_output=True, text=True)
    secs = time.perf_counter() - t0
    ok = proc.returncode == 0 and secs < 300.0
    record_criterion(14, ok, f"exit {proc.returncode}, {secs:.0f} s")
    assert ok, proc.stdout + proc.stderr
