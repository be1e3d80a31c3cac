"""Named verification checks grouped into a quick and a full resolution tier.

Each check returns a dict with at least a ``pass`` flag.  Checks marked as
reported are run and recorded but never fail the suite.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import capacity as cap
from . import heat, limits, regions, seminorm, trace
from .grid import BallFamily, build_grid, campanato_norm, sample_function
from .regions import Ball, Box, Union
from .seminorm import BesovParams, default_h_sample

log = logging.getLogger(__name__)

INF = math.inf

TIERS = {
    "quick": {"n1": 256, "n2": 128, "n1_fine": 2048, "cap2": 64, "cap2_suite": 64, "c4_2d": 128, "scaling": 64},
    "full": {"n1": 2048, "n2": 512, "n1_fine": 2048, "cap2": 128, "cap2_suite": 128, "c4_2d": 512, "scaling": 256},
}


@dataclass
class Check:
    id: str
    title: str
    fn: Callable
    tol: float | None = None
    reported: tuple = ()  # tiers in which the check is reported only


def suite_1d(N: int, L: float = 6.0):
    g = build_grid(1, L, N)
    specs = [
        ("gaussian", {}),
        ("smooth-bump", {"radius": 1.5}),
        ("radial-power-cutoff", {"radius": 1.0, "beta": 2.0}),
        ("tensor-product", {"radii": [0.8], "amplitude": 2.0}),
        ("indicator-mollified", {"lo": -0.5, "hi": 0.5, "eps": 0.2}),
    ]
    return g, [sample_function(f, p, g) for f, p in specs]


def smooth_1d(N: int, L: float = 6.0):
    g = build_grid(1, L, N)
    specs = [("gaussian", {}), ("smooth-bump", {"radius": 2.0}), ("gaussian", {"sigma": 0.7, "amplitude": 2.0})]
    return g, [sample_function(f, p, g) for f, p in specs]


def suite_2d(N: int, L: float = 3.0):
    g = build_grid(2, L, N)
    specs = [
        ("gaussian", {"sigma": 0.5}),
        ("smooth-bump", {"radius": 1.0}),
        ("radial-power-cutoff", {"radius": 1.2, "beta": 2.0}),
        ("tensor-product", {"radii": [1.0, 0.7]}),
        ("indicator-mollified", {"radius": 1.0, "eps": 0.3}),
    ]
    return g, [sample_function(f, p, g) for f, p in specs]


def _all(rows, key="pass"):
    return all(bool(r[key]) for r in rows)


# --------------------------------------------------------------------------
# acceptance-level checks


def check_interval_perimeter(tier, tol):
    E = Box((0.0,), (1.0,))
    rows = []
    for a in (0.25, 0.5, 0.75):
        r = regions.perimeter(E, a, 1.0)
        rows.append({"alpha": a, "value": r.value, "argmax_h": r.argmax_h, "target": 2.0,
                     "pass": bool(abs(r.value / 2.0 - 1) <= tol)})
    return {"rows": rows, "pass": _all(rows)}


def check_divergence_slopes(tier, tol):
    E = Box((0.0,), (1.0,))
    hs = np.geomspace(1e-2, 1e-5, 8)
    rows = []
    for a, p in ((0.25, 2.0), (0.5, 1.5), (0.4, 2.0), (0.7, 2.0), (0.8, 1.5), (0.9, 2.0)):
        s = regions.perimeter_divergence_scan(E, a, p, hs)
        rows.append({"alpha": a, "p": p, "alpha_p": a * p, "slope": s["slope"], "expected": s["expected"],
                     "divergent": s["divergent"], "pass": bool(abs(s["slope"] - s["expected"]) <= tol)})
    return {"rows": rows, "pass": _all(rows)}


def check_capacity_scaling(tier, tol):
    P = BesovParams(0.5, 1.0, INF)
    r = cap.scaling_ratio_check(Ball((0.0, 0.0), 1.0), 1.0, 2.0, P, N=TIERS[tier]["scaling"], tol=tol)
    return r


def _c4_suite(tier):
    """(region, alpha, p, grid) for the perimeter-vs-capacity comparison."""
    g1 = build_grid(1, 2.0, TIERS[tier]["n1_fine"])
    one = [Box((-0.5,), (0.5,)), Union([Box((-1.0,), (-0.3,)), Box((0.2,), (0.9,))])]
    out = [(E, 0.5, p, g1) for E in one for p in (1.0, 1.5)]
    N = TIERS[tier]["c4_2d"]

    def fit(extent, N, pad=1.05):
        # room for the 2 dx dilation and the 2-layer band
        return build_grid(2, max(pad * extent, extent * (1 + 16 / N)), N)

    out += [
        (Ball((0.0, 0.0), 1.0), 0.5, 1.0, fit(1.0, N)),
        (Box((-0.5, -1.0), (0.5, 1.0)), 0.5, 1.0, fit(1.0, N)),
        (Union([Ball((-1.1, 0.0), 1.0), Ball((1.1, 0.0), 1.0)]), 0.5, 1.0, fit(2.1, N * 3 // 2, pad=1.025)),
    ]
    return out


def check_perimeter_dominates(tier, tol):
    rows = []
    for E, a, p, g in _c4_suite(tier):
        Pv = regions.perimeter(E, a, p).value
        est = cap.capacity_minimize(E, BesovParams(a, p, INF), g)
        rows.append({"region": regions.region_to_json(E), "n": g.n, "N": g.N, "alpha": a, "p": p, "upper": est.upper,
                     "perimeter_p": Pv**p, "ratio": est.upper / Pv**p, "lower": est.lower,
                     "pass": bool(est.upper <= Pv**p * (1 + tol))})
    one = [r for r in rows if r["n"] == 1]
    two = [r for r in rows if r["n"] == 2]
    # below the full 2D resolution the 2 dx dilation alone exceeds the tolerance
    asserted = rows if tier == "full" else one
    return {"rows": rows, "pass_1d": _all(one), "pass_2d": _all(two), "pass": _all(asserted),
            "asserted_2d": tier == "full"}


def check_weak_type_coarea(tier, tol):
    g = build_grid(1, 4.0, TIERS[tier]["n1_fine"])
    fs = [sample_function("gaussian", {"sigma": 0.75}, g), sample_function("smooth-bump", {}, g),
          sample_function("indicator-mollified", {}, g), sample_function("smooth-bump", {"radius": 1.5, "center": [0.5]}, g)]
    params = [BesovParams(0.5, 1.0, INF)] + ([BesovParams(0.3, 1.5, INF)] if tier == "full" else [])
    rows = []
    for P in params:
        for f in fs:
            w = cap.weak_type_check(f, P, tol=tol)
            c = cap.coarea_check(f, P)
            rows.append({"family": f.meta["family"], "alpha": P.alpha, "p": P.p,
                         "weak_ratios": [r["ratio"] for r in w["rows"]], "weak_pass": w["pass"],
                         "seminorm": c["seminorm"], "coarea": c["coarea"], "quad_tol": c["quad_tol"], "coarea_pass": c["pass"],
                         "pass": bool(w["pass"] and c["pass"])})
    return {"rows": rows, "pass": _all(rows)}


def check_outer_measure(tier, tol):
    g = build_grid(2, 1.25, TIERS[tier]["cap2_suite"])
    return cap.outer_measure_suite(g, BesovParams(0.5, 1.0, INF), tol=tol)


def _limit_rows(kind, tier, tol):
    g, fs = smooth_1d(TIERS[tier]["n1_fine"])
    rows = []
    for f in fs:
        for p in (1.0, 2.0):
            s = limits.bbm_scan(f, p) if kind == "bbm" else limits.ms_scan(f, p)
            d = s.to_dict()
            d.update({"family": f.meta["family"], "params": f.meta["params"], "pass": bool(s.rel_err <= tol)})
            d.pop("alphas"), d.pop("values")
            rows.append(d)
    return rows


def check_bbm(tier, tol):
    rows = _limit_rows("bbm", tier, tol)
    stated = [bool(r["rel_err_stated"] <= tol) for r in rows]
    return {"rows": rows, "pass": _all(rows), "stated_constant_pass": all(stated),
            "stated_constant_fail_p": sorted({r["p"] for r, s in zip(rows, stated) if not s})}


def check_ms(tier, tol):
    rows = _limit_rows("ms", tier, tol)
    return {"rows": rows, "pass": _all(rows)}


def check_weak_sobolev(tier, tol):
    rows = []
    g1, f1 = suite_1d(TIERS[tier]["n1"])
    g2, f2 = suite_2d(TIERS[tier]["n2"])
    for fs, cfgs in ((f1, ((0.5, 1.0), (0.25, 2.0), (0.9, 1.0))), (f2, ((0.5, 2.0), (0.5, 1.0), (0.9, 1.5)))):
        for f in fs:
            hs = default_h_sample(f, K=48, M=None if f.grid.n == 1 else 24)
            for a, p in cfgs:
                r = limits.weak_sobolev_check(f, a, p, hs=hs, tol=tol)
                rows.append({"n": f.grid.n, "family": f.meta["family"], "alpha": a, "p": p, **r})
    return {"rows": rows, "max_ratio": max(r["ratio"] for r in rows), "pass": _all(rows)}


def check_lyapunov(tier, tol):
    g, fs = suite_1d(TIERS[tier]["n1"])
    g2, f2 = suite_2d(min(TIERS[tier]["n2"], 128))
    mu1 = trace.Lebesgue(1)
    rows = []
    for f in fs + f2:
        hs = default_h_sample(f, K=32, M=None if f.grid.n == 1 else 16)
        s = seminorm.lyapunov_interpolation_check(f, 0.5, 1.0, 3.0, 0.5, hs)
        mu = mu1 if f.grid.n == 1 else trace.Lebesgue(2)
        w = trace.weak_lyapunov_check(f, mu, 1.0, 3.0, 0.5)
        rows.append({"n": f.grid.n, "family": f.meta["family"], "seminorm": s, "weak": w,
                     "pass": bool(s["lhs"] <= s["rhs"] * (1 + tol) and w["lhs"] <= w["rhs"] * (1 + tol))})
    return {"rows": rows, "pass": _all(rows)}


def check_heat(tier, tol):
    out = {}
    closed = []
    for n, N, L in ((1, TIERS[tier]["n1"], 6.0), (2, TIERS[tier]["n2"], 6.0)):
        g = build_grid(n, L, N)
        f = sample_function("gaussian", {}, g)
        fld = heat.heat_extend(f)
        err = max(float(np.abs(fld.values[j] - heat.gaussian_heat_closed_form(g, 1.0, t * t)).max())
                  for j, t in enumerate(fld.levels))
        closed.append({"n": n, "max_err": err, "pass": bool(err <= 1e-6)})
    out["closed_form"] = closed
    dom = []
    for g, fs in (suite_1d(TIERS[tier]["n1"]), suite_2d(min(TIERS[tier]["n2"], 256))):
        for f in fs:
            d = heat.maximal_domination(f)
            dom.append({"n": g.n, "family": f.meta["family"], "c0": d["c0"], "bound": d["bound"]})
    c0 = {n: max(d["c0"] for d in dom if d["n"] == n) for n in (1, 2)}
    bound = {n: 2**n * heat.majorant_constant(n) for n in (1, 2)}
    out["domination"] = {"rows": dom, "suite_c0": c0, "bound": bound, "pass": all(c0[n] <= bound[n] for n in c0)}
    g = build_grid(1, 3.0, TIERS[tier]["n1_fine"])
    geo = []
    for s in (0.25, 0.5, 1.0):
        for r in (0.5, 1.0, 1.5):
            num = heat.tent_measure(Ball((0.0,), r), g, s)
            orc = heat.cone_integral(r, s, 1)
            rel = abs(num / orc["closed_form"] - 1)
            geo.append({"s": s, "radius": r, "numeric": num, "closed_form": orc["closed_form"], "quadrature": orc["quadrature"],
                        "rel_err": rel, "routes_agree": bool(abs(orc["quadrature"] / orc["closed_form"] - 1) <= 1e-8),
                        "pass": bool(rel <= tol)})
    out["carleson_geometry"] = {"rows": geo, "pass": _all(geo) and _all(geo, "routes_agree")}
    out["pass"] = _all(closed) and out["domination"]["pass"] and out["carleson_geometry"]["pass"]
    return out


def check_trace_dichotomy(tier, tol):
    g = build_grid(2, 2.0, 128)
    mu = trace.SliceLebesgue(2, 1, (0.0, 0.0), (1.0, 0.0))
    suite = [sample_function("gaussian", {"sigma": 0.5}, g), sample_function("smooth-bump", {}, g),
             sample_function("tensor-product", {"radii": [1.0, 0.7]}, g)]
    balls = [((0.0, 0.0), r) for r in (0.25, 0.5, 1.0, 1.5)]
    ok = trace.trace_dichotomy(g, mu, BesovParams(0.5, 2.0, INF), 2.0, suite, balls)
    bad = trace.trace_dichotomy(g, mu, BesovParams(0.5, 1.0, INF), 2.0, suite, balls)
    return {
        "satisfied": ok,
        "violating": bad,
        "pass": bool(ok["pass"] and bad["pass"] and ok["growth"]["pass"] and not ok["witness_exceeds_cap"]
                     and not bad["growth"]["pass"] and bad["witness_exceeds_cap"]),
    }


def check_campanato(tier, tol):
    ratios = {}
    for N in (1024, 2048) if tier == "full" else (512, 1024):
        g, fs = suite_1d(N)
        balls = BallFamily.dyadic(g)
        best = 0.0
        rows = []
        for f in fs:
            c = campanato_norm(f, 1.0, 0.5, balls)
            s = seminorm.besov_seminorm(f, BesovParams(0.5, 1.0, INF), default_h_sample(f, K=48))
            rows.append({"family": f.meta["family"], "campanato": c, "seminorm": s, "ratio": c / s})
            best = max(best, c / s)
        ratios[N] = {"rows": rows, "max_ratio": best}
    a, b = (ratios[k]["max_ratio"] for k in sorted(ratios))
    var = abs(b / a - 1)
    return {"by_N": {str(k): v for k, v in ratios.items()}, "variation": var, "pass": bool(var < tol)}


# --------------------------------------------------------------------------
# module invariants


def check_seminorm_invariants(tier, tol):
    g, fs = suite_1d(TIERS[tier]["n1"])
    out = []
    f, h = fs[0], fs[1]
    hs = default_h_sample(f, K=32)
    for P in (BesovParams(0.5, 1.0, INF), BesovParams(0.5, 2.0, 2.0), BesovParams(0.3, 1.5, 3.0)):
        a = seminorm.besov_seminorm(f, P, hs)
        b = seminorm.besov_seminorm(f * (-2.5), P, hs)
        c = seminorm.besov_seminorm(f + h, P, hs, refine=False)
        d = seminorm.besov_seminorm(f, P, hs, refine=False) + seminorm.besov_seminorm(h, P, hs, refine=False)
        out.append({"params": P.to_dict(), "homogeneity_err": abs(b / (2.5 * a) - 1), "triangle": [c, d],
                    "pass": bool(abs(b / (2.5 * a) - 1) <= 1e-12 and c <= d * (1 + 1e-10))})
    qm = [seminorm.q_monotonicity_constant(f, BesovParams(0.5, 1.0, q), hs) for q in (1.0, 2.0, 4.0)]
    return {"rows": out, "q_monotonicity": qm, "pass": _all(out) and _all(qm)}


def check_limit_invariants(tier, tol):
    g, fs = smooth_1d(TIERS[tier]["n1_fine"])
    f = fs[0]
    k1 = limits.bbm_scan(f, 2.0, hs=default_h_sample(f, K=64))
    k2 = limits.bbm_scan(f, 2.0, hs=default_h_sample(f, K=128))
    kvar = max(abs(a / b - 1) for a, b in zip(k1.weighted, k2.weighted))
    gi = build_grid(1, 4.0, TIERS[tier]["n1_fine"])
    bv = limits.bv_limsup_scan(sample_function("indicator-mollified", {}, gi))
    strong = []
    for fam in fs:
        rs = [limits.sobolev_strong_ratio(fam, a, 1.0)["ratio"] for a in (0.1, 0.3, 0.5, 0.7, 0.9)]
        strong.append({"family": fam.meta["family"], "ratios": rs, "spread": max(rs) / min(rs)})
    return {
        "k_doubling_variation": kvar,
        "bv": bv,
        "strong": strong,
        "pass": bool(kvar < 0.01 and bv["bounded"] and bv["far_ok"] and all(s["spread"] < 3 for s in strong)),
    }


def check_regions_invariants(tier, tol):
    rows = []
    suite = [Box((0.0,), (1.0,)), Ball((0.0, 0.0), 1.0), Box((0.0, 0.0), (1.0, 2.0)),
             Union([Ball((-1.5, 0.0), 1.0), Ball((1.5, 0.0), 1.0)])]
    rng = np.random.default_rng(0)
    sym = True
    for E in suite:
        for _ in range(4):
            h = rng.normal(size=E.n)
            sym &= regions.overlap_volume(E, h) == regions.overlap_volume(E, -h)
        sym &= abs(regions.overlap_volume(E, np.zeros(E.n)) - regions.volume(E)) <= 1e-12 * regions.volume(E)
        hs = [np.full(E.n, s) / math.sqrt(E.n) for s in (0.01, 0.1, 0.5, 1.0, 3.0)]
        ch = regions.chain_estimate_check(E, 0.5, 1.0, hs)
        rows.append({"region": regions.region_to_json(E), "chain_pass": ch["pass"]})
    iso = regions.isoperimetric_check(Ball((0.0, 0.0), 1.0))
    # rasterized shifted indicator against the overlap formula
    g = build_grid(2, 2.0, 256)
    E = Ball((0.0, 0.0), 1.0)
    m = regions.rasterize(E, g).astype(float)
    k = 10
    sh = np.zeros_like(m)
    sh[k:, :] = m[:-k, :]
    raster_l1 = float(np.abs(sh - m).sum() * g.cell_volume)
    exact = 2 * (regions.volume(E) - regions.overlap_volume(E, (k * g.dx, 0.0)))
    layer = 2 * 2 * math.pi * g.dx
    return {"rows": rows, "symmetric_overlap": bool(sym), "isoperimetric": iso,
            "raster_l1": raster_l1, "exact_l1": exact, "layer": layer,
            "pass": bool(sym and _all(rows, "chain_pass") and iso["pass"] and abs(raster_l1 - exact) <= layer)}


def check_capacity_invariants(tier, tol):
    N = TIERS[tier]["cap2"]
    g = build_grid(2, 1.3, N)
    P = BesovParams(0.5, 1.0, INF)
    E = Ball((0.0, 0.0), 1.0)
    est = cap.capacity_minimize(E, P, g)
    cons = cap.rasterize_constraint(E, g)
    hist_mono = bool(np.all(np.diff(est.history) <= 1e-15))
    obj = cap.Objective(g, 0.5, 1.0, cap.capacity_h_sample(g, E).offsets().reshape(-1, 2))
    rng = np.random.default_rng(1)
    conv = []
    for _ in range(3):
        a = cons.project(rng.random(g.shape))
        b = cons.project(rng.random(g.shape))
        lam = float(rng.uniform(0.1, 0.9))
        conv.append(obj(lam * a + (1 - lam) * b) <= lam * obj(a) + (1 - lam) * obj(b) + 1e-10)
    deg = cap.constant_degeneracy_check(build_grid(2, 1.0, 64), 0.5, 2.0)
    g1 = build_grid(2, 2.0, 64)
    tr = cap.translation_check(0.6, (8 * g1.dx, 0.0), P, g1)
    op = cap.open_perimeter_comparison(Ball((0.0, 0.0), 1.0), 0.5, g)
    return {
        "upper": est.upper, "lower": est.lower, "lower_le_upper": bool(est.lower <= est.upper),
        "violation": cons.violation(est.minimizer.values), "history_monotone": hist_mono, "convexity": bool(all(conv)),
        "constant_degeneracy": deg, "translation": tr, "open_perimeter": op,
        "pass": bool(est.lower <= est.upper and cons.violation(est.minimizer.values) <= 1e-9 and hist_mono and all(conv)
                     and deg["pass"] and tr["pass"] and op["pass"]),
    }


def check_boundary_capacity(tier, tol):
    """Ball against thin annuli around its boundary circle, for shrinking thickness.

    Reported only: with alpha p < 1 the annulus uppers keep falling as the
    thickness shrinks, below the ball upper.
    """
    N = TIERS[tier]["cap2"]
    g = build_grid(2, 1.2, N)
    P = BesovParams(0.5, 1.0, INF)
    rows = []
    for k in (6, 3, 1.5):
        r = cap.boundary_capacity_check(Ball((0.0, 0.0), 0.8), P, g, thickness=k * 2.4 / 64, tol=tol, max_iter=80, restarts=1)
        rows.append(r)
    ann = [r["annulus_upper"] for r in rows]
    return {"rows": rows, "annulus_decreasing": bool(all(b < a for a, b in zip(ann, ann[1:]))),
            "pass": _all(rows)}


def check_heat_invariants(tier, tol):
    g = build_grid(2, 6.0, min(TIERS[tier]["n2"], 128))
    f = sample_function("gaussian", {"sigma": 0.5}, g)
    fld = heat.heat_extend(f)
    mass = max(abs(heat.kernel_mass(g, math.sqrt(2) * t) - 1) for t in fld.levels)
    sg = heat.semigroup_check(f, 0.05, 0.1)
    mp = heat.maximum_principle(fld, f)
    c0 = 4 * heat.majorant_constant(2)
    inc = heat.level_set_inclusion(f, c0, fld)
    MN = heat.nontangential_maximal(fld).values
    vertex = bool(np.all(MN >= np.abs(fld.values[0]) - 1e-15))
    return {"kernel_mass_err": mass, "semigroup": sg, "maximum_principle": mp, "level_inclusion": inc, "vertex": vertex,
            "pass": bool(mass <= 1e-10 and sg["max_err"] <= 1e-6 and sg["direct_err"] <= 1e-8 and mp and inc["pass"] and vertex)}


def check_multiplier(tier, tol):
    g = build_grid(2, 2.0, 64)
    mu = trace.SliceLebesgue(2, 1, (0.0, 0.0), (1.0, 0.0))
    q = 2.0
    regs = [Ball((0.0, 0.0), 0.5), Ball((0.3, 0.0), 0.3)]
    ests = [cap.capacity_minimize(E, BesovParams(0.5, 1.5, INF), g, max_iter=60, restarts=1) for E in regs]
    fs = [sample_function("gaussian", {"sigma": 0.4}, g), sample_function("smooth-bump", {"radius": 0.8}, g)]
    m = sample_function("smooth-bump", {"radius": 1.5, "amplitude": 0.7}, g)
    P = BesovParams(0.5, 1.5, INF)
    mult = trace.multiplier_check(m, mu, fs, P, q, regs, ests)
    cons = trace.cap_consistency_check(mu, regs, ests, q)
    return {"multiplier": mult, "consistency": cons, "params": P.to_dict(), "pass": bool(mult["pass"] and cons["pass"])}


def check_reported_ratios(tier, tol):
    """Constants the theory leaves unspecified: recorded, never asserted."""
    g = build_grid(1, 6.0, TIERS[tier]["n1"])
    f = sample_function("gaussian", {}, g)
    h = sample_function("smooth-bump", {"radius": 1.5}, g)
    hs = default_h_sample(f, K=32)
    balls = BallFamily.dyadic(g)
    leib = seminorm.leibniz_ratio(f, h, BesovParams(0.5, 2.0, INF), hs, balls)
    mx = heat.maximal_seminorm_ratio(f, 0.5, 2.0)
    g2 = build_grid(2, 2.0, 64)
    car = heat.carleson_check(g2, BesovParams(0.5, 1.5, INF), 3.0, [0.5, 1.0], [sample_function("smooth-bump", {}, g2)])
    mu = trace.SliceLebesgue(2, 1, (0.0, 0.0), (1.0, 0.0))
    push = trace.pushforward_check(np.eye(2) * 0.5, np.zeros(2), mu, [sample_function("gaussian", {"sigma": 0.5}, g2)],
                                   BesovParams(0.5, 2.0, INF), 2.0)
    return {"leibniz": leib, "maximal_seminorm": mx, "carleson": car, "pushforward_max_ratio": push["max_ratio"], "pass": True}


CHECKS = [
    Check("interval-perimeter", "interval perimeter equals 2", check_interval_perimeter, 0.01),
    Check("divergence-slopes", "divergence-scan slope equals 1/p - alpha", check_divergence_slopes, 0.03),
    Check("capacity-scaling", "disk capacity ratio r=1 vs r=2", check_capacity_scaling, 0.10),
    Check("perimeter-dominates", "capacity upper below perimeter^p", check_perimeter_dominates, 0.02),
    Check("weak-type-coarea", "weak-type and co-area inequalities", check_weak_type_coarea, 0.02),
    Check("outer-measure", "outer-measure properties of capacity uppers", check_outer_measure, 0.02),
    Check("bbm-limit", "alpha -> 1 limit", check_bbm, 0.05),
    Check("ms-limit", "alpha -> 0 limit", check_ms, 0.05),
    Check("weak-sobolev", "explicit-constant weak Sobolev inequality", check_weak_sobolev, 1e-6),
    Check("lyapunov", "Lyapunov interpolation of seminorms and weak norms", check_lyapunov, 1e-9),
    Check("heat", "heat closed form, maximal domination, tent geometry", check_heat, 0.01),
    Check("trace-dichotomy", "trace bound vs witness dichotomy", check_trace_dichotomy),
    Check("campanato-stability", "Campanato ratio stable under refinement", check_campanato, 0.20),
    Check("seminorm-invariants", "homogeneity, triangle, q-monotonicity", check_seminorm_invariants),
    Check("limit-invariants", "quadrature stability, BV scan, strong ratio", check_limit_invariants),
    Check("regions-invariants", "overlap symmetry, chain estimate, isoperimetry", check_regions_invariants),
    Check("capacity-invariants", "feasibility, convexity, translation, boundary, open perimeter", check_capacity_invariants),
    Check("boundary-capacity", "ball vs boundary-annulus capacity (reported)", check_boundary_capacity, 0.05,
          reported=("quick", "full")),
    Check("heat-invariants", "kernel mass, semigroup, maximum principle, level sets", check_heat_invariants),
    Check("multiplier", "multiplier chain and capacity consistency", check_multiplier, 1e-9),
    Check("reported-ratios", "unspecified constants (reported)", check_reported_ratios, reported=("quick", "full")),
]

CHECK_IDS = [c.id for c in CHECKS]


def run_check(check: Check, tier: str, tol: float | None = None) -> dict:
    tol = check.tol if tol is None else tol
    t0 = time.perf_counter()
    try:
        res = check.fn(tier, tol)
        err = None
    except Exception as exc:  # a crashing check is a failed check
        log.exception("check %s raised", check.id)
        res, err = {"pass": False}, f"{type(exc).__name__}: {exc}"
    asserted = tier not in check.reported
    out = {"id": check.id, "title": check.title, "asserted": asserted, "tolerance": tol,
           "pass": bool(res.get("pass", False)), "seconds": round(time.perf_counter() - t0, 3), "result": res}
    if err:
        out["error"] = err
    return out


def run_verify(tier: str = "quick", only=None, tolerances: dict | None = None, progress=None) -> dict:
    """Run the selected checks; ``failed`` lists asserted checks that did not pass."""
    if tier not in TIERS:
        raise ValueError(f"unknown tier {tier!r}; expected quick or full")
    only = list(only or CHECK_IDS)
    unknown = [c for c in only if c not in CHECK_IDS]
    if unknown:
        raise ValueError(f"unknown check(s): {', '.join(unknown)}")
    tolerances = tolerances or {}
    results = []
    for c in CHECKS:
        if c.id not in only:
            continue
        r = run_check(c, tier, tolerances.get(c.id))
        results.append(r)
        if progress:
            progress(r)
    failed = [r["id"] for r in results if r["asserted"] and not r["pass"]]
    return {"tier": tier, "checks": results, "failed": failed, "pass": not failed}
