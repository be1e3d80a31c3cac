"""Outer measures, weak Lorentz norms, trace inequalities, push-forwards and multipliers.

Measures are modelled by closed forms on regions where one exists and by a
weighted point sample otherwise; weak norms are exact suprema over the level
values seen by that sample.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .grid import Grid, GridFunction, sample_function
from .regions import Ball, Box, Region, Union, _merge_intervals, unit_ball_volume, volume
from .seminorm import BesovParams, HSample, besov_seminorm, default_h_sample, sphere_measure

log = logging.getLogger(__name__)


def evaluate(f: GridFunction, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of cell-centre samples; 0 outside the box."""
    g = f.grid
    axes = [g.centers] * g.n
    interp = RegularGridInterpolator(axes, f.values, bounds_error=False, fill_value=None)
    pts = np.asarray(points, float).reshape(-1, g.n)
    out = interp(pts)
    outside = np.any(np.abs(pts) > g.L, axis=1)
    out[outside] = 0.0
    return out


class OuterMeasure:
    n: int
    name: str

    def sample(self, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
        """Points and weights discretizing the measure on the box."""
        raise NotImplementedError

    def exact(self, S: Region) -> float | None:
        """Closed-form measure of a region, or None if unavailable."""
        return None

    def ball(self, x, r) -> float:
        return measure_eval(self, Ball(tuple(np.atleast_1d(x)), r))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Lebesgue(OuterMeasure):
    n: int

    name = "lebesgue"

    def sample(self, grid):
        return grid.points().reshape(-1, grid.n), np.full(grid.size, grid.cell_volume)

    def exact(self, S):
        return volume(S)

    def to_dict(self):
        return {"kind": self.name, "n": self.n}


@dataclass(frozen=True)
class SliceLebesgue(OuterMeasure):
    """d-dimensional Lebesgue measure on the affine set anchor + span(direction) (d = 1) or the point anchor (d = 0)."""

    n: int
    d: int
    anchor: tuple = (0.0, 0.0)
    direction: tuple = (1.0, 0.0)
    extent: float = math.inf

    name = "slice"

    def __post_init__(self):
        if self.d not in (0, 1) or self.d >= self.n:
            raise ValueError("slices must have dimension 0 or 1 and lie below n")
        a = tuple(float(v) for v in np.atleast_1d(self.anchor))[: self.n]
        u = np.atleast_1d(np.asarray(self.direction, float))[: self.n]
        object.__setattr__(self, "anchor", a)
        if self.d == 1:
            norm = float(np.linalg.norm(u))
            if abs(norm - 1.0) > 1e-15:  # keeps unit input (and round trips) exact
                u = u / norm
            object.__setattr__(self, "direction", tuple(float(v) for v in u))

    @property
    def a(self):
        return np.asarray(self.anchor)

    @property
    def u(self):
        return np.asarray(self.direction)

    def _clip(self, lo, hi):
        return max(lo, -self.extent), min(hi, self.extent)

    def _interval(self, S: Region):
        """Parameter interval {s : anchor + s u in S} for a single shape."""
        a, u = self.a, self.u
        if isinstance(S, Ball):
            c = a - S.c
            b = float(c @ u)
            disc = b * b - (float(c @ c) - S.radius**2)
            if disc <= 0:
                return None
            r = math.sqrt(disc)
            return self._clip(-b - r, -b + r)
        lo, hi = -math.inf, math.inf
        for i in range(self.n):
            if abs(u[i]) < 1e-15:
                if not S.lo[i] <= a[i] <= S.hi[i]:
                    return None
                continue
            s0, s1 = (S.lo[i] - a[i]) / u[i], (S.hi[i] - a[i]) / u[i]
            lo, hi = max(lo, min(s0, s1)), min(hi, max(s0, s1))
        lo, hi = self._clip(lo, hi)
        return (lo, hi) if hi > lo else None

    def exact(self, S):
        if S.is_empty:
            return 0.0
        if self.d == 0:
            return 1.0 if bool(S.contains(self.a[None, :])[0]) else 0.0
        ivs = [iv for iv in (self._interval(s) for s in S.shapes()) if iv is not None]
        if not ivs:
            return 0.0
        return float(sum(b - a for a, b in _merge_intervals(ivs)))

    def sample(self, grid):
        if self.d == 0:
            return self.a[None, :], np.ones(1)
        # chord of the box along the line, at half-cell spacing
        iv = self._interval(Box(tuple([-grid.L] * grid.n), tuple([grid.L] * grid.n)))
        if iv is None:
            return np.zeros((0, grid.n)), np.zeros(0)
        ds = grid.dx / 2
        m = max(int(math.ceil((iv[1] - iv[0]) / ds)), 1)
        s = iv[0] + (np.arange(m) + 0.5) * (iv[1] - iv[0]) / m
        return self.a + s[:, None] * self.u, np.full(m, (iv[1] - iv[0]) / m)

    def preimage_ball(self, A, b, x, r) -> float:
        """Measure of {y on the slice : |A y + b - x| <= r} (exact)."""
        A = np.atleast_2d(np.asarray(A, float))
        c = A @ self.a + np.asarray(b, float) - np.asarray(x, float)
        if self.d == 0:
            return 1.0 if float(c @ c) <= r * r else 0.0
        v = A @ self.u
        vv, cv, cc = float(v @ v), float(c @ v), float(c @ c) - r * r
        if vv < 1e-15:
            return (self.extent * 2 if math.isfinite(self.extent) else math.inf) if cc <= 0 else 0.0
        disc = cv * cv - vv * cc
        if disc <= 0:
            return 0.0
        q = math.sqrt(disc)
        lo, hi = self._clip((-cv - q) / vv, (-cv + q) / vv)
        return max(hi - lo, 0.0)

    def to_dict(self):
        return {"kind": self.name, "n": self.n, "d": self.d, "anchor": list(self.anchor),
                "direction": list(self.direction), "extent": "inf" if math.isinf(self.extent) else self.extent}


@dataclass(frozen=True)
class WeightedLebesgue(OuterMeasure):
    """|x|^gamma dx."""

    n: int
    gamma: float

    name = "weighted"

    def __post_init__(self):
        if self.gamma <= -self.n:
            raise ValueError("weight exponent must exceed -n for local integrability")

    def sample(self, grid):
        x = grid.points().reshape(-1, grid.n)
        return x, grid.cell_volume * np.linalg.norm(x, axis=1) ** self.gamma

    def exact(self, S):
        sh = S.shapes()
        if len(sh) == 1 and isinstance(sh[0], Ball) and np.allclose(sh[0].center, 0):
            r = sh[0].radius
            return sphere_measure(self.n) * r ** (self.n + self.gamma) / (self.n + self.gamma)
        return None

    def to_dict(self):
        return {"kind": self.name, "n": self.n, "gamma": self.gamma}


def measure_from_dict(d: dict) -> OuterMeasure:
    kind = d.get("kind")
    if kind == "lebesgue":
        return Lebesgue(int(d["n"]))
    if kind == "slice":
        ext = d.get("extent", math.inf)
        return SliceLebesgue(int(d["n"]), int(d["d"]), tuple(d.get("anchor", (0.0,) * d["n"])),
                             tuple(d.get("direction", (1.0,) + (0.0,) * (d["n"] - 1))),
                             math.inf if ext == "inf" else float(ext))
    if kind == "weighted":
        return WeightedLebesgue(int(d["n"]), float(d["gamma"]))
    raise ValueError(f"unknown measure kind {kind!r}")


def measure_eval(mu: OuterMeasure, S, grid: Grid | None = None, cells: int = 1024):
    """mu(S) for a Region (closed form when available) or a boolean cell mask on ``grid``."""
    if isinstance(S, np.ndarray):
        if grid is None:
            raise ValueError("a mask needs its grid")
        pts, w = mu.sample(grid)
        idx = np.clip(np.floor((pts + grid.L) / grid.dx).astype(int), 0, grid.N - 1)
        inside = np.all(np.abs(pts) <= grid.L, axis=1)
        hit = S[tuple(idx.T)] & inside
        return float(w[hit].sum())
    if S.is_empty:
        return 0.0
    v = mu.exact(S)
    if v is not None:
        return float(v)
    # rasterized fallback on a fine grid covering S
    lo, hi = S.bounds()
    half = float(np.max(np.maximum(np.abs(lo), np.abs(hi)))) * (1 + 1e-9)
    from .grid import build_grid

    g = build_grid(S.n, half, cells if S.n == 2 else 64 * cells)
    return measure_eval(mu, S.contains(g.points()), g)


def measure_preimage(mu: OuterMeasure, A, b, x, r, grid: Grid | None = None) -> float:
    """mu(phi^-1(B(x, r))) for the affine map phi(y) = A y + b."""
    A = np.atleast_2d(np.asarray(A, float))
    b = np.atleast_1d(np.asarray(b, float))
    if isinstance(mu, SliceLebesgue):
        return mu.preimage_ball(A, b, x, r)
    if isinstance(mu, Lebesgue) and abs(np.linalg.det(A)) > 1e-12:
        return unit_ball_volume(mu.n) * r**mu.n / abs(np.linalg.det(A))
    if grid is None:
        raise ValueError("sampled preimage needs a grid")
    pts, w = mu.sample(grid)
    img = pts @ A.T + b
    return float(w[np.linalg.norm(img - np.asarray(x, float), axis=1) <= r].sum())


# --------------------------------------------------------------------------
# weak Lorentz norms


def _level_sup(vals: np.ndarray, w: np.ndarray, q: float, t_grid=None) -> float:
    """sup_t t mu({|f| > t})^(1/q) for a weighted sample."""
    a = np.abs(vals)
    keep = (w > 0) & (a > 0)
    a, w = a[keep], w[keep]
    if a.size == 0:
        return 0.0
    if t_grid is not None:
        t = np.asarray(t_grid, float)
        order = np.argsort(a)
        a_s, cw = a[order], np.cumsum(w[order][::-1])[::-1]
        k = np.searchsorted(a_s, t, side="right")
        m = np.where(k < a_s.size, cw[np.minimum(k, a_s.size - 1)], 0.0)
        return float(np.max(t * m ** (1.0 / q)))
    order = np.argsort(-a, kind="stable")
    a_s, cw = a[order], np.cumsum(w[order])
    # ties: the level set just below a value includes every equal value
    last = np.r_[a_s[1:] != a_s[:-1], True]
    return float(np.max(a_s[last] * cw[last] ** (1.0 / q)))


def weak_lorentz_norm(f: GridFunction, q: float, mu: OuterMeasure, *, ball=None, t_grid=None, phi=None, multiplier=None) -> float:
    """sup_t t mu({|f| > t})^(1/q), optionally restricted to a ball B(x, r).

    ``phi`` = (A, b) composes f with the affine map y -> A y + b; ``multiplier``
    is a grid function m so that the norm of m f is returned.  Without
    ``t_grid`` the supremum is exact over all level values of the sample.
    """
    if not 1 <= q < math.inf:
        raise ValueError("q must lie in [1, inf)")
    pts, w = mu.sample(f.grid)
    img = pts if phi is None else pts @ np.atleast_2d(phi[0]).T + np.atleast_1d(phi[1])
    vals = evaluate(f, img)
    if multiplier is not None:
        vals = vals * evaluate(multiplier, pts)
    if ball is not None:
        x, r = ball
        sel = np.linalg.norm(img - np.asarray(x, float), axis=1) <= r
        vals, w = vals[sel], w[sel]
    return _level_sup(vals, w, q, t_grid)


def geometric_t_grid(f: GridFunction, m: int = 64, lo: float = 1e-3) -> np.ndarray:
    top = float(np.abs(f.values).max())
    return np.geomspace(lo * top, top, m) if top > 0 else np.zeros(1)


def weak_lyapunov_check(f: GridFunction, mu: OuterMeasure, q0: float, q1: float, theta: float, t_grid=None) -> dict:
    """Weak-norm Lyapunov interpolation on a shared t-grid (exact per level)."""
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    q = 1.0 / ((1 - theta) / q0 + theta / q1)
    t_grid = geometric_t_grid(f) if t_grid is None else t_grid
    lhs = weak_lorentz_norm(f, q, mu, t_grid=t_grid)
    rhs = weak_lorentz_norm(f, q0, mu, t_grid=t_grid) ** (1 - theta) * weak_lorentz_norm(f, q1, mu, t_grid=t_grid) ** theta
    return {"q": q, "lhs": lhs, "rhs": rhs, "pass": bool(lhs <= rhs * (1 + 1e-9))}


# --------------------------------------------------------------------------
# growth and trace inequalities


def growth_exponent(n: int, alpha: float, p: float, q: float) -> float:
    if alpha * p >= n:
        raise ValueError("needs alpha * p < n")
    return q * (n - alpha * p) / p


def ball_growth_check(mu: OuterMeasure, target: float, balls, grid: Grid | None = None, slope_tol: float = 0.05) -> dict:
    """Bounded ratio mu(B(x, r)) / r^target over sample balls.

    A finite sample cannot certify a supremum, so the test is the trend as r
    shrinks: for each centre the log-log slope of the ratio over its two
    smallest radii must be at least -slope_tol (the ratio does not blow up).
    Balls leaving the box are skipped.
    """
    rows = []
    for x, r in balls:
        x = np.atleast_1d(np.asarray(x, float))
        if grid is not None and np.any(np.abs(x) + r > grid.L):
            continue
        m = mu.ball(x, r)
        rows.append((tuple(x), float(r), m, m / r**target))
    if not rows:
        raise ValueError("no admissible balls")
    worst_slope = math.inf
    worst_ball = None
    for c in {row[0] for row in rows}:
        sub = sorted((row for row in rows if row[0] == c and row[2] > 0), key=lambda t: t[1])
        if len(sub) < 2:
            continue
        (r0, q0), (r1, q1) = (sub[0][1], sub[0][3]), (sub[1][1], sub[1][3])
        sl = math.log(q1 / q0) / math.log(r1 / r0)
        if sl < worst_slope:
            worst_slope, worst_ball = sl, (c, r0)
    pos = [row for row in rows if row[2] > 0]
    fit = None
    if len(pos) >= 2 and len({row[1] for row in pos}) >= 2:
        fit = float(np.polyfit(np.log([r[1] for r in pos]), np.log([r[2] for r in pos]), 1)[0])
    sup = max(row[3] for row in rows)
    arg = max(rows, key=lambda t: t[3])
    return {
        "target": target,
        "fit_exponent": fit,
        "sup_ratio": sup,
        "argsup": {"center": list(arg[0]), "radius": arg[1]},
        "small_r_slope": None if math.isinf(worst_slope) else worst_slope,
        "worst_ball": None if worst_ball is None else {"center": list(worst_ball[0]), "radius": worst_ball[1]},
        "rows": [{"center": list(c), "radius": r, "measure": m, "ratio": q} for c, r, m, q in rows],
        "pass": bool(math.isinf(worst_slope) or worst_slope >= -slope_tol),
    }


def bump_witness(grid: Grid, center, r: float) -> GridFunction:
    """Smooth bump of radius 2r scaled to be >= 1 on B(center, r)."""
    amp = math.exp(1.0 / 3.0)  # 1 / bump(1/2)
    f = sample_function("smooth-bump", {"radius": 2 * r, "center": list(np.atleast_1d(center)), "amplitude": amp}, grid)
    return f.with_values(f.values, family="witness-bump", witness_radius=r)


def trace_inequality_check(fs, mu: OuterMeasure, params: BesovParams, q: float, hs: HSample | None = None,
                           mode: str = "global", balls=None, phi=None) -> dict:
    """Ratios ||f (o phi)||_{L^{q,inf}_mu} / ||f||_{alpha,p,inf} over a function family.

    ``mode='localized'`` takes the sup over the supplied balls of the norm of
    f restricted to each ball.
    """
    n = fs[0].grid.n
    growth_exponent(n, params.alpha, params.p, q)
    if mode not in ("global", "localized"):
        raise ValueError("mode must be 'global' or 'localized'")
    if mode == "localized" and not balls:
        raise ValueError("localized mode needs a ball family")
    sp = BesovParams(params.alpha, params.p, math.inf)
    rows = []
    for i, f in enumerate(fs):
        h = hs or default_h_sample(f, K=32, M=16 if n == 2 else 2)
        s = besov_seminorm(f, sp, h)
        if s == 0:
            rows.append({"id": i, "family": f.meta.get("family"), "lhs": 0.0, "rhs": 0.0, "ratio": None})
            continue
        if mode == "global":
            lhs = weak_lorentz_norm(f, q, mu, phi=phi)
        else:
            lhs = max(weak_lorentz_norm(f, q, mu, ball=b, phi=phi) for b in balls)
        rows.append({"id": i, "family": f.meta.get("family"), "lhs": lhs, "rhs": s, "ratio": lhs / s})
    ratios = [r["ratio"] for r in rows if r["ratio"] is not None]
    return {"mode": mode, "measure": mu.to_dict(), "q": q, "params": sp.to_dict(), "rows": rows,
            "max_ratio": max(ratios, default=0.0)}


def trace_dichotomy(grid: Grid, mu: OuterMeasure, params: BesovParams, q: float, suite, balls,
                    witness_radii=(0.4, 0.2, 0.1), center=None) -> dict:
    """Both branches of the ball-growth / localized-trace equivalence for one configuration.

    The suite cap is twice the largest localized ratio over the fixed-scale
    suite.  Witness bumps shrinking around a point of the measure's support
    are then compared with the cap: under the growth bound their ratios stay
    below it; when the growth bound fails the ratios grow like
    r^((d - target)/q) and exceed it.
    """
    target = growth_exponent(grid.n, params.alpha, params.p, q)
    center = np.zeros(grid.n) if center is None else np.asarray(center, float)
    growth = ball_growth_check(mu, target, [(center, r) for r in np.geomspace(0.05, 1.0, 8)], grid)
    suite_rep = trace_inequality_check(suite, mu, params, q, mode="localized", balls=balls)
    cap = 2.0 * suite_rep["max_ratio"]
    wit = []
    for r in witness_radii:
        f = bump_witness(grid, center, r)
        rep = trace_inequality_check([f], mu, params, q, mode="localized", balls=[(center, 2 * r)])
        wit.append({"radius": r, "ratio": rep["rows"][0]["ratio"]})
    wr = [w["ratio"] for w in wit]
    slope = float(np.polyfit(np.log(witness_radii), np.log(wr), 1)[0])
    exceeds = bool(max(wr) > cap)
    return {
        "target": target,
        "growth": {k: growth[k] for k in ("fit_exponent", "sup_ratio", "small_r_slope", "pass")},
        "suite_max_ratio": suite_rep["max_ratio"],
        "cap": cap,
        "witnesses": wit,
        "witness_slope": slope,
        "witness_exceeds_cap": exceeds,
        "pass": bool(exceeds != growth["pass"]),
    }


def pushforward_check(A, b, mu: OuterMeasure, fs, params: BesovParams, q: float, balls=None, grid: Grid | None = None, **kw) -> dict:
    """Trace ratios for f o phi against mu, i.e. for the push-forward measure phi_* mu."""
    rep = trace_inequality_check(fs, mu, params, q, phi=(np.atleast_2d(A), np.atleast_1d(b)), **kw)
    if balls:
        grid = grid or fs[0].grid
        rep["preimage_measures"] = [
            {"center": list(np.atleast_1d(x)), "radius": r, "measure": measure_preimage(mu, A, b, x, r, grid)} for x, r in balls
        ]
    return rep


def multiplier_check(m: GridFunction, mu: OuterMeasure, fs, params: BesovParams, q: float, regions, capacities, tol=1e-9) -> dict:
    """Three-stage multiplier chain.

    ``capacities`` maps each region to a ``CapacityEstimate`` whose minimizer
    g satisfies g >= 1 near the region.

    (i)   ||m||_{L^inf_mu} and the measure-capacity ratios mu(E) / upper(E)^(q/p);
    (ii)  ||m f||_{L^{q,inf}_mu} <= ||m||_inf K ||f|| where K is the largest
          trace ratio over the family plus the capacity minimizers;
    (iii) sup_t t^q mu({x in E : |m| > t}) <= (K ||m||_inf)^q upper(E)^(q/p).
    """
    if not np.all(np.isfinite(m.values)):
        raise ValueError("multiplier must be bounded")
    sp = BesovParams(params.alpha, params.p, math.inf)
    pts, w = mu.sample(m.grid)
    mv = evaluate(m, pts)
    m_inf = float(np.max(np.abs(mv[w > 0]), initial=0.0))
    hyp = []
    for E, est in zip(regions, capacities):
        muE = measure_eval(mu, E)
        hyp.append({"region": E.to_dict(), "measure": muE, "upper": est.upper,
                    "ratio": muE / est.upper ** (q / est_p(est)) if est.upper > 0 else math.inf})
    family = list(fs) + [est.minimizer for est in capacities]
    norms = []
    for f in family:
        s = besov_seminorm(f, sp, default_h_sample(f, K=32, M=16 if f.grid.n == 2 else 2))
        norms.append(s)
    K = max((weak_lorentz_norm(f, q, mu) / s for f, s in zip(family, norms) if s > 0), default=0.0)
    mid = []
    for f, s in zip(family, norms):
        lhs = weak_lorentz_norm(f, q, mu, multiplier=m)
        mid.append({"family": f.meta.get("family"), "lhs": lhs, "rhs": m_inf * K * s,
                    "pass": bool(lhs <= m_inf * K * s * (1 + tol) + 1e-300)})
    concl = []
    for E, est in zip(regions, capacities):
        sel = _in_region(E, pts) & (w > 0)
        lhs = _level_sup(mv[sel], w[sel], q) ** q
        rhs = (K * m_inf) ** q * est.upper ** (q / est_p(est))
        concl.append({"region": E.to_dict(), "lhs": lhs, "rhs": rhs, "pass": bool(lhs <= rhs * (1 + tol) + 1e-300)})
    return {
        "m_inf": m_inf,
        "hypothesis": hyp,
        "trace_constant": K,
        "middle": mid,
        "conclusion": concl,
        "pass": all(r["pass"] for r in mid) and all(r["pass"] for r in concl),
    }


def est_p(est) -> float:
    p = est.provenance.get("params", {}).get("p", 1.0)
    return float(p)


def _in_region(E: Region, pts: np.ndarray) -> np.ndarray:
    if E.is_empty:
        return np.zeros(len(pts), bool)
    return E.contains(pts)


def cap_consistency_check(mu: OuterMeasure, regions, capacities, q: float, tol=1e-9) -> dict:
    """mu(E) <= ||g_E||_{L^{q,inf}_mu}^q, with g_E the capacity minimizer (g_E >= 1 near E)."""
    rows = []
    for E, est in zip(regions, capacities):
        muE = measure_eval(mu, E)
        wn = weak_lorentz_norm(est.minimizer, q, mu)
        rows.append({"region": E.to_dict(), "measure": muE, "weak_norm_q": wn**q, "pass": bool(muE <= wn**q * (1 + tol) + 1e-12)})
    return {"rows": rows, "pass": all(r["pass"] for r in rows)}


__all__ = [
    "Lebesgue",
    "SliceLebesgue",
    "WeightedLebesgue",
    "Union",
    "measure_eval",
    "measure_preimage",
    "weak_lorentz_norm",
    "weak_lyapunov_check",
    "ball_growth_check",
    "trace_inequality_check",
    "trace_dichotomy",
    "pushforward_check",
    "multiplier_check",
    "cap_consistency_check",
]
