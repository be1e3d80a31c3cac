"""Upper and lower bounds for the (alpha, p, inf)-Besov capacity of a set.

The upper bound minimizes G(f) = max_h |h|^-alpha ||Delta_h f||_p over grid
functions that are 1 on a rasterized neighbourhood of E and 0 on the outer
band, by projected subgradient descent.  Every iterate is feasible, so the
best objective seen is an upper bound for the discrete problem.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .grid import Grid, GridFunction, Translation, split_offset
from .regions import Ball, Box, Region, Union, perimeter, volume
from .seminorm import BesovParams, HSample, make_h_sample

log = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class AdmissibleConstraint:
    grid: Grid
    mask: np.ndarray
    band: np.ndarray
    delta: float

    def project(self, v: np.ndarray) -> np.ndarray:
        """Euclidean projection onto {f = 1 on mask, f = 0 on band, 0 <= f <= 1}.

        Truncating to [0, 1] never increases any ||Delta_h f||_p, so the box
        constraint loses nothing and keeps iterates bounded.
        """
        out = np.clip(v, 0.0, 1.0)
        out[self.mask] = 1.0
        out[self.band] = 0.0
        return out

    def violation(self, v: np.ndarray) -> float:
        a = np.max(1.0 - v[self.mask], initial=0.0)
        b = np.max(np.abs(v[self.band]), initial=0.0)
        return float(max(a, b, 0.0))


def boundary_band(grid: Grid, layers: int = 2) -> np.ndarray:
    band = np.zeros(grid.shape, bool)
    for ax in range(grid.n):
        sl = [slice(None)] * grid.n
        sl[ax] = slice(0, layers)
        band[tuple(sl)] = True
        sl[ax] = slice(grid.N - layers, None)
        band[tuple(sl)] = True
    return band


def rasterize_constraint(E: Region, grid: Grid, delta: float | None = None) -> AdmissibleConstraint:
    """Cells whose centres lie within ``delta`` of E must be >= 1."""
    delta = 2 * grid.dx if delta is None else float(delta)
    if delta < grid.dx * (1 - 1e-12):
        raise ValueError(f"dilation {delta:.4g} below grid spacing {grid.dx:.4g}")
    band = boundary_band(grid)
    if E.is_empty:
        mask = np.zeros(grid.shape, bool)
    else:
        mask = E.distance(grid.points()) <= delta
    if np.any(mask & band):
        raise ValueError("neighbourhood reaches the boundary band; enlarge the box half-width L")
    return AdmissibleConstraint(grid, mask, band, delta)


def initial_admissible(E: Region, grid: Grid, w: float) -> GridFunction:
    """clamp(1 - dist(x, E) / w, 0, 1)."""
    if not w > 0:
        raise ValueError("profile width must be positive")
    if E.is_empty:
        return GridFunction(grid, np.zeros(grid.shape), {"family": "initial-admissible"})
    d = E.distance(grid.points())
    return GridFunction(grid, np.clip(1.0 - d / w, 0.0, 1.0), {"family": "initial-admissible", "width": w})


def capacity_lower_bound(E: Region, alpha: float, p: float) -> float:
    """Isocapacitary bound (|E|^((n-ap)/(pn)) / (2^(1/p) pn/(n-ap)))^p."""
    n = E.n
    if alpha * p >= n:
        raise ValueError("the isocapacitary bound needs alpha * p < n")
    V = volume(E)
    e = (n - alpha * p) / (p * n)
    const = 2.0 ** (1.0 / p) * p * n / (n - alpha * p)
    return (V**e / const) ** p


# --------------------------------------------------------------------------
# objective


class Objective:
    """G(v) = max_h |h|^-alpha ||Delta_h v||_p over a fixed offset list."""

    def __init__(self, grid: Grid, alpha: float, p: float, offsets: np.ndarray):
        self.grid = grid
        self.alpha = alpha
        self.p = float(p)
        self.offsets = np.asarray(offsets, float).reshape(-1, grid.n)
        split = [split_offset(h, grid.dx) for h in self.offsets]
        self.ks = np.array([s[0] for s in split], np.int64)
        self.ths = np.array([s[1] for s in split])
        self.scale = np.linalg.norm(self.offsets, axis=1) ** (-alpha)

    def scaled_norms(self, v: np.ndarray, idx=None) -> np.ndarray:
        if idx is None:
            idx = slice(None)
        ks, ths = self.ks[idx], self.ths[idx]
        if len(ks) == 0:
            return np.zeros(0)
        return self.scale[idx] * _kernels.batched_diff_norms(v, ks, ths, self.p, self.grid.cell_volume)

    def __call__(self, v: np.ndarray) -> float:
        return float(self.scaled_norms(v).max())

    def subgradient(self, v: np.ndarray, active) -> np.ndarray:
        g = np.zeros_like(v)
        for j in active:
            _, gj = Translation(self.grid, self.offsets[j]).diff_norm_grad(v, self.p)
            g += self.scale[j] * gj
        return g / max(len(active), 1)


def capacity_h_sample(grid: Grid, E: Region, K: int = 24, M: int = 16) -> HSample:
    """Offsets from 2 dx out to twice the extent of the neighbourhood."""
    ext = 2.0 * (E.diameter() if not E.is_empty else grid.L) + 4 * grid.dx
    ext = min(ext, 2 * grid.L * math.sqrt(grid.n))
    return make_h_sample(grid.n, 2 * grid.dx, ext, K, M if grid.n == 2 else 2)


@dataclass
class CapacityEstimate:
    upper: float
    lower: float
    minimizer: GridFunction
    iterations: int
    converged: bool
    gap_proxy: float
    history: list = field(default_factory=list, repr=False)
    provenance: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "upper": self.upper,
            "lower": self.lower,
            "iterations": self.iterations,
            "converged": self.converged,
            "gap_proxy": self.gap_proxy,
            "provenance": self.provenance,
        }


def _refine_sup(obj: Objective, v: np.ndarray, hs: HSample) -> float:
    """Golden-section polish of the sup in radius around the discrete maximiser."""
    vals = obj.scaled_norms(v)
    j = int(np.argmax(vals))
    best = float(vals[j])
    if best == 0.0:
        return 0.0
    k, m = divmod(j, hs.M)
    lo = hs.radii[max(k - 1, 0)]
    hi = hs.radii[min(k + 1, hs.K - 1)]
    d = hs.directions[m]

    def fun(r):
        return r ** (-obj.alpha) * Translation(obj.grid, r * d).diff_norm(v, obj.p)

    a, b = lo, hi
    c, e = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fe = fun(c), fun(e)
    for _ in range(30):
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, e, fe
            e = a + GOLDEN * (b - a)
            fe = fun(e)
    return max(best, fc, fe)


def descend(
    cons: AdmissibleConstraint,
    obj: Objective,
    hs: HSample,
    starts,
    *,
    max_iter: int = 150,
    restarts: int = 3,
    tol: float = 1e-4,
    window: int = 30,
    step0: float = 0.1,
    full_every: int = 10,
    working: int = 32,
    seed: int = 0,
):
    """Projected subgradient descent from the best of ``starts``.

    Each step moves by s_k / ||g||^2 along a subgradient g (s_k = s0 / sqrt(k),
    s0 = step0 * G(start)), averaging the subgradients of offsets tied for the
    max within 1e-9.  Between full sweeps over the offsets the max is taken
    over a working set of the ``working`` largest offsets from the last sweep;
    the best iterate is tracked on full sweeps only.  Restart 0 begins at the
    best start, later restarts perturb the best iterate with seeded noise.

    Returns (best values, best objective, iterations, converged, gap, history).
    """
    grid = cons.grid
    starts = [cons.project(np.asarray(s, float)) for s in starts]
    vals = [obj(s) for s in starts]
    j0 = int(np.argmin(vals))
    best_v, best_G = starts[j0], vals[j0]
    history = [best_G]
    rng = np.random.default_rng(seed)
    its = 0
    gap = math.inf
    span = max(window // full_every, 2)
    for r in range(restarts):
        v = best_v.copy() if r == 0 else cons.project(best_v + 0.05 * rng.standard_normal(grid.shape))
        full = obj.scaled_norms(v)
        G = float(full.max())
        if G < best_G:
            best_G, best_v = G, v.copy()
        s0 = step0 * max(G, 1e-300)
        ws = np.argsort(full)[::-1][:working]
        recent = [G]
        for k in range(1, max_iter + 1):
            its += 1
            sv = obj.scaled_norms(v, ws)
            active = ws[sv >= sv.max() * (1 - 1e-9)]
            g = obj.subgradient(v, active)
            gg = float(np.sum(g * g))
            if gg == 0.0:
                gap = 0.0
                break
            v = cons.project(v - (s0 / math.sqrt(k)) / gg * g)
            if k % full_every == 0 or k == max_iter:
                full = obj.scaled_norms(v)
                G = float(full.max())
                ws = np.argsort(full)[::-1][:working]
                if G < best_G:
                    best_G, best_v = G, v.copy()
                history.append(best_G)
                recent.append(min(recent[-1], G))
                if len(recent) > span:
                    old = recent[-1 - span]
                    gap = (old - recent[-1]) / max(old, 1e-300)
                    if gap < tol:
                        break
    return best_v, best_G, its, bool(gap < tol), float(gap), history


def capacity_minimize(
    E: Region,
    params: BesovParams,
    grid: Grid,
    hs: HSample | None = None,
    *,
    delta: float | None = None,
    width: float | None = None,
    warm_starts=(),
    seed: int = 0,
    **opts,
) -> CapacityEstimate:
    """Projected subgradient estimate of the discrete capacity of E.

    The start is the projected profile ``initial_admissible(E, grid, width)``
    (width defaults to dx) or, if better, one of ``warm_starts`` (any grid
    arrays; they are projected onto the constraint).  ``upper`` is the
    objective of the best iterate with the maximizing radius polished by
    golden-section search, raised to the power p.  See ``descend`` for the
    solver options.
    """
    a, p = params.alpha, params.p
    if not math.isinf(params.q):
        raise ValueError("capacity uses the q = inf seminorm")
    if math.isinf(p):
        raise ValueError("p = inf capacity is degenerate; see constant_degeneracy_check")
    if a * p >= grid.n:
        raise ValueError("alpha * p >= n: zero-capacity regime, every compact set has capacity 0")
    if E.n != grid.n:
        raise ValueError("region and grid dimensions differ")
    cons = rasterize_constraint(E, grid, delta)
    hs = hs or capacity_h_sample(grid, E)
    prov = {"grid": grid.to_dict(), "hs": hs.to_dict(), "delta_N": cons.delta, "seed": seed, "params": params.to_dict()}
    prov.update({k: v for k, v in opts.items()})
    if E.is_empty or not cons.mask.any():
        z = GridFunction(grid, np.zeros(grid.shape), {"family": "capacity-minimizer"})
        return CapacityEstimate(0.0, 0.0, z, 0, True, 0.0, [0.0], prov)
    obj = Objective(grid, a, p, hs.offsets().reshape(-1, grid.n))
    starts = [initial_admissible(E, grid, width or grid.dx).values]
    starts += [getattr(w, "values", w) for w in warm_starts]
    v, _, its, conv, gap, hist = descend(cons, obj, hs, starts, seed=seed, **opts)
    upper = _refine_sup(obj, v, hs) ** p
    if cons.violation(v) > 1e-9:
        raise RuntimeError("minimizer violates the admissibility constraint")
    f = GridFunction(grid, v, {"family": "capacity-minimizer"})
    return CapacityEstimate(upper, capacity_lower_bound(E, a, p), f, its, conv, gap, hist, prov)


# --------------------------------------------------------------------------
# property checks


def scaling_ratio_check(base: Ball, r1: float, r2: float, params: BesovParams, N: int, L_over_r: float = 1.3, tol=0.10, **opts):
    """Capacity ratio of concentric balls of radii r1, r2 on radius-proportional grids."""
    from .grid import build_grid

    if r1 <= 0 or r2 <= 0:
        raise ValueError("radii must be positive")
    n = base.n
    out = {}
    for r in (r1, r2):
        g = build_grid(n, L_over_r * r, N)
        E = Ball(base.center, r) if np.allclose(base.center, 0) else Ball(tuple(np.asarray(base.center) * r), r)
        est = capacity_minimize(E, params, g, **opts)
        out[r] = est
    ratio = out[r1].upper / out[r2].upper
    target = (r1 / r2) ** (n - params.alpha * params.p)
    return {
        "upper_r1": out[r1].upper,
        "upper_r2": out[r2].upper,
        "ratio": ratio,
        "target": target,
        "rel_err": abs(ratio / target - 1),
        "pass": bool(abs(ratio / target - 1) <= tol),
    }


def translation_check(radius: float, shift, params: BesovParams, grid: Grid, tol=0.01, **opts):
    """Capacity of B(x0, r) vs B(0, r) on the same grid (x0 a lattice vector)."""
    a = capacity_minimize(Ball(tuple(np.zeros(grid.n)), radius), params, grid, **opts).upper
    b = capacity_minimize(Ball(tuple(np.asarray(shift, float)), radius), params, grid, **opts).upper
    return {"upper_center": a, "upper_shifted": b, "rel_diff": abs(a - b) / a, "pass": bool(abs(a - b) <= tol * a)}


def _mask_capacity(grid: Grid, mask: np.ndarray, diam: float, params: BesovParams, delta: float, warm_starts=(), seed=0, **opts):
    """Capacity upper bound of a rasterized set given directly as a cell mask."""
    from scipy import ndimage

    dist = ndimage.distance_transform_edt(~mask, sampling=grid.dx)
    cons = AdmissibleConstraint(grid, dist <= delta, boundary_band(grid), delta)
    if np.any(cons.mask & cons.band):
        raise ValueError("set reaches the boundary band; enlarge L")
    hs = capacity_h_sample(grid, Ball(tuple(np.zeros(grid.n)), diam / 2))
    obj = Objective(grid, params.alpha, params.p, hs.offsets().reshape(-1, grid.n))
    starts = [cons.mask.astype(float), *(getattr(w, "values", w) for w in warm_starts)]
    v, _, its, conv, gap, hist = descend(cons, obj, hs, starts, seed=seed, **opts)
    return _refine_sup(obj, v, hs) ** params.p, v


def boundary_capacity_check(K: Ball, params: BesovParams, grid: Grid, thickness: float | None = None, tol=0.05, **opts):
    """Ball capacity vs the capacity of a thin rasterized annulus around its boundary sphere.

    The annulus solve also receives the filled ball as a feasible start; the
    ball solve receives max(annulus minimizer, 1 on the ball), the discrete
    form of the construction that transfers admissibility from the boundary
    to the whole compact set.
    """
    if params.alpha * params.p >= grid.n:
        raise ValueError("needs alpha * p < n")
    thickness = thickness or 3 * grid.dx
    if thickness < grid.dx:
        raise ValueError("annulus thinner than one cell cannot be resolved")
    x = grid.points()
    rho = np.linalg.norm(x - K.c, axis=-1)
    ann = np.abs(rho - K.radius) <= thickness / 2
    if not ann.any():
        raise ValueError("annulus not resolved on this grid")
    delta = opts.pop("delta", 2 * grid.dx)
    filled = (rho <= K.radius + thickness / 2 + delta).astype(float)
    ann_upper, ann_v = _mask_capacity(grid, ann, 2 * K.radius + thickness, params, delta, warm_starts=[filled], **opts)
    ball_start = np.maximum(ann_v, (rho <= K.radius + delta).astype(float))
    ball_est = capacity_minimize(K, params, grid, delta=delta, warm_starts=[ball_start], **opts)
    return {
        "ball_upper": ball_est.upper,
        "annulus_upper": ann_upper,
        "thickness": thickness,
        "pass": bool(ball_est.upper <= ann_upper * (1 + tol)),
    }


def open_perimeter_comparison(K: Ball, alpha: float, grid: Grid, deltas=None, tol=0.15, **opts):
    """p = 1: capacity upper vs the least perimeter of the dilated balls B(c, r + d)."""
    deltas = np.linspace(0.0, 0.2 * K.radius, 9) if deltas is None else np.asarray(deltas, float)
    Ps = [perimeter(Ball(K.center, K.radius + d), alpha, 1.0).value for d in deltas]
    j = int(np.argmin(Ps))
    est = capacity_minimize(K, BesovParams(alpha, 1.0, math.inf), grid, **opts)
    rel = abs(est.upper - Ps[j]) / Ps[j]
    return {
        "deltas": deltas.tolist(),
        "perimeters": Ps,
        "argmin_delta": float(deltas[j]),
        "min_perimeter": Ps[j],
        "perimeter_increasing": bool(np.all(np.diff(Ps) >= -1e-12)),
        "upper": est.upper,
        "rel_diff": rel,
        "pass": bool(rel <= tol),
    }


def constant_degeneracy_check(grid: Grid, alpha: float, q: float, consts=(1.0, 2.5)) -> dict:
    """f = c >= 1 has zero p = inf seminorm and is admissible for any set.

    A constant on all of R^n is not zero-extended, so the differences are
    measured on the cells whose translate stays at least one cell inside the
    box, where the data agree with the global constant.
    """
    hs = make_h_sample(grid.n, 2 * grid.dx, grid.L / 2, 16, 2 if grid.n == 1 else 16)
    x = grid.points()
    rows = []
    for c in consts:
        v = np.full(grid.shape, float(c))
        worst = 0.0
        for h in hs.offsets().reshape(-1, grid.n):
            T = Translation(grid, h)
            u = T.shifted(v) - v
            inner = np.all(np.abs(x + h) <= grid.L - grid.dx, axis=-1)
            worst = max(worst, float(np.abs(u[inner]).max(initial=0.0)) * np.linalg.norm(h) ** -alpha)
        rows.append({"c": c, "seminorm": worst, "admissible": bool(c >= 1)})
    ok = all(r["seminorm"] <= 1e-12 * r["c"] and r["admissible"] for r in rows)
    return {"alpha": alpha, "q": "inf" if math.isinf(q) else q, "rows": rows, "capacity": 0.0, "pass": ok}


# --------------------------------------------------------------------------
# level-set and outer-measure checks


def weak_type_check(f: GridFunction, params: BesovParams, ts=(0.25, 0.5, 0.75), tol=0.02, hs=None, **opts) -> dict:
    """t^p upper({f > t}) against seminorm(f)^p for each level t (relative to max f).

    The solve for {f > t} starts from min(f / s, 1) with s the smallest value
    of f on the dilated constraint mask, the truncation that makes f
    admissible for the level set.
    """
    from .regions import level_set_region
    from .seminorm import besov_seminorm, default_h_sample

    p = params.p
    if not math.isinf(params.q):
        raise ValueError("weak-type check uses the q = inf seminorm")
    top = float(f.values.max())
    sn = besov_seminorm(f, params, hs or default_h_sample(f, K=48, M=16 if f.grid.n == 2 else None))
    rows = []
    for t in ts:
        level = t * top
        E = level_set_region(f, level)
        cons = rasterize_constraint(E, f.grid, opts.get("delta"))
        s = float(f.values[cons.mask].min()) if cons.mask.any() else level
        warm = np.clip(f.values / max(s, 1e-300), 0.0, 1.0)
        est = capacity_minimize(E, params, f.grid, warm_starts=[warm], **opts)
        lhs = level**p * est.upper
        rows.append({"t": t, "level": level, "upper": est.upper, "lhs": lhs, "rhs": sn**p,
                     "ratio": lhs / sn**p if sn > 0 else math.inf, "pass": bool(lhs <= sn**p * (1 + tol))})
    return {"seminorm": sn, "rows": rows, "pass": all(r["pass"] for r in rows)}


def _coarea_sum(f: GridFunction, alpha: float, p: float, m: int, **pkw) -> float:
    from .regions import level_set_region

    top = float(f.values.max())
    dt = top / m
    total = 0.0
    for i in range(m):
        E = level_set_region(f, (i + 0.5) * dt)
        if not E.is_empty:
            total += perimeter(E, alpha, p, **pkw).value * dt
    return total


def coarea_check(f: GridFunction, params: BesovParams, levels: int = 32, hs=None, **pkw) -> dict:
    """seminorm(f) against the midpoint sum of level-set perimeters.

    The quadrature tolerance is the relative gap between the sums with
    ``levels`` and ``2 * levels`` midpoints.
    """
    from .seminorm import besov_seminorm, default_h_sample

    if f.values.min() < -1e-14:
        raise ValueError("co-area check expects f >= 0")
    a, p = params.alpha, params.p
    sn = besov_seminorm(f, params, hs or default_h_sample(f, K=48, M=16 if f.grid.n == 2 else None))
    coarse = _coarea_sum(f, a, p, levels, **pkw)
    fine = _coarea_sum(f, a, p, 2 * levels, **pkw)
    qtol = abs(coarse - fine) / max(fine, 1e-300)
    return {"seminorm": sn, "coarea": coarse, "coarea_fine": fine, "quad_tol": qtol,
            "pass": bool(sn <= coarse * (1 + qtol) + 1e-12)}


def default_outer_pairs():
    """Six nested pairs (E1 inside E2) and six overlapping or disjoint pairs."""
    B = lambda c, r: Ball(c, r)  # noqa: E731
    X = lambda lo, hi: Box(lo, hi)  # noqa: E731
    nested = [
        (B((0, 0), 0.5), B((0, 0), 0.75)),
        (B((0, 0), 0.75), B((0, 0), 1.0)),
        (X((-0.5, -0.5), (0.5, 0.5)), B((0, 0), 0.75)),
        (B((0, 0), 0.4), X((-0.5, -0.5), (0.5, 0.5))),
        (B((0.3, 0), 0.3), B((0, 0), 0.75)),
        (X((-0.3, -0.6), (0.3, 0.6)), X((-0.5, -0.7), (0.5, 0.7))),
    ]
    overlapping = [
        (B((-0.4, 0), 0.4), B((0.4, 0), 0.4)),
        (B((-0.3, 0), 0.5), B((0.3, 0), 0.5)),
        (X((-0.8, -0.3), (0, 0.3)), X((-0.2, -0.3), (0.6, 0.3))),
        (B((-0.5, -0.5), 0.3), B((0.5, 0.5), 0.3)),
        (B((0, 0), 0.5), X((0, -0.2), (0.8, 0.2))),
        (B((0, 0.3), 0.4), B((0, -0.3), 0.4)),
    ]
    return nested, overlapping


def outer_measure_suite(grid: Grid, params: BesovParams, nested=None, overlapping=None, limit_base: Ball | None = None,
                        limit_steps=(8, 4, 2, 1, 0.5, 0.25, 0.125, 0.0625), tol=0.02, **opts) -> dict:
    """Outer-measure properties of the capacity uppers.

    Monotone pairs solve the smaller set with the larger set's minimizer as a
    warm start; unions start from max(f1, f2).  The nested sequence
    B(0, r + k dx) for k in ``limit_steps`` reuses the previous minimizer.
    """
    from .regions import region_to_json

    if nested is None or overlapping is None:
        dn, do = default_outer_pairs()
        nested = dn if nested is None else nested
        overlapping = do if overlapping is None else overlapping
    cache: dict = {}

    def solve(E, warm=()):
        key = region_to_json(E)
        prev = cache.get(key)
        est = capacity_minimize(E, params, grid, warm_starts=[*warm, *([prev.minimizer] if prev else [])], **opts)
        if prev is None or est.upper < prev.upper:
            cache[key] = est
        return cache[key]

    empty = capacity_minimize(Union([], dim=grid.n), params, grid, **opts)
    mono = []
    for E1, E2 in nested:
        c2 = solve(E2)
        c1 = solve(E1, [c2.minimizer])
        mono.append({"small": region_to_json(E1), "large": region_to_json(E2), "c_small": c1.upper, "c_large": c2.upper,
                     "pass": bool(c1.upper <= c2.upper * (1 + tol))})
    sub = []
    for E1, E2 in overlapping:
        c1, c2 = solve(E1), solve(E2)
        warm = np.maximum(c1.minimizer.values, c2.minimizer.values)
        cu = solve(Union([E1, E2]), [warm])
        sub.append({"first": region_to_json(E1), "second": region_to_json(E2), "c_union": cu.upper, "c_sum": c1.upper + c2.upper,
                    "pass": bool(cu.upper <= (c1.upper + c2.upper) * (1 + tol))})
    K = limit_base or Ball((0.0,) * grid.n, 0.5)
    seq, warm = [], []
    for k in limit_steps:
        est = solve(Ball(K.center, K.radius + k * grid.dx), warm)
        seq.append(est.upper)
        warm = [est.minimizer]
    cK = solve(K, warm).upper
    monotone = all(seq[i + 1] <= seq[i] * (1 + tol) for i in range(len(seq) - 1))
    return {
        "empty": empty.upper,
        "empty_pass": empty.upper == 0.0,
        "monotonicity": mono,
        "subadditivity": sub,
        "limit": {"uppers": seq, "base": cK, "monotone": monotone, "rel_gap": abs(seq[-1] / cK - 1) if cK > 0 else math.inf,
                  "pass": bool(monotone and abs(seq[-1] - cK) <= tol * cK)},
        "pass": bool(empty.upper == 0.0 and all(r["pass"] for r in mono + sub) and monotone and abs(seq[-1] - cK) <= tol * cK),
    }
