"""Heat extension to the upper half-space, tents, maximal functions and Carleson checks.

Heights t index the half-space; the field at height t is the heat solution at
time t^2, i.e. f convolved with a Gaussian of standard deviation sqrt(2) t.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, ndimage, signal, special

from .grid import Grid, GridFunction
from .regions import Ball, Box, Region, unit_ball_volume

log = logging.getLogger(__name__)

POINT_KERNEL_MIN_STD = 2.0  # in cells; below this the kernel is cell-integrated


def kernel_1d(grid: Grid, std: float) -> np.ndarray:
    """Symmetric 1D Gaussian weights on offsets -(N-1)..(N-1) cells.

    Well-resolved kernels are point samples times dx (mass error below
    exp(-2 pi^2 (std/dx)^2)); narrow ones integrate the density over each cell
    so the weights telescope to exactly 1.
    """
    N, dx = grid.N, grid.dx
    j = np.arange(-(N - 1), N)
    if std <= 0:
        k = np.zeros(2 * N - 1)
        k[N - 1] = 1.0
        return k
    if std < grid.dx / 2:
        log.warning("heat kernel std %.3g below half a cell; using cell-integrated weights", std)
    if std >= POINT_KERNEL_MIN_STD * dx:
        return dx * np.exp(-0.5 * (j * dx / std) ** 2) / (math.sqrt(2 * math.pi) * std)
    z = dx / (math.sqrt(2) * std)
    return 0.5 * (special.erf((j + 0.5) * z) - special.erf((j - 0.5) * z))


def heat_at_time(f: GridFunction, s: float) -> np.ndarray:
    """Heat solution at time s >= 0 of the zero-extended f, sampled on the box."""
    if s < 0:
        raise ValueError("time must be nonnegative")
    if s == 0:
        return f.values.copy()
    k = kernel_1d(f.grid, math.sqrt(2 * s))
    out = f.values
    for ax in range(f.grid.n):
        shape = [1] * f.grid.n
        shape[ax] = k.size
        out = signal.fftconvolve(out, k.reshape(shape), mode="same", axes=ax)
    return out


def heat_direct(f: GridFunction, s: float, points_idx) -> np.ndarray:
    """Direct-sum heat solution at selected cells (probe oracle)."""
    g = f.grid
    k = kernel_1d(g, math.sqrt(2 * s))
    N = g.N
    out = []
    for idx in points_idx:
        idx = np.atleast_1d(idx)
        w = k[N - 1 + idx[0] - np.arange(N)]
        if g.n == 1:
            out.append(float(np.dot(w, f.values)))
        else:
            w2 = k[N - 1 + idx[1] - np.arange(N)]
            out.append(float(w @ f.values @ w2))
    return np.array(out)


def default_levels(grid: Grid, J: int = 24) -> np.ndarray:
    return np.geomspace(2 * grid.dx, grid.L / 2, J)


def slab_weights(levels: np.ndarray, s: float) -> np.ndarray:
    """int of t^(s-1) dt over the slab of each level.

    Slab edges are geometric midpoints between levels; the first slab starts
    at 0 and the last one ends at the geometric continuation past the top.
    """
    t = np.asarray(levels, float)
    if s <= 0:
        raise ValueError("density exponent must be positive")
    mids = np.sqrt(t[1:] * t[:-1])
    top = t[-1] * math.sqrt(t[-1] / t[-2]) if len(t) > 1 else 2 * t[-1]
    edges = np.concatenate([[0.0], mids, [top]])
    return (edges[1:] ** s - edges[:-1] ** s) / s


@dataclass
class HalfSpaceField:
    grid: Grid
    levels: np.ndarray
    values: np.ndarray  # shape (J,) + grid.shape
    meta: dict = field(default_factory=dict)

    def level(self, j) -> GridFunction:
        return GridFunction(self.grid, self.values[j], {"family": "heat-level", "t": float(self.levels[j])})


def heat_extend(f: GridFunction, levels=None) -> HalfSpaceField:
    """w(t_j^2, .) for each height t_j."""
    levels = default_levels(f.grid) if levels is None else np.asarray(levels, float)
    if np.any(levels <= 0) or np.any(np.diff(levels) <= 0):
        raise ValueError("levels must be positive and increasing")
    if levels[-1] ** 2 >= f.grid.L**2 * 4:
        log.warning("top level exceeds the box scale; truncation of the zero extension dominates")
    vals = np.stack([heat_at_time(f, t * t) for t in levels])
    return HalfSpaceField(f.grid, levels, vals, {"source": f.meta.get("family")})


def gaussian_heat_closed_form(grid: Grid, sigma: float, s: float) -> np.ndarray:
    """Heat solution at time s for exp(-|x|^2 / sigma^2)."""
    r2 = sum(c**2 for c in grid.coords()) * np.ones(grid.shape)
    a = sigma**2 + 4 * s
    return (sigma**2 / a) ** (grid.n / 2) * np.exp(-r2 / a)


# --------------------------------------------------------------------------
# tents and maximal functions


def tent_indicator(O: Region, field_or_grid, levels=None) -> np.ndarray:
    """mask[j, x] = B(x, t_j) inside O, i.e. dist(x, complement of O) >= t_j.

    Balls and boxes use the analytic distance to the complement; other sets use
    a Euclidean distance transform of the rasterized complement (cells outside
    the box count as inside O only if the set reaches the wall, which suite
    sets do not).
    """
    if isinstance(field_or_grid, HalfSpaceField):
        grid, levels = field_or_grid.grid, field_or_grid.levels
    else:
        grid = field_or_grid
        levels = default_levels(grid) if levels is None else np.asarray(levels, float)
    x = grid.points()
    shapes = O.shapes()
    if O.is_empty:
        return np.zeros((len(levels),) + grid.shape, bool)
    if len(shapes) == 1 and isinstance(shapes[0], Ball):
        depth = shapes[0].radius - np.linalg.norm(x - shapes[0].c, axis=-1)
    elif len(shapes) == 1 and isinstance(shapes[0], Box):
        b = shapes[0]
        depth = np.min(np.minimum(x - np.asarray(b.lo), np.asarray(b.hi) - x), axis=-1)
    else:
        inside = O.contains(x)
        # padding keeps the region outside the box in the complement
        pad = np.pad(inside, 1)
        d = ndimage.distance_transform_edt(pad, sampling=grid.dx)
        depth = d[tuple(slice(1, -1) for _ in range(grid.n))] - grid.dx / 2
        depth[~inside] = -1.0
    return depth[None, ...] >= np.asarray(levels).reshape((-1,) + (1,) * grid.n)


def _disk_footprint(radius_cells: float, n: int, strict: bool = True) -> np.ndarray:
    m = int(math.floor(radius_cells))
    offs = np.arange(-m, m + 1)
    if n == 1:
        d = np.abs(offs).astype(float)
    else:
        d = np.sqrt(offs[:, None] ** 2 + offs[None, :] ** 2)
    return d < radius_cells if strict else d <= radius_cells


def nontangential_maximal(field: HalfSpaceField) -> GridFunction:
    """max over levels j and cells y with |y - x| < t_j of |w(t_j^2, y)|."""
    g = field.grid
    out = np.zeros(g.shape)
    for t, w in zip(field.levels, field.values):
        fp = _disk_footprint(t / g.dx, g.n)
        out = np.maximum(out, ndimage.maximum_filter(np.abs(w), footprint=fp, mode="constant", cval=0.0))
    return GridFunction(g, out, {"family": "nontangential-maximal"})


def dyadic_radii(grid: Grid) -> np.ndarray:
    r, out = grid.dx, []
    while r <= 2 * grid.L * (1 + 1e-12):
        out.append(r)
        r *= 2
    return np.array(out)


def hardy_littlewood_maximal(f: GridFunction, radii=None) -> GridFunction:
    """max over radii of the mean of |f| over the open discrete ball B(x, r) (zero-padded)."""
    g = f.grid
    radii = dyadic_radii(g) if radii is None else np.asarray(radii, float)
    a = np.abs(f.values)
    out = np.zeros(g.shape)
    for r in radii:
        fp = _disk_footprint(r / g.dx, g.n).astype(float)
        avg = signal.fftconvolve(a, fp / fp.sum(), mode="same")
        out = np.maximum(out, avg)
    out = np.maximum(out, 0.0)
    return GridFunction(g, out, {"family": "hardy-littlewood-maximal", "radii": radii.tolist()})


def majorant_constant(n: int) -> float:
    """int of the radially decreasing majorant of the cone-shifted heat kernel.

    For |y - x| < t the kernel of w(t^2, .) at y is dominated by a radial
    decreasing function of x whose integral is 1 + 1/sqrt(pi) (n = 1) or
    5/4 + sqrt(pi)/2 (n = 2); that integral bounds M_N f / M f when M ranges
    over all radii.
    """
    if n == 1:
        return 1.0 + 1.0 / math.sqrt(math.pi)
    if n == 2:
        return 0.25 + 1.0 + math.sqrt(math.pi) / 2
    raise ValueError("n must be 1 or 2")


def maximal_domination(f: GridFunction, field: HalfSpaceField | None = None) -> dict:
    """Measured c0 = max M_N f / M f (over cells with M f > 0) against 2^n times the majorant constant.

    Dyadic radii lose at most a factor 2^n against all radii.
    """
    field = field or heat_extend(f)
    MN = nontangential_maximal(field).values
    M = hardy_littlewood_maximal(f).values
    pos = M > 1e-14 * max(M.max(), 1e-300)
    c0 = float(np.max(MN[pos] / M[pos])) if pos.any() else 0.0
    bound = 2**f.grid.n * majorant_constant(f.grid.n)
    return {"c0": c0, "bound": bound, "pass": bool(c0 <= bound)}


# --------------------------------------------------------------------------
# Carleson-type checks


def cone_integral(r: float, s: float, n: int) -> dict:
    """nu(T(B(x, r))) for nu = t^(s-1) dt dx, two routes.

    closed form: omega_n r^(s+n) B(s, n+1); quadrature of int_0^r t^(s-1) omega_n (r-t)^n dt.
    """
    w = unit_ball_volume(n)
    closed = w * r ** (s + n) * special.beta(s, n + 1)
    quad, _ = integrate.quad(lambda t: t ** (s - 1) * w * (r - t) ** n, 0, r, epsabs=1e-14, epsrel=1e-12, limit=200)
    return {"closed_form": closed, "quadrature": quad}


def tent_measure(O: Region, grid: Grid, s: float, levels=None) -> float:
    """nu(T(O)) by slab quadrature over rasterized tent slices."""
    if levels is None:
        # the density concentrates near t = 0 when s < 1, so start well below a cell
        levels = np.geomspace(grid.dx / 64, grid.L, 160)
    levels = np.asarray(levels, float)
    mask = tent_indicator(O, grid, levels)
    areas = mask.reshape(len(levels), -1).sum(axis=1) * grid.cell_volume
    return float(np.dot(slab_weights(levels, s), areas))


def matched_density_exponent(n: int, alpha: float, p: float, q: float) -> float:
    return q * (n - alpha * p) / p - n


def weak_type_halfspace(field: HalfSpaceField, q: float, s: float) -> float:
    """sup_lambda lambda^q nu({(t, x) : |w(t^2, x)| > lambda})."""
    W = slab_weights(field.levels, s)
    a = np.abs(field.values).reshape(len(field.levels), -1)
    w = np.repeat(W[:, None] * field.grid.cell_volume, a.shape[1], axis=1)
    a, w = a.ravel(), w.ravel()
    keep = a > 0
    a, w = a[keep], w[keep]
    if a.size == 0:
        return 0.0
    order = np.argsort(-a, kind="stable")
    a_s, cw = a[order], np.cumsum(w[order])
    last = np.r_[a_s[1:] != a_s[:-1], True]
    return float(np.max(a_s[last] ** q * cw[last]))


def carleson_check(grid: Grid, params, q: float, radii, fs, capacity_uppers=None, hs=None) -> dict:
    """Both sides of the Carleson-type equivalence with the matched density exponent.

    (a) geometry: nu(T(B(0, r))) against the cone-integral oracle and, when
        supplied, against capacity_upper(B(0, r))^(q/p);
    (b) weak type: sup_lambda lambda^q nu({|w| > lambda}) / seminorm(f)^q.
    """
    from .seminorm import BesovParams, besov_seminorm, default_h_sample

    a, p = params.alpha, params.p
    if not 1 < p < grid.n / a:
        raise ValueError("needs 1 < p < n / alpha")
    s = matched_density_exponent(grid.n, a, p, q)
    if s <= 0:
        raise ValueError(f"matched density exponent {s:.3g} must be positive; increase q")
    geo = []
    for i, r in enumerate(radii):
        num = tent_measure(Ball(tuple(np.zeros(grid.n)), r), grid, s)
        orc = cone_integral(r, s, grid.n)
        row = {"radius": r, "nu_tent": num, "oracle": orc["closed_form"], "oracle_quad": orc["quadrature"],
               "rel_err": abs(num / orc["closed_form"] - 1)}
        if capacity_uppers is not None:
            row["cap_ratio"] = num / capacity_uppers[i] ** (q / p)
        geo.append(row)
    sp = BesovParams(a, p, math.inf)
    weak = []
    for f in fs:
        field = heat_extend(f)
        lhs = weak_type_halfspace(field, q, s)
        sn = besov_seminorm(f, sp, hs or default_h_sample(f, K=32, M=16 if grid.n == 2 else 2))
        weak.append({"family": f.meta.get("family"), "lhs": lhs, "rhs": sn**q, "ratio": lhs / sn**q if sn > 0 else None})
    return {"s": s, "geometry": geo, "weak_type": weak}


# --------------------------------------------------------------------------
# invariants


def kernel_mass(grid: Grid, std: float) -> float:
    """Lattice sum of the kernel weights on an untruncated window."""
    wide = Grid(1, grid.L * max(1.0, 12 * std / grid.L), int(2 * math.ceil(grid.L * max(1.0, 12 * std / grid.L) / grid.dx)))
    return float(kernel_1d(wide, std).sum())


def semigroup_check(f: GridFunction, s1: float, s2: float, probes: int = 64, seed: int = 0) -> dict:
    """Heat at s1 then s2 against heat at s1 + s2 on random probe cells."""
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, f.grid.N, size=(probes, f.grid.n))
    mid = f.with_values(heat_at_time(f, s1))
    two = heat_at_time(mid, s2)
    one = heat_at_time(f, s1 + s2)
    direct = heat_direct(f, s1 + s2, idx)
    t = tuple(idx.T)
    return {"max_err": float(np.max(np.abs(two[t] - one[t]))),
            "direct_err": float(np.max(np.abs(one[t] - direct)))}


def maximum_principle(field: HalfSpaceField, f: GridFunction, tol: float = 1e-12) -> bool:
    lo, hi = min(f.values.min(), 0.0), max(f.values.max(), 0.0)
    return bool(field.values.min() >= lo - tol and field.values.max() <= hi + tol)


def level_set_inclusion(f: GridFunction, c0: float, field: HalfSpaceField | None = None, levels=None) -> dict:
    """{M_N f > lam} inside {M f > lam / c0} for lam on a geometric grid."""
    field = field or heat_extend(f)
    MN = nontangential_maximal(field).values
    M = hardy_littlewood_maximal(f).values
    top = MN.max()
    lams = np.geomspace(1e-3 * top, top, 32) if levels is None and top > 0 else np.asarray(levels or [], float)
    bad = [float(l) for l in lams if np.any((MN > l) & ~(M > l / c0))]
    return {"c0": c0, "levels": len(lams), "violations": bad, "pass": not bad}


def maximal_seminorm_ratio(f: GridFunction, alpha: float, p: float, hs=None) -> dict:
    """seminorm(Mf, (alpha, p, inf)) / seminorm(f, (alpha, p, inf))."""
    from .seminorm import BesovParams, besov_seminorm, default_h_sample

    if p <= 1:
        raise ValueError("maximal domination needs p > 1")
    Mf = hardy_littlewood_maximal(f)
    hs = hs or default_h_sample(f, K=32, M=16 if f.grid.n == 2 else None)
    sp = BesovParams(alpha, p, math.inf)
    a, b = besov_seminorm(Mf, sp, hs), besov_seminorm(f, sp, hs)
    return {"maximal": a, "base": b, "ratio": a / b if b > 0 else 0.0}


def carleson_csv_rows(report: dict):
    rows = [("object", "lhs", "rhs", "ratio")]
    for r in report["geometry"]:
        rhs = r["oracle"]
        rows.append((f"tent-ball-r{r['radius']:g}", r["nu_tent"], rhs, r["nu_tent"] / rhs))
    for i, r in enumerate(report["weak_type"]):
        rows.append((f"weak-{i}-{r['family']}", r["lhs"], r["rhs"], r["ratio"]))
    return rows
