"""Analytic sets in R^n: balls, boxes and finite unions.

Volumes and translate overlaps |E cap (E - h)| are exact whenever a closed
form exists (single shapes, 1D unions, unions of boxes, pairwise-disjoint
children).  Anything else falls back to rasterization with an error bound.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

log = logging.getLogger(__name__)

RASTER_CELLS = 1024
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def unit_ball_volume(beta: float) -> float:
    """pi^(beta/2) / Gamma(1 + beta/2); the volume of the unit ball for integer beta."""
    return math.pi ** (beta / 2) / math.gamma(1 + beta / 2)


class Region:
    n: int

    def contains(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance(self, x: np.ndarray) -> np.ndarray:
        """Euclidean distance to the set (0 inside); x has shape (..., n)."""
        raise NotImplementedError

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def shapes(self) -> list:
        return [self]

    def diameter(self) -> float:
        lo, hi = self.bounds()
        return float(np.linalg.norm(hi - lo))

    def translate(self, h) -> "Region":
        raise NotImplementedError

    @property
    def is_empty(self) -> bool:
        return False


@dataclass(frozen=True)
class Ball(Region):
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        if len(self.center) not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")

    @property
    def n(self):
        return len(self.center)

    @property
    def c(self):
        return np.asarray(self.center)

    def contains(self, x):
        return np.linalg.norm(np.asarray(x) - self.c, axis=-1) <= self.radius

    def distance(self, x):
        return np.maximum(np.linalg.norm(np.asarray(x) - self.c, axis=-1) - self.radius, 0.0)

    def bounds(self):
        return self.c - self.radius, self.c + self.radius

    def translate(self, h):
        return Ball(tuple(self.c + np.asarray(h, float)), self.radius)

    def to_dict(self):
        return {"type": "ball", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Box(Region):
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(c) for c in np.atleast_1d(self.lo))
        hi = tuple(float(c) for c in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or len(lo) not in (1, 2):
            raise ValueError("box corners must have matching dimension 1 or 2")
        if any(b <= a for a, b in zip(lo, hi)):
            raise ValueError("box must be non-degenerate (lo < hi on every axis)")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self):
        return len(self.lo)

    @property
    def sides(self):
        return np.asarray(self.hi) - np.asarray(self.lo)

    def contains(self, x):
        x = np.asarray(x)
        return np.all((x >= np.asarray(self.lo)) & (x <= np.asarray(self.hi)), axis=-1)

    def distance(self, x):
        x = np.asarray(x)
        d = np.maximum(np.maximum(np.asarray(self.lo) - x, x - np.asarray(self.hi)), 0.0)
        return np.linalg.norm(d, axis=-1)

    def bounds(self):
        return np.asarray(self.lo), np.asarray(self.hi)

    def translate(self, h):
        h = np.asarray(h, float)
        return Box(tuple(np.asarray(self.lo) + h), tuple(np.asarray(self.hi) + h))

    def to_dict(self):
        return {"type": "box", "corners": [list(self.lo), list(self.hi)]}


@dataclass(frozen=True)
class Union(Region):
    children: tuple = field(default_factory=tuple)
    dim: int | None = None

    def __post_init__(self):
        kids = []
        for c in self.children:
            kids.extend(c.children if isinstance(c, Union) else [c])
        object.__setattr__(self, "children", tuple(kids))
        dims = {c.n for c in kids}
        if len(dims) > 1:
            raise ValueError("union children have mixed dimensions")
        if self.dim is None:
            if not dims:
                raise ValueError("empty union needs an explicit dimension")
            object.__setattr__(self, "dim", dims.pop())

    @property
    def n(self):
        return self.dim

    @property
    def is_empty(self):
        return not self.children

    def shapes(self):
        return list(self.children)

    def contains(self, x):
        x = np.asarray(x)
        out = np.zeros(x.shape[:-1], bool)
        for c in self.children:
            out |= c.contains(x)
        return out

    def distance(self, x):
        x = np.asarray(x)
        out = np.full(x.shape[:-1], np.inf)
        for c in self.children:
            out = np.minimum(out, c.distance(x))
        return out

    def bounds(self):
        if not self.children:
            return np.zeros(self.n), np.zeros(self.n)
        los, his = zip(*(c.bounds() for c in self.children))
        return np.min(los, axis=0), np.max(his, axis=0)

    def translate(self, h):
        return Union(tuple(c.translate(h) for c in self.children), self.dim)

    def to_dict(self):
        return {"type": "union", "dim": self.n, "children": [c.to_dict() for c in self.children]}


# --------------------------------------------------------------------------
# serialization


def region_from_dict(d: dict) -> Region:
    if not isinstance(d, dict) or "type" not in d:
        raise ValueError("region descriptor needs a 'type' field")
    t = d["type"]
    if t == "ball":
        return Ball(tuple(d["center"]), float(d["radius"]))
    if t == "box":
        if "corners" in d:
            lo, hi = d["corners"]
        else:
            lo, hi = d["lo"], d["hi"]
        return Box(tuple(lo), tuple(hi))
    if t == "union":
        return Union(tuple(region_from_dict(c) for c in d.get("children", [])), d.get("dim"))
    raise ValueError(f"unknown region type {t!r}")


def region_to_json(E: Region) -> str:
    return json.dumps(E.to_dict(), sort_keys=True)


def region_from_json(s: str) -> Region:
    return region_from_dict(json.loads(s))


# --------------------------------------------------------------------------
# pairwise intersections of single shapes


def _disk_disk(c1, r1, c2, r2) -> float:
    d = float(np.linalg.norm(np.asarray(c1) - np.asarray(c2)))
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return math.pi * min(r1, r2) ** 2
    a1 = r1 * r1 * math.acos((d * d + r1 * r1 - r2 * r2) / (2 * d * r1))
    a2 = r2 * r2 * math.acos((d * d + r2 * r2 - r1 * r1) / (2 * d * r2))
    k = 0.5 * math.sqrt(max((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2), 0.0))
    return a1 + a2 - k


def lens_area(r: float, d: float) -> float:
    """Area of the intersection of two disks of radius r with centres d apart."""
    d = abs(d)
    if d >= 2 * r:
        return 0.0
    return 2 * r * r * math.acos(d / (2 * r)) - 0.5 * d * math.sqrt(4 * r * r - d * d)


def _disk_box(c, r, lo, hi) -> float:
    x0, x1 = max(lo[0], c[0] - r), min(hi[0], c[0] + r)
    if x1 <= x0:
        return 0.0

    def chord(x):
        s = math.sqrt(max(r * r - (x - c[0]) ** 2, 0.0))
        return max(0.0, min(hi[1], c[1] + s) - max(lo[1], c[1] - s))

    # kinks where the circle crosses the horizontal box edges
    pts = []
    for y in (lo[1], hi[1]):
        dy = y - c[1]
        if abs(dy) < r:
            s = math.sqrt(r * r - dy * dy)
            pts += [c[0] - s, c[0] + s]
    pts = sorted(p for p in pts if x0 < p < x1)
    knots = [x0, *pts, x1]
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        v, _ = integrate.quad(chord, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += v
    return total


def _interval(shape):
    if isinstance(shape, Ball):
        return shape.center[0] - shape.radius, shape.center[0] + shape.radius
    return shape.lo[0], shape.hi[0]


def shape_intersection(A: Region, B: Region) -> float:
    """|A cap B| for single balls/boxes (closed form or machine-precision quadrature)."""
    if A.n == 1:
        a0, a1 = _interval(A)
        b0, b1 = _interval(B)
        return max(0.0, min(a1, b1) - max(a0, b0))
    if isinstance(A, Box) and isinstance(B, Box):
        w = np.minimum(A.hi, B.hi) - np.maximum(A.lo, B.lo)
        return float(np.prod(np.clip(w, 0.0, None)))
    if isinstance(A, Ball) and isinstance(B, Ball):
        return _disk_disk(A.center, A.radius, B.center, B.radius)
    ball, box = (A, B) if isinstance(A, Ball) else (B, A)
    return _disk_box(ball.center, ball.radius, box.lo, box.hi)


def _shape_volume(s: Region) -> float:
    if isinstance(s, Ball):
        return unit_ball_volume(s.n) * s.radius**s.n
    return float(np.prod(s.sides))


def _disjoint(shapes) -> bool:
    for i in range(len(shapes)):
        for j in range(i + 1, len(shapes)):
            if shape_intersection(shapes[i], shapes[j]) > 0:
                return False
    return True


def _merge_intervals(iv):
    iv = sorted(iv)
    out = []
    for a, b in iv:
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return out


def _disjoint_boxes(boxes):
    """Decompose a union of 2D boxes into disjoint boxes by coordinate compression."""
    xs = np.unique(np.concatenate([[b.lo[0], b.hi[0]] for b in boxes]))
    ys = np.unique(np.concatenate([[b.lo[1], b.hi[1]] for b in boxes]))
    cover = np.zeros((len(xs) - 1, len(ys) - 1), bool)
    for b in boxes:
        i0, i1 = np.searchsorted(xs, [b.lo[0], b.hi[0]])
        j0, j1 = np.searchsorted(ys, [b.lo[1], b.hi[1]])
        cover[i0:i1, j0:j1] = True
    out = []
    for i in range(cover.shape[0]):
        j = 0
        while j < cover.shape[1]:
            if cover[i, j]:
                k = j
                while k < cover.shape[1] and cover[i, k]:
                    k += 1
                out.append(Box((xs[i], ys[j]), (xs[i + 1], ys[k])))
                j = k
            else:
                j += 1
    return out


class _BoxArray:
    """Vectorized disjoint box list for fast translate overlaps."""

    def __init__(self, boxes):
        self.lo = np.array([b.lo for b in boxes], float)
        self.hi = np.array([b.hi for b in boxes], float)

    def volume(self):
        return float(np.prod(self.hi - self.lo, axis=1).sum())

    def overlap(self, h):
        h = np.asarray(h, float)
        w = np.minimum(self.hi[:, None, :], self.hi[None, :, :] - h) - np.maximum(
            self.lo[:, None, :], self.lo[None, :, :] - h
        )
        return float(np.prod(np.clip(w, 0.0, None), axis=2).sum())


@dataclass
class _Plan:
    kind: str
    shapes: list
    boxes: _BoxArray | None = None
    intervals: np.ndarray | None = None


_PLANS: dict = {}


def _plan(E: Region) -> _Plan:
    key = id(E)
    hit = _PLANS.get(key)
    if hit is not None and hit[0] is E:
        return hit[1]
    shapes = E.shapes()
    if E.is_empty:
        plan = _Plan("empty", [])
    elif len(shapes) == 1:
        plan = _Plan("single", shapes)
    elif E.n == 1:
        plan = _Plan("intervals", shapes, intervals=np.array(_merge_intervals([_interval(s) for s in shapes])))
    elif all(isinstance(s, Box) for s in shapes):
        boxes = shapes if _disjoint(shapes) else _disjoint_boxes(shapes)
        plan = _Plan("boxes", boxes, boxes=_BoxArray(boxes))
    elif _disjoint(shapes):
        plan = _Plan("disjoint", shapes)
    else:
        plan = _Plan("raster", shapes)
    if len(_PLANS) > 256:
        _PLANS.clear()
    _PLANS[key] = (E, plan)
    return plan


def _raster(E: Region, h=None, cells: int = RASTER_CELLS):
    """Rasterized |E| (h None) or |E cap (E - h)| with a boundary-layer error bound."""
    lo, hi = E.bounds()
    if h is not None:
        h = np.asarray(h, float)
        lo = np.maximum(lo, lo - h)
        hi = np.minimum(hi, hi - h)
        if np.any(hi <= lo):
            return 0.0, 0.0
    axes = [np.linspace(a, b, cells + 1) for a, b in zip(lo, hi)]
    cen = [0.5 * (x[1:] + x[:-1]) for x in axes]
    pts = np.stack(np.meshgrid(*cen, indexing="ij"), axis=-1)
    inside = E.contains(pts)
    if h is not None:
        inside &= E.contains(pts + h)
    dv = float(np.prod((hi - lo) / cells))
    # cells touched by a boundary: neighbours disagree
    edge = np.zeros_like(inside)
    for ax in range(E.n):
        d = np.diff(inside.astype(np.int8), axis=ax) != 0
        sl0 = [slice(None)] * E.n
        sl1 = [slice(None)] * E.n
        sl0[ax] = slice(0, -1)
        sl1[ax] = slice(1, None)
        edge[tuple(sl0)] |= d
        edge[tuple(sl1)] |= d
    return float(inside.sum() * dv), float(edge.sum() * dv)


def volume(E: Region, detail: bool = False):
    """Lebesgue measure of E; ``detail`` returns (value, error bound)."""
    plan = _plan(E)
    err = 0.0
    if plan.kind == "empty":
        v = 0.0
    elif plan.kind == "single":
        v = _shape_volume(plan.shapes[0])
    elif plan.kind == "intervals":
        v = float(np.sum(plan.intervals[:, 1] - plan.intervals[:, 0]))
    elif plan.kind == "boxes":
        v = plan.boxes.volume()
    elif plan.kind == "disjoint":
        v = float(sum(_shape_volume(s) for s in plan.shapes))
    else:
        v, err = _raster(E)
    return (v, err) if detail else v


def overlap_volume(E: Region, h, detail: bool = False):
    """|E cap (E - h)|, the measure of points x in E with x + h in E."""
    h = np.atleast_1d(np.asarray(h, float))
    if h.shape != (E.n,):
        raise ValueError("offset dimension mismatch")
    plan = _plan(E)
    err = 0.0
    if plan.kind == "empty":
        v = 0.0
    elif plan.kind == "single":
        s = plan.shapes[0]
        if isinstance(s, Ball) and s.n == 2:
            v = lens_area(s.radius, float(np.linalg.norm(h)))
        elif isinstance(s, Ball):
            v = max(0.0, 2 * s.radius - abs(h[0]))
        else:
            v = float(np.prod(np.clip(s.sides - np.abs(h), 0.0, None)))
    elif plan.kind == "intervals":
        iv = plan.intervals
        a = np.maximum(iv[:, None, 0], iv[None, :, 0] - h[0])
        b = np.minimum(iv[:, None, 1], iv[None, :, 1] - h[0])
        v = float(np.clip(b - a, 0.0, None).sum())
    elif plan.kind == "boxes":
        v = plan.boxes.overlap(h)
    elif plan.kind == "disjoint":
        v = 0.0
        for A in plan.shapes:
            for B in plan.shapes:
                v += shape_intersection(A, B.translate(-h))
    else:
        v, err = _raster(E, h)
    return (v, err) if detail else v


def surface_measure(E: Region) -> float:
    """(n-1)-dimensional measure of the boundary for suite regions."""
    plan = _plan(E)
    if plan.kind == "empty":
        return 0.0
    if E.n == 1:
        iv = plan.intervals if plan.kind == "intervals" else np.array([_interval(plan.shapes[0])])
        return 2.0 * len(iv)
    if plan.kind == "single" or (plan.kind == "disjoint" and _separated(plan.shapes)):
        tot = 0.0
        for s in plan.shapes:
            tot += 2 * math.pi * s.radius if isinstance(s, Ball) else 2.0 * float(np.sum(s.sides))
        return tot
    raise NotImplementedError("surface measure is only available for separated balls and boxes")


def _separated(shapes) -> bool:
    """Closures pairwise disjoint (no shared boundary)."""
    for i in range(len(shapes)):
        for j in range(i + 1, len(shapes)):
            if float(np.min(shapes[i].distance(_boundary_points(shapes[j])))) <= 0:
                return False
    return True


def _boundary_points(s: Region, m: int = 256) -> np.ndarray:
    if isinstance(s, Ball):
        th = np.linspace(0, 2 * np.pi, m, endpoint=False)
        return s.c + s.radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    lo, hi = s.bounds()
    t = np.linspace(0, 1, m // 4, endpoint=False)[:, None]
    c = [lo, np.array([hi[0], lo[1]]), hi, np.array([lo[0], hi[1]])]
    return np.concatenate([c[i] + t * (c[(i + 1) % 4] - c[i]) for i in range(4)])


# --------------------------------------------------------------------------
# perimeter


@dataclass
class PerimeterResult:
    value: float
    argmax_h: list | None
    divergent: bool = False
    slope: float | None = None
    search: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "value": "inf" if math.isinf(self.value) else self.value,
            "argmax_h": self.argmax_h,
            "divergent": self.divergent,
            "slope": self.slope,
            "search": self.search,
        }


def perimeter_integrand(E: Region, h, alpha: float, p: float) -> float:
    """|h|^-alpha (2(|E| - |E cap (E - h)|))^(1/p)."""
    h = np.atleast_1d(np.asarray(h, float))
    r = float(np.linalg.norm(h))
    sym = 2.0 * max(volume(E) - overlap_volume(E, h), 0.0)
    return r**-alpha * sym ** (1.0 / p)


def _is_radial(E: Region) -> bool:
    return E.n == 1 or (len(E.shapes()) == 1 and isinstance(E.shapes()[0], Ball))


def _golden(fun, a, b, iters=60):
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
        if b - a <= 1e-12 * max(abs(b), 1e-300):
            break
    return (c, fc) if fc >= fd else (d, fd)


def perimeter(
    E: Region,
    alpha: float,
    p: float,
    h_lo: float | None = None,
    h_hi: float | None = None,
    n_radii: int = 96,
    n_dirs: int = 32,
    refine: bool = True,
) -> PerimeterResult:
    """(alpha, p, inf)-perimeter sup_h |h|^-alpha (2(|E| - |E cap (E-h)|))^(1/p).

    Radii are scanned log-uniformly on [h_lo, h_hi] along each direction and
    every local maximum of the scan is polished by golden-section search.
    In 2D, non-radial sets also get an angular polish of the best direction.
    A maximum sitting at h_lo with a negative log-log slope is reported as
    divergence (the supremum is infinite).
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not 1 <= p < math.inf:
        raise ValueError("p must lie in [1, inf)")
    if E.is_empty:
        return PerimeterResult(0.0, None, search={"empty": True})
    diam = E.diameter()
    h_lo = h_lo or 1e-4 * diam
    h_hi = h_hi or 1.5 * diam
    if not 0 < h_lo < h_hi:
        raise ValueError("need 0 < h_lo < h_hi")
    if E.n == 1 or _is_radial(E):
        angles = np.array([0.0])
    else:
        angles = np.pi * np.arange(n_dirs) / n_dirs  # overlap(-h) == overlap(h)
    radii = np.geomspace(h_lo, h_hi, n_radii)

    def unit(th):
        return np.array([1.0]) if E.n == 1 else np.array([math.cos(th), math.sin(th)])

    best = (-1.0, None, None)
    scans = []
    for th in angles:
        u = unit(th)
        vals = np.array([perimeter_integrand(E, r * u, alpha, p) for r in radii])
        scans.append(vals)
        peaks = [k for k in range(n_radii) if vals[k] >= vals[max(k - 1, 0)] and vals[k] >= vals[min(k + 1, n_radii - 1)]]
        for k in peaks:
            r, v = radii[k], vals[k]
            if refine and 0 < k < n_radii - 1:
                r, v = _golden(lambda s: perimeter_integrand(E, s * u, alpha, p), radii[k - 1], radii[k + 1])
            if v > best[0]:
                best = (v, r, th)
    v, r, th = best
    search = {"h_lo": h_lo, "h_hi": h_hi, "n_radii": n_radii, "n_dirs": len(angles)}
    # divergence: max pinned at the small end with a decreasing profile
    scan = scans[int(np.argmin(np.abs(angles - th)))]
    slope = float(np.polyfit(np.log(radii[:4]), np.log(np.maximum(scan[:4], 1e-300)), 1)[0])
    if alpha * p > 1 and slope < 0:
        return PerimeterResult(math.inf, None, True, slope, search)
    if refine and len(angles) > 1:
        step = math.pi / n_dirs

        def along(t):
            return max(
                _golden(lambda s: perimeter_integrand(E, s * unit(t), alpha, p), r / 1.5, min(r * 1.5, h_hi), 40)[1],
                perimeter_integrand(E, r * unit(t), alpha, p),
            )

        t2, v2 = _golden(along, th - step, th + step, 40)
        if v2 > v:
            u = unit(t2)
            r, v = _golden(lambda s: perimeter_integrand(E, s * u, alpha, p), r / 1.5, min(r * 1.5, h_hi), 60)
            th = t2
    return PerimeterResult(float(v), list(map(float, r * unit(th))), False, slope, search)


def perimeter_divergence_scan(E: Region, alpha: float, p: float, hs, direction=None) -> dict:
    """Log-log slopes of the perimeter integrand along a decreasing offset sequence."""
    hs = np.asarray(hs, float)
    if len(hs) < 4:
        raise ValueError("need at least 4 offsets")
    if np.any(np.diff(hs) >= 0) or hs[-1] <= 0:
        raise ValueError("offsets must be positive and strictly decreasing")
    u = np.zeros(E.n)
    u[0] = 1.0
    if direction is not None:
        u = np.asarray(direction, float) / np.linalg.norm(direction)
    vals = np.array([perimeter_integrand(E, h * u, alpha, p) for h in hs])
    lh, lv = np.log(hs), np.log(vals)
    local = np.diff(lv) / np.diff(lh)
    fit = float(np.polyfit(lh, lv, 1)[0])
    return {
        "h": hs.tolist(),
        "values": vals.tolist(),
        "local_slopes": local.tolist(),
        "slope": float(local[-1]),
        "fit_slope": fit,
        "expected": 1.0 / p - alpha,
        "divergent": bool(local[-1] < 0),
    }


# --------------------------------------------------------------------------
# Hausdorff content


def _ball_covers_shape(ball, s: Region) -> bool:
    c, R = np.asarray(ball[0], float), float(ball[1])
    if isinstance(s, Ball):
        return float(np.linalg.norm(s.c - c)) + s.radius <= R * (1 + 1e-12)
    lo, hi = s.bounds()
    corners = np.stack(np.meshgrid(*zip(lo, hi), indexing="ij"), axis=-1).reshape(-1, s.n)
    return bool(np.all(np.linalg.norm(corners - c, axis=1) <= R * (1 + 1e-12)))


def cover_contains(E: Region, cover, cells: int = 512) -> bool:
    """Whether a list of (center, radius) balls covers E.

    Every shape inside one cover ball is accepted analytically; otherwise E is
    rasterized (interior samples plus boundary points) and tested pointwise.
    """
    if E.is_empty:
        return True
    if all(any(_ball_covers_shape(b, s) for b in cover) for s in E.shapes()):
        return True
    lo, hi = E.bounds()
    axes = [np.linspace(a, b, cells) for a, b in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, E.n)
    if E.n == 2:
        pts = np.concatenate([pts, *(_boundary_points(s, 1024) for s in E.shapes())])
    pts = pts[E.contains(pts)]
    covered = np.zeros(len(pts), bool)
    for c, r in cover:
        covered |= np.linalg.norm(pts - np.asarray(c, float), axis=1) <= r * (1 + 1e-12)
    return bool(covered.all())


def hausdorff_content_upper(E: Region, beta: float, covers=None) -> dict:
    """Best cover value min sum omega_beta r_j^beta over the supplied ball covers.

    A ball region always gets its self-cover.  Covers that fail to contain E
    are rejected and listed.
    """
    if not 0 < beta <= E.n:
        raise ValueError("beta must lie in (0, n]")
    covers = list(covers or [])
    shapes = E.shapes()
    if len(shapes) == 1 and isinstance(shapes[0], Ball):
        covers.append([(shapes[0].center, shapes[0].radius)])
    if not covers:
        raise ValueError("no cover supplied")
    w = unit_ball_volume(beta)
    best, rejected = math.inf, []
    for i, cov in enumerate(covers):
        if not cover_contains(E, cov):
            rejected.append(i)
            continue
        best = min(best, w * sum(float(r) ** beta for _, r in cov))
    if math.isinf(best):
        raise ValueError("no supplied cover contains the region")
    return {"value": best, "beta": beta, "rejected": rejected}


# --------------------------------------------------------------------------
# rasterization helpers


def level_set_region(f, t: float) -> Region:
    """{f > t} of a grid function as a union of disjoint cell-run boxes (exact)."""
    grid = f.grid
    mask = f.values > t
    dx = grid.dx
    edges = -grid.L + np.arange(grid.N + 1) * dx
    boxes = []
    rows = mask[None, :] if grid.n == 1 else mask
    for i, row in enumerate(rows):
        d = np.diff(np.concatenate([[0], row.astype(np.int8), [0]]))
        starts, ends = np.nonzero(d == 1)[0], np.nonzero(d == -1)[0]
        for a, b in zip(starts, ends):
            if grid.n == 1:
                boxes.append(Box((edges[a],), (edges[b],)))
            else:
                boxes.append(Box((edges[i], edges[a]), (edges[i + 1], edges[b])))
    return Union(tuple(boxes), grid.n)


def rasterize(E: Region, grid) -> np.ndarray:
    """Boolean mask of cell centres inside E."""
    if E.is_empty:
        return np.zeros(grid.shape, bool)
    return E.contains(grid.points())


# --------------------------------------------------------------------------
# translate estimates


def chain_estimate_check(E: Region, alpha: float, p: float, hs, ks=(1, 2, 4, 8), P: float | None = None, tol=1e-9) -> dict:
    """2 (|E| - |E cap (E - h)|) against P^p k^(1 - p alpha) |h|^(p alpha) for each k.

    Also compares the same quantity with |h| times the surface measure when
    that is available in closed form.
    """
    P = perimeter(E, alpha, p).value if P is None else P
    vol = volume(E)
    try:
        surf = surface_measure(E)
    except NotImplementedError:
        surf = None
    rows, ok = [], True
    for h in np.atleast_2d(np.asarray(hs, float)).reshape(-1, E.n):
        r = float(np.linalg.norm(h))
        lhs = 2.0 * (vol - overlap_volume(E, h))
        for k in ks:
            rhs = P**p * k ** (1 - p * alpha) * r ** (p * alpha)
            good = lhs <= rhs * (1 + tol) + 1e-12
            ok &= good
            rows.append({"h": h.tolist(), "k": k, "lhs": lhs, "rhs": rhs, "pass": bool(good)})
        if surf is not None:
            good = lhs <= r * surf * (1 + tol) + 1e-12
            ok &= good
            rows.append({"h": h.tolist(), "k": "surface", "lhs": lhs, "rhs": r * surf, "pass": bool(good)})
    return {"perimeter": P, "rows": rows, "pass": bool(ok)}


def isoperimetric_check(E: Ball) -> dict:
    """(|E| / omega_n)^(1/n) <= (H^(n-1)(E) / omega_(n-1))^(1/(n-1)) for a disk."""
    n = E.n
    if n < 2:
        raise ValueError("needs n >= 2")
    lhs = (volume(E) / unit_ball_volume(n)) ** (1.0 / n)
    rhs = (surface_measure(E) / unit_ball_volume(n - 1)) ** (1.0 / (n - 1))
    return {"lhs": lhs, "rhs": rhs, "pass": bool(lhs <= rhs * (1 + 1e-12))}
