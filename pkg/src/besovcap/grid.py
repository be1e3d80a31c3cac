"""Uniform grids on a box in R^n (n = 1, 2) and functions sampled on them.

Functions are zero-extended outside the box.  Translations by off-lattice
offsets use multilinear interpolation of the zero-extended samples, so the
difference operator stays linear in the sampled values.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

log = logging.getLogger(__name__)

MAX_CELLS = 2**24

FAMILIES = (
    "gaussian",
    "smooth-bump",
    "radial-power-cutoff",
    "tensor-product",
    "indicator-mollified",
)

TAIL_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Cell-centred uniform grid on [-L, L]^n with N cells per axis."""

    n: int
    L: float
    N: int

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N**self.n

    @property
    def cell_volume(self) -> float:
        return self.dx**self.n

    @property
    def centers(self) -> np.ndarray:
        return -self.L + (np.arange(self.N) + 0.5) * self.dx

    def coords(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays, one per axis."""
        c = self.centers
        if self.n == 1:
            return [c]
        return [c[:, None], c[None, :]]

    def points(self) -> np.ndarray:
        """Cell centres as an array of shape grid.shape + (n,)."""
        return np.stack(np.meshgrid(*([self.centers] * self.n), indexing="ij"), axis=-1)

    def radius(self) -> np.ndarray:
        """|x| at every cell centre."""
        return np.sqrt(sum(c**2 for c in self.coords())) * np.ones(self.shape)

    def to_dict(self) -> dict:
        return {"n": self.n, "L": self.L, "N": self.N}


def build_grid(n: int, L: float, N: int, max_cells: int = MAX_CELLS) -> Grid:
    if n not in (1, 2):
        raise ValueError(f"unsupported dimension n={n}; only 1 and 2 are supported")
    if not L > 0:
        raise ValueError("half-width L must be positive")
    if N < 8:
        raise ValueError("N must be at least 8")
    if N % 2:
        raise ValueError("N must be even (odd N breaks symmetric sampling)")
    if N**n > max_cells:
        raise ValueError(f"N^n = {N**n} exceeds memory cap {max_cells}")
    return Grid(n, float(L), int(N))


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("GridFunction values must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def with_values(self, values, **meta) -> "GridFunction":
        return GridFunction(self.grid, values, {**self.meta, **meta})

    def __add__(self, other):
        if isinstance(other, GridFunction):
            return self.with_values(self.values + other.values, family="sum")
        return self.with_values(self.values + other, family="shifted-constant")

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            return self.with_values(self.values * other.values, family="product")
        return self.with_values(self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def __abs__(self):
        return self.with_values(np.abs(self.values))

    def support_diameter(self) -> float:
        """Diameter of the bounding box of the nonzero cells (0 if f == 0)."""
        nz = np.nonzero(self.values)
        if len(nz[0]) == 0:
            return 0.0
        ext = [(idx.max() - idx.min() + 1) * self.grid.dx for idx in nz]
        return float(math.sqrt(sum(e * e for e in ext)))

    def boundary_mass(self) -> float:
        """Max |f| on the outermost cell layer; nonzero means truncated support."""
        v = np.abs(self.values)
        edge = 0.0
        for ax in range(self.grid.n):
            edge = max(edge, np.take(v, 0, axis=ax).max(), np.take(v, -1, axis=ax).max())
        return float(edge)


# --------------------------------------------------------------------------
# function families


def _mollified_step(u):
    """CDF of the (1-s^2)^4 mollifier on [-1, 1]; 0 for u <= -1, 1 for u >= 1."""
    v = np.clip((np.asarray(u, float) + 1.0) / 2.0, 0.0, 1.0)
    return special.betainc(5.0, 5.0, v)


def _bump(r):
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def sample_function(family: str, params: dict | None, grid: Grid) -> GridFunction:
    """Evaluate a named family at the cell centres of ``grid``.

    Families and their parameters (all optional, defaults in brackets):

    - ``gaussian``: amplitude [1], sigma [1], center [0]; a*exp(-|x-c|^2/sigma^2)
    - ``smooth-bump``: amplitude [1], radius [1], center [0]; a*exp(1 - 1/(1-|x-c|^2/R^2))
    - ``radial-power-cutoff``: amplitude [1], radius [1], beta [2], center [0];
      a*(1 - |x-c|/R)_+^beta
    - ``tensor-product``: amplitude [1], radii [1,...]; product of 1D bumps
    - ``indicator-mollified``: lo, hi (box corners) or center/radius (ball),
      eps [0.05]; 1 on the set shrunk by eps, 0 outside its eps-dilation
    """
    params = dict(params or {})
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    n = grid.n
    amp = float(params.get("amplitude", 1.0))
    center = np.broadcast_to(np.asarray(params.get("center", 0.0), float), (n,))
    xs = [c - center[i] for i, c in enumerate(grid.coords())]
    r = np.sqrt(sum(x**2 for x in xs)) * np.ones(grid.shape)

    if family == "gaussian":
        sigma = float(params.get("sigma", 1.0))
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        vals = np.exp(-((r / sigma) ** 2))
        extent = sigma * math.sqrt(-math.log(TAIL_TOL))
    elif family == "smooth-bump":
        R = float(params.get("radius", 1.0))
        if R <= 0:
            raise ValueError("radius must be positive")
        vals = _bump(r / R)
        extent = R
    elif family == "radial-power-cutoff":
        R = float(params.get("radius", 1.0))
        beta = float(params.get("beta", 2.0))
        if R <= 0 or beta <= 0:
            raise ValueError("radius and beta must be positive")
        vals = np.clip(1.0 - r / R, 0.0, None) ** beta
        extent = R
    elif family == "tensor-product":
        radii = np.broadcast_to(np.asarray(params.get("radii", 1.0), float), (n,))
        if np.any(radii <= 0):
            raise ValueError("radii must be positive")
        vals = np.ones(grid.shape)
        for i, x in enumerate(xs):
            vals = vals * _bump(np.abs(x) / radii[i])
        extent = float(np.sqrt(np.sum(radii**2)))
    else:
        eps = float(params.get("eps", 0.05))
        if eps <= 0:
            raise ValueError("eps must be positive")
        if "radius" in params:
            R = float(params["radius"])
            vals = _mollified_step((R - r) / eps)
            extent = R + eps
        else:
            lo = np.broadcast_to(np.asarray(params.get("lo", 0.0), float), (n,))
            hi = np.broadcast_to(np.asarray(params.get("hi", 1.0), float), (n,))
            if np.any(hi <= lo):
                raise ValueError("need lo < hi")
            vals = np.ones(grid.shape)
            for i, c in enumerate(grid.coords()):
                vals = vals * _mollified_step((c - lo[i]) / eps) * _mollified_step((hi[i] - c) / eps)
            extent = float(np.max(np.abs(np.concatenate([lo, hi])))) + eps
            center = np.zeros(n)
    vals = amp * vals
    meta = {"family": family, "params": _jsonable(params)}
    reach = float(np.max(np.abs(center))) + extent
    if reach > grid.L:
        meta["support_overflow"] = True
        log.warning("support of %s exceeds the box (reach %.3g > L=%.3g)", family, reach, grid.L)
    return GridFunction(grid, vals, meta)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


# --------------------------------------------------------------------------
# norms


def lp_norm(f: GridFunction, p: float) -> float:
    if not p >= 1:
        raise ValueError("p must be in [1, inf]")
    v = np.abs(f.values)
    if math.isinf(p):
        return float(v.max())
    return float((np.sum(v**p) * f.grid.cell_volume) ** (1.0 / p))


# --------------------------------------------------------------------------
# translations


def split_offset(h, dx: float):
    """Split h/dx into integer lattice part k and fractional part theta in [0, 1)."""
    s = np.atleast_1d(np.asarray(h, float)) / dx
    k = np.floor(s)
    theta = s - k
    up = theta > 1.0 - 1e-9
    k[up] += 1
    theta[up] = 0.0
    theta[theta < 1e-9] = 0.0
    return k.astype(int), theta


class Translation:
    """x -> f(x + h) for zero-extended grid data, as a linear operator.

    The interpolated translate lives on the lattice Z^n.  ``interp`` returns it
    on an (N+1)^n window (array index a <-> lattice index a - 1 - k); cells of
    that window that fall back inside the box form ``block``.
    """

    def __init__(self, grid: Grid, h):
        h = np.atleast_1d(np.asarray(h, float))
        if h.shape != (grid.n,):
            raise ValueError(f"offset must have {grid.n} components")
        if not np.linalg.norm(h) > 0:
            raise ValueError("offset h must be nonzero")
        self.grid = grid
        self.h = h
        self.k, self.theta = split_offset(h, grid.dx)
        N = grid.N
        win, box = [], []
        for k in self.k:
            lo = max(0, k + 1)
            hi = min(N + 1, k + N + 1)
            if hi <= lo:
                win.append(slice(0, 0))
                box.append(slice(0, 0))
            else:
                win.append(slice(lo, hi))
                box.append(slice(lo - 1 - k, hi - 1 - k))
        self.win = tuple(win)
        self.box = tuple(box)

    @property
    def lattice_aligned(self) -> bool:
        return bool(np.all(self.theta == 0.0))

    def interp(self, v: np.ndarray) -> np.ndarray:
        out = v
        for ax, th in enumerate(self.theta):
            pad = [(0, 0)] * out.ndim
            pad[ax] = (1, 0)
            front = np.pad(out, pad)
            if th == 0.0:
                out = front
            else:
                pad[ax] = (0, 1)
                out = (1.0 - th) * front + th * np.pad(out, pad)
        return out

    def interp_adjoint(self, g: np.ndarray) -> np.ndarray:
        out = g
        for ax, th in enumerate(self.theta):
            tail = np.take(out, np.arange(1, out.shape[ax]), axis=ax)
            if th == 0.0:
                out = tail
            else:
                head = np.take(out, np.arange(0, out.shape[ax] - 1), axis=ax)
                out = (1.0 - th) * tail + th * head
        return out

    def shifted(self, v: np.ndarray, Jv: np.ndarray | None = None) -> np.ndarray:
        """f(x + h) on the box cells."""
        if Jv is None:
            Jv = self.interp(v)
        out = np.zeros_like(v)
        out[self.box] = Jv[self.win]
        return out

    def _parts(self, v):
        Jv = self.interp(v)
        u = self.shifted(v, Jv) - v
        return u, Jv

    def diff_norm(self, v: np.ndarray, p: float) -> float:
        """||f(. + h) - f||_{L^p(R^n)} for zero-extended samples v."""
        u, Jv = self._parts(v)
        dV = self.grid.cell_volume
        if math.isinf(p):
            outside = np.ones(Jv.shape, bool)
            outside[self.win] = False
            m = np.abs(Jv[outside]).max(initial=0.0)
            return float(max(np.abs(u).max(), m))
        aJ = np.abs(Jv)
        s_out = np.sum(aJ**p) - np.sum(aJ[self.win] ** p) if p != 1 else aJ.sum() - aJ[self.win].sum()
        s_in = np.sum(np.abs(u) ** p) if p != 1 else np.abs(u).sum()
        return float((max(s_in + s_out, 0.0) * dV) ** (1.0 / p))

    def diff_norm_grad(self, v: np.ndarray, p: float):
        """Value and a subgradient of v -> ||f(. + h) - f||_{L^p} (1 <= p < inf)."""
        if math.isinf(p):
            raise ValueError("subgradient only implemented for finite p")
        u, Jv = self._parts(v)
        dV = self.grid.cell_volume
        if p == 1:
            phi_u = np.sign(u)
            g = np.sign(Jv)
            val = (np.abs(u).sum() + np.abs(Jv).sum() - np.abs(Jv[self.win]).sum()) * dV
        else:
            phi_u = np.abs(u) ** (p - 1) * np.sign(u)
            g = np.abs(Jv) ** (p - 1) * np.sign(Jv)
            s = np.sum(np.abs(u) ** p) + np.sum(np.abs(Jv) ** p) - np.sum(np.abs(Jv[self.win]) ** p)
            val = (max(s, 0.0) * dV) ** (1.0 / p)
        g[self.win] = phi_u[self.box]
        grad = self.interp_adjoint(g) - phi_u
        if p == 1:
            return float(val), grad * dV
        if val == 0.0:
            return 0.0, np.zeros_like(v)
        return float(val), grad * dV * val ** (1.0 - p)


def difference(f: GridFunction, h) -> GridFunction:
    """Delta_h f = f(. + h) - f on the box cells."""
    T = Translation(f.grid, h)
    return f.with_values(T.shifted(f.values) - f.values, family="difference", h=list(map(float, T.h)))


def difference_norm(f: GridFunction, h, p: float) -> float:
    """||Delta_h f||_{L^p(R^n)}, including the part of f(. + h) pushed outside the box."""
    return Translation(f.grid, h).diff_norm(f.values, p)


# --------------------------------------------------------------------------
# gradients


def gradient(f: GridFunction) -> list[np.ndarray]:
    """Central differences inside, one-sided at the box edge."""
    g = np.gradient(f.values, f.grid.dx)
    return [g] if f.grid.n == 1 else list(g)


def gradient_lp(f: GridFunction, p: float) -> float:
    mag = np.sqrt(sum(g**2 for g in gradient(f)))
    return lp_norm(f.with_values(mag), p)


def directional_derivative_lp(f: GridFunction, direction, p: float) -> float:
    d = np.atleast_1d(np.asarray(direction, float))
    dd = sum(d[i] * g for i, g in enumerate(gradient(f)))
    return lp_norm(f.with_values(dd), p)


# --------------------------------------------------------------------------
# oscillation norms


@dataclass(frozen=True)
class BallFamily:
    """Balls centred on every ``stride``-th lattice cell with the given radii."""

    stride: int
    radii: tuple[float, ...]

    @classmethod
    def dyadic(cls, grid: Grid, stride: int = 4, r_min: float | None = None, r_max: float | None = None):
        r_min = r_min or 2 * grid.dx
        r_max = r_max or grid.L
        radii = []
        r = r_min
        while r <= r_max * (1 + 1e-12):
            radii.append(r)
            r *= 2
        return cls(stride, tuple(radii))

    def to_dict(self):
        return {"stride": self.stride, "radii": list(self.radii)}


def _ball_stats(f: GridFunction, balls: BallFamily, p: float):
    """Yield (r, mean |f - f_B|^p over B, |B|) arrays for every ball of the family.

    Cells outside the box are zeros (zero extension).  Balls whose centre would
    lie outside the box are never generated.
    """
    if not balls.radii:
        raise ValueError("ball family is empty")
    grid = f.grid
    dx = grid.dx
    for r in balls.radii:
        if r <= 0 or r > 2 * grid.L:
            log.warning("skipping ball radius %g outside (0, 2L]", r)
            continue
        m = int(math.floor(r / dx))
        offs = np.arange(-m, m + 1)
        if grid.n == 1:
            foot = np.abs(offs * dx) <= r + 1e-12
        else:
            foot = (offs[:, None] * dx) ** 2 + (offs[None, :] * dx) ** 2 <= r * r + 1e-12
        padded = np.pad(f.values, m)
        win = np.lib.stride_tricks.sliding_window_view(padded, foot.shape)
        sl = tuple(slice(0, None, balls.stride) for _ in range(grid.n))
        win = win[sl]
        count = foot.sum()
        # chunk over centres to bound memory
        flat = win.reshape(-1, *foot.shape)
        chunk = max(1, int(4_000_000 // foot.size))
        out = []
        for s in range(0, flat.shape[0], chunk):
            w = flat[s : s + chunk][:, foot]
            mean = w.mean(axis=1, keepdims=True)
            if math.isinf(p):
                out.append(np.abs(w - mean).max(axis=1))
            else:
                out.append(np.mean(np.abs(w - mean) ** p, axis=1))
        yield r, np.concatenate(out), count * grid.cell_volume


def bmo_norm(f: GridFunction, balls: BallFamily) -> float:
    """max over the family of the mean of |f - f_B| on B."""
    best = 0.0
    for _, osc, _ in _ball_stats(f, balls, 1.0):
        best = max(best, float(osc.max()))
    return best


def campanato_norm(f: GridFunction, p: float, alpha: float, balls: BallFamily) -> float:
    """max over the family of r^-alpha ||f - f_B||_{L^p(B)} (non-averaged norm)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    if not 1 <= p < math.inf:
        raise ValueError("p must be in [1, inf)")
    best = 0.0
    for r, mp, vol in _ball_stats(f, balls, p):
        best = max(best, float(r**-alpha * (mp.max() * vol) ** (1.0 / p)))
    return best


# --------------------------------------------------------------------------
# serialization


def save_grid_function(f: GridFunction, path, fmt: str = "npy") -> tuple[Path, Path]:
    """Write values (``.npy`` flat binary or ``.csv``) plus a ``.json`` header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {**f.grid.to_dict(), "family": f.meta.get("family"), "params": _jsonable(f.meta.get("params", {})),
              "format": fmt, "meta": _jsonable({k: v for k, v in f.meta.items() if k not in ("family", "params")})}
    hpath = path.with_suffix(".json")
    if fmt == "npy":
        vpath = path.with_suffix(".npy")
        np.save(vpath, f.values.ravel())
    elif fmt == "csv":
        vpath = path.with_suffix(".csv")
        np.savetxt(vpath, f.values.ravel(), delimiter=",", fmt="%.17g")
    else:
        raise ValueError("fmt must be 'npy' or 'csv'")
    hpath.write_text(json.dumps(header, indent=2, sort_keys=True))
    return hpath, vpath


def load_grid_function(path) -> GridFunction:
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    grid = build_grid(header["n"], header["L"], header["N"])
    if header["format"] == "npy":
        flat = np.load(path.with_suffix(".npy"))
    else:
        flat = np.loadtxt(path.with_suffix(".csv"), delimiter=",", ndmin=1)
    meta = {"family": header.get("family"), "params": header.get("params", {}), **header.get("meta", {})}
    return GridFunction(grid, flat.reshape(grid.shape), meta)
