"""Batch command-line interface.

Every subcommand reads an optional JSON config, lets flags override its
fields, and writes ``<subcommand>.json`` (plus CSV where relevant) into the
output directory.  Exit codes: 0 success, 1 failed verification, 2 invalid
input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__

log = logging.getLogger("besovcap")

EXIT_OK, EXIT_VERIFY, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3

TIER_GRIDS = {"quick": {1: 256, 2: 128}, "full": {1: 2048, 2: 512}}

COMMON_KEYS = {"seed", "tier", "out", "threads", "tolerances"}
SCHEMA = {
    "seminorm": {"grid", "function", "params", "hs"},
    "perimeter": {"region", "alpha", "p", "scan"},
    "capacity": {"grid", "region", "params", "hs", "delta", "solver", "dump_minimizer"},
    "limits": {"grid", "function", "kind", "p", "alpha", "alphas", "hs"},
    "heat": {"grid", "function", "levels", "dump_field", "carleson"},
    "trace": {"grid", "functions", "measure", "params", "q", "mode", "balls", "dichotomy"},
    "verify": {"checks"},
}


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# serialization


def clean(obj):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return clean(obj.to_dict())
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(clean(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def config_hash(cfg: dict) -> str:
    canon = json.dumps(clean(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def write_csv(path: Path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(rows)


def _num(x, name):
    if isinstance(x, str) and x.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(x)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected a number, got {x!r}") from None


# --------------------------------------------------------------------------
# config parsing


def _field(cfg, key, sub, default=None, required=False):
    if key not in cfg:
        if required:
            raise ConfigError(f"{sub}: missing required field '{key}'")
        return default
    return cfg[key]


def _grid(cfg, tier, n_default=1):
    from .grid import build_grid

    g = dict(_field(cfg, "grid", "grid", {}) or {})
    n = int(g.get("n", n_default))
    if n not in (1, 2):
        raise ConfigError(f"grid.n: must be 1 or 2, got {n}")
    N = int(g.get("N", TIER_GRIDS[tier][n]))
    L = _num(g.get("L", 6.0 if n == 1 else 3.0), "grid.L")
    try:
        return build_grid(n, L, N)
    except ValueError as e:
        raise ConfigError(f"grid: {e}") from None


def _function(spec, grid, name="function"):
    from .grid import sample_function

    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError(f"{name}: expected an object with a 'family' field")
    try:
        return sample_function(spec["family"], spec.get("params", {}), grid)
    except ValueError as e:
        raise ConfigError(f"{name}: {e}") from None


def _params(spec, default_q=math.inf):
    from .seminorm import BesovParams

    if not isinstance(spec, dict):
        raise ConfigError("params: expected an object with alpha, p, q")
    for k in ("alpha", "p"):
        if k not in spec:
            raise ConfigError(f"params: missing required field '{k}'")
    a = _num(spec["alpha"], "params.alpha")
    p = _num(spec["p"], "params.p")
    q = _num(spec.get("q", default_q), "params.q")
    try:
        return BesovParams(a, p, q)
    except ValueError as e:
        field = str(e).split()[0]
        raise ConfigError(f"params.{field}: {e}") from None


def _hs(spec, f):
    from .seminorm import default_h_sample

    spec = dict(spec or {})
    unknown = set(spec) - {"K", "M", "h_min", "h_max"}
    if unknown:
        raise ConfigError(f"hs: unknown field(s) {sorted(unknown)}")
    try:
        return default_h_sample(f, K=int(spec.get("K", 64)), M=spec.get("M"), h_min=spec.get("h_min"), h_max=spec.get("h_max"))
    except ValueError as e:
        raise ConfigError(f"hs: {e}") from None


def _region(spec):
    from .regions import region_from_dict

    if spec is None:
        raise ConfigError("region: missing required field 'region'")
    try:
        return region_from_dict(spec)
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"region: malformed descriptor ({e})") from None


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config: invalid JSON ({e})") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config: top level must be an object")
    return cfg


def validate(sub: str, cfg: dict):
    unknown = set(cfg) - SCHEMA[sub] - COMMON_KEYS
    if unknown:
        raise ConfigError(f"{sub}: unknown config field(s) {sorted(unknown)}")


# --------------------------------------------------------------------------
# subcommands


def run_seminorm(cfg, tier):
    from .seminorm import besov_seminorm

    g = _grid(cfg, tier)
    f = _function(_field(cfg, "function", "seminorm", required=True), g)
    P = _params(_field(cfg, "params", "seminorm", required=True))
    hs = _hs(cfg.get("hs"), f)
    res = besov_seminorm(f, P, hs, detail=True)
    if not math.isfinite(res.value):
        raise FloatingPointError("seminorm is not finite")
    return {"seminorm": res.to_dict(), "grid": g.to_dict()}, {}


def run_perimeter(cfg, tier):
    from .regions import perimeter, perimeter_divergence_scan

    E = _region(cfg.get("region"))
    a = _num(_field(cfg, "alpha", "perimeter", required=True), "alpha")
    p = _num(_field(cfg, "p", "perimeter", 1.0), "p")
    if not 0 < a < 1:
        raise ConfigError(f"alpha: must lie in (0, 1), got {a}")
    if not 1 <= p < math.inf:
        raise ConfigError(f"p: must lie in [1, inf), got {p}")
    res = perimeter(E, a, p)
    out = {"perimeter": res.to_dict(), "region": E.to_dict()}
    csvs = {}
    scan = cfg.get("scan")
    if scan is not None:
        if not isinstance(scan, dict):
            raise ConfigError("scan: expected an object")
        hs = np.geomspace(float(scan.get("h_max", 1e-2)), float(scan.get("h_min", 1e-5)), int(scan.get("count", 8)))
        s = perimeter_divergence_scan(E, a, p, hs)
        out["divergence_scan"] = s
        csvs["perimeter_scan.csv"] = [("h", "integrand")] + list(zip(s["h"], s["values"]))
    return out, csvs


def run_capacity(cfg, tier, seed):
    from .capacity import capacity_minimize

    g = _grid(cfg, tier, n_default=2)
    E = _region(cfg.get("region"))
    P = _params(_field(cfg, "params", "capacity", required=True))
    solver = dict(cfg.get("solver", {}))
    allowed = {"max_iter", "restarts", "tol", "window", "step0", "full_every", "working"}
    if set(solver) - allowed:
        raise ConfigError(f"solver: unknown field(s) {sorted(set(solver) - allowed)}")
    hs = None
    if cfg.get("hs"):
        from .seminorm import make_h_sample

        h = cfg["hs"]
        try:
            hs = make_h_sample(g.n, float(h["h_min"]), float(h["h_max"]), int(h.get("K", 24)), h.get("M"))
        except (KeyError, ValueError) as e:
            raise ConfigError(f"hs: {e}") from None
    try:
        est = capacity_minimize(E, P, g, hs, delta=cfg.get("delta"), seed=seed, **solver)
    except ValueError as e:
        raise ConfigError(f"capacity: {e}") from None
    return {"capacity": est.to_dict()}, {}, (est.minimizer if cfg.get("dump_minimizer") else None)


def run_limits(cfg, tier):
    from . import limits

    g = _grid(cfg, tier)
    f = _function(_field(cfg, "function", "limits", required=True), g)
    kind = cfg.get("kind", "bbm")
    p = _num(cfg.get("p", 1.0), "p")
    hs = _hs(cfg.get("hs"), f) if cfg.get("hs") else None
    try:
        if kind in ("bbm", "ms"):
            alphas = cfg.get("alphas", limits.BBM_NODES if kind == "bbm" else limits.MS_NODES)
            scan = (limits.bbm_scan if kind == "bbm" else limits.ms_scan)(f, p, [float(a) for a in alphas], hs)
            return {"scan": scan.to_dict()}, {"limits.csv": scan.csv_rows()}
        if kind == "bv":
            rep = limits.bv_limsup_scan(f, cfg.get("alphas", limits.BBM_NODES), hs)
            rows = [("alpha", "value", "sup_near", "sup_far")] + [(r["alpha"], r["value"], r["sup_near"], r["sup_far"]) for r in rep["rows"]]
            return {"bv": rep}, {"limits.csv": rows}
        if kind == "weak-sobolev":
            return {"weak_sobolev": limits.weak_sobolev_check(f, _num(cfg.get("alpha", 0.5), "alpha"), p, hs)}, {}
        if kind == "strong":
            return {"strong": limits.sobolev_strong_ratio(f, _num(cfg.get("alpha", 0.5), "alpha"), p, hs)}, {}
    except ValueError as e:
        raise ConfigError(f"limits: {e}") from None
    raise ConfigError(f"kind: expected bbm, ms, bv, weak-sobolev or strong, got {kind!r}")


def run_heat(cfg, tier, outdir):
    from . import heat
    from .grid import save_grid_function

    g = _grid(cfg, tier)
    f = _function(_field(cfg, "function", "heat", required=True), g)
    levels = cfg.get("levels")
    try:
        fld = heat.heat_extend(f, levels)
    except ValueError as e:
        raise ConfigError(f"levels: {e}") from None
    if not np.all(np.isfinite(fld.values)):
        raise FloatingPointError("heat extension produced non-finite values")
    dom = heat.maximal_domination(f, fld)
    out = {"levels": fld.levels, "maximum_principle": heat.maximum_principle(fld, f), "maximal_domination": dom}
    csvs = {}
    if cfg.get("dump_field"):
        files = []
        for j in range(len(fld.levels)):
            _, vpath = save_grid_function(fld.level(j), outdir / "field" / f"level_{j:03d}")
            files.append({"t": float(fld.levels[j]), "file": str(vpath.relative_to(outdir))})
        out["field_manifest"] = files
    car = cfg.get("carleson")
    if car:
        P = _params(car.get("params", {"alpha": 0.5, "p": 1.5}))
        try:
            rep = heat.carleson_check(g, P, _num(car.get("q", 3.0), "carleson.q"), car.get("radii", [0.5, 1.0]), [f])
        except ValueError as e:
            raise ConfigError(f"carleson: {e}") from None
        out["carleson"] = rep
        csvs["carleson.csv"] = heat.carleson_csv_rows(rep)
    return out, csvs


def run_trace(cfg, tier):
    from . import trace

    g = _grid(cfg, tier, n_default=2)
    try:
        desc = dict(_field(cfg, "measure", "trace", required=True))
        desc.setdefault("n", g.n)
        if desc["n"] != g.n:
            raise ValueError(f"measure dimension {desc['n']} differs from grid dimension {g.n}")
        mu = trace.measure_from_dict(desc)
    except KeyError as e:
        raise ConfigError(f"measure: missing required field {e}") from None
    except (ValueError, TypeError) as e:
        raise ConfigError(f"measure: {e}") from None
    P = _params(_field(cfg, "params", "trace", required=True))
    q = _num(_field(cfg, "q", "trace", required=True), "q")
    fs = [_function(s, g, f"functions[{i}]") for i, s in enumerate(_field(cfg, "functions", "trace", required=True))]
    balls = [(tuple(b["center"]), float(b["radius"])) for b in cfg.get("balls", [])]
    try:
        if cfg.get("dichotomy"):
            return {"dichotomy": trace.trace_dichotomy(g, mu, P, q, fs, balls)}, {}
        rep = trace.trace_inequality_check(fs, mu, P, q, mode=cfg.get("mode", "global"), balls=balls or None)
    except ValueError as e:
        raise ConfigError(f"trace: {e}") from None
    rows = [("id", "family", "lhs", "rhs", "ratio")] + [(r["id"], r["family"], r["lhs"], r["rhs"], r["ratio"]) for r in rep["rows"]]
    return {"trace": rep}, {"trace.csv": rows}


def run_verify(cfg, tier):
    from .verify import CHECK_IDS, run_verify as _run

    checks = cfg.get("checks")
    if checks is not None and (not isinstance(checks, list) or any(c not in CHECK_IDS for c in checks)):
        bad = [c for c in (checks if isinstance(checks, list) else [checks]) if c not in CHECK_IDS]
        raise ConfigError(f"checks: unknown check(s) {bad}; available: {', '.join(CHECK_IDS)}")
    tols = cfg.get("tolerances") or {}

    def progress(r):
        tag = "PASS" if r["pass"] else ("FAIL" if r["asserted"] else "REPORTED")
        print(f"{tag:8s} {r['id']:24s} {r['seconds']:8.2f}s", file=sys.stderr, flush=True)

    rep = _run(tier, checks, {k: float(v) for k, v in tols.items()}, progress=progress)
    rows = [("id", "asserted", "pass", "seconds")] + [(r["id"], r["asserted"], r["pass"], r["seconds"]) for r in rep["checks"]]
    return {"verify": rep}, {"verify.csv": rows}


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="besovcap", description="Besov seminorms, perimeters and capacities on grids.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SCHEMA:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON config file")
        sp.add_argument("--out", type=Path, help="output directory (created if missing)")
        sp.add_argument("--threads", type=int, help="worker threads for compiled kernels")
        sp.add_argument("--seed", type=int, help="random seed")
        sp.add_argument("--tier", choices=("quick", "full"), help="resolution tier")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def _set_threads(k):
    if k is None:
        return
    if k < 1:
        raise ConfigError("threads: must be at least 1")
    import numba

    numba.set_num_threads(min(k, numba.config.NUMBA_NUM_THREADS))


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    sub = args.command
    try:
        cfg = load_config(args.config)
        validate(sub, cfg)
        # flags override config fields
        for key in ("seed", "tier", "threads"):
            if getattr(args, key) is not None:
                cfg[key] = getattr(args, key)
        if args.out is not None:
            cfg["out"] = str(args.out)
        tier = cfg.get("tier", "quick")
        if tier not in TIER_GRIDS:
            raise ConfigError(f"tier: expected quick or full, got {tier!r}")
        seed = int(cfg.get("seed", 0))
        _set_threads(cfg.get("threads"))
        outdir = Path(cfg.get("out", "out"))
        outdir.mkdir(parents=True, exist_ok=True)
        np.random.seed(seed)
        minimizer = None
        if sub == "seminorm":
            result, csvs = run_seminorm(cfg, tier)
        elif sub == "perimeter":
            result, csvs = run_perimeter(cfg, tier)
        elif sub == "capacity":
            result, csvs, minimizer = run_capacity(cfg, tier, seed)
        elif sub == "limits":
            result, csvs = run_limits(cfg, tier)
        elif sub == "heat":
            result, csvs = run_heat(cfg, tier, outdir)
        elif sub == "trace":
            result, csvs = run_trace(cfg, tier)
        else:
            result, csvs = run_verify(cfg, tier)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (FloatingPointError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC

    eff = {k: v for k, v in cfg.items() if k not in ("out", "threads")}
    doc = {
        "command": sub,
        "config": eff,
        "provenance": {"config_hash": config_hash({"command": sub, **eff}), "version": __version__, "seed": seed, "tier": tier},
        "result": result,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    (outdir / f"{sub}.json").write_text(dumps(doc), encoding="utf-8")
    for name, rows in csvs.items():
        write_csv(outdir / name, rows)
    if minimizer is not None:
        from .grid import save_grid_function

        save_grid_function(minimizer, outdir / "minimizer")
    if sub == "verify":
        rep = result["verify"]
        for r in rep["checks"]:
            tag = "PASS" if r["pass"] else ("FAIL" if r["asserted"] else "REPORTED")
            print(f"{tag} {r['id']}")
        if rep["failed"]:
            print("failed checks: " + ", ".join(rep["failed"]), file=sys.stderr)
            return EXIT_VERIFY
    else:
        print(str(outdir / f"{sub}.json"))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
