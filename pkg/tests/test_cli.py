import csv
import json

import pytest

from besovcap import __version__
from besovcap.cli import config_hash, main

GAUSS = {"family": "gaussian"}


def run(tmp_path, sub, cfg, *flags, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    code = main([sub, "--config", str(path), "--out", str(out), *flags])
    return code, out


def load(out, sub):
    return json.loads((out / f"{sub}.json").read_text())


def test_seminorm_document(tmp_path):
    cfg = {"function": GAUSS, "params": {"alpha": 0.5, "p": 2, "q": "inf"}, "grid": {"N": 256}}
    code, out = run(tmp_path, "seminorm", cfg)
    assert code == 0
    doc = load(out, "seminorm")
    assert set(doc) == {"command", "config", "provenance", "result", "timestamp"}
    assert doc["provenance"]["config_hash"] == config_hash({"command": "seminorm", **doc["config"]})
    assert doc["provenance"]["version"] == __version__
    assert doc["result"]["grid"]["N"] == 256


def test_output_is_deterministic(tmp_path):
    cfg = {"function": GAUSS, "params": {"alpha": 0.3, "p": 1.5, "q": 2}, "grid": {"N": 256}}
    texts = []
    for i in range(2):
        code, out = run(tmp_path, "seminorm", cfg, "--seed", "7")
        assert code == 0
        doc = load(out, "seminorm")
        doc.pop("timestamp")
        texts.append(json.dumps(doc, sort_keys=True))
    assert texts[0] == texts[1]


def test_thread_count_does_not_change_results(tmp_path):
    cfg = {"function": GAUSS, "params": {"alpha": 0.5, "p": 2, "q": 2}, "grid": {"N": 256}}
    vals = []
    for k in ("1", "2"):
        code, out = run(tmp_path, "seminorm", cfg, "--threads", k)
        assert code == 0
        vals.append(load(out, "seminorm")["result"])
    assert vals[0] == vals[1]


def test_flags_override_config(tmp_path):
    cfg = {"function": GAUSS, "params": {"alpha": 0.5, "p": 2, "q": 2}, "seed": 1, "grid": {"N": 64}}
    code, out = run(tmp_path, "seminorm", cfg, "--seed", "5")
    assert code == 0
    assert load(out, "seminorm")["provenance"]["seed"] == 5


def test_invalid_alpha_names_the_field(tmp_path, capsys):
    code, _ = run(tmp_path, "seminorm", {"function": GAUSS, "params": {"alpha": 1.2, "p": 2, "q": 2}})
    assert code == 2
    assert "alpha" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path, capsys):
    code, _ = run(tmp_path, "seminorm", {"function": GAUSS, "params": {"alpha": 0.5, "p": 2, "q": 2}, "colour": 1})
    assert code == 2
    assert "colour" in capsys.readouterr().err


def test_malformed_json_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["seminorm", "--config", str(path), "--out", str(tmp_path)]) == 2


def test_malformed_region_rejected(tmp_path):
    code, _ = run(tmp_path, "perimeter", {"region": {"type": "blob"}, "alpha": 0.5})
    assert code == 2


def test_perimeter_scan_csv(tmp_path):
    cfg = {"region": {"type": "box", "lo": [0.0], "hi": [1.0]}, "alpha": 0.5, "p": 1, "scan": {}}
    code, out = run(tmp_path, "perimeter", cfg)
    assert code == 0
    assert load(out, "perimeter")["result"]["perimeter"]["value"] == pytest.approx(2.0)
    assert (out / "perimeter_scan.csv").exists()


def test_limits_csv_is_rfc4180(tmp_path):
    cfg = {"function": GAUSS, "kind": "bbm", "p": 1, "grid": {"N": 1024}}
    code, out = run(tmp_path, "limits", cfg)
    assert code == 0
    raw = (out / "limits.csv").read_bytes()
    assert b"\r\n" in raw
    rows = list(csv.reader(raw.decode("utf-8").splitlines()))
    assert rows[0] == ["alpha", "raw", "weighted", "target", "rel_err"]
    assert rows[-1][0] == "extrapolated"
    assert float(rows[-1][4]) < 0.01


def test_capacity_with_minimizer_dump(tmp_path):
    cfg = {"grid": {"n": 2, "N": 32, "L": 1.4}, "region": {"type": "ball", "center": [0, 0], "radius": 1},
           "params": {"alpha": 0.5, "p": 1}, "solver": {"max_iter": 20, "restarts": 1}, "dump_minimizer": True}
    code, out = run(tmp_path, "capacity", cfg)
    assert code == 0
    res = load(out, "capacity")["result"]
    assert res["capacity"]["upper"] >= res["capacity"]["lower"]
    assert any(p.name.startswith("minimizer") for p in out.iterdir())


def test_capacity_zero_capacity_regime_is_invalid(tmp_path):
    cfg = {"grid": {"n": 1, "N": 64, "L": 2}, "region": {"type": "box", "lo": [-0.5], "hi": [0.5]},
           "params": {"alpha": 0.5, "p": 2}}
    code, _ = run(tmp_path, "capacity", cfg)
    assert code == 2


def test_heat_with_carleson(tmp_path):
    cfg = {"function": GAUSS, "grid": {"n": 2, "N": 64, "L": 4}, "dump_field": True,
           "carleson": {"params": {"alpha": 0.5, "p": 1.5}, "q": 3}}
    code, out = run(tmp_path, "heat", cfg)
    assert code == 0
    rows = list(csv.reader((out / "carleson.csv").read_text().splitlines()))
    assert rows[0] == ["object", "lhs", "rhs", "ratio"]
    assert (out / "field").is_dir()


def test_trace_csv(tmp_path):
    cfg = {"grid": {"N": 64, "L": 2}, "functions": [{"family": "gaussian", "params": {"sigma": 0.5}}],
           "measure": {"kind": "slice", "d": 1, "anchor": [0, 0], "direction": [1, 0]},
           "params": {"alpha": 0.75, "p": 2}, "q": 2}
    code, out = run(tmp_path, "trace", cfg)
    assert code == 0
    rows = list(csv.reader((out / "trace.csv").read_text().splitlines()))
    assert rows[0] == ["id", "family", "lhs", "rhs", "ratio"] and len(rows) == 2


def test_trace_measure_dimension_mismatch(tmp_path):
    cfg = {"grid": {"N": 64, "L": 2}, "functions": [GAUSS], "measure": {"kind": "lebesgue", "n": 1},
           "params": {"alpha": 0.5, "p": 2}, "q": 2}
    code, _ = run(tmp_path, "trace", cfg)
    assert code == 2


def test_verify_subset_pass_and_fail(tmp_path, capsys):
    code, out = run(tmp_path, "verify", {"checks": ["interval-perimeter", "bbm-limit"]})
    assert code == 0
    assert "PASS interval-perimeter" in capsys.readouterr().out
    assert (out / "verify.csv").exists()
    code, _ = run(tmp_path, "verify", {"checks": ["bbm-limit"], "tolerances": {"bbm-limit": 0}})
    assert code == 1
    assert "bbm-limit" in capsys.readouterr().err


def test_verify_unknown_check(tmp_path):
    code, _ = run(tmp_path, "verify", {"checks": ["nope"]})
    assert code == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out
