import hashlib
import json
import subprocess
import sys

import pytest
import yaml

from srblab import cli


def _write_cfg(tmp_path, payload, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(payload))
    return p


SMALL_LYAPUNOV = {
    "system": {"name": "cat_shear"},
    "alpha": 0.2,
    "seed": 3,
    "orbit": {"transient": 200, "length": 2000, "ensemble": 2},
    "spectrum": {"steps": 3000, "reorth_interval": 4},
}


def test_lyapunov_outputs_and_manifest(tmp_path):
    cfg = _write_cfg(tmp_path, SMALL_LYAPUNOV)
    out = tmp_path / "out"
    assert cli.run("lyapunov", cfg, out) == cli.EXIT_OK
    for name in ("spectrum.csv", "spectrum.json", "resolved_config.json",
                 "manifest.json"):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["subcommand"] == "lyapunov"
    # every listed digest matches the file on disk, manifest itself excluded
    listed = {e["path"] for e in manifest["outputs"]}
    assert "manifest.json" not in listed
    for entry in manifest["outputs"]:
        digest = hashlib.sha256(
            (out / entry["path"]).read_bytes()).hexdigest()
        assert digest == entry["sha256"]
    spec = json.loads((out / "spectrum.json").read_text())
    assert spec["exponents"][0] > 0 > spec["exponents"][1]


def test_rerun_is_byte_identical(tmp_path):
    cfg = _write_cfg(tmp_path, SMALL_LYAPUNOV)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.run("lyapunov", cfg, out1) == 0
    assert cli.run("lyapunov", cfg, out2) == 0
    for p in sorted(out1.iterdir()):
        assert p.read_bytes() == (out2 / p.name).read_bytes()


def test_resolved_config_contains_defaults(tmp_path):
    cfg = _write_cfg(tmp_path, SMALL_LYAPUNOV)
    out = tmp_path / "out"
    cli.run("lyapunov", cfg, out)
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert resolved["radius"]["method"] == "root-test"
    assert resolved["spectrum"]["steps"] == 3000


def test_missing_config_exit_code(tmp_path):
    assert cli.run("lyapunov", tmp_path / "nope.yaml",
                   tmp_path / "out") == cli.EXIT_CONFIG


def test_unknown_key_exit_code_and_diagnostics(tmp_path):
    cfg = _write_cfg(tmp_path, {**SMALL_LYAPUNOV, "bogus": 1})
    out = tmp_path / "out"
    assert cli.run("lyapunov", cfg, out) == cli.EXIT_CONFIG
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["error_type"] == "ConfigError"
    assert "bogus" in diag["message"]


def test_unknown_subcommand_exit_code(tmp_path):
    cfg = _write_cfg(tmp_path, SMALL_LYAPUNOV)
    assert cli.run("frobnicate", cfg, tmp_path / "out") == cli.EXIT_CONFIG


def test_basin_escape_exit_code(tmp_path):
    cfg = _write_cfg(tmp_path, {
        "system": {"name": "henon"}, "alpha": 1.4, "seed": 0,
        "sampler": {"low": [30.0, 30.0], "high": [40.0, 40.0]},
        "orbit": {"transient": 100, "length": 100, "ensemble": 2},
    })
    out = tmp_path / "out"
    assert cli.run("srb", cfg, out) == cli.EXIT_BASIN
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["error_type"] in ("BasinEscapeError", "OrbitEscapeError")


def test_degeneracy_exit_code(tmp_path):
    # near-integrable kicked rotor: no hyperbolic splitting
    cfg = _write_cfg(tmp_path, {
        "system": {"name": "standard_map"}, "alpha": 0.05, "seed": 1,
        "orbit": {"transient": 200, "length": 5000, "ensemble": 2},
        "clv": {"warmup": 200},
    })
    assert cli.run("clv", cfg, tmp_path / "out") == cli.EXIT_DEGENERACY


def test_insufficient_data_exit_code(tmp_path):
    # radius estimation needs more coefficients than this
    cfg = _write_cfg(tmp_path, {
        "system": {"name": "cat_shear"}, "alpha": 0.2, "seed": 0,
        "observable": "bump",
        "orbit": {"transient": 100, "length": 500, "ensemble": 2},
        "susceptibility": {"n_max": 4},
    })
    code = cli.run("radius", cfg, tmp_path / "out")
    assert code in (cli.EXIT_CONFIG, cli.EXIT_INSUFFICIENT)
    assert code != cli.EXIT_OK


def test_output_dir_env_override(tmp_path, monkeypatch):
    cfg = _write_cfg(tmp_path, SMALL_LYAPUNOV)
    target = tmp_path / "env_out"
    monkeypatch.setenv("SRBLAB_OUTPUT_DIR", str(target))
    assert cli.run("lyapunov", cfg) == 0
    assert (target / "manifest.json").exists()


def test_fold_synthetic_pipeline(tmp_path):
    cfg = _write_cfg(tmp_path, {
        "synthetic": {"sigma": {"kind": "uniform"}, "grid": 4096,
                      "side": "one", "domain": [0.0, 1.0]},
    })
    out = tmp_path / "out"
    assert cli.run("fold-synthetic", cfg, out) == 0
    payload = json.loads((out / "synthetic.json").read_text())
    assert payload["predicted_exponent"] == pytest.approx(0.5)
    assert abs(payload["holder_exponent"] - 0.5) < 0.05


def test_console_entry_point(tmp_path):
    cfg = _write_cfg(tmp_path, SMALL_LYAPUNOV)
    out = tmp_path / "out"
    proc = subprocess.run(
        [sys.executable, "-m", "srblab.cli", "lyapunov", str(cfg),
         "--output-dir", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (out / "spectrum.json").exists()


def test_csv_full_precision(tmp_path):
    cfg = _write_cfg(tmp_path, SMALL_LYAPUNOV)
    out = tmp_path / "out"
    cli.run("lyapunov", cfg, out)
    lines = (out / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "index,exponent,stderr"
    value = float(lines[1].split(",")[1])
    spec = json.loads((out / "spectrum.json").read_text())
    assert value == spec["exponents"][0]
