import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from moment_kernel import ConfigError
from moment_kernel.cli import main
from moment_kernel.config import parse_config
from moment_kernel.moments import WickEvaluator

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL = """
beta = 5.0
coupling = [0.0, 1.0]

[model]
preset = "spin_boson(20)"

[spectral]
kind = "ohmic"
lam = 0.5
omega_d = 1.0

[pade]
M1 = 4
M2 = 6

[grid]
t_max = 2.0
dt = 5e-3
omega_min = 10.0
omega_max = 30.0
d_omega = 0.1
"""

VERIFY = """
beta = 1.0
coupling = [0.0, 1.0]

[model]
preset = "spin_boson(2)"

[spectral]
kind = "discrete"
modes = [[0.6, 0.8], [0.5, 1.6]]

[pade]
M1 = 2
M2 = 4

[oracle]
modes = [[0.6, 0.8], [0.5, 1.6]]
moment_order = 6
moment_rtol = 1e-6
"""


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith("# config_sha256=")
    assert lines[1].startswith("# omega_c=")
    return lines[2].split(","), np.loadtxt(lines[3:], delimiter=",")


def test_run_writes_all_artifacts(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    manifest = json.loads(capsys.readouterr().out)
    assert manifest["status"] == "ok" and manifest["M1_M2_used"] == [4, 6]
    assert set(manifest["timings_s"]) >= {"moments", "kernel", "gqme", "lineshape"}
    for name in ("moments.json", "kernel.json", "time.csv", "frequency.csv", "manifest.json"):
        assert (out / name).exists()
    cols, data = read_csv(out / "time.csv")
    assert cols == ["t", "K1_re", "K1_im", "C_re", "C_im"]
    assert data[0, 3] == 1.0 and data[-1, 0] == pytest.approx(2.0)
    cols, data = read_csv(out / "frequency.csv")
    assert cols == ["omega", "K1w_re", "K1w_im", "I", "I_norm"]
    assert data[:, 4].max() == pytest.approx(1.0)
    moments = json.loads((out / "moments.json").read_text())
    assert moments["omega_model_units"][1] == pytest.approx([0.0, 20.0])


def test_output_is_byte_identical(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    for d in ("a", "b"):
        assert main(["run", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    for name in ("moments.json", "kernel.json", "time.csv", "frequency.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_subcommands_chain_and_stand_alone(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    chained, alone = tmp_path / "chain", tmp_path / "alone"
    for cmd in ("moments", "kernel", "correlate", "lineshape"):
        assert main([cmd, "--config", cfg, "--out", str(chained)]) == 0
    assert main(["lineshape", "--config", cfg, "--out", str(alone)]) == 0
    assert (chained / "frequency.csv").read_bytes() == (alone / "frequency.csv").read_bytes()


def test_stale_artifacts_are_recomputed(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", write(tmp_path, SMALL), "--out", str(out)]) == 0
    other = write(tmp_path, SMALL.replace("M2 = 6", "M2 = 5"), "other.toml")
    assert main(["kernel", "--config", other, "--out", str(out)]) == 0
    assert json.loads((out / "kernel.json").read_text())["M2"] == 5


def test_warnings_reach_the_manifest(tmp_path, capsys):
    # the quadratic chromophore recipe reduces its Pade order with a warning
    assert main(["kernel", "--config", str(CONFIGS / "quadratic_sb.toml"), "--out", str(tmp_path)]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    cats = {w["category"] for w in manifest["warnings"]}
    assert "PadeFallbackWarning" in cats
    assert manifest["M1_M2_used"] == [6, 7]


def test_config_error_exit(tmp_path, capsys):
    cfg = write(tmp_path, SMALL.replace('kind = "ohmic"', 'kind = "lorentzian"'))
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["exit"] == 2 and err["error"] == "ConfigError"
    assert main(["run", "--config", str(tmp_path / "missing.toml")]) == 2


def test_numerical_failure_exit(tmp_path, capsys):
    cfg = write(tmp_path, SMALL.replace('kind = "ohmic"', 'kind = "drude_lorentz"'))
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err == {"error": "DivergentMoment", "message": err["message"], "exit": 3}


def test_verify_passes(tmp_path, capsys):
    cfg = write(tmp_path, VERIFY)
    assert main(["verify", "--config", cfg, "--out", str(tmp_path), "--threads", "2"]) == 0
    assert "PASS" in capsys.readouterr().out
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["status"] == "PASS" and report["moment_max_rel_err"] < 1e-6


def test_verify_catches_injected_sign_error(tmp_path, capsys, monkeypatch):
    orig = WickEvaluator.pair_qp
    monkeypatch.setattr(WickEvaluator, "pair_qp", lambda self, a, b: -orig(self, a, b))
    cfg = write(tmp_path, VERIFY)
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 4
    assert "FAIL" in capsys.readouterr().out
    assert json.loads((tmp_path / "verify.json").read_text())["status"] == "FAIL"


def test_verify_requires_oracle_table(tmp_path, capsys):
    assert main(["verify", "--config", write(tmp_path, SMALL), "--out", str(tmp_path)]) == 2


def test_oracle_command(tmp_path, capsys):
    cfg = write(tmp_path, VERIFY.replace("moment_order = 6", "moment_order = 4\nsamples = 11"))
    assert main(["oracle", "--config", cfg, "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "oracle.json").read_text())
    assert d["moments"]["omega"][0] == [1.0, 0.0]
    assert len(d["correlation"]["t"]) == 11


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "moment_kernel", "moments", "--config", write(tmp_path, SMALL),
         "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["command"] == "moments"


def test_explicit_matrices_match_preset():
    base = {"beta": 1.0, "coupling": [0.0, 1.0], "spectral": {"kind": "ohmic", "lam": 0.5, "omega_d": 1.0}}
    preset = parse_config({**base, "model": {"preset": "spin_boson(2)"}})
    explicit = parse_config({**base, "model": {
        "dim": 2,
        "H_S": [1, 0, 0, -1],
        "V": [1, 0, 0, -1],
        "A": [0, 1, 1, 0],
        "sigma0": ["1+0j", 0, 0, 0],
    }})
    assert explicit.model.digest() == preset.model.digest()


@pytest.mark.parametrize("patch", [
    {"beta": -1.0},
    {"model": {"preset": "spin_glass(2)"}},
    {"model": {"dim": 2, "H_S": [1, 0, 0]}},
    {"pade": {"n": 2}},
    {"grid": {"dt": 0}},
    {"grid": {"fourier_sign": 0}},
    {"outputs": {"plots": "x.png"}},
])
def test_invalid_configs(patch):
    raw = {"beta": 1.0, "model": {"preset": "spin_boson(2)"},
           "spectral": {"kind": "ohmic", "lam": 0.5, "omega_d": 1.0}}
    raw.update(patch)
    with pytest.raises(ConfigError):
        parse_config(raw)


@pytest.mark.parametrize("name", ["linear_sb", "quadratic_sb", "mixed_sb", "verify_linear", "verify_quadratic"])
def test_shipped_configs_parse(name):
    from moment_kernel.config import load_config

    cfg = load_config(CONFIGS / f"{name}.toml")
    assert cfg.pade[0] == 1
