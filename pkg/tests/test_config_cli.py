import csv
import json
from pathlib import Path

import numpy as np
import pytest

from anisojump import cli
from anisojump.config import ConfigError, apply_override, parse_config
from anisojump.kernel import LogPower, Sinusoidal, cone_kernel, isotropic_kernel

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_kernel_from_config_matches_builder():
    cfg = parse_config("kernel: {dim: 2, alpha: 1.5, ell: {kind: log_power, power: 1.0}}", "validate")
    assert cfg.kernel == isotropic_kernel(2, 1.5, LogPower(1.0))


def test_cone_kernel_from_config():
    text = """
kernel:
  dim: 2
  caps:
    - {axis: [1, 0], cosine: 0.9}
    - {axis: [0, 1], cosine: 0.9}
  upper: [2.0, 1.5]
  modulator: {kind: sinusoidal, frequency: [3.0, -1.0], phase: 0.3}
"""
    cfg = parse_config(text, "validate")
    ref = cone_kernel([(1, 0), (0, 1)], 0.9, upper=(2.0, 1.5), modulator=Sinusoidal((3.0, -1.0), 0.3))
    assert cfg.kernel == ref


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError) as info:
        parse_config("seed: 1\nkernel: {dim: 2}\nbogus: 3\n", "validate")
    assert info.value.line == 3 and info.value.key == "bogus"


def test_invalid_alpha_and_required_data():
    with pytest.raises(ConfigError):
        parse_config("kernel: {dim: 2, alpha: 2.5}", "validate")
    with pytest.raises(ConfigError):
        parse_config("kernel: {dim: 2}", "hoelder")


def test_modulator_frequency_cap():
    with pytest.raises(ConfigError):
        parse_config("kernel: {dim: 2, modulator: {kind: sinusoidal, frequency: [200, 0]}}", "validate")


def test_overrides():
    raw = {"simulation": {"n": 10}}
    apply_override(raw, "simulation.n=25")
    apply_override(raw, "experiment.scales=[0.5, 0.2, 0.1]")
    assert raw == {"simulation": {"n": 25}, "experiment": {"scales": [0.5, 0.2, 0.1]}}
    with pytest.raises(ConfigError):
        apply_override(raw, "no_equals_sign")
    cfg = parse_config("kernel: {dim: 2}\nsimulation: {n: 10}", "validate", ["simulation.n=99", "seed=4"])
    assert cfg.n == 99 and cfg.seed == 4


def test_yaml_syntax_error():
    with pytest.raises(ConfigError):
        parse_config("kernel: [dim: 2", "validate")


def _run(args, tmp_path):
    return cli.main(list(args) + ["--out", str(tmp_path)])


def test_cli_validate_ok(tmp_path):
    assert _run(["validate", "--config", str(CONFIGS / "validate_iso.yaml")], tmp_path) == 0
    rows = list(csv.reader(open(tmp_path / "validate.csv")))
    assert rows[0][-4:] == ["seed", "eps", "n", "version"]
    assert all(r[-1] == cli.VERSION for r in rows[1:])
    summary = json.loads((tmp_path / "validate.json").read_text())
    assert summary["status"] == 0 and "timestamp" in summary


def test_cli_validate_failure_exit_code(tmp_path):
    assert _run(["validate", "--config", str(CONFIGS / "validate_bad_sigma.yaml")], tmp_path) == 2


def test_cli_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as info:
        cli.main(["no-such-command", "--config", "x.yaml"])
    assert info.value.code == 1
    assert _run(["validate", "--config", str(tmp_path / "missing.yaml")], tmp_path) == 1
    assert _run(["validate", "--config", str(CONFIGS / "validate_iso.yaml"), "--threads", "0"], tmp_path) == 1


def test_cli_invalid_config_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("kernel: {dim: 2, alpha: 3}\n")
    assert _run(["validate", "--config", str(bad)], tmp_path) == 2


def test_fmt_uses_17_digits():
    assert cli._fmt(0.1) == "0.10000000000000001"
    assert cli._fmt(-0.0) == "0"
    assert cli._fmt(True) == "true" and cli._fmt(None) == ""


def test_cli_exit_time_outputs(tmp_path):
    code = _run(["exit-time", "--config", str(CONFIGS / "exit_time.yaml"), "--set", "simulation.n=200",
                 "--dump-paths"], tmp_path)
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "exit-time.csv")))
    assert len(rows) == 5
    assert (tmp_path / "exit-time.svg").read_text().startswith("<?xml")
    paths = list(csv.reader(open(tmp_path / "paths.csv")))
    assert paths[0][:2] == ["replica", "time"]
    assert all(float(v) > 0 for v in np.array(rows[1:])[:, rows[0].index("n")].astype(float))


def test_cli_thread_invariance(tmp_path):
    outs = []
    for t in (1, 3):
        d = tmp_path / f"t{t}"
        assert cli.main(["exit-time", "--config", str(CONFIGS / "exit_time.yaml"), "--set", "simulation.n=300",
                         "--threads", str(t), "--out", str(d)]) == 0
        outs.append((d / "exit-time.csv").read_bytes())
    assert outs[0] == outs[1]
