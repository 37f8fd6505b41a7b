import json

import numpy as np
import pytest

from ch_vorticity import timestep
from ch_vorticity.cli import UsageError, main, parse_overrides

CONFIG = """\
model.preset = sigma0
grid.n = 64
grid.L = 8pi
time.T_final = 0.2
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(CONFIG)

    return path


def test_parse_overrides():
    tokens = ["--grid.n", "512", "--time.T_final=2", "--mode", "audit", "--output.directory=runs/a=b"]

    assert parse_overrides(tokens) == {
        "grid.n": "512",
        "time.T_final": "2",
        "mode": "audit",
        "output.directory": "runs/a=b",
    }


def test_parse_overrides_negative_value():
    assert parse_overrides(["--model.A", "-1.5"]) == {"model.A": "-1.5"}


@pytest.mark.parametrize(
    "tokens,message",
    [
        (["grid.n"], "Unexpected argument 'grid.n'"),
        (["--"], "Unexpected argument '--'"),
        (["--grid.n"], "Flag '--grid.n' needs a value"),
        (["--grid.n", "--time.T_final", "1"], "Flag '--grid.n' needs a value"),
        (["--verbosity", "2"], "Unknown option '--verbosity'"),
    ],
)
def test_parse_overrides_errors(tokens, message):
    with pytest.raises(UsageError, match=message):
        parse_overrides(tokens)


@pytest.mark.integration
def test_check_config(config_file, caplog):
    with caplog.at_level("INFO"):
        assert main(["check-config", str(config_file)]) == 0

    assert "✅ Config is valid." in caplog.text


@pytest.mark.integration
def test_check_invalid_config(config_file, caplog):
    assert main(["check-config", str(config_file), "--grid.n", "300"]) == 1

    assert "❌ INVALID CONFIG:" in caplog.text
    assert "[E004] 'grid.n' must be a power of two >= 16, got 300" in caplog.text


@pytest.mark.integration
def test_parse_error(tmp_path, caplog):
    path = tmp_path / "broken.cfg"
    path.write_text("model.preset sigma0\n")

    assert main(["check-config", str(path)]) == 1
    assert "Expected assignment operator" in caplog.text


@pytest.mark.integration
def test_missing_config_file(tmp_path, caplog):
    assert main(["simulate", str(tmp_path / "missing.cfg")]) == 1
    assert "missing.cfg" in caplog.text


@pytest.mark.integration
def test_simulate_needs_config(caplog):
    assert main(["simulate"]) == 1
    assert "'simulate' needs a config file" in caplog.text


@pytest.mark.integration
def test_bad_override(config_file, caplog):
    assert main(["simulate", str(config_file), "--grid.n"]) == 1
    assert "needs a value" in caplog.text


@pytest.mark.integration
def test_simulate(config_file, tmp_path):
    out = tmp_path / "out"

    assert main(["simulate", str(config_file), "-o", str(out), "--time.T_final", "0.1"]) == 0

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "completed"
    assert manifest["final_time"] == 0.1
    assert (out / "snapshots" / "snapshot-0001.csv").is_file()


@pytest.mark.integration
def test_simulate_breaking(config_file, tmp_path):
    out = tmp_path / "out"

    assert main(["simulate", str(config_file), "-o", str(out), "--time.breaking_threshold=0.001"]) == 2

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "breaking_detected"
    assert manifest["breaking_trigger"] == "threshold"


@pytest.mark.integration
def test_simulate_nonfinite(config_file, tmp_path, monkeypatch):
    def broken(ws, u, zeta, coeffs, frame):
        return np.full_like(u, np.nan), np.zeros_like(zeta)

    monkeypatch.setattr(timestep, "rhs_nonlocal_values", broken)
    out = tmp_path / "out"

    assert main(["simulate", str(config_file), "-o", str(out)]) == 3

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "nonfinite_abort"
    assert "Stage 1" in manifest["failure"]


@pytest.mark.integration
def test_audit_without_config(tmp_path):
    out = tmp_path / "audit"

    assert main(["audit", "-o", str(out), "--audit.A_samples", "0, 2.5"]) == 0

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["mode"] == "audit"
    assert manifest["audit"]["passed"] is True
    assert len((out / "audit.csv").read_text().splitlines()) == 3


@pytest.mark.integration
def test_friedrichs(config_file, tmp_path):
    out = tmp_path / "friedrichs"

    argv = ["friedrichs", str(config_file), "-o", str(out), "--friedrichs.iterations=2", "--friedrichs.T=0.05"]

    assert main(argv) == 0

    assert (out / "friedrichs.csv").is_file()
    assert json.loads((out / "manifest.json").read_text())["mode"] == "friedrichs"


@pytest.mark.integration
def test_sweep(config_file, tmp_path):
    out = tmp_path / "sweep"

    assert main(["sweep", str(config_file), "-o", str(out), "--sweep.initial.amplitude", "0.05, 0.1"]) == 0

    assert len((out / "index.csv").read_text().splitlines()) == 3
    assert (out / "point-0001" / "manifest.json").is_file()
