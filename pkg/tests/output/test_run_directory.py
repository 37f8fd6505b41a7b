import json

import numpy as np
import pytest

from ch_vorticity.friedrichs import run_friedrichs
from ch_vorticity.model import audit_coefficient_identities
from ch_vorticity.output import (
    BESOV_COLUMNS,
    TIMESERIES_COLUMNS,
    build_manifest,
    read_snapshot,
    write_manifest,
    write_run,
)
from ch_vorticity.timestep import run


@pytest.fixture
def short_config(make_config):
    return make_config(time__T_final=0.2, initial__zeta_amplitude=0.05)


def _files(directory):
    return {p.relative_to(directory).as_posix(): p.read_bytes() for p in sorted(directory.rglob("*")) if p.is_file()}


def test_simulation_artifacts(tmp_path, short_config):
    outcome = run(short_config)

    write_run(tmp_path, short_config, outcome)

    assert sorted(_files(tmp_path)) == [
        "manifest.json",
        "snapshots/snapshot-0000.csv",
        "snapshots/snapshot-0001.csv",
        "timeseries.csv",
    ]

    lines = (tmp_path / "timeseries.csv").read_text().splitlines()
    assert lines[0] == (
        "t,E,min_ux,max_ux,argmin_x,argmax_x,blowup_integrand,blowup_integral,"
        "lemma52_upper_bound,lemma52_lower_bound,lemma52_upper_ok,lemma52_lower_ok"
    )
    assert len(lines) == 1 + len(outcome.records)

    final = read_snapshot(tmp_path / "snapshots" / "snapshot-0001.csv")
    assert final.t == 0.2
    assert np.array_equal(final.u.values, outcome.snapshots[-1].u.values)


def test_manifest(tmp_path, short_config):
    outcome = run(short_config)
    write_run(tmp_path, short_config, outcome)

    manifest = json.loads((tmp_path / "manifest.json").read_text())

    assert manifest["status"] == "completed"
    assert manifest["exit_code"] == 0
    assert manifest["mode"] == "simulate"
    assert manifest["final_time"] == 0.2
    assert manifest["breaking_time"] is None
    assert manifest["model"]["preset"] == "sigma0"
    assert manifest["model"]["conserves_energy"] is True
    assert manifest["energy"]["relative_drift"] < 1e-6
    assert manifest["lemma52_bounds"]["upper_ok"] is True
    assert len(manifest["config_hash"]) == 64
    assert set(manifest["versions"]) == {"ch-vorticity", "numpy", "scipy"}


def test_besov_columns(tmp_path, make_config):
    config = make_config(time__T_final=0.1, diagnostics__besov="true")
    write_run(tmp_path, config, run(config))

    header = (tmp_path / "timeseries.csv").read_text().splitlines()[0]

    assert header == ",".join(TIMESERIES_COLUMNS + BESOV_COLUMNS)


def test_reruns_are_byte_identical(tmp_path, short_config):
    write_run(tmp_path / "a", short_config, run(short_config))
    write_run(tmp_path / "b", short_config, run(short_config))

    assert _files(tmp_path / "a") == _files(tmp_path / "b")


def test_stale_snapshots_are_removed(tmp_path, short_config):
    (tmp_path / "snapshots").mkdir()
    (tmp_path / "snapshots" / "snapshot-0009.csv").write_text("old")

    write_run(tmp_path, short_config, run(short_config))

    assert not (tmp_path / "snapshots" / "snapshot-0009.csv").exists()


def test_audit_artifacts(tmp_path, make_config):
    config = make_config(mode="audit", audit__A_samples="0, 1")
    report = audit_coefficient_identities(config.audit.A_samples)

    write_run(tmp_path, config, audit=report)

    lines = (tmp_path / "audit.csv").read_text().splitlines()
    assert lines[0].startswith("A,c,")
    assert lines[0].endswith(",passed")
    assert len(lines) == 3
    assert all(line.endswith(",true") for line in lines[1:])
    assert (tmp_path / "timeseries.csv").read_text() == ",".join(TIMESERIES_COLUMNS) + "\n"

    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["audit"]["passed"] is True
    assert manifest["audit"]["failures"] == []


def test_friedrichs_artifacts(tmp_path, make_config):
    config = make_config(mode="friedrichs", friedrichs__iterations=2, friedrichs__T=0.1)
    result, outcome = run_friedrichs(config)

    write_run(tmp_path, config, outcome, friedrichs=result)

    lines = (tmp_path / "friedrichs.csv").read_text().splitlines()
    assert lines[0] == "j,d_j,ratio,lowpass_error"
    assert len(lines) == 4
    assert lines[1].split(",")[2] == ""

    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["friedrichs"]["iterations"] == 2
    assert manifest["friedrichs"]["n_steps"] == result.n_steps


def test_manifest_serializes_numpy_values(tmp_path, make_config):
    manifest = build_manifest(make_config()) | {"array": np.arange(3), "scalar": np.float64(0.5)}
    path = tmp_path / "manifest.json"

    write_manifest(manifest, path)

    data = json.loads(path.read_text())
    assert data["array"] == [0, 1, 2]
    assert data["scalar"] == 0.5
    assert path.read_text().endswith("}\n")
