"""
Deterministic run artifacts: time-series CSV, JSON manifest, snapshot CSVs and experiment tables.

Floats are written with ``repr``, the shortest decimal that reads back to the same double, so that
re-running a config reproduces every file byte for byte.
"""

import csv
import json
import logging
from dataclasses import asdict
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from ch_vorticity.config import config_hash
from ch_vorticity.diagnostics import DiagnosticsRecord
from ch_vorticity.model import AuditReport, State
from ch_vorticity.schema import RunConfig
from ch_vorticity.spectral import Field, Grid

if TYPE_CHECKING:
    from ch_vorticity.friedrichs import FriedrichsResult
    from ch_vorticity.timestep import RunOutcome

logger = logging.getLogger(__name__)

TIMESERIES_COLUMNS = (
    "t",
    "E",
    "min_ux",
    "max_ux",
    "argmin_x",
    "argmax_x",
    "blowup_integrand",
    "blowup_integral",
    "lemma52_upper_bound",
    "lemma52_lower_bound",
    "lemma52_upper_ok",
    "lemma52_lower_ok",
)
BESOV_COLUMNS = ("besov_u_s", "besov_zeta_sm1")
SNAPSHOT_COLUMNS = ("x", "u", "zeta")
FRIEDRICHS_COLUMNS = ("j", "d_j", "ratio", "lowpass_error")

MANIFEST_FILE = "manifest.json"
TIMESERIES_FILE = "timeseries.csv"
SNAPSHOT_DIRECTORY = "snapshots"
FRIEDRICHS_FILE = "friedrichs.csv"
AUDIT_FILE = "audit.csv"


class SnapshotFormatError(ValueError):
    """Raised when a snapshot file cannot be read back into a state."""


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool | np.bool_):
        return "true" if value else "false"
    if isinstance(value, float | np.floating):
        return repr(float(value))

    return str(value)


def _write_rows(path: Path, header: tuple[str, ...] | list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([format_value(v) for v in row] for row in rows)


def timeseries_columns(records: list[DiagnosticsRecord]) -> tuple[str, ...]:
    """Base columns, plus the Besov columns when any record carries them."""
    if any(r.besov_u_s is not None or r.besov_zeta_sm1 is not None for r in records):
        return TIMESERIES_COLUMNS + BESOV_COLUMNS

    return TIMESERIES_COLUMNS


def write_timeseries(outcome: "RunOutcome", path: str | Path) -> None:
    """One row per diagnostics record."""
    columns = timeseries_columns(outcome.records)

    _write_rows(Path(path), columns, ([getattr(r, c) for c in columns] for r in outcome.records))


def package_versions() -> dict[str, str]:
    versions = {}

    for name in ("ch-vorticity", "numpy", "scipy"):
        try:
            versions[name] = version(name)
        except PackageNotFoundError:
            versions[name] = "unknown"

    return versions


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()

    raise TypeError(f"Cannot serialize {type(value).__name__} to JSON")


def outcome_summary(outcome: "RunOutcome") -> dict[str, Any]:
    summary: dict[str, Any] = {
        "status": outcome.status.value,
        "exit_code": outcome.status.exit_code,
        "final_time": outcome.final_time,
        "breaking_time": outcome.breaking_time,
        "breaking_trigger": outcome.breaking_trigger.value if outcome.breaking_trigger else None,
        "steps": outcome.steps,
        "failure": outcome.failure,
        "warnings": outcome.warnings,
    }

    coeffs = outcome.coefficients
    if coeffs is not None:
        summary["model"] = {
            "preset": coeffs.preset,
            "coefficients": dict(
                zip(("sigma", "a1", "a2", "a3", "a4", "a5", "a6", "b1", "b2", "b3"), coeffs.as_tuple(), strict=True)
            ),
            "provenance": asdict(coeffs.provenance),
            "conserves_energy": coeffs.conserves_energy,
        }

    if outcome.records:
        E0, E1 = outcome.records[0].E, outcome.records[-1].E
        summary["energy"] = {
            "initial": E0,
            "final": E1,
            "relative_drift": abs(E1 - E0) / E0 if E0 > 0 else abs(E1 - E0),
        }

    if outcome.initial is not None:
        summary["initial_scale"] = outcome.initial.scale

    if outcome.monitor is not None:
        monitor = outcome.monitor
        summary["lemma52_bounds"] = {
            "eps0": monitor.slopes.eps0,
            "E0": monitor.slopes.E0,
            "upper_slope": monitor.slopes.upper,
            "lower_slope": monitor.slopes.lower,
            "optimal_eps0": monitor.optimal_eps0,
            "optimal_lower_slope": monitor.optimal_lower,
            "upper_ok": all(r.lemma52_upper_ok is not False for r in outcome.records),
            "lower_ok": all(r.lemma52_lower_ok is not False for r in outcome.records),
        }

    if outcome.flow is not None:
        summary["flowmap"] = {
            "seeds": outcome.flow.seeds.tolist(),
            "final_positions": outcome.flow.q[-1].tolist(),
            "monotone": outcome.flow.monotone,
        }

    if outcome.alongflow is not None:
        summary["alongflow"] = asdict(outcome.alongflow) | {"passed": outcome.alongflow.passed}

    if outcome.perturbation is not None:
        summary["perturbation"] = asdict(outcome.perturbation) | {
            "amplification": outcome.perturbation.amplification
        }

    return summary


def friedrichs_summary(result: "FriedrichsResult") -> dict[str, Any]:
    return {
        "iterations": len(result.differences) - 1,
        "dt": result.dt,
        "n_steps": result.n_steps,
        "s": result.s,
        "final_difference": result.differences[-1],
        "direct_distance": result.direct_distance,
    }


def audit_summary(report: AuditReport) -> dict[str, Any]:
    return {
        "passed": report.passed,
        "tolerance": report.tolerance,
        "max_residuals": report.max_residuals,
        "failures": report.failures,
    }


def build_manifest(
    config: RunConfig,
    outcome: "RunOutcome | None" = None,
    *,
    friedrichs: "FriedrichsResult | None" = None,
    audit: AuditReport | None = None,
) -> dict[str, Any]:
    manifest: dict[str, Any] = {"config_hash": config_hash(config), "mode": config.mode}

    if outcome is not None:
        manifest |= outcome_summary(outcome)
    if friedrichs is not None:
        manifest["friedrichs"] = friedrichs_summary(friedrichs)
    if audit is not None:
        manifest["audit"] = audit_summary(audit)

    manifest["versions"] = package_versions()

    return manifest


def write_manifest(manifest: dict[str, Any], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")


def write_snapshot(state: State, path: str | Path) -> None:
    """``x, u, zeta`` columns with the time and domain length in ``#`` header lines."""
    path = Path(path)
    grid = state.grid

    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"# t = {format_value(float(state.t))}\n")
        f.write(f"# length = {format_value(float(grid.length))}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SNAPSHOT_COLUMNS)
        writer.writerows(
            [format_value(x), format_value(u), format_value(z)]
            for x, u, z in zip(grid.x, state.u.values, state.zeta.values, strict=True)
        )


def _parse_header(line: str, name: str, path: Path) -> float:
    key, sep, value = line.lstrip("#").partition("=")

    if not line.startswith("#") or not sep or key.strip() != name:
        raise SnapshotFormatError(f"{path}: expected a '# {name} = ...' header line, got {line.strip()!r}")

    try:
        return float(value)
    except ValueError as e:
        raise SnapshotFormatError(f"{path}: invalid {name} value {value.strip()!r}") from e


def read_snapshot(path: str | Path) -> State:
    """
    Read a snapshot written by ``write_snapshot``.

    Raises:
        SnapshotFormatError: If the headers, the column layout or a value is malformed, or ``x`` is not
            the uniform grid the header describes.
    """
    path = Path(path)

    with open(path, encoding="utf-8", newline="") as f:
        lines = f.read().splitlines()

    if len(lines) < 3:  # noqa: PLR2004
        raise SnapshotFormatError(f"{path}: missing snapshot headers")

    t = _parse_header(lines[0], "t", path)
    length = _parse_header(lines[1], "length", path)

    reader = csv.reader(lines[2:])
    header = next(reader)
    if tuple(header) != SNAPSHOT_COLUMNS:
        raise SnapshotFormatError(f"{path}: expected columns {', '.join(SNAPSHOT_COLUMNS)}, got {', '.join(header)}")

    rows = []
    for line_num, row in enumerate(reader, start=4):
        if len(row) != len(SNAPSHOT_COLUMNS):
            raise SnapshotFormatError(f"{path}:{line_num}: expected {len(SNAPSHOT_COLUMNS)} columns, got {len(row)}")
        try:
            rows.append([float(v) for v in row])
        except ValueError as e:
            raise SnapshotFormatError(f"{path}:{line_num}: {e}") from e

    values = np.array(rows, dtype=np.float64).reshape(-1, len(SNAPSHOT_COLUMNS))

    if not np.all(np.isfinite(values)):
        raise SnapshotFormatError(f"{path}: non-finite values")

    try:
        grid = Grid(len(values), length)
    except ValueError as e:
        raise SnapshotFormatError(f"{path}: {e}") from e

    if not np.allclose(values[:, 0], grid.x, rtol=0.0, atol=1e-9 * length):
        raise SnapshotFormatError(f"{path}: x column is not the uniform grid on [0, {length!r})")

    return State(t, Field(grid, values[:, 1]), Field(grid, values[:, 2]))


def write_friedrichs(result: "FriedrichsResult", path: str | Path) -> None:
    ratios = [None, *result.ratios]
    rows = (
        [j, d, ratio, lowpass]
        for j, (d, ratio, lowpass) in enumerate(zip(result.differences, ratios, result.lowpass_errors, strict=True))
    )

    _write_rows(Path(path), FRIEDRICHS_COLUMNS, rows)


def write_audit(report: AuditReport, path: str | Path) -> None:
    names = list(report.rows[0].residuals) if report.rows else []
    rows = ([row.A, row.c, *(row.residuals[n] for n in names), row.passed] for row in report.rows)

    _write_rows(Path(path), ["A", "c", *names, "passed"], rows)


def write_run(
    directory: str | Path,
    config: RunConfig,
    outcome: "RunOutcome | None" = None,
    *,
    friedrichs: "FriedrichsResult | None" = None,
    audit: AuditReport | None = None,
) -> Path:
    """
    Write every artifact of one run into ``directory``.

    The directory ends up holding ``manifest.json``, ``timeseries.csv`` and ``snapshots/``, plus
    ``friedrichs.csv`` or ``audit.csv`` for those modes.
    """
    directory = Path(directory)
    snapshots = directory / SNAPSHOT_DIRECTORY
    snapshots.mkdir(parents=True, exist_ok=True)

    for stale in snapshots.glob("snapshot-*.csv"):
        stale.unlink()

    if outcome is not None:
        write_timeseries(outcome, directory / TIMESERIES_FILE)
        for index, state in enumerate(outcome.snapshots):
            write_snapshot(state, snapshots / f"snapshot-{index:04d}.csv")
    else:
        _write_rows(directory / TIMESERIES_FILE, TIMESERIES_COLUMNS, [])

    if friedrichs is not None:
        write_friedrichs(friedrichs, directory / FRIEDRICHS_FILE)
    if audit is not None:
        write_audit(audit, directory / AUDIT_FILE)

    write_manifest(build_manifest(config, outcome, friedrichs=friedrichs, audit=audit), directory / MANIFEST_FILE)

    logger.info(f"Wrote run artifacts to {directory}")

    return directory
