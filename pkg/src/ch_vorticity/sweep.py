"""
Cartesian parameter sweeps: one run directory per point and an ``index.csv`` in point order.
"""

import csv
import itertools
import logging
from collections.abc import Mapping
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ch_vorticity.config import build_config
from ch_vorticity.output import format_value
from ch_vorticity.runner import ExecutionResult, execute
from ch_vorticity.schema import RunConfig

logger = logging.getLogger(__name__)

INDEX_FILE = "index.csv"


@dataclass(frozen=True)
class SweepPoint:
    index: int
    values: dict[str, str]
    config: RunConfig

    @property
    def name(self) -> str:
        return f"point-{self.index:04d}"


def expand_sweep(raw: Mapping[str, str], config: RunConfig | None = None) -> list[SweepPoint]:
    """
    One validated config per combination of the ``sweep.<section>.<key>`` value lists.

    Points enumerate the product with the last declared key varying fastest. Each point keeps the
    base config's mode unless that is ``sweep``, in which case it simulates.

    Raises:
        ConfigValidationError: If the base config or any point is invalid.
    """
    config = config or build_config(raw)
    parameters = config.sweep.parameters
    base = {key: value for key, value in raw.items() if not key.startswith("sweep.")}
    base["mode"] = "simulate" if config.mode == "sweep" else config.mode

    keys = list(parameters)
    points = []

    for index, combination in enumerate(itertools.product(*(parameters[k] for k in keys))):
        values = dict(zip(keys, combination, strict=True))
        points.append(SweepPoint(index=index, values=values, config=build_config(base | values)))

    logger.debug(f"Sweep over {', '.join(keys) or 'no parameters'}: {len(points)} points")

    return points


def _execute_point(point: SweepPoint, directory: Path) -> ExecutionResult:
    return execute(point.config, directory / point.name)


def write_index(points: list[SweepPoint], results: list[ExecutionResult], path: Path) -> None:
    keys = list(points[0].values) if points else []

    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["point", "directory", *keys, "status", "exit_code"])

        for point, result in zip(points, results, strict=True):
            values = [point.values[k] for k in keys]
            writer.writerow([point.index, point.name, *values, result.status, format_value(result.exit_code)])


def run_sweep(
    raw: Mapping[str, str], directory: str | Path | None = None, workers: int | None = None
) -> list[ExecutionResult]:
    """
    Run every sweep point, in a process pool when ``workers > 1``.

    Points write to disjoint ``point-NNNN`` directories; the index is written after all points finish.
    """
    config = build_config(raw)
    directory = Path(directory if directory is not None else config.output.directory)
    workers = workers or config.sweep.workers
    points = expand_sweep(raw, config)

    directory.mkdir(parents=True, exist_ok=True)
    logger.info(f"Running {len(points)} sweep points with {workers} worker(s) into {directory}")

    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_execute_point, points, itertools.repeat(directory)))
    else:
        results = [_execute_point(point, directory) for point in points]

    write_index(points, results, directory / INDEX_FILE)

    return results
