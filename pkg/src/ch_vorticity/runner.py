"""
Execute one configured experiment and write its artifacts.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

from ch_vorticity.friedrichs import run_friedrichs
from ch_vorticity.model import audit_coefficient_identities
from ch_vorticity.output import write_run
from ch_vorticity.schema import RunConfig
from ch_vorticity.timestep import run_with_analysis

logger = logging.getLogger(__name__)

CONFIG_ERROR_EXIT_CODE = 1


@dataclass(frozen=True)
class ExecutionResult:
    mode: str
    status: str
    exit_code: int
    directory: Path


def execute(config: RunConfig, directory: str | Path | None = None) -> ExecutionResult:
    """
    Run ``config`` in its mode and write the run directory.

    ``sweep`` configs run each point elsewhere; here they are treated as ``simulate``.
    """
    directory = Path(directory if directory is not None else config.output.directory)
    mode = "simulate" if config.mode == "sweep" else config.mode

    match mode:
        case "audit":
            report = audit_coefficient_identities(config.audit.A_samples)
            write_run(directory, config, audit=report)

            for failure in report.failures:
                logger.error(f"Audit failure: {failure}")

            status = "passed" if report.passed else "failed"
            exit_code = 0 if report.passed else CONFIG_ERROR_EXIT_CODE
        case "friedrichs":
            result, outcome = run_friedrichs(config)
            write_run(directory, config, outcome, friedrichs=result)
            status, exit_code = outcome.status.value, outcome.status.exit_code
        case _:
            outcome = run_with_analysis(config)
            write_run(directory, config, outcome)
            status, exit_code = outcome.status.value, outcome.status.exit_code

    return ExecutionResult(mode=mode, status=status, exit_code=exit_code, directory=directory)
