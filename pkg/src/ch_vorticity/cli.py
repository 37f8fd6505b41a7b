"""
Command line entry point.

    ch-vorticity simulate run.cfg --time.T_final 5 -o runs/a
    ch-vorticity sweep sweep.cfg --sweep.workers 4
    ch-vorticity audit
    ch-vorticity check-config run.cfg

Any ``--section.key value`` (or ``--section.key=value``) flag overrides the config file before validation.
Exit codes: 0 completed, 1 usage or config error, 2 breaking detected, 3 non-finite abort.
"""

import argparse
import logging
import sys
from collections.abc import Sequence

from ch_vorticity.config import build_config, load_raw_config
from ch_vorticity.parser import ParseError
from ch_vorticity.runner import CONFIG_ERROR_EXIT_CODE, execute
from ch_vorticity.spectral import SolverError
from ch_vorticity.sweep import run_sweep
from ch_vorticity.validator import ConfigValidationError

logger = logging.getLogger(__name__)

VERBS = ("simulate", "friedrichs", "audit", "sweep", "check-config")
NONFINITE_EXIT_CODE = 3

# the audit needs no model, but every config names one
AUDIT_DEFAULTS = {"model.preset": "sigma0"}


class UsageError(ValueError):
    """Raised for command line flags that cannot be turned into config overrides."""


def parse_overrides(tokens: Sequence[str]) -> dict[str, str]:
    """
    ``["--grid.n", "512", "--time.T_final=2"]`` to ``{"grid.n": "512", "time.T_final": "2"}``.

    Raises:
        UsageError: For tokens that are not ``--dotted.key`` flags, or flags without a value.
    """
    overrides = {}
    tokens = list(tokens)
    index = 0

    while index < len(tokens):
        token = tokens[index]

        if not token.startswith("--") or len(token) == 2:  # noqa: PLR2004
            raise UsageError(f"Unexpected argument '{token}'")

        key, sep, value = token[2:].partition("=")

        if not sep:
            if index + 1 >= len(tokens) or tokens[index + 1].startswith("--"):
                raise UsageError(f"Flag '{token}' needs a value")
            index += 1
            value = tokens[index]

        if "." not in key and key != "mode":
            raise UsageError(f"Unknown option '--{key}'. Config overrides look like --section.key")

        overrides[key] = value
        index += 1

    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ch-vorticity",
        description="Simulate and analyse the two-component Camassa-Holm system with constant vorticity.",
        epilog="Any --section.key VALUE flag overrides that key of the config file.",
    )
    parser.add_argument("verb", choices=VERBS, help="What to run")
    parser.add_argument("config", nargs="?", default=None, help="Path to a config file (optional for audit)")
    parser.add_argument("-o", "--output", default=None, help="Output directory, overrides output.directory")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at debug level")

    return parser


def _raw_config(verb: str, path: str | None, overrides: dict[str, str]) -> dict[str, str]:
    if path is None and verb != "audit":
        raise UsageError(f"'{verb}' needs a config file")

    raw = dict(AUDIT_DEFAULTS) if path is None else load_raw_config(path)
    raw.update(overrides)

    if verb in ("simulate", "friedrichs", "audit"):
        raw["mode"] = verb

    return raw


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args, unknown = parser.parse_known_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        overrides = parse_overrides(unknown)
        if args.output is not None:
            overrides["output.directory"] = args.output

        raw = _raw_config(args.verb, args.config, overrides)

        logger.debug("Validating config...")
        config = build_config(raw)
        logger.info("✅ Config is valid.")

        if args.verb == "check-config":
            return 0

        if args.verb == "sweep":
            results = run_sweep(raw)
            failed = [r for r in results if r.exit_code == CONFIG_ERROR_EXIT_CODE]
            return CONFIG_ERROR_EXIT_CODE if failed else 0

        result = execute(config)
        logger.info(f"{result.mode} finished: {result.status} (artifacts in {result.directory})")

        return result.exit_code
    except UsageError as e:
        logger.error(f"❌ {e}")
        parser.print_usage(sys.stderr)
        return CONFIG_ERROR_EXIT_CODE
    except (ParseError, ConfigValidationError) as e:
        logger.error(f"❌ INVALID CONFIG:\n{e}")
        return CONFIG_ERROR_EXIT_CODE
    except SolverError as e:
        logger.error(f"❌ {e}")
        return NONFINITE_EXIT_CODE
    except (OSError, ValueError) as e:
        logger.error(f"❌ {e}")
        return CONFIG_ERROR_EXIT_CODE
