"""
Loading run configurations: parse the text, apply overrides, cast, validate, build ``RunConfig``.
"""

import hashlib
import json
import logging
from collections.abc import Mapping
from dataclasses import fields
from difflib import get_close_matches
from pathlib import Path
from typing import Any

from ch_vorticity.model import Coefficients, Frame, coefficients_from_preset
from ch_vorticity.parser import parse_config_lines, read_config_file
from ch_vorticity.schema import SECTIONS, RunConfig
from ch_vorticity.spectral import Grid, SpectralWorkspace
from ch_vorticity.validator import (
    ConfigError,
    ConfigValidationError,
    cast_section,
    validate_data_against_schema,
    validate_run_config,
)

logger = logging.getLogger(__name__)


def load_raw_config(source: str | Path) -> dict[str, str]:
    """
    Raw `dotted.key -> string` pairs from a config file path or from config text.

    A ``str`` containing a newline or ``=`` is treated as config text, anything else as a path.
    """
    if isinstance(source, str) and ("\n" in source or "=" in source):
        return parse_config_lines(source.splitlines(keepends=True))

    return read_config_file(source)


def _section_error(section: str, dotted: str) -> ConfigError:
    suggestions = get_close_matches(section, list(SECTIONS), n=3, cutoff=0.6)
    prefix = f"Invalid key '{dotted}': unknown section '{section}'"

    if suggestions:
        return ConfigError(f"{prefix}. Did you mean: {', '.join(suggestions)}?", code="E001")

    return ConfigError(f"{prefix}. Valid sections are: {', '.join(sorted(SECTIONS))}", code="E001")


def _nest(raw: Mapping[str, str], errors: list[ConfigError]) -> dict[str, Any]:
    data: dict[str, Any] = {"model": {}}

    for dotted, value in raw.items():
        section, _, key = dotted.partition(".")

        if not key:
            data[section] = value
            continue

        if section == "sweep" and "." in key:
            values = [v.strip() for v in value.split(",") if v.strip()]
            data.setdefault("sweep", {}).setdefault("parameters", {})[key] = values
            continue

        if section not in SECTIONS:
            errors.append(_section_error(section, dotted))
            continue

        if "." in key:
            errors.append(ConfigError(f"Invalid key '{dotted}': sections do not nest", code="E001"))
            continue

        data.setdefault(section, {})[key] = value

    return data


def _validate_sweep_keys(config: RunConfig) -> list[ConfigError]:
    errors = []

    for dotted in config.sweep.parameters:
        section, _, key = dotted.partition(".")

        if section not in SECTIONS or section == "sweep":
            errors.append(_section_error(section, f"sweep.{dotted}"))
            continue

        valid_keys = {f.name for f in fields(SECTIONS[section])}
        if key not in valid_keys:
            suggestions = get_close_matches(key, valid_keys, n=3, cutoff=0.6)
            hint = f" Did you mean: {', '.join(suggestions)}?" if suggestions else ""
            errors.append(ConfigError(f"Invalid swept key 'sweep.{dotted}'.{hint}", code="E001"))

        if not config.sweep.parameters[dotted]:
            errors.append(ConfigError(f"'sweep.{dotted}' lists no values", code="E004"))

    return errors


def build_config(raw: Mapping[str, str]) -> RunConfig:
    """
    Cast and validate raw config pairs.

    Raises:
        ConfigValidationError: With every problem found, not just the first.
    """
    errors: list[ConfigError] = []
    data = _nest(raw, errors)

    for section, values in data.items():
        if section in SECTIONS and isinstance(values, dict):
            data[section] = cast_section(values, SECTIONS[section])

    try:
        validate_data_against_schema(data, RunConfig)
    except ConfigValidationError as e:
        errors.extend(e.errors)

    if errors:
        raise ConfigValidationError(errors)

    config = RunConfig.from_dict(data)
    errors.extend(_validate_sweep_keys(config))
    errors.extend(validate_run_config(config))

    if errors:
        raise ConfigValidationError(errors)

    return config


def parse_config(source: str | Path, overrides: Mapping[str, str] | None = None) -> RunConfig:
    """
    Parse, validate and build a run configuration.

    Args:
        source: Path to a config file, or config text.
        overrides: `dotted.key -> value` pairs applied on top of the file, e.g. from the command line.

    Raises:
        ParseError: If the text is malformed.
        ConfigValidationError: With every validation error found.
    """
    logger.debug("Validating config...")

    raw = load_raw_config(source)
    raw.update(overrides or {})
    config = build_config(raw)

    logger.debug("✅ Config is valid.")

    return config


def make_grid(config: RunConfig) -> Grid:
    return Grid(config.grid.n, config.grid.L)


def make_workspace(config: RunConfig) -> SpectralWorkspace:
    return SpectralWorkspace(make_grid(config), padding_ratio=config.grid.padding_ratio)


def make_coefficients(config: RunConfig) -> Coefficients:
    model = config.model

    return coefficients_from_preset(
        model.preset,
        A=model.A,
        Omega=model.Omega,
        sigma=model.sigma,
        coefficients=model.coefficients,
    )


def make_frame(config: RunConfig) -> Frame:
    return Frame(config.model.frame)


def config_hash(config: RunConfig) -> str:
    """sha256 of the canonical JSON form of the resolved config."""
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"), default=str)

    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
