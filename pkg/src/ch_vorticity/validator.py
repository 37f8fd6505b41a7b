import logging
import math
import re
import types
from collections.abc import Mapping
from dataclasses import MISSING, dataclass, fields
from difflib import get_close_matches
from pathlib import Path
from typing import Any, Literal, Union, get_args, get_origin, get_type_hints

from ch_vorticity.schema import BaseSchema, RunConfig, is_schema_type
from ch_vorticity.spectral import MIN_POINTS

logger = logging.getLogger(__name__)

PI_PATTERN = re.compile(
    r"^(?P<sign>[+-]?)\s*(?P<factor>(?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?)?\s*\*?\s*pi(?:\s*/\s*(?P<divisor>\d+\.?\d*))?$"
)


class ConfigError(ValueError):
    """
    A single configuration problem.

    Codes: E001 unknown key, E002 missing required key, E003 wrong type, E004 invalid value,
    E005 preset/parameter mismatch.
    """

    def __init__(self, message: str, *, code: str = "E001", is_base_type_error: bool = False):
        super().__init__(message)
        self.code = code
        self.is_base_type_error = is_base_type_error


@dataclass
class ConfigValidationError(ValueError):
    """Raised when a config is invalid, containing every specific error found."""

    errors: list[ConfigError]

    def __str__(self):
        return "\n".join(f"[{e.code}] {e}" for e in self.errors)


def format_type(t: Any) -> str:
    """Format a type hint as a string for error messages."""
    if t is Any:
        return "Any"
    if t is type(None):
        return "None"

    if get_origin(t) is Literal:
        return " | ".join(repr(a) for a in get_args(t))

    if get_origin(t) is not None:
        return str(t).replace("typing.", "").replace("ch_vorticity.schema.", "")

    if hasattr(t, "__name__"):
        return t.__name__

    return str(t).replace("typing.", "")


def _is_union(origin: Any) -> bool:
    return origin is Union or (hasattr(types, "UnionType") and origin is types.UnionType)


def validate_type(value: Any, type_hint: Any, error_path: str) -> None:
    """
    Validates a value against a type hint at runtime. Supports basic types, list, dict, Literal,
    Union and Optional, and recurses into BaseSchema subclasses.
    """
    origin = get_origin(type_hint)
    args = get_args(type_hint)

    if type_hint is Any:
        return

    if _is_union(origin):
        type_errors = []
        value_errors = []

        for arg in args:
            try:
                validate_type(value, arg, error_path)
                return
            except (TypeError, ValueError) as e:
                if isinstance(e, ConfigError) and not e.is_base_type_error:
                    value_errors.append(e)
                else:
                    type_errors.append(e)

        if value_errors:
            # The type matched but the content did not
            raise value_errors[0]

        valid_types = [format_type(arg) for arg in args if arg is not type(None)]

        if len(valid_types) > 1:
            expected = f"{', '.join(valid_types[:-1])} or {valid_types[-1]}"
        else:
            expected = valid_types[0]

        raise ConfigError(
            f"If '{error_path}' is specified, it must be a {expected}, but got {type(value).__name__}",
            code="E003",
            is_base_type_error=True,
        )

    if origin is Literal:
        if value not in args:
            choices = [str(a) for a in args]
            suggestions = get_close_matches(str(value), choices, n=1, cutoff=0.6)
            hint = f" Did you mean: {suggestions[0]}?" if suggestions else ""

            raise ConfigError(
                f"'{error_path}' must be one of {', '.join(choices)}, got '{value}'.{hint}",
                code="E004",
                is_base_type_error=True,
            )
        return

    if origin is list:
        if not isinstance(value, list):
            raise ConfigError(
                f"'{error_path}' must be list, got {type(value).__name__}", code="E003", is_base_type_error=True
            )

        if args:
            for i, item in enumerate(value):
                try:
                    validate_type(item, args[0], f"{error_path}[{i}]")
                except (TypeError, ValueError) as e:
                    # An error in an item is a value error for the container
                    raise ConfigError(str(e), code=getattr(e, "code", "E003"), is_base_type_error=False) from e
        return

    if origin is dict:
        if not isinstance(value, dict):
            raise ConfigError(
                f"'{error_path}' must be a dict, got {type(value).__name__}", code="E003", is_base_type_error=True
            )

        if len(args) > 1:
            for key, val in value.items():
                try:
                    validate_type(val, args[1], f"{error_path}['{key}']")
                except (TypeError, ValueError) as e:
                    raise ConfigError(str(e), code=getattr(e, "code", "E003"), is_base_type_error=False) from e
        return

    if is_schema_type(type_hint):
        if not isinstance(value, Mapping):
            raise ConfigError(
                f"'{error_path}' must be a section, got {type(value).__name__}", code="E003", is_base_type_error=True
            )

        validate_data_against_schema(value, type_hint, error_path=error_path)
        return

    if origin is None and isinstance(type_hint, type):
        # bool is an int subclass, but `n = true` is still a type error
        is_bool_mismatch = isinstance(value, bool) and type_hint is not bool
        is_int_for_float = type_hint is float and isinstance(value, int) and not isinstance(value, bool)

        if is_bool_mismatch or not (isinstance(value, type_hint) or is_int_for_float):
            raise ConfigError(
                f"'{error_path}' must be {format_type(type_hint)}, got {type(value).__name__} ({value!r})",
                code="E003",
                is_base_type_error=True,
            )
        return


def unknown_key_error(key: str, valid_keys: set[str], error_path: str) -> ConfigError:
    location = f" in {error_path}" if error_path else ""
    error_prefix = f"Invalid key '{key}'{location}"
    suggestions = get_close_matches(key, valid_keys, n=3, cutoff=0.6)

    if suggestions:
        error_msg = f"{error_prefix}. Did you mean: {', '.join(suggestions)}?"
    else:
        error_msg = f"{error_prefix}. Valid keys are: {', '.join(sorted(valid_keys))}"

    return ConfigError(error_msg, code="E001")


def validate_data_against_schema(
    data: Mapping[str, Any],
    schema_cls: type[BaseSchema],
    error_path: str = "",
) -> None:
    """
    Validates a dictionary of data against a BaseSchema subclass.

    Checks required fields, types (recursively) and unknown keys, collecting every error before raising.

    Raises:
        ConfigValidationError: With all errors found.
    """
    hints = get_type_hints(schema_cls)
    errors: list[ConfigError] = []
    schema_fields = {f.name: f for f in fields(schema_cls)}

    for name, type_hint in hints.items():
        new_error_path = f"{error_path}.{name}" if error_path else name

        if name not in data:
            f = schema_fields[name]
            if f.default is MISSING and f.default_factory is MISSING:
                errors.append(ConfigError(f"Missing required key: {new_error_path}", code="E002"))
            continue

        try:
            validate_type(data[name], type_hint, new_error_path)
        except ConfigValidationError as e:
            errors.extend(e.errors)
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                errors.append(e)
            else:
                errors.append(ConfigError(str(e), code=getattr(e, "code", "E003")))

    valid_keys = set(hints.keys())

    for key in data:
        if key not in valid_keys:
            errors.append(unknown_key_error(key, valid_keys, error_path))

    if errors:
        raise ConfigValidationError(errors)


def parse_float(value: str) -> float:
    """
    Parse a float, also accepting multiples of pi such as `pi`, `40pi`, `2*pi` or `pi/2`.
    """
    try:
        return float(value)
    except ValueError:
        pass

    match = PI_PATTERN.match(value.strip().lower())

    if match is None:
        raise ValueError(f"could not convert string to float: '{value}'")

    factor = float(match["factor"]) if match["factor"] else 1.0
    result = (-factor if match["sign"] == "-" else factor) * math.pi
    divisor = match["divisor"]

    if divisor:
        result /= float(divisor)

    return result


def cast_to_type(value: Any, type_hint: Any, list_delimiter: str = ",") -> Any:
    """
    Attempts to cast a config string to a given type hint.

    Values that cannot be cast are returned unchanged so that `validate_type` reports them.
    """
    if type_hint is Any:
        return value

    origin = get_origin(type_hint)
    args = get_args(type_hint)

    if _is_union(origin):
        if value is None or (isinstance(value, str) and value.lower() in ("none", "")):
            return None

        for arg in args:
            if arg is type(None):
                continue

            cast = cast_to_type(value, arg, list_delimiter=list_delimiter)

            # Keep the first successful conversion
            if not isinstance(cast, str) or arg is str or get_origin(arg) is Literal:
                return cast

        return value

    if not isinstance(value, str):
        return value

    target_type = type_hint if origin is None else origin

    if target_type is bool:
        v = value.lower()
        if v in ("true", "1", "yes", "on"):
            return True
        if v in ("false", "0", "no", "off"):
            return False
        return value

    if target_type is int:
        try:
            return int(value)
        except ValueError:
            return value

    if target_type is float:
        try:
            return parse_float(value)
        except ValueError:
            return value

    if target_type is list:
        if not value.strip():
            return []

        items = [item.strip() for item in value.split(list_delimiter)]

        if args:
            return [cast_to_type(item, args[0], list_delimiter=list_delimiter) for item in items]

        return items

    return value


def cast_section(data: Mapping[str, Any], schema_cls: type[BaseSchema]) -> dict[str, Any]:
    """
    Cast the string values of one section to the field types of its schema; unknown keys pass through.
    """
    hints = get_type_hints(schema_cls)
    result = {}

    for key, value in data.items():
        if key in hints:
            new_value = cast_to_type(value, hints[key])

            if new_value != value:
                logger.debug(f"Cast {schema_cls.__name__}.{key}: {type(value).__name__} -> {type(new_value).__name__}")

            result[key] = new_value
        else:
            result[key] = value

    return result


# --- Semantic checks ---


def _check(errors: list[ConfigError], condition: bool, message: str, code: str = "E004") -> None:
    if not condition:
        errors.append(ConfigError(message, code=code))


def validate_run_config(config: RunConfig) -> list[ConfigError]:
    """
    Value-level checks that the type system cannot express. Returns every error found.
    """
    errors: list[ConfigError] = []

    grid = config.grid
    _check(
        errors,
        grid.n >= MIN_POINTS and grid.n & (grid.n - 1) == 0,
        f"'grid.n' must be a power of two >= {MIN_POINTS}, got {grid.n}",
    )
    _check(errors, math.isfinite(grid.L) and grid.L > 0, f"'grid.L' must be positive, got {grid.L}")
    _check(errors, grid.padding_ratio >= 1, f"'grid.padding_ratio' must be >= 1, got {grid.padding_ratio}")

    errors.extend(_validate_model(config))

    initial = config.initial
    _check(errors, initial.width > 0, f"'initial.width' must be positive, got {initial.width}")

    if initial.zeta_width is not None:
        _check(errors, initial.zeta_width > 0, f"'initial.zeta_width' must be positive, got {initial.zeta_width}")

    if initial.target_E0 is not None:
        _check(errors, initial.target_E0 > 0, f"'initial.target_E0' must be positive, got {initial.target_E0}")

    if initial.kind == "file":
        if initial.file is None:
            errors.append(ConfigError("Missing required key: initial.file (required by kind 'file')", code="E002"))
        elif not Path(initial.file).is_file():
            errors.append(ConfigError(f"'initial.file' does not exist: {initial.file}", code="E004"))
    elif initial.file is not None:
        message = f"'initial.file' is only allowed with kind 'file', got '{initial.kind}'"
        errors.append(ConfigError(message, code="E005"))

    time = config.time
    _check(errors, time.T_final > 0, f"'time.T_final' must be positive, got {time.T_final}")
    _check(errors, 0 < time.cfl <= 1, f"'time.cfl' must be in (0, 1], got {time.cfl}")
    _check(errors, time.dt_min > 0, f"'time.dt_min' must be positive, got {time.dt_min}")
    _check(errors, time.dt_max > 0, f"'time.dt_max' must be positive, got {time.dt_max}")
    _check(errors, time.dt_min <= time.dt_max, f"'time.dt_min' ({time.dt_min}) exceeds 'time.dt_max' ({time.dt_max})")
    _check(errors, time.breaking_threshold > 0, "'time.breaking_threshold' must be positive")
    _check(errors, time.resolution_tolerance > 0, "'time.resolution_tolerance' must be positive")

    diagnostics = config.diagnostics
    _check(errors, diagnostics.interval > 0, f"'diagnostics.interval' must be positive, got {diagnostics.interval}")
    if diagnostics.eps0 is not None:
        _check(errors, 0 < diagnostics.eps0 < 1 / 3, f"'diagnostics.eps0' must be in (0, 1/3), got {diagnostics.eps0}")
    for key in ("besov_p", "besov_r"):
        _check(errors, diagnostics[key] >= 1, f"'diagnostics.{key}' must be in [1, inf], got {diagnostics[key]}")
    if diagnostics.perturbation is not None:
        _check(errors, diagnostics.perturbation != 0, "'diagnostics.perturbation' must be non-zero")

    snapshots = config.snapshots
    for t in snapshots.times:
        _check(errors, 0 <= t <= time.T_final, f"Snapshot time {t} is outside [0, {time.T_final}]")
    if snapshots.interval is not None:
        _check(errors, snapshots.interval > 0, f"'snapshots.interval' must be positive, got {snapshots.interval}")

    flowmap = config.flowmap
    for seed in flowmap.seeds:
        _check(errors, 0 <= seed < grid.L, f"Flow map seed {seed} is outside [0, {grid.L})")
    _check(errors, flowmap.n_seeds >= 0, f"'flowmap.n_seeds' must be >= 0, got {flowmap.n_seeds}")
    _check(errors, flowmap.max_dt > 0, f"'flowmap.max_dt' must be positive, got {flowmap.max_dt}")

    friedrichs = config.friedrichs
    _check(errors, friedrichs.iterations >= 1, f"'friedrichs.iterations' must be >= 1, got {friedrichs.iterations}")
    _check(errors, friedrichs.T > 0, f"'friedrichs.T' must be positive, got {friedrichs.T}")
    if friedrichs.dt is not None:
        _check(errors, friedrichs.dt > 0, f"'friedrichs.dt' must be positive, got {friedrichs.dt}")

    _check(errors, len(config.audit.A_samples) > 0, "'audit.A_samples' must not be empty")
    for A in config.audit.A_samples:
        _check(errors, math.isfinite(A), f"'audit.A_samples' must be finite, got {A}")

    _check(errors, config.sweep.workers >= 1, f"'sweep.workers' must be >= 1, got {config.sweep.workers}")

    return errors


def _validate_model(config: RunConfig) -> list[ConfigError]:
    errors: list[ConfigError] = []
    model = config.model
    required = {"vorticity": "A", "coriolis": "Omega", "custom": "coefficients"}

    for preset, key in required.items():
        if model.preset == preset and model[key] is None:
            message = f"Missing required key: model.{key} (required by preset '{preset}')"
            errors.append(ConfigError(message, code="E002"))

        if model.preset != preset and model[key] is not None:
            errors.append(
                ConfigError(f"'model.{key}' is not a parameter of preset '{model.preset}'", code="E005")
            )

    if model.preset == "sigma0" and model.sigma not in (None, 0.0):
        errors.append(ConfigError(f"Preset 'sigma0' fixes sigma = 0, got {model.sigma}", code="E005"))

    if model.coefficients is not None and len(model.coefficients) != 9:  # noqa: PLR2004
        message = f"'model.coefficients' needs 9 values (a1..a6, b1..b3), got {len(model.coefficients)}"
        errors.append(ConfigError(message, code="E004"))

    for key in ("A", "Omega", "sigma"):
        if model[key] is not None and not math.isfinite(model[key]):
            errors.append(ConfigError(f"'model.{key}' must be finite, got {model[key]}", code="E004"))

    return errors
