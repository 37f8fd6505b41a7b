"""
Typed schema of a run configuration.

Every section of the flat ``section.key = value`` config text maps onto one dataclass below;
``RunConfig`` nests them.
"""

from collections.abc import Iterator, Mapping, MutableMapping
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Literal, get_origin, get_type_hints

from ch_vorticity import defaults

ModeType = Literal["simulate", "friedrichs", "audit", "sweep"]
PresetType = Literal["vorticity", "coriolis", "generalized-2ch", "sigma0", "custom"]
FrameType = Literal["original", "translated"]
InitialKindType = Literal["gaussian", "sech2", "sine_packet", "steep_front", "file"]


def is_schema_type(hint: Any) -> bool:
    """True for a `BaseSchema` subclass; generic aliases like `list[float]` are never schemas."""
    return get_origin(hint) is None and isinstance(hint, type) and issubclass(hint, BaseSchema)


@dataclass
class BaseSchema(MutableMapping):
    """
    Base class for config sections.

    Implements the MutableMapping interface so that sections can be read and overridden like dictionaries.
    """

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]):
        """
        Build the schema from already validated data, recursing into nested sections.
        """
        hints = get_type_hints(cls)
        kwargs = {}

        for f in fields(cls):
            if f.name not in data:
                continue

            value = data[f.name]
            hint = hints[f.name]

            if is_schema_type(hint) and isinstance(value, Mapping):
                value = hint.from_dict(value)

            kwargs[f.name] = value

        return cls(**kwargs)

    def __getitem__(self, key: str) -> Any:
        if not hasattr(self, key):
            raise KeyError(key)

        return getattr(self, key)

    def __setitem__(self, key: str, value: Any) -> None:
        setattr(self, key, value)

    def __delitem__(self, key: str) -> None:
        if not hasattr(self, key):
            raise KeyError(key)

        # Fields are reset to None rather than removed
        if any(f.name == key for f in fields(self)):
            setattr(self, key, None)
        else:
            try:
                delattr(self, key)
            except AttributeError:
                raise KeyError(key) from None

    def __iter__(self) -> Iterator[str]:
        for f in fields(self):
            yield f.name

    def __len__(self) -> int:
        return len(fields(self))


@dataclass
class GridSchema(BaseSchema):
    n: int = defaults.GRID_N
    """
    Number of grid points, a power of two >= 16.
    """
    L: float = defaults.GRID_L
    """
    Length of the periodic domain. Accepts multiples of pi, e.g. `40pi`.
    """
    padding_ratio: float = defaults.GRID_PADDING_RATIO


@dataclass
class ModelSchema(BaseSchema):
    preset: PresetType
    """
    One of vorticity, coriolis, generalized-2ch, sigma0, custom.
    """
    A: float | None = None
    """
    Constant vorticity. Required by, and only allowed for, the vorticity preset.
    """
    Omega: float | None = None
    """
    Coriolis frequency. Required by, and only allowed for, the coriolis preset.
    """
    sigma: float | None = None
    """
    σ; fixed to 0 by the sigma0 preset.
    """
    coefficients: list[float] | None = None
    """
    a1..a6, b1..b3 of the custom preset.
    """
    frame: FrameType = defaults.MODEL_FRAME


@dataclass
class InitialSchema(BaseSchema):
    kind: InitialKindType = defaults.INITIAL_KIND
    amplitude: float = defaults.INITIAL_AMPLITUDE
    width: float = defaults.INITIAL_WIDTH
    center: float | None = None
    """
    Center of the profiles. Defaults to the middle of the domain.
    """
    wavenumber: float = defaults.INITIAL_WAVENUMBER
    zeta_amplitude: float = defaults.INITIAL_ZETA_AMPLITUDE
    zeta_width: float | None = None
    target_E0: float | None = None
    """
    Rescale u0 and ζ0 jointly so that E(0) equals this value.
    """
    file: str | None = None
    """
    Snapshot file read when `kind = file`.
    """
    global_regime: bool = False
    """
    Marks a run intended for the small-energy global regime; E(0) >= 1/3 is then reported as a warning.
    """


@dataclass
class TimeSchema(BaseSchema):
    T_final: float = defaults.TIME_T_FINAL
    cfl: float = defaults.TIME_CFL
    dt_min: float = defaults.TIME_DT_MIN
    dt_max: float = defaults.TIME_DT_MAX
    breaking_threshold: float = defaults.TIME_BREAKING_THRESHOLD
    resolution_tolerance: float = defaults.TIME_RESOLUTION_TOLERANCE


@dataclass
class DiagnosticsSchema(BaseSchema):
    interval: float = defaults.DIAGNOSTICS_INTERVAL
    eps0: float | None = None
    """
    ε0 of the slope bounds for u_x. Defaults to the midpoint of (0, 1/3 - E(0)).
    """
    besov: bool = defaults.DIAGNOSTICS_BESOV
    besov_s: float = defaults.DIAGNOSTICS_BESOV_S
    besov_p: float = defaults.DIAGNOSTICS_BESOV_P
    besov_r: float = defaults.DIAGNOSTICS_BESOV_R
    perturbation: float | None = None
    """
    Relative size of an initial-data perturbation; when set, a second run measures the final distance.
    """


@dataclass
class SnapshotsSchema(BaseSchema):
    times: list[float] = field(default_factory=list)
    interval: float | None = None


@dataclass
class FlowmapSchema(BaseSchema):
    seeds: list[float] = field(default_factory=list)
    n_seeds: int = 0
    """
    Number of equally spaced seeds added to `flowmap.seeds`.
    """
    max_dt: float = defaults.FLOWMAP_MAX_DT


@dataclass
class FriedrichsSchema(BaseSchema):
    iterations: int = defaults.FRIEDRICHS_ITERATIONS
    T: float = defaults.FRIEDRICHS_T
    dt: float | None = None
    s: float = defaults.FRIEDRICHS_S


@dataclass
class AuditSchema(BaseSchema):
    A_samples: list[float] = field(default_factory=lambda: list(defaults.AUDIT_A_SAMPLES))


@dataclass
class SweepSchema(BaseSchema):
    workers: int = defaults.SWEEP_WORKERS
    parameters: dict[str, list[str]] = field(default_factory=dict)
    """
    Values per swept key, declared as `sweep.<section>.<key> = v1, v2, ...`.
    """


@dataclass
class OutputSchema(BaseSchema):
    directory: str = defaults.OUTPUT_DIRECTORY


@dataclass
class RunConfig(BaseSchema):
    model: ModelSchema
    mode: ModeType = "simulate"
    grid: GridSchema = field(default_factory=GridSchema)
    initial: InitialSchema = field(default_factory=InitialSchema)
    time: TimeSchema = field(default_factory=TimeSchema)
    diagnostics: DiagnosticsSchema = field(default_factory=DiagnosticsSchema)
    snapshots: SnapshotsSchema = field(default_factory=SnapshotsSchema)
    flowmap: FlowmapSchema = field(default_factory=FlowmapSchema)
    friedrichs: FriedrichsSchema = field(default_factory=FriedrichsSchema)
    audit: AuditSchema = field(default_factory=AuditSchema)
    sweep: SweepSchema = field(default_factory=SweepSchema)
    output: OutputSchema = field(default_factory=OutputSchema)


SECTIONS: dict[str, type[BaseSchema]] = {
    name: hint
    for name, hint in get_type_hints(RunConfig).items()
    if is_schema_type(hint)
}
