"""
Classical RK4 time stepping with a transport-speed CFL step, run orchestration and breaking detection.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ch_vorticity.besov import BesovParams
from ch_vorticity.config import make_coefficients, make_frame, make_workspace
from ch_vorticity.diagnostics import (
    AlongFlowReport,
    DiagnosticsRecord,
    FlowMap,
    SlopeMonitor,
    energy,
    evolve_flowmap,
    make_record,
    verify_alongflow_ode,
)
from ch_vorticity.initial_data import InitialData, generate_initial_data
from ch_vorticity.model import Coefficients, Frame, State, rhs_nonlocal_values
from ch_vorticity.schema import RunConfig, TimeSchema
from ch_vorticity.spectral import Field, FloatArray, SolverError, SpectralWorkspace, workspace_for

logger = logging.getLogger(__name__)

RhsFunction = Callable[[SpectralWorkspace, float, FloatArray, FloatArray], tuple[FloatArray, FloatArray]]

# fraction of resolved modes counted as the spectral tail
TAIL_FRACTION = 1.0 / 3.0

# resolution loss needs the tail to have grown this much over its initial value
RESOLUTION_GROWTH = 1e3

# consecutive steps of decreasing min u_x before resolution loss counts as breaking
STEEPENING_STEPS = 10


class NonFiniteError(SolverError):
    """Raised when an RK4 stage produces NaN or Inf."""

    def __init__(self, message: str, *, stage: int, term: str | None = None):
        super().__init__(message, term=term)
        self.stage = stage


class RunStatus(str, Enum):
    COMPLETED = "completed"
    BREAKING_DETECTED = "breaking_detected"
    NONFINITE_ABORT = "nonfinite_abort"

    @property
    def exit_code(self) -> int:
        return {"completed": 0, "breaking_detected": 2, "nonfinite_abort": 3}[self.value]


class BreakingTrigger(str, Enum):
    THRESHOLD = "threshold"
    DT_COLLAPSE = "dt_collapse"
    RESOLUTION = "resolution"


@dataclass(frozen=True)
class StepControl:
    cfl: float = 0.3
    dt_min: float = 1e-8
    dt_max: float = 0.05
    breaking_threshold: float = 1e4
    resolution_tolerance: float = 1e-4

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must be in (0, 1], got {self.cfl}")
        if not 0 < self.dt_min <= self.dt_max:
            raise ValueError(f"Need 0 < dt_min <= dt_max, got {self.dt_min} and {self.dt_max}")
        if self.breaking_threshold <= 0:
            raise ValueError(f"breaking_threshold must be positive, got {self.breaking_threshold}")

    @classmethod
    def from_config(cls, time: TimeSchema) -> "StepControl":
        return cls(
            cfl=time.cfl,
            dt_min=time.dt_min,
            dt_max=time.dt_max,
            breaking_threshold=time.breaking_threshold,
            resolution_tolerance=time.resolution_tolerance,
        )


@dataclass
class RunOutcome:
    status: RunStatus
    final_time: float
    records: list[DiagnosticsRecord] = field(default_factory=list)
    snapshots: list[State] = field(default_factory=list)
    breaking_trigger: BreakingTrigger | None = None
    coefficients: Coefficients | None = None
    monitor: SlopeMonitor | None = None
    initial: InitialData | None = None
    failure: str | None = None
    steps: int = 0
    flow: FlowMap | None = None
    alongflow: AlongFlowReport | None = None
    perturbation: "PerturbationReport | None" = None

    @property
    def warnings(self) -> list[str]:
        return list(self.initial.warnings) if self.initial else []

    @property
    def breaking_time(self) -> float | None:
        """Estimated breaking time: the last recorded time of a breaking run."""
        if self.status is not RunStatus.BREAKING_DETECTED or not self.records:
            return None

        return self.records[-1].t


def step_rk4(
    state: State,
    dt: float,
    coeffs: Coefficients,
    frame: Frame = Frame.TRANSLATED,
    workspace: SpectralWorkspace | None = None,
    rhs: RhsFunction | None = None,
) -> State:
    """
    One classical RK4 step of ``(u, ζ)``.

    Args:
        state: Current state.
        dt: Step size, positive.
        coeffs: Model coefficients.
        frame: Frame of the right-hand side.
        workspace: Spectral workspace of the state's grid.
        rhs: Replaces the model right-hand side, mapping ``(workspace, t, u, ζ)`` to ``(u_t, ζ_t)``.

    Raises:
        NonFiniteError: If a stage is not finite; ``stage`` is its 1-based index.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")

    ws = workspace or workspace_for(state.grid)

    if rhs is None:

        def rhs(ws_, t_, u_, z_):
            return rhs_nonlocal_values(ws_, u_, z_, coeffs, frame)

    u = state.u.values
    zeta = state.zeta.values

    def stage(index, t_stage, u_stage, z_stage):
        try:
            du, dz = rhs(ws, t_stage, u_stage, z_stage)
        except SolverError as e:
            raise NonFiniteError(f"Stage {index} failed at t={state.t}: {e}", stage=index, term=e.term) from e

        if not (np.all(np.isfinite(du)) and np.all(np.isfinite(dz))):
            raise NonFiniteError(f"Stage {index} is not finite at t={state.t}", stage=index)

        return du, dz

    k1u, k1z = stage(1, state.t, u, zeta)
    k2u, k2z = stage(2, state.t + 0.5 * dt, u + 0.5 * dt * k1u, zeta + 0.5 * dt * k1z)
    k3u, k3z = stage(3, state.t + 0.5 * dt, u + 0.5 * dt * k2u, zeta + 0.5 * dt * k2z)
    k4u, k4z = stage(4, state.t + dt, u + dt * k3u, zeta + dt * k3z)

    new_u = u + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    new_zeta = zeta + dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)

    if not (np.all(np.isfinite(new_u)) and np.all(np.isfinite(new_zeta))):
        raise NonFiniteError(f"Update is not finite at t={state.t}", stage=4)

    return State(state.t + dt, Field(state.grid, new_u), Field(state.grid, new_zeta))


def transport_speed(state: State, coeffs: Coefficients) -> float:
    """``max(|u| + |b1| ζ² + 2|b1||ζ| + 1)`` over the grid; the +1 floors the speed."""
    b1 = abs(coeffs.b1)
    zeta = np.abs(state.zeta.values)

    return float(np.max(np.abs(state.u.values) + b1 * zeta * zeta + 2.0 * b1 * zeta + 1.0))


def adaptive_dt(state: State, coeffs: Coefficients, ctl: StepControl) -> float:
    """``clamp(cfl·dx / transport speed, dt_min, dt_max)``."""
    dt = ctl.cfl * state.grid.dx / transport_speed(state, coeffs)

    return min(max(dt, ctl.dt_min), ctl.dt_max)


def spectral_tail_fraction(values: FloatArray, workspace: SpectralWorkspace) -> float:
    """Fraction of the spectral energy of ``values`` in the top third of resolved wavenumbers."""
    power = np.abs(workspace.spectrum(values)) ** 2
    total = float(np.sum(power))

    if total == 0.0:
        return 0.0

    cutoff = math.floor(len(power) * (1.0 - TAIL_FRACTION))

    return float(np.sum(power[cutoff:])) / total


def event_times(T_final: float, interval: float | None, extra: list[float] | None = None) -> list[float]:
    """Sorted times ``0, interval, 2·interval, ..., T_final`` plus ``extra``, deduplicated."""
    times = {0.0, T_final}

    if interval is not None:
        n = math.floor(T_final / interval + 1e-9)
        times.update(t for t in (round(k * interval, 12) for k in range(1, n + 1)) if t < T_final)

    times.update(t for t in extra or [] if 0.0 <= t <= T_final)

    return sorted(times)


def _besov_params(config: RunConfig) -> BesovParams | None:
    d = config.diagnostics

    if not d.besov:
        return None

    return BesovParams(d.besov_s, d.besov_p, d.besov_r)


def run(config: RunConfig, *, initial_scale: float = 1.0) -> RunOutcome:
    """
    Integrate a configured run to ``time.T_final`` or until breaking or a non-finite state.

    Steps land exactly on diagnostic and snapshot times; diagnostics are recorded every
    ``diagnostics.interval`` and at termination. Identical configs give identical outcomes.

    Args:
        config: Validated run configuration.
        initial_scale: Factor applied to the generated initial data, used by perturbation checks.
    """
    ws = make_workspace(config)
    coeffs = make_coefficients(config)
    frame = make_frame(config)
    ctl = StepControl.from_config(config.time)
    T = config.time.T_final
    besov = _besov_params(config)

    initial = generate_initial_data(config.initial, ws.grid, ws)
    state = State(0.0, initial.u0 * initial_scale, initial.zeta0 * initial_scale)

    monitor = SlopeMonitor.for_state(state, coeffs, config.diagnostics.eps0, ws)

    record_times = event_times(T, config.diagnostics.interval)
    snapshot_times = event_times(T, config.snapshots.interval, config.snapshots.times)
    events = sorted(set(record_times) | set(snapshot_times))
    record_set = set(record_times)
    snapshot_set = set(snapshot_times)

    outcome = RunOutcome(
        status=RunStatus.COMPLETED, final_time=0.0, coefficients=coeffs, monitor=monitor, initial=initial
    )
    outcome.records.append(make_record(state, ws, monitor=monitor, besov=besov))
    outcome.snapshots.append(state)

    logger.info(
        f"Starting run: preset={coeffs.preset}, n={ws.grid.n_points}, L={ws.grid.length:.6g}, T={T}, "
        f"E(0)={outcome.records[0].E:.6g}"
    )

    previous_min_ux = float(np.min(ws.derivative_values(state.u.values, 1)))
    initial_tail = spectral_tail_fraction(state.u.values, ws)
    tail_floor = max(ctl.resolution_tolerance, RESOLUTION_GROWTH * initial_tail)
    steepening = 0
    event_index = 1

    while event_index < len(events):
        target = events[event_index]
        dt = adaptive_dt(state, coeffs, ctl)
        collapsed = dt <= ctl.dt_min

        # land exactly on the next event
        if state.t + dt >= target - 1e-12 * max(1.0, target):
            dt = target - state.t
            landing = True
        else:
            landing = False

        try:
            state = step_rk4(state, dt, coeffs, frame, ws)
        except NonFiniteError as e:
            logger.warning(f"❌ Non-finite state: {e}")
            outcome.status = RunStatus.NONFINITE_ABORT
            outcome.failure = str(e)
            break

        outcome.steps += 1

        if landing:
            state = replace(state, t=target)
            event_index += 1

        min_ux = float(np.min(ws.derivative_values(state.u.values, 1)))
        decreasing = min_ux < previous_min_ux
        previous_min_ux = min_ux
        steepening = steepening + 1 if decreasing else 0

        trigger = None
        if -min_ux >= ctl.breaking_threshold:
            trigger = BreakingTrigger.THRESHOLD
        elif collapsed and decreasing:
            trigger = BreakingTrigger.DT_COLLAPSE
        elif steepening >= STEEPENING_STEPS and spectral_tail_fraction(state.u.values, ws) > tail_floor:
            trigger = BreakingTrigger.RESOLUTION

        if trigger is not None:
            outcome.status = RunStatus.BREAKING_DETECTED
            outcome.breaking_trigger = trigger
            outcome.records.append(make_record(state, ws, monitor=monitor, besov=besov, previous=outcome.records[-1]))
            outcome.snapshots.append(state)
            logger.info(f"Breaking detected at t={state.t:.6g} ({trigger.value}), min u_x={min_ux:.6g}")
            break

        if landing:
            if target in record_set:
                outcome.records.append(
                    make_record(state, ws, monitor=monitor, besov=besov, previous=outcome.records[-1])
                )
                logger.debug(f"t={state.t:.6g} E={outcome.records[-1].E:.12g} min u_x={min_ux:.6g}")

            if target in snapshot_set:
                outcome.snapshots.append(state)

    outcome.final_time = state.t

    logger.info(
        f"Run finished with status {outcome.status.value} at t={outcome.final_time:.6g} after {outcome.steps} steps"
    )

    return outcome


def run_with_analysis(config: RunConfig) -> RunOutcome:
    """
    ``run`` followed by the configured characteristics tracing and perturbation check.
    """
    outcome = run(config)
    seeds = flowmap_seeds(config)

    if seeds and outcome.status is not RunStatus.NONFINITE_ABORT:
        ws = make_workspace(config)
        outcome.flow = evolve_flowmap(outcome, seeds, config.flowmap.max_dt, ws)

        if outcome.coefficients is not None and outcome.coefficients.is_sigma0:
            outcome.alongflow = verify_alongflow_ode(outcome, outcome.flow, config.flowmap.max_dt, ws)

    if config.diagnostics.perturbation is not None:
        outcome.perturbation = perturbation_check(config, config.diagnostics.perturbation, baseline=outcome)

    return outcome


def flowmap_seeds(config: RunConfig) -> list[float]:
    seeds = list(config.flowmap.seeds)
    n = config.flowmap.n_seeds

    if n > 0:
        seeds.extend(config.grid.L * k / n for k in range(n))

    return sorted(set(seeds))


# --- continuity with respect to initial data ---


@dataclass(frozen=True)
class PerturbationReport:
    delta: float
    initial_distance: float
    final_distance: float
    final_time: float
    statuses: tuple[str, str]

    @property
    def amplification(self) -> float:
        if self.initial_distance == 0.0:
            return 0.0

        return self.final_distance / self.initial_distance


def _distance(a: State, b: State, ws: SpectralWorkspace) -> float:
    """``H¹ × L²`` distance, the square root of the energy of the difference."""
    diff = State(a.t, a.u - b.u, a.zeta - b.zeta)

    return math.sqrt(energy(diff, ws))


def perturbation_check(config: RunConfig, delta: float, baseline: RunOutcome | None = None) -> PerturbationReport:
    """
    Compare a run with one whose initial data is scaled by ``1 + delta``.

    Both runs stop at the earlier of their final times; the distance there is compared with the
    initial one.
    """
    if delta == 0:
        raise ValueError("delta must be non-zero")

    ws = make_workspace(config)
    baseline = baseline or run(config)
    perturbed = run(config, initial_scale=1.0 + delta)

    initial_distance = _distance(baseline.snapshots[0], perturbed.snapshots[0], ws)

    # compare at the last snapshot time both runs reached
    times_a = {s.t: s for s in baseline.snapshots}
    common = [s for s in perturbed.snapshots if s.t in times_a]
    last = common[-1]

    report = PerturbationReport(
        delta=delta,
        initial_distance=initial_distance,
        final_distance=_distance(times_a[last.t], last, ws),
        final_time=last.t,
        statuses=(baseline.status.value, perturbed.status.value),
    )

    logger.info(
        f"Perturbation delta={delta}: distance {report.initial_distance:.3e} -> {report.final_distance:.3e} "
        f"at t={report.final_time:.6g}"
    )

    return report
