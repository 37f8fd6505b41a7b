"""
Friedrichs regularization experiment.

Starting from ``u⁽⁰⁾ = ζ⁽⁰⁾ = 0``, iterate ``j + 1`` solves the linear transport system

    ∂t u⁽ʲ⁺¹⁾ + σ u⁽ʲ⁾ ∂x u⁽ʲ⁺¹⁾ = F(u⁽ʲ⁾, ζ⁽ʲ⁾)
    ∂t ζ⁽ʲ⁺¹⁾ + (u⁽ʲ⁾ + b1 (ζ⁽ʲ⁾)² + 2 b1 ζ⁽ʲ⁾) ∂x ζ⁽ʲ⁺¹⁾ = G(u⁽ʲ⁾, ζ⁽ʲ⁾)

with low-pass data ``(S_{j+1} u0, S_{j+1} ζ0)``. The coefficient fields come from the stored trajectory
of iterate ``j``, interpolated in time by cubic splines.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from ch_vorticity import defaults
from ch_vorticity.besov import BesovParams, besov_norm, lowpass_s
from ch_vorticity.config import make_coefficients, make_workspace
from ch_vorticity.diagnostics import make_record
from ch_vorticity.initial_data import generate_initial_data
from ch_vorticity.model import Coefficients, Frame, State, forcing_values, transport_values
from ch_vorticity.schema import RunConfig
from ch_vorticity.spectral import Field, FloatArray, SolverError, SpectralWorkspace, workspace_for
from ch_vorticity.timestep import RunOutcome, RunStatus, StepControl, adaptive_dt, step_rk4

logger = logging.getLogger(__name__)


class IterationError(SolverError):
    """Raised when a Friedrichs iterate stops being finite."""

    def __init__(self, message: str, *, iteration: int, stage: int | None = None):
        super().__init__(message)
        self.iteration = iteration
        self.stage = stage


@dataclass
class Trajectory:
    """Values of one iterate at the uniform step times."""

    times: FloatArray
    u: FloatArray
    zeta: FloatArray
    _splines: tuple[CubicSpline, CubicSpline] | None = field(default=None, init=False, repr=False)

    @classmethod
    def zero(cls, times: FloatArray, n_points: int) -> "Trajectory":
        zeros = np.zeros((len(times), n_points))

        return cls(times, zeros, zeros.copy())

    def at(self, t: float) -> tuple[FloatArray, FloatArray]:
        if self._splines is None:
            self._splines = (CubicSpline(self.times, self.u, axis=0), CubicSpline(self.times, self.zeta, axis=0))

        spline_u, spline_zeta = self._splines

        return spline_u(t), spline_zeta(t)

    def final(self, grid) -> State:
        return State(float(self.times[-1]), Field(grid, self.u[-1]), Field(grid, self.zeta[-1]))


@dataclass
class FriedrichsResult:
    differences: list[float]
    """
    ``d_j`` for ``j = 0 .. iterations``: Besov distance of consecutive iterates at the final time.
    """
    lowpass_errors: list[float]
    """
    ``‖S_{j+1} u0 - u0‖_{L²}`` for ``j = 0 .. iterations``.
    """
    final_iterate: State
    direct: State
    direct_distance: float
    """
    Distance of the last iterate to the nonlinear solution, in the norm used for ``d_j``.
    """
    dt: float
    n_steps: int
    s: float

    @property
    def ratios(self) -> list[float | None]:
        """``d_{j+1} / d_j``, ``None`` where ``d_j`` vanishes."""
        return [
            None if previous == 0.0 else current / previous
            for previous, current in zip(self.differences, self.differences[1:], strict=False)
        ]


def iterate_distance(u_a: Field, zeta_a: Field, u_b: Field, zeta_b: Field, s: float, ws: SpectralWorkspace) -> float:
    """``‖u_a - u_b‖_{B^{s-1}_{2,2}} + ‖ζ_a - ζ_b‖_{B^{s-2}_{2,2}}``."""
    return besov_norm(u_a - u_b, BesovParams(s - 1.0), ws) + besov_norm(zeta_a - zeta_b, BesovParams(s - 2.0), ws)


def _solve_linear(
    previous: Trajectory,
    u_start: Field,
    zeta_start: Field,
    coeffs: Coefficients,
    dt: float,
    ws: SpectralWorkspace,
    iteration: int,
) -> Trajectory:
    def rhs(ws_, t, u, zeta):
        velocity, elevation = previous.at(t)
        forcing_u, forcing_zeta = forcing_values(ws_, velocity, elevation, coeffs)
        transport_u, transport_zeta = transport_values(ws_, velocity, elevation, u, zeta, coeffs)

        return transport_u + forcing_u, transport_zeta + forcing_zeta

    times = previous.times
    u = np.empty_like(previous.u)
    zeta = np.empty_like(previous.zeta)
    state = State(0.0, u_start, zeta_start)
    u[0], zeta[0] = state.u.values, state.zeta.values

    for k in range(1, len(times)):
        try:
            state = step_rk4(state, dt, coeffs, Frame.TRANSLATED, ws, rhs=rhs)
        except SolverError as e:
            raise IterationError(
                f"Iterate {iteration} is not finite at t={state.t:.6g}: {e}",
                iteration=iteration,
                stage=getattr(e, "stage", None),
            ) from e

        u[k], zeta[k] = state.u.values, state.zeta.values

    return Trajectory(times, u, zeta)


def friedrichs_iterate(
    state0: State,
    coeffs: Coefficients,
    *,
    iterations: int = 8,
    T: float = 0.5,
    dt: float | None = None,
    s: float = 3.0,
    workspace: SpectralWorkspace | None = None,
) -> FriedrichsResult:
    """
    Run ``iterations + 1`` linear transport solves and measure consecutive differences at ``T``.

    Args:
        state0: Initial data ``(u0, ζ0)`` of the nonlinear problem.
        coeffs: Model coefficients.
        iterations: ``j_max``; differences ``d_0 .. d_{j_max}`` are returned.
        T: Final time of every solve.
        dt: Step of every solve, shortened to divide ``T``. Defaults to a quarter of the CFL step of ``state0``.
        s: Regularity index; ``u`` is measured in ``B^{s-1}_{2,2}`` and ``ζ`` in ``B^{s-2}_{2,2}``.
        workspace: Spectral workspace of the grid.

    Raises:
        IterationError: If an iterate becomes non-finite; ``iteration`` is its index.
    """
    if iterations < 0:
        raise ValueError(f"iterations must be non-negative, got {iterations}")
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")

    grid = state0.grid
    ws = workspace or workspace_for(grid)

    if dt is None:
        dt = adaptive_dt(state0, coeffs, StepControl()) / defaults.FRIEDRICHS_DT_DIVISOR

    n_steps = max(1, math.ceil(T / dt - 1e-9))
    dt = T / n_steps
    times = np.linspace(0.0, T, n_steps + 1)

    previous = Trajectory.zero(times, grid.n_points)
    differences = []
    lowpass_errors = []

    for j in range(iterations + 1):
        u_start = lowpass_s(state0.u, j + 1, ws)
        zeta_start = lowpass_s(state0.zeta, j + 1, ws)
        lowpass_errors.append(_l2(u_start - state0.u))

        current = _solve_linear(previous, u_start, zeta_start, coeffs, dt, ws, iteration=j + 1)

        last, before = current.final(grid), previous.final(grid)
        differences.append(iterate_distance(last.u, last.zeta, before.u, before.zeta, s, ws))
        logger.debug(f"Friedrichs iterate {j + 1}: d_{j} = {differences[-1]:.6e}")

        previous = current

    direct = state0
    for _ in range(n_steps):
        direct = step_rk4(direct, dt, coeffs, Frame.TRANSLATED, ws)
    direct = State(T, direct.u, direct.zeta)

    final_iterate = previous.final(grid)
    result = FriedrichsResult(
        differences=differences,
        lowpass_errors=lowpass_errors,
        final_iterate=final_iterate,
        direct=direct,
        direct_distance=iterate_distance(final_iterate.u, final_iterate.zeta, direct.u, direct.zeta, s, ws),
        dt=dt,
        n_steps=n_steps,
        s=s,
    )

    logger.info(
        f"Friedrichs iteration: d_{iterations} = {differences[-1]:.3e}, "
        f"distance to nonlinear solution {result.direct_distance:.3e}"
    )

    return result


def _l2(f: Field) -> float:
    return math.sqrt(f.grid.dx * float(np.sum(f.values**2)))


def run_friedrichs(config: RunConfig) -> tuple[FriedrichsResult, RunOutcome]:
    """
    Configured Friedrichs experiment, plus the direct nonlinear solution as a two-record run outcome.
    """
    ws = make_workspace(config)
    coeffs = make_coefficients(config)
    initial = generate_initial_data(config.initial, ws.grid, ws)
    state0 = initial.state
    settings = config.friedrichs

    dt = settings.dt
    if dt is None:
        dt = adaptive_dt(state0, coeffs, StepControl.from_config(config.time)) / defaults.FRIEDRICHS_DT_DIVISOR

    result = friedrichs_iterate(
        state0, coeffs, iterations=settings.iterations, T=settings.T, dt=dt, s=settings.s, workspace=ws
    )

    first = make_record(state0, ws)
    outcome = RunOutcome(
        status=RunStatus.COMPLETED,
        final_time=result.direct.t,
        records=[first, make_record(result.direct, ws, previous=first)],
        snapshots=[state0, result.direct],
        coefficients=coeffs,
        initial=initial,
        steps=result.n_steps,
    )

    return result, outcome
