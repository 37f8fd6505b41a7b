"""
Scalar monitors of a state, slope bounds for the ``σ = 0`` system and characteristics.

Sup-norms are grid maxima of spectrally computed fields, optionally refined on the trigonometric
interpolant, so they are lower bounds of the true suprema.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import minimize_scalar

from ch_vorticity.besov import BesovParams, besov_norm
from ch_vorticity.model import Coefficients, State, coefficients_from_preset
from ch_vorticity.spectral import ComplexArray, FloatArray, SpectralWorkspace, workspace_for

if TYPE_CHECKING:
    from ch_vorticity.timestep import RunOutcome

logger = logging.getLogger(__name__)

ENERGY_BOUNDARY = 1.0 / 3.0
SQRT6_CONSTANT = 11.0 * math.sqrt(6.0) / 36.0
NEWTON_ITERATIONS = 4
NEWTON_RESIDUAL = 1e-8
ALONGFLOW_TOLERANCE = 1e-4


class ValidationError(ValueError):
    """Raised when an operation's preconditions do not hold."""


# --- state monitors ---


def energy(state: State, workspace: SpectralWorkspace | None = None) -> float:
    """``E = ∫(u² + u_x² + ζ²) dx`` by the uniform-grid sum, spectrally accurate for periodic integrands."""
    ws = workspace or workspace_for(state.grid)
    u = state.u.values
    ux = ws.derivative_values(u, 1)
    zeta = state.zeta.values

    return float(state.grid.dx * np.sum(u * u + ux * ux + zeta * zeta))


def blowup_integrand(state: State, workspace: SpectralWorkspace | None = None) -> float:
    """
    ``Σ_{k=1,2}(‖u‖^k + ‖ζ‖^k) + ‖u_x‖ + ‖ζ_x‖(1 + ‖ζ‖) + ‖u‖²‖ζ‖`` with sup-norms over the grid.

    Its time integral must diverge at a finite maximal existence time.
    """
    ws = workspace or workspace_for(state.grid)
    u = state.u.values
    zeta = state.zeta.values

    nu = float(np.max(np.abs(u)))
    nz = float(np.max(np.abs(zeta)))
    nux = float(np.max(np.abs(ws.derivative_values(u, 1))))
    nzx = float(np.max(np.abs(ws.derivative_values(zeta, 1))))

    return nu + nu * nu + nz + nz * nz + nux + nzx * (1.0 + nz) + nu * nu * nz


@dataclass(frozen=True)
class UxExtrema:
    """``m = inf u_x`` at ``xi`` and ``M = sup u_x`` at ``gamma``."""

    m: float
    M: float
    xi: float
    gamma: float
    refined: bool = True


def _refine_extremum(
    ws: SpectralWorkspace,
    spectrum: ComplexArray,
    index: int,
    grid_value: float,
    *,
    minimum: bool,
) -> tuple[float, float, bool]:
    grid = ws.grid
    x0 = float(grid.x[index])
    ux_spec = ws.derivative_multipliers[1] * spectrum
    uxx_spec = ws.derivative_multipliers[2] * spectrum
    uxxx_spec = ws.derivative_multipliers[3] * spectrum

    def evaluate(spec, x):
        return float(np.real(ws.interpolation_matrix([x]) @ spec)[0])

    x = x0
    residual = evaluate(uxx_spec, x)

    for _ in range(NEWTON_ITERATIONS):
        if abs(residual) < NEWTON_RESIDUAL:
            break

        curvature = evaluate(uxxx_spec, x)
        if curvature == 0.0:
            return x0, grid_value, False

        x -= residual / curvature

        if abs(x - x0) > grid.dx:
            return x0, grid_value, False

        residual = evaluate(uxx_spec, x)

    if abs(residual) >= NEWTON_RESIDUAL:
        return x0, grid_value, False

    value = evaluate(ux_spec, x)

    # a step toward a neighboring saddle is not an improvement
    if (minimum and value > grid_value) or (not minimum and value < grid_value):
        return x0, grid_value, False

    return x % grid.length, value, True


def extrema_ux(state: State, workspace: SpectralWorkspace | None = None) -> UxExtrema:
    """
    Extrema of ``u_x``: grid argmin/argmax (ties go to the smallest index), refined by Newton steps
    on ``u_xx`` of the interpolant.

    Refinement is skipped, and flagged through ``refined``, when ``u_xxx`` vanishes, the step leaves
    the grid cell or the residual stays above 1e-8.
    """
    ws = workspace or workspace_for(state.grid)
    spectrum = ws.spectrum(state.u.values)
    ux = ws.synthesize(ws.derivative_multipliers[1] * spectrum)

    i_min = int(np.argmin(ux))
    i_max = int(np.argmax(ux))

    xi, m, min_refined = _refine_extremum(ws, spectrum, i_min, float(ux[i_min]), minimum=True)
    gamma, M, max_refined = _refine_extremum(ws, spectrum, i_max, float(ux[i_max]), minimum=False)

    if not (min_refined and max_refined):
        logger.debug(f"Newton refinement of u_x extrema skipped at t={state.t} (grid values used)")

    return UxExtrema(m=m, M=M, xi=xi, gamma=gamma, refined=min_refined and max_refined)


# --- global existence condition and slope bounds ---


@dataclass(frozen=True)
class GlobalConditionReport:
    E0: float
    boundary: float
    satisfied: bool
    eps0_interval: tuple[float, float] | None


def check_global_condition(state0: State, workspace: SpectralWorkspace | None = None) -> GlobalConditionReport:
    """
    Small-energy condition ``E(0) < 1/3`` and the admissible ``ε0`` interval ``(0, 1/3 - E(0))``.
    """
    E0 = energy(state0, workspace)
    satisfied = E0 < ENERGY_BOUNDARY

    return GlobalConditionReport(
        E0=E0,
        boundary=ENERGY_BOUNDARY,
        satisfied=satisfied,
        eps0_interval=(0.0, ENERGY_BOUNDARY - E0) if satisfied else None,
    )


@dataclass(frozen=True)
class SlopeBounds:
    upper: float
    lower: float
    eps0: float
    E0: float


def _require_sigma0(coeffs: Coefficients | None) -> None:
    if coeffs is not None and not coeffs.is_sigma0:
        raise ValidationError(f"Slope bounds apply only to the sigma0 preset, got preset '{coeffs.preset}'")


def _lower_slope(E0: float, eps0: float, inf_rho2: float) -> float:
    return (0.5 - 1.5 * (E0 + eps0)) * inf_rho2 - 1.0 / (24.0 * eps0) - 7.0 / 6.0 - SQRT6_CONSTANT


def lemma52_bounds(
    state0: State,
    eps0: float,
    coeffs: Coefficients | None = None,
    workspace: SpectralWorkspace | None = None,
) -> SlopeBounds:
    """
    Slopes of the linear-in-time bounds on ``u_x`` for the ``σ = 0``, ``A = 0`` system.

    ``sup u_x(t) <= sup u_0x + upper·t`` with ``upper = 2 sup ρ0² + 3/8 + 11√6/36`` and
    ``inf u_x(t) >= inf u_0x + lower·t`` with
    ``lower = (1/2 - 3/2 (E(0) + ε0)) inf ρ0² - 1/(24 ε0) - 7/6 - 11√6/36``.

    Args:
        state0: Initial state.
        eps0: Free parameter, in ``(0, 1/3 - E(0))``.
        coeffs: Model coefficients; when given they must be those of the sigma0 preset.
        workspace: Spectral workspace of the state's grid.

    Raises:
        ValidationError: If ``eps0`` is out of range or the coefficients are not the sigma0 preset.
    """
    _require_sigma0(coeffs)

    E0 = energy(state0, workspace)
    upper_eps = ENERGY_BOUNDARY - E0

    if not 0.0 < eps0 < upper_eps:
        raise ValidationError(f"eps0 must lie in (0, {upper_eps:.6g}) for E(0) = {E0:.6g}, got {eps0}")

    rho2 = np.square(state0.rho.values)

    return SlopeBounds(
        upper=2.0 * float(np.max(rho2)) + 3.0 / 8.0 + SQRT6_CONSTANT,
        lower=_lower_slope(E0, eps0, float(np.min(rho2))),
        eps0=eps0,
        E0=E0,
    )


def default_eps0(state0: State, workspace: SpectralWorkspace | None = None) -> float:
    """Midpoint of the admissible interval."""
    E0 = energy(state0, workspace)

    if E0 >= ENERGY_BOUNDARY:
        raise ValidationError(f"No admissible eps0: E(0) = {E0:.6g} >= 1/3")

    return 0.5 * (ENERGY_BOUNDARY - E0)


def optimal_eps0(state0: State, workspace: SpectralWorkspace | None = None) -> tuple[float, float]:
    """
    The ``ε0`` maximizing the lower slope over the admissible interval, with that slope.
    """
    E0 = energy(state0, workspace)

    if E0 >= ENERGY_BOUNDARY:
        raise ValidationError(f"No admissible eps0: E(0) = {E0:.6g} >= 1/3")

    inf_rho2 = float(np.min(np.square(state0.rho.values)))
    upper_eps = ENERGY_BOUNDARY - E0

    result = minimize_scalar(
        lambda eps: -_lower_slope(E0, eps, inf_rho2),
        bounds=(upper_eps * 1e-9, upper_eps * (1.0 - 1e-9)),
        method="bounded",
        options={"xatol": 1e-12},
    )

    return float(result.x), float(-result.fun)


@dataclass(frozen=True)
class SlopeMonitor:
    """
    Checks ``inf u_x(t) >= inf u_0x + lower·t`` and ``sup u_x(t) <= sup u_0x + upper·t`` at each record.
    """

    slopes: SlopeBounds
    inf_ux0: float
    sup_ux0: float
    optimal_eps0: float
    optimal_lower: float

    @classmethod
    def for_state(
        cls,
        state0: State,
        coeffs: Coefficients,
        eps0: float | None = None,
        workspace: SpectralWorkspace | None = None,
    ) -> "SlopeMonitor | None":
        """The monitor of ``state0``, or None when the sigma0 preset or ``E(0) < 1/3`` does not hold."""
        if not coeffs.is_sigma0:
            return None

        condition = check_global_condition(state0, workspace)
        if not condition.satisfied:
            logger.info(f"Slope monitor inactive: E(0) = {condition.E0:.6g} >= 1/3")
            return None

        if eps0 is None:
            eps0 = default_eps0(state0, workspace)

        extrema = extrema_ux(state0, workspace)
        best_eps0, best_lower = optimal_eps0(state0, workspace)

        return cls(
            slopes=lemma52_bounds(state0, eps0, coeffs, workspace),
            inf_ux0=extrema.m,
            sup_ux0=extrema.M,
            optimal_eps0=best_eps0,
            optimal_lower=best_lower,
        )

    def bounds(self, t: float) -> tuple[float, float]:
        """``(upper, lower)`` bounds at time ``t``."""
        return self.sup_ux0 + self.slopes.upper * t, self.inf_ux0 + self.slopes.lower * t

    def check(self, t: float, min_ux: float, max_ux: float) -> tuple[bool, bool]:
        upper, lower = self.bounds(t)

        return max_ux <= upper, min_ux >= lower


# --- per-record diagnostics ---


@dataclass
class DiagnosticsRecord:
    t: float
    E: float
    min_ux: float
    max_ux: float
    argmin_x: float
    argmax_x: float
    blowup_integrand: float
    blowup_integral: float = 0.0
    lemma52_upper_bound: float | None = None
    lemma52_lower_bound: float | None = None
    lemma52_upper_ok: bool | None = None
    lemma52_lower_ok: bool | None = None
    besov_u_s: float | None = None
    besov_zeta_sm1: float | None = None
    refined: bool = True


def make_record(
    state: State,
    workspace: SpectralWorkspace | None = None,
    *,
    monitor: SlopeMonitor | None = None,
    besov: BesovParams | None = None,
    previous: DiagnosticsRecord | None = None,
) -> DiagnosticsRecord:
    """
    Evaluate every monitor on ``state``.

    ``blowup_integral`` accumulates the integrand with the trapezoid rule from ``previous``.
    """
    ws = workspace or workspace_for(state.grid)
    extrema = extrema_ux(state, ws)
    integrand = blowup_integrand(state, ws)

    integral = 0.0
    if previous is not None:
        integral = previous.blowup_integral + 0.5 * (previous.blowup_integrand + integrand) * (state.t - previous.t)

    record = DiagnosticsRecord(
        t=state.t,
        E=energy(state, ws),
        min_ux=extrema.m,
        max_ux=extrema.M,
        argmin_x=extrema.xi,
        argmax_x=extrema.gamma,
        blowup_integrand=integrand,
        blowup_integral=integral,
        refined=extrema.refined,
    )

    if monitor is not None:
        record.lemma52_upper_bound, record.lemma52_lower_bound = monitor.bounds(state.t)
        record.lemma52_upper_ok, record.lemma52_lower_ok = monitor.check(state.t, extrema.m, extrema.M)

        if not (record.lemma52_upper_ok and record.lemma52_lower_ok):
            logger.warning(f"Slope bound violated at t={state.t}: min u_x={extrema.m}, max u_x={extrema.M}")

    if besov is not None:
        record.besov_u_s = besov_norm(state.u, besov, ws)
        record.besov_zeta_sm1 = besov_norm(state.zeta, BesovParams(besov.s - 1.0, besov.p, besov.r), ws)

    return record


# --- characteristics ---


@dataclass
class FlowMap:
    """
    Characteristics ``q(t, x_j)`` with the velocity ``ū`` and elevation ``ζ̄`` sampled along them.

    ``q`` is unwrapped (not reduced modulo L) and has shape ``(len(times), len(seeds))``.
    """

    seeds: FloatArray
    times: FloatArray
    q: FloatArray
    u_bar: FloatArray
    zeta_bar: FloatArray
    length: float

    @property
    def rho_bar(self) -> FloatArray:
        return self.zeta_bar + 1.0

    @property
    def monotone(self) -> bool:
        """True when ordered seeds stay strictly ordered, including across the periodic wrap."""
        if self.q.shape[1] < 2:  # noqa: PLR2004
            return True

        gaps = np.diff(self.q, axis=1)
        wrap = self.q[:, 0] + self.length - self.q[:, -1]

        return bool(np.all(gaps > 0) and np.all(wrap > 0))


class _SnapshotVelocity:
    """Fields of stored snapshots, linear in time between them, evaluated on the interpolant."""

    def __init__(self, snapshots: Sequence[State], workspace: SpectralWorkspace):
        self.ws = workspace
        self.times = np.array([s.t for s in snapshots])
        self.u = np.array([workspace.spectrum(s.u.values) for s in snapshots])
        self.ux = self.u * workspace.derivative_multipliers[1]
        self.zeta = np.array([workspace.spectrum(s.zeta.values) for s in snapshots])

    def sample(self, spectra: np.ndarray, k: int, theta: float, q: FloatArray) -> FloatArray:
        if theta == 0.0:
            spec = spectra[k]
        elif theta == 1.0:
            spec = spectra[k + 1]
        else:
            spec = (1.0 - theta) * spectra[k] + theta * spectra[k + 1]

        return np.real(self.ws.interpolation_matrix(q) @ spec)


def _trace_characteristics(
    velocity: _SnapshotVelocity,
    seeds: FloatArray,
    max_dt: float,
    b3: float | None = None,
) -> tuple[FloatArray, FloatArray]:
    """
    RK4 for ``q_t = u(t, q)``, and for ``(ln ρ̄)_t = -u_x(t, q)(1 + b3 ū²)`` when ``b3`` is given.

    Returns ``q`` and ``ln ρ̄ - ln ρ̄(0)`` at every snapshot time.
    """
    n_times = len(velocity.times)
    q = np.array(seeds, dtype=np.float64)
    log_rho = np.zeros_like(q)
    q_out = np.empty((n_times, len(q)))
    log_out = np.zeros((n_times, len(q)))
    q_out[0] = q

    def field(k, theta, position):
        dq = velocity.sample(velocity.u, k, theta, position)

        if b3 is None:
            return dq, np.zeros_like(dq)

        ux = velocity.sample(velocity.ux, k, theta, position)

        return dq, -ux * (1.0 + b3 * dq * dq)

    for k in range(n_times - 1):
        span = velocity.times[k + 1] - velocity.times[k]
        n_sub = max(1, math.ceil(span / max_dt - 1e-9))
        h = span / n_sub

        for i in range(n_sub):
            theta0 = i / n_sub
            theta_half = (i + 0.5) / n_sub
            theta1 = (i + 1) / n_sub

            k1q, k1l = field(k, theta0, q)
            k2q, k2l = field(k, theta_half, q + 0.5 * h * k1q)
            k3q, k3l = field(k, theta_half, q + 0.5 * h * k2q)
            k4q, k4l = field(k, theta1, q + h * k3q)

            q = q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
            log_rho = log_rho + h / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l)

        q_out[k + 1] = q
        log_out[k + 1] = log_rho

    return q_out, log_out


def _validated_seeds(seeds: ArrayLike, length: float) -> FloatArray:
    seeds = np.sort(np.asarray(seeds, dtype=np.float64).ravel())

    if np.any(seeds < 0.0) or np.any(seeds >= length):
        raise ValidationError(f"Seeds must lie in [0, {length})")

    return seeds


def _snapshots(run: "RunOutcome") -> list[State]:
    snapshots = sorted(run.snapshots, key=lambda s: s.t)

    if not snapshots:
        raise ValidationError("The run stored no snapshots to trace characteristics through")

    return snapshots


def evolve_flowmap(
    run: "RunOutcome",
    seeds: ArrayLike,
    max_dt: float = 0.01,
    workspace: SpectralWorkspace | None = None,
) -> FlowMap:
    """
    Integrate characteristics ``q_t = u(t, q)``, ``q(0) = x_j`` through the stored snapshots.

    Velocity is the trigonometric interpolant in space and linear in time between snapshots.

    Raises:
        ValidationError: If a seed lies outside ``[0, L)`` or the run stored no snapshots.
    """
    snapshots = _snapshots(run)
    grid = snapshots[0].grid
    ws = workspace or workspace_for(grid)
    seeds = _validated_seeds(seeds, grid.length)

    velocity = _SnapshotVelocity(snapshots, ws)
    q, _ = _trace_characteristics(velocity, seeds, max_dt)

    u_bar = np.array([np.real(ws.interpolation_matrix(q[k]) @ velocity.u[k]) for k in range(len(q))])
    zeta_bar = np.array([np.real(ws.interpolation_matrix(q[k]) @ velocity.zeta[k]) for k in range(len(q))])

    logger.debug(f"Traced {len(seeds)} characteristics through {len(snapshots)} snapshots")

    return FlowMap(seeds=seeds, times=velocity.times, q=q, u_bar=u_bar, zeta_bar=zeta_bar, length=grid.length)


@dataclass(frozen=True)
class AlongFlowReport:
    """
    Mismatch between ``ρ̄`` from the along-flow ODE and ``ρ`` interpolated at ``q(t)``.
    """

    max_mismatch: float
    extremum_mismatch: float
    extremum_seed: float
    trajectory_mismatch: float
    positive: bool
    tolerance: float = ALONGFLOW_TOLERANCE

    @property
    def passed(self) -> bool:
        return self.positive and self.max_mismatch < self.tolerance and self.extremum_mismatch < self.tolerance


def verify_alongflow_ode(
    run: "RunOutcome",
    flow: FlowMap,
    max_dt: float = 0.01,
    workspace: SpectralWorkspace | None = None,
) -> AlongFlowReport:
    """
    Integrate ``dρ̄/dt = -ρ̄ u_x(t, q)(1 - 3ū²)`` in exponential form along each traced
    characteristic, and along the one starting at the initial argmax of ``u_x``.

    Raises:
        ValidationError: If the run does not use the sigma0 preset.
    """
    coeffs = getattr(run, "coefficients", None)
    _require_sigma0(coeffs)

    snapshots = _snapshots(run)
    grid = snapshots[0].grid
    ws = workspace or workspace_for(grid)
    velocity = _SnapshotVelocity(snapshots, ws)

    extremum_seed = extrema_ux(snapshots[0], ws).gamma
    seeds = np.append(flow.seeds, extremum_seed)
    b3 = coefficients_from_preset("sigma0").b3

    q, log_rho = _trace_characteristics(velocity, seeds, max_dt, b3=b3)

    rho_initial = 1.0 + np.real(ws.interpolation_matrix(seeds) @ velocity.zeta[0])
    rho_ode = rho_initial[np.newaxis, :] * np.exp(log_rho)
    rho_field = np.array([1.0 + np.real(ws.interpolation_matrix(q[k]) @ velocity.zeta[k]) for k in range(len(q))])

    mismatch = np.abs(rho_ode - rho_field) / np.maximum(np.abs(rho_field), np.finfo(float).tiny)
    n = len(flow.seeds)

    trajectory_mismatch = float(np.max(np.abs(q[:, :n] - flow.q))) if n else 0.0

    report = AlongFlowReport(
        max_mismatch=float(np.max(mismatch[:, :n])) if n else 0.0,
        extremum_mismatch=float(np.max(mismatch[:, n])),
        extremum_seed=float(extremum_seed),
        trajectory_mismatch=trajectory_mismatch,
        positive=bool(np.all(rho_ode > 0.0)),
    )

    logger.info(
        f"Along-flow check: max mismatch {report.max_mismatch:.3e}, extremum mismatch {report.extremum_mismatch:.3e}"
    )

    return report
