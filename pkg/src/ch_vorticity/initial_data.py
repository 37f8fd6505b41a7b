"""
Library of initial profiles ``(u0, ζ0)`` on a periodic grid.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ch_vorticity import defaults
from ch_vorticity.diagnostics import ENERGY_BOUNDARY, ValidationError, energy
from ch_vorticity.model import State
from ch_vorticity.output import read_snapshot
from ch_vorticity.schema import InitialSchema
from ch_vorticity.spectral import Field, FloatArray, Grid, SpectralWorkspace, workspace_for

logger = logging.getLogger(__name__)


@dataclass
class InitialData:
    u0: Field
    zeta0: Field
    scale: float = 1.0
    """
    Factor applied to the raw profiles by energy rescaling.
    """
    warnings: list[str] = field(default_factory=list)

    @property
    def state(self) -> State:
        return State(0.0, self.u0, self.zeta0)


def _sech(s: FloatArray) -> FloatArray:
    return 1.0 / np.cosh(s)


def velocity_profile(spec: InitialSchema, x: FloatArray, center: float) -> FloatArray:
    """Closed-form ``u0`` of a generated profile kind."""
    a = spec.amplitude
    s = (x - center) / spec.width

    match spec.kind:
        case "gaussian":
            return a * np.exp(-(s**2))
        case "sech2":
            return a * _sech(s) ** 2
        case "sine_packet":
            return a * np.exp(-(s**2)) * np.cos(spec.wavenumber * (x - center))
        case "steep_front":
            return -a * np.tanh(s) * _sech(s)
        case _:
            raise ValueError(f"'{spec.kind}' is not a generated profile")


def _elevation_profile(spec: InitialSchema, x: FloatArray, center: float) -> FloatArray:
    width = spec.zeta_width if spec.zeta_width is not None else spec.width

    return spec.zeta_amplitude * np.exp(-(((x - center) / width) ** 2))


def _read_file(spec: InitialSchema, grid: Grid) -> tuple[Field, Field]:
    state = read_snapshot(spec.file)

    if state.grid.n_points != grid.n_points or not math.isclose(state.grid.length, grid.length, rel_tol=1e-12):
        raise ValidationError(
            f"Snapshot '{spec.file}' lives on a grid with n={state.grid.n_points}, L={state.grid.length}; "
            f"the run uses n={grid.n_points}, L={grid.length}"
        )

    return Field(grid, state.u.values), Field(grid, state.zeta.values)


def check_edge_decay(u0: Field, zeta0: Field, tolerance: float = defaults.EDGE_TOLERANCE) -> None:
    """
    Raises:
        ValidationError: If either field is not below ``tolerance`` at both ends of the domain.
    """
    edges = np.abs(np.array([u0.values[0], u0.values[-1], zeta0.values[0], zeta0.values[-1]]))
    worst = float(np.max(edges))

    if worst >= tolerance:
        raise ValidationError(
            f"Initial data does not decay at the domain edges (|value| = {worst:.3e} >= {tolerance:g}); "
            f"increase grid.L (currently {u0.grid.length:g}) or reduce the profile width"
        )


def rescale_to_energy(
    u0: Field, zeta0: Field, target: float, workspace: SpectralWorkspace | None = None
) -> tuple[float, Field, Field]:
    """
    Common factor ``λ`` with ``E(λ u0, λ ζ0) = target``, found by bracketed root search.

    Raises:
        ValidationError: If the profiles carry no energy to rescale.
    """
    ws = workspace or workspace_for(u0.grid)
    unit = energy(State(0.0, u0, zeta0), ws)

    if unit == 0.0:
        raise ValidationError("Cannot rescale zero initial data to a positive energy")

    def residual(scale: float) -> float:
        return energy(State(0.0, u0 * scale, zeta0 * scale), ws) - target

    upper = 2.0 * math.sqrt(target / unit)
    scale = brentq(residual, 0.0, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    reached = residual(scale)
    if abs(reached) >= defaults.ENERGY_TOLERANCE:
        raise ValidationError(f"Energy rescaling missed E(0) = {target} by {reached:.3e}")

    logger.debug(f"Rescaled initial data by {scale:.12g} to reach E(0) = {target}")

    return scale, u0 * scale, zeta0 * scale


def generate_initial_data(
    spec: InitialSchema, grid: Grid, workspace: SpectralWorkspace | None = None
) -> InitialData:
    """
    Build ``(u0, ζ0)`` for the run.

    Profiles are centered at ``spec.center`` (default ``L/2``) with ``s = (x - center)/width``. ``ζ0`` is a
    Gaussian of amplitude ``zeta_amplitude`` for every generated kind. With ``target_E0`` both fields are
    multiplied by one factor so that ``E(0)`` matches it.

    Raises:
        ValidationError: If the data does not decay at the edges, or a snapshot file lives on another grid.
    """
    ws = workspace or workspace_for(grid)
    warnings: list[str] = []

    if spec.kind == "file":
        u0, zeta0 = _read_file(spec, grid)
    else:
        center = spec.center if spec.center is not None else grid.length / 2.0
        u0 = Field(grid, velocity_profile(spec, grid.x, center))
        zeta0 = Field(grid, _elevation_profile(spec, grid.x, center))

    check_edge_decay(u0, zeta0)

    scale = 1.0
    if spec.target_E0 is not None:
        scale, u0, zeta0 = rescale_to_energy(u0, zeta0, spec.target_E0, ws)

    E0 = energy(State(0.0, u0, zeta0), ws)

    if spec.global_regime and E0 >= ENERGY_BOUNDARY:
        message = f"Global regime requested but E(0) = {E0:.6g} is not below {ENERGY_BOUNDARY:.6g}"
        logger.warning(message)
        warnings.append(message)

    logger.debug(f"Generated '{spec.kind}' initial data with E(0) = {E0:.6g}")

    return InitialData(u0=u0, zeta0=zeta0, scale=scale, warnings=warnings)
