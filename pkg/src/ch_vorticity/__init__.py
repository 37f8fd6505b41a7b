from ch_vorticity import defaults
from ch_vorticity.besov import BesovParams, besov_norm, lowpass_s, lp_block
from ch_vorticity.config import parse_config
from ch_vorticity.diagnostics import (
    energy,
    evolve_flowmap,
    extrema_ux,
    lemma52_bounds,
    optimal_eps0,
    verify_alongflow_ode,
)
from ch_vorticity.friedrichs import friedrichs_iterate, run_friedrichs
from ch_vorticity.initial_data import generate_initial_data
from ch_vorticity.model import (
    Coefficients,
    Frame,
    State,
    audit_coefficient_identities,
    coefficients_from_coriolis,
    coefficients_from_preset,
    coefficients_from_vorticity,
    rhs_m_form,
    rhs_nonlocal,
)
from ch_vorticity.output import read_snapshot, write_snapshot, write_timeseries
from ch_vorticity.spectral import Field, Grid, apply_pd, dealias_product, derivative, helmholtz_inverse
from ch_vorticity.timestep import perturbation_check, run, step_rk4

apply_PD = apply_pd
lowpass_S = lowpass_s


__all__ = [
    "BesovParams",
    "Coefficients",
    "Field",
    "Frame",
    "Grid",
    "State",
    "apply_PD",
    "apply_pd",
    "audit_coefficient_identities",
    "besov_norm",
    "coefficients_from_coriolis",
    "coefficients_from_preset",
    "coefficients_from_vorticity",
    "dealias_product",
    "defaults",
    "derivative",
    "energy",
    "evolve_flowmap",
    "extrema_ux",
    "friedrichs_iterate",
    "generate_initial_data",
    "helmholtz_inverse",
    "lemma52_bounds",
    "lowpass_S",
    "lowpass_s",
    "lp_block",
    "optimal_eps0",
    "parse_config",
    "perturbation_check",
    "read_snapshot",
    "rhs_m_form",
    "rhs_nonlocal",
    "run",
    "run_friedrichs",
    "step_rk4",
    "verify_alongflow_ode",
    "write_snapshot",
    "write_timeseries",
]
