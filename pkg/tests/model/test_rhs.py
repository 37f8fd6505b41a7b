import numpy as np
import pytest

from ch_vorticity.model import (
    Frame,
    State,
    coefficients_from_preset,
    rhs_m_form,
    rhs_nonlocal,
    rhs_nonlocal_values,
)
from ch_vorticity.spectral import Field, Grid, SolverError, derivative, workspace_for

PRESET_CASES = [
    {"name": "vorticity", "A": 1.0},
    {"name": "coriolis", "Omega": 1.0},
    {"name": "sigma0"},
]


def test_zero_state_is_stationary(grid):
    for case in PRESET_CASES:
        du, dzeta = rhs_nonlocal(State.zeros(grid), coefficients_from_preset(**case))

        assert np.all(du.values == 0.0)
        assert np.all(dzeta.values == 0.0)


@pytest.mark.parametrize("case", PRESET_CASES)
def test_momentum_form_agrees_with_nonlocal_form(case, random_smooth_state):
    grid = Grid(64, 2 * np.pi)
    coeffs = coefficients_from_preset(**case)

    for seed in range(20):
        state = random_smooth_state(seed, grid)
        du, dzeta = rhs_nonlocal(state, coeffs, Frame.ORIGINAL)
        mu, mrho = rhs_m_form(state, coeffs)

        scale = max(np.max(np.abs(du.values)), np.max(np.abs(dzeta.values)))
        assert np.max(np.abs(du.values - mu.values)) <= 1e-8 * scale
        assert np.max(np.abs(dzeta.values - mrho.values)) <= 1e-8 * scale


def test_frames_differ_by_the_linear_terms(smooth_state):
    coeffs = coefficients_from_preset("vorticity", A=1.0)
    du_t, dz_t = rhs_nonlocal(smooth_state, coeffs, Frame.TRANSLATED)
    du_o, dz_o = rhs_nonlocal(smooth_state, coeffs, "original")

    ux = derivative(smooth_state.u).values
    zx = derivative(smooth_state.zeta).values

    assert np.allclose(du_o.values - du_t.values, coeffs.a4 * ux, atol=1e-13)
    assert np.allclose(dz_o.values - dz_t.values, -coeffs.b1 * zx, atol=1e-13)


def test_frames_agree_without_shear(smooth_state):
    coeffs = coefficients_from_preset("sigma0")

    du_t, dz_t = rhs_nonlocal(smooth_state, coeffs, Frame.TRANSLATED)
    du_o, dz_o = rhs_nonlocal(smooth_state, coeffs, Frame.ORIGINAL)

    assert np.array_equal(du_t.values, du_o.values)
    assert np.array_equal(dz_t.values, dz_o.values)


def test_burgers_limit(grid):
    # σ = 1 without surface coupling reduces u_t to -u u_x + P(D)(u² + ½u_x²) at ζ = 0
    coeffs = coefficients_from_preset("custom", sigma=1.0, coefficients=[0] * 9)
    u = Field(grid, 0.5 * np.sin(grid.x))
    ws = workspace_for(grid)

    du, _ = rhs_nonlocal(State(0.0, u, Field.zeros(grid)), coeffs)
    ux = ws.derivative_values(u.values, 1)
    expected = -u.values * ux + ws.pd_values(u.values**2 + 0.5 * ux**2)

    assert np.allclose(du.values, expected, atol=1e-13)


def test_non_finite_input_names_the_term(grid):
    ws = workspace_for(grid)
    u = np.zeros(64)
    u[5] = np.inf

    with pytest.raises(SolverError) as exc:
        rhs_nonlocal_values(ws, u, np.zeros(64), coefficients_from_preset("sigma0"))

    assert exc.value.term == "u"


def test_overflowing_term_is_named(grid):
    ws = workspace_for(grid)
    coeffs = coefficients_from_preset("custom", coefficients=[0, 0, 0, 0, 0, 1e308, 0, 0, 0])
    u = np.full(64, 1e120)

    with pytest.raises(SolverError, match="a6"):
        rhs_nonlocal_values(ws, u, np.zeros(64), coeffs)


def test_state_requires_one_grid(grid):
    with pytest.raises(ValueError, match="same grid"):
        State(0.0, Field.zeros(grid), Field.zeros(Grid(32, 1.0)))
