import numpy as np
import pytest

from ch_vorticity import friedrichs
from ch_vorticity.friedrichs import (
    FriedrichsResult,
    IterationError,
    Trajectory,
    friedrichs_iterate,
    iterate_distance,
    run_friedrichs,
)
from ch_vorticity.model import State, coefficients_from_preset
from ch_vorticity.spectral import Field, Grid


def test_zero_data(grid):
    result = friedrichs_iterate(State.zeros(grid), coefficients_from_preset("generalized-2ch"), iterations=3, T=0.1)

    assert result.differences == [0.0, 0.0, 0.0, 0.0]
    assert result.ratios == [None, None, None]
    assert result.direct_distance == 0.0
    assert result.direct.t == 0.1
    assert result.n_steps * result.dt == pytest.approx(0.1)


def test_step_divides_final_time(smooth_state):
    result = friedrichs_iterate(smooth_state, coefficients_from_preset("sigma0"), iterations=1, T=0.1, dt=0.03)

    assert result.n_steps == 4
    assert result.dt == pytest.approx(0.025)
    assert len(result.differences) == len(result.lowpass_errors) == 2


def test_invalid_arguments(smooth_state):
    coeffs = coefficients_from_preset("sigma0")

    with pytest.raises(ValueError, match="iterations must be non-negative"):
        friedrichs_iterate(smooth_state, coeffs, iterations=-1)

    with pytest.raises(ValueError, match="T must be positive"):
        friedrichs_iterate(smooth_state, coeffs, T=0.0)


def test_nonfinite_iterate(smooth_state, monkeypatch):
    def broken(ws, velocity, elevation, coeffs):
        return np.full_like(velocity, np.nan), np.zeros_like(elevation)

    monkeypatch.setattr(friedrichs, "forcing_values", broken)

    with pytest.raises(IterationError, match="Iterate 1 is not finite") as e:
        friedrichs_iterate(smooth_state, coefficients_from_preset("sigma0"), iterations=2, T=0.05)

    assert e.value.iteration == 1
    assert e.value.stage == 1


def test_trajectory_interpolates_in_time(grid):
    times = np.linspace(0.0, 1.0, 5)
    u = np.outer(times**2, np.sin(grid.x))
    trajectory = Trajectory(times, u, np.zeros_like(u))

    velocity, elevation = trajectory.at(0.3)

    assert velocity == pytest.approx(0.09 * np.sin(grid.x), abs=1e-12)
    assert np.all(elevation == 0.0)
    assert trajectory.final(grid).t == 1.0


def test_iterate_distance(grid, ws):
    u = Field(grid, np.cos(3 * grid.x))
    zero = Field.zeros(grid)

    # only the dyadic block 1 is active: 2^(s-1) ‖cos 3x‖
    assert iterate_distance(u, zero, zero, zero, 2.0, ws) == pytest.approx(2 * np.sqrt(np.pi), rel=1e-12)
    assert iterate_distance(u, zero, u, zero, 2.0, ws) == 0.0


def test_ratios_skip_vanishing_differences(grid):
    state = State.zeros(grid)
    result = FriedrichsResult(
        differences=[1.0, 0.5, 0.0, 0.0],
        lowpass_errors=[0.0] * 4,
        final_iterate=state,
        direct=state,
        direct_distance=0.0,
        dt=0.1,
        n_steps=1,
        s=3.0,
    )

    assert result.ratios == [0.5, 0.0, None]


def test_run_friedrichs(make_config):
    config = make_config(mode="friedrichs", friedrichs__iterations=2, friedrichs__T=0.1)

    result, outcome = run_friedrichs(config)

    assert len(result.differences) == 3
    assert outcome.status.value == "completed"
    assert [r.t for r in outcome.records] == [0.0, pytest.approx(0.1)]
    assert outcome.snapshots[-1] is result.direct


@pytest.mark.slow
def test_iterates_contract():
    grid = Grid(128, 2 * np.pi)
    x = grid.x
    state0 = State(0.0, Field(grid, 0.1 * np.sin(x) + 0.05 * np.cos(3 * x)), Field(grid, 0.05 * np.cos(2 * x)))

    result = friedrichs_iterate(state0, coefficients_from_preset("generalized-2ch"), iterations=8, T=0.2)

    assert all(ratio < 1.0 for ratio in result.ratios[2:] if ratio is not None)
    assert result.direct_distance <= 3 * result.differences[-1]
    assert all(b <= a + 1e-15 for a, b in zip(result.lowpass_errors, result.lowpass_errors[1:], strict=False))
