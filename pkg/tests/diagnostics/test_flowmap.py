import numpy as np
import pytest

from ch_vorticity.diagnostics import FlowMap, ValidationError, evolve_flowmap, verify_alongflow_ode
from ch_vorticity.model import State, coefficients_from_preset
from ch_vorticity.spectral import Field
from ch_vorticity.timestep import RunOutcome, RunStatus, run_with_analysis


def _outcome(grid, coeffs=None, times=(0.0, 1.0)):
    snapshots = [State(t, Field(grid, np.full(64, 0.5)), Field.zeros(grid)) for t in times]

    return RunOutcome(
        status=RunStatus.COMPLETED,
        final_time=times[-1],
        snapshots=snapshots,
        coefficients=coeffs or coefficients_from_preset("sigma0"),
    )


def test_constant_velocity(grid):
    seeds = [0.0, 1.0, 2.5]
    flow = evolve_flowmap(_outcome(grid, times=(0.0, 0.4, 1.0)), seeds, max_dt=0.1)

    assert flow.times.tolist() == [0.0, 0.4, 1.0]
    assert flow.q == pytest.approx(np.array(seeds) + 0.5 * flow.times[:, np.newaxis], abs=1e-12)
    assert flow.u_bar == pytest.approx(np.full((3, 3), 0.5))
    assert flow.rho_bar == pytest.approx(np.ones((3, 3)))
    assert flow.monotone


def test_seeds_are_sorted(grid):
    flow = evolve_flowmap(_outcome(grid), [3.0, 1.0])

    assert flow.seeds.tolist() == [1.0, 3.0]


@pytest.mark.parametrize("seeds", [[-0.1], [2 * np.pi]])
def test_seeds_outside_domain(grid, seeds):
    with pytest.raises(ValidationError, match="Seeds must lie in"):
        evolve_flowmap(_outcome(grid), seeds)


def test_no_snapshots(grid):
    outcome = RunOutcome(status=RunStatus.COMPLETED, final_time=0.0)

    with pytest.raises(ValidationError, match="stored no snapshots"):
        evolve_flowmap(outcome, [1.0])


def test_crossing_characteristics_are_not_monotone():
    q = np.array([[0.0, 1.0], [1.5, 1.0]])
    flow = FlowMap(seeds=q[0], times=np.array([0.0, 1.0]), q=q, u_bar=q, zeta_bar=q, length=4.0)

    assert not flow.monotone


def test_alongflow_needs_sigma0(grid):
    outcome = _outcome(grid, coeffs=coefficients_from_preset("vorticity", A=1.0))
    flow = evolve_flowmap(outcome, [1.0])

    with pytest.raises(ValidationError, match="only to the sigma0 preset"):
        verify_alongflow_ode(outcome, flow)


def test_alongflow_for_flat_elevation(grid):
    outcome = _outcome(grid)
    flow = evolve_flowmap(outcome, [1.0, 2.0])

    report = verify_alongflow_ode(outcome, flow)

    assert report.passed
    assert report.max_mismatch < 1e-12
    assert report.trajectory_mismatch < 1e-12


@pytest.mark.slow
def test_alongflow_matches_simulation(make_config):
    config = make_config(
        time__T_final=1,
        initial__zeta_amplitude=0.05,
        snapshots__interval=0.01,
        flowmap__n_seeds=8,
        flowmap__max_dt=0.002,
    )

    outcome = run_with_analysis(config)

    assert outcome.flow.monotone
    assert outcome.alongflow.positive
    assert outcome.alongflow.passed
