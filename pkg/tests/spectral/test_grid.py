import numpy as np
import pytest

from ch_vorticity.spectral import Field, Grid, SolverError, SpectralConfigError, SpectralWorkspace


def test_grid_spacing_and_wavenumbers():
    grid = Grid(64, 2 * np.pi)

    assert grid.dx == pytest.approx(2 * np.pi / 64)
    assert grid.x[0] == 0.0
    assert grid.x[-1] == pytest.approx(2 * np.pi - grid.dx)
    assert grid.wavenumbers.shape == (33,)
    assert grid.wavenumbers[-1] == pytest.approx(grid.nyquist)
    assert grid.nyquist == pytest.approx(32.0)


@pytest.mark.parametrize("n_points", [300, 8, 0, 100])
def test_grid_requires_power_of_two(n_points):
    with pytest.raises(SpectralConfigError, match="power of two"):
        Grid(n_points, 1.0)


@pytest.mark.parametrize("length", [0.0, -1.0, float("inf"), float("nan")])
def test_grid_requires_positive_length(length):
    with pytest.raises(SpectralConfigError, match="length"):
        Grid(64, length)


def test_field_rejects_non_finite_values():
    grid = Grid(16, 1.0)
    values = np.zeros(16)
    values[3] = np.nan

    with pytest.raises(SolverError, match="Non-finite") as exc:
        Field(grid, values)

    assert exc.value.term == "field"


def test_field_rejects_wrong_shape():
    with pytest.raises(SpectralConfigError, match="needs 16 values"):
        Field(Grid(16, 1.0), np.zeros(15))


def test_field_arithmetic():
    grid = Grid(16, 1.0)
    a = Field(grid, np.ones(16))
    b = Field(grid, np.full(16, 2.0))

    assert np.all((a + b).values == 3.0)
    assert np.all((b - a).values == 1.0)
    assert np.all((2.0 * a).values == 2.0)
    assert np.all((a * 0.5).values == 0.5)


def test_default_padding_is_alias_free_to_degree_four():
    ws = SpectralWorkspace(Grid(64, 1.0))

    assert ws.padded_points >= 160
    assert ws.alias_free_degree >= 4


def test_small_padding_ratio_warns(caplog):
    ws = SpectralWorkspace(Grid(64, 1.0), padding_ratio=1)

    assert ws.padded_points == 64
    assert ws.alias_free_degree == 1
    assert "alias-free only up to degree 1" in caplog.text


def test_padding_ratio_below_one_is_rejected():
    with pytest.raises(SpectralConfigError, match="padding_ratio"):
        SpectralWorkspace(Grid(64, 1.0), padding_ratio=0.5)
