import numpy as np
import pytest

from ch_vorticity.spectral import (
    Field,
    Grid,
    SpectralConfigError,
    apply_pd,
    dealias_product,
    derivative,
    helmholtz_inverse,
    trig_interpolate,
    workspace_for,
)


def test_derivative_of_pure_mode(grid):
    f = Field(grid, np.sin(3 * grid.x))

    assert np.allclose(derivative(f).values, 3 * np.cos(3 * grid.x), atol=1e-12)
    assert np.allclose(derivative(f, 2).values, -9 * np.sin(3 * grid.x), atol=1e-11)
    assert np.allclose(derivative(f, 3).values, -27 * np.cos(3 * grid.x), atol=1e-10)


def test_derivative_order_is_limited(grid):
    with pytest.raises(SpectralConfigError, match="order"):
        derivative(Field.zeros(grid), 4)


def test_odd_derivatives_vanish_on_nyquist_mode(grid):
    nyquist = Field(grid, np.cos(32 * grid.x))

    assert np.allclose(derivative(nyquist).values, 0.0, atol=1e-12)
    assert np.allclose(apply_pd(nyquist).values, 0.0, atol=1e-12)


def test_derivative_on_a_scaled_domain():
    grid = Grid(128, 40 * np.pi)
    k = 2 * np.pi / grid.length * 5
    f = Field(grid, np.cos(k * grid.x))

    assert np.allclose(derivative(f).values, -k * np.sin(k * grid.x), atol=1e-13)


def test_pd_multiplier_on_every_resolvable_mode(grid):
    # P(D) cos(ξx) = ξ/(1 + ξ²) sin(ξx)
    for xi in range(1, 32):
        f = Field(grid, np.cos(xi * grid.x))
        expected = xi / (1 + xi**2) * np.sin(xi * grid.x)

        assert np.max(np.abs(apply_pd(f).values - expected)) < 1e-13


def test_pd_of_constant_is_zero(grid):
    assert np.allclose(apply_pd(Field(grid, np.full(64, 3.0))).values, 0.0, atol=1e-15)


def test_helmholtz_inverse(grid):
    f = Field(grid, np.sin(2 * grid.x) + 4.0)
    g = helmholtz_inverse(f)

    assert np.allclose(g.values, np.sin(2 * grid.x) / 5 + 4.0, atol=1e-13)

    # (1 - ∂x²) g = f
    residual = g.values - derivative(g, 2).values - f.values
    assert np.max(np.abs(residual)) < 1e-12


def test_dealias_product_of_two_modes():
    grid = Grid(16, 2 * np.pi)
    x = grid.x
    product = dealias_product([Field(grid, np.sin(x)), Field(grid, np.cos(x))])

    assert np.allclose(product.values, 0.5 * np.sin(2 * x), atol=1e-14)


def test_dealias_product_degree_four_matches_projection():
    grid = Grid(32, 2 * np.pi)
    x = grid.x
    f = Field(grid, np.sin(5 * x))

    # sin⁴θ = 3/8 - cos(2θ)/2 + cos(4θ)/8; the mode 20 is not resolvable on 32 points
    product = dealias_product([f, f, f, f])
    assert np.allclose(product.values, 3 / 8 - np.cos(10 * x) / 2, atol=1e-13)

    # the pointwise product aliases mode 20 onto mode 12
    naive = f.values**4
    assert not np.allclose(naive, product.values, atol=1e-3)


@pytest.mark.parametrize("count", [1, 5])
def test_dealias_product_factor_count(grid, count):
    with pytest.raises(SpectralConfigError, match="2 to 4 factors"):
        dealias_product([Field.zeros(grid)] * count)


def test_dealias_product_requires_one_grid(grid):
    other = Grid(32, 2 * np.pi)

    with pytest.raises(SpectralConfigError, match="different grids"):
        dealias_product([Field.zeros(grid), Field.zeros(other)])


def test_workspace_must_match_field(grid):
    with pytest.raises(SpectralConfigError, match="different grids"):
        derivative(Field.zeros(grid), 1, workspace_for(Grid(32, 1.0)))


def test_trig_interpolate_is_exact_for_band_limited_fields(grid):
    f = Field(grid, np.sin(grid.x) + np.cos(2 * grid.x) + 0.25)
    positions = np.array([0.1, 1.234, 3.0, 6.2, 7.0, -0.5])

    expected = np.sin(positions) + np.cos(2 * positions) + 0.25
    assert np.allclose(trig_interpolate(f, positions), expected, atol=1e-12)


def test_trig_interpolate_reproduces_grid_values(grid):
    values = np.random.default_rng(1).normal(size=64)
    f = Field(grid, values)

    assert np.allclose(trig_interpolate(f, grid.x), values, atol=1e-12)
