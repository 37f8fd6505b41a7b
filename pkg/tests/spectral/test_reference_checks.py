import numpy as np
import pytest
from scipy import fft as sp_fft
from scipy import integrate

from ch_vorticity.spectral import (
    Field,
    Grid,
    apply_pd,
    dealias_product,
    derivative,
    helmholtz_inverse,
    trig_interpolate,
)


def _gaussian(x, center, width=1.0):
    return np.exp(-(((x - center) / width) ** 2))


@pytest.fixture
def wide_grid():
    return Grid(256, 20 * np.pi)


def test_derivative_matches_finite_differences(wide_grid):
    center = wide_grid.length / 2
    h = 1e-4
    f = Field(wide_grid, _gaussian(wide_grid.x, center))

    central = (_gaussian(wide_grid.x + h, center) - _gaussian(wide_grid.x - h, center)) / (2 * h)

    assert np.max(np.abs(derivative(f).values - central)) < 1e-7
    assert np.max(np.abs(derivative(f).values + 2 * (wide_grid.x - center) * f.values)) < 1e-12


@pytest.mark.parametrize("position", [0.0, 1.3, np.pi, 5.9])
def test_helmholtz_inverse_matches_kernel_quadrature(grid, position):
    L = grid.length

    def f(y):
        return np.exp(np.sin(y))

    # periodized kernel of (1 - ∂x²)⁻¹ for separations in (0, L)
    def kernel(z):
        return np.cosh(z - L / 2) / (2 * np.sinh(L / 2))

    left, _ = integrate.quad(lambda y: kernel(position - y) * f(y), 0.0, position, epsabs=1e-14, epsrel=1e-13)
    right, _ = integrate.quad(lambda y: kernel(position - y + L) * f(y), position, L, epsabs=1e-14, epsrel=1e-13)

    g = helmholtz_inverse(Field(grid, f(grid.x)))

    assert trig_interpolate(g, [position])[0] == pytest.approx(left + right, abs=1e-10)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_pd_is_minus_derivative_of_helmholtz_inverse(grid, seed):
    f = Field(grid, np.random.default_rng(seed).normal(size=grid.n_points))

    expected = -derivative(helmholtz_inverse(f)).values

    assert np.max(np.abs(apply_pd(f).values - expected)) < 1e-12 * np.max(np.abs(f.values))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_helmholtz_inverse_is_a_left_inverse(grid, random_smooth_state, seed):
    f = random_smooth_state(seed, grid, modes=12).u

    recovered = helmholtz_inverse(f - derivative(f, 2))

    assert np.max(np.abs(recovered.values - f.values)) < 1e-12


def test_dealias_product_is_symmetric(grid, random_smooth_state):
    state = random_smooth_state(3, grid, modes=20)

    assert np.array_equal(
        dealias_product([state.u, state.zeta]).values, dealias_product([state.zeta, state.u]).values
    )


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_quartic_product_matches_oversampled_product(grid, seed):
    rng = np.random.default_rng(seed)
    modes = np.arange(1, 21)
    coefficients = rng.normal(size=(4, 2, len(modes))) / modes

    def factor(index, x):
        a, b = coefficients[index]
        phase = np.outer(modes, x)

        return a @ np.cos(phase) + b @ np.sin(phase)

    fine = Grid(4 * grid.n_points, grid.length)
    exact = np.prod([factor(i, fine.x) for i in range(4)], axis=0)

    product = dealias_product([Field(grid, factor(i, grid.x)) for i in range(4)])

    resolved = sp_fft.rfft(product.values, norm="forward")[: grid.n_points // 2]
    reference = sp_fft.rfft(exact, norm="forward")[: grid.n_points // 2]

    assert np.max(np.abs(resolved - reference)) < 1e-13 * np.max(np.abs(exact))


def test_interpolated_gaussian_matches_refined_grid(wide_grid):
    center = wide_grid.length / 2
    refined = Grid(2 * wide_grid.n_points, wide_grid.length)
    midpoints = refined.x[1::2]

    values = trig_interpolate(Field(wide_grid, _gaussian(wide_grid.x, center)), midpoints)

    assert np.max(np.abs(values - _gaussian(midpoints, center))) < 1e-12
