"""
Fourier-space primitives on a uniform periodic grid.

All transforms use ``scipy.fft`` with ``norm="forward"`` so that spectral coefficients are
true Fourier amplitudes, independent of the number of points. Real fields are stored in the
``rfft`` layout: wavenumbers ``2πk/L`` for ``k = 0 .. n/2``.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import fft as sp_fft

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

MIN_POINTS = 16
DEFAULT_PADDING_RATIO = Fraction(5, 2)
MAX_PRODUCT_DEGREE = 4


class SolverError(RuntimeError):
    """Raised when a field or an intermediate term is no longer finite."""

    def __init__(self, message: str, *, term: str | None = None):
        super().__init__(message)
        self.term = term


class SpectralConfigError(ValueError):
    """Raised for grids, workspaces or products that cannot be set up."""


def require_finite(values: NDArray, term: str) -> None:
    if not np.all(np.isfinite(values)):
        raise SolverError(f"Non-finite values in '{term}'", term=term)


@dataclass(frozen=True)
class Grid:
    """
    Uniform periodic grid on ``[0, length)``.
    """

    n_points: int
    length: float

    def __post_init__(self):
        if self.n_points < MIN_POINTS or self.n_points & (self.n_points - 1):
            raise SpectralConfigError(f"n_points must be a power of two >= {MIN_POINTS}, got {self.n_points}")
        if not (math.isfinite(self.length) and self.length > 0):
            raise SpectralConfigError(f"length must be a positive finite number, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def x(self) -> FloatArray:
        return np.arange(self.n_points) * self.dx

    @property
    def wavenumbers(self) -> FloatArray:
        """Non-negative wavenumbers of the rfft layout."""
        return (2.0 * np.pi / self.length) * np.arange(self.n_points // 2 + 1)

    @property
    def nyquist(self) -> float:
        return np.pi * self.n_points / self.length


@dataclass
class Field:
    """
    Real grid function. Construction fails with ``SolverError`` if any value is NaN or Inf.
    """

    grid: Grid
    values: FloatArray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

        if self.values.shape != (self.grid.n_points,):
            raise SpectralConfigError(
                f"Field needs {self.grid.n_points} values, got array of shape {self.values.shape}"
            )

        require_finite(self.values, "field")

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.n_points))

    @classmethod
    def from_function(cls, grid: Grid, func) -> "Field":
        return cls(grid, func(grid.x))

    def __add__(self, other: "Field") -> "Field":
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__


class SpectralWorkspace:
    """
    Multiplier tables and padded-grid transforms for one grid.

    The tables are built once and never mutated, so a workspace can be reused by every
    operation of a simulation.

    Args:
        grid: The grid the workspace serves.
        padding_ratio: Ratio of padded to resolved points used for products. A ratio of
            ``(p + 1) / 2`` makes products of degree ``p`` alias-free.
        max_degree: Highest product degree the caller intends to form; only used to warn
            when the padding ratio is too small for it.
    """

    def __init__(
        self,
        grid: Grid,
        padding_ratio: Fraction | float | str = DEFAULT_PADDING_RATIO,
        max_degree: int = MAX_PRODUCT_DEGREE,
    ):
        self.grid = grid
        self.padding_ratio = Fraction(padding_ratio).limit_denominator(64)

        if self.padding_ratio < 1:
            raise SpectralConfigError(f"padding_ratio must be >= 1, got {self.padding_ratio}")

        n = grid.n_points
        target = math.ceil(self.padding_ratio * n)
        self.padded_points = n if target == n else sp_fft.next_fast_len(target, real=True)

        # M >= (p + 1) n / 2 keeps degree-p products alias-free
        self.alias_free_degree = math.floor(2 * self.padded_points / n) - 1

        if self.alias_free_degree < max_degree:
            logger.warning(
                f"Padding ratio {self.padding_ratio} is alias-free only up to degree {self.alias_free_degree}, "
                f"products of degree {max_degree} will alias"
            )

        k = grid.wavenumbers
        odd = np.ones_like(k)
        odd[-1] = 0.0  # odd-order multipliers vanish on the Nyquist mode

        self.wavenumbers = k
        self.derivative_multipliers: dict[int, ComplexArray] = {
            1: (1j * k * odd).astype(np.complex128),
            2: (-(k**2)).astype(np.complex128),
            3: (-1j * k**3 * odd).astype(np.complex128),
        }
        self.helmholtz_multiplier: FloatArray = 1.0 / (1.0 + k**2)
        self.pd_multiplier: ComplexArray = (-1j * k / (1.0 + k**2) * odd).astype(np.complex128)

        # rfft weights of the trigonometric interpolant: interior modes stand for a +/- pair
        self._interp_weights = np.full(k.shape, 2.0)
        self._interp_weights[0] = 1.0
        self._interp_weights[-1] = 1.0

    # --- transforms ---

    def spectrum(self, values: NDArray) -> ComplexArray:
        return sp_fft.rfft(values, norm="forward")

    def synthesize(self, spectrum: ComplexArray) -> FloatArray:
        return sp_fft.irfft(spectrum, n=self.grid.n_points, norm="forward")

    def to_padded(self, values: NDArray) -> FloatArray:
        """Evaluate the interpolant of ``values`` on the padded grid."""
        if self.padded_points == self.grid.n_points:
            return np.array(values, dtype=np.float64)

        n = self.grid.n_points
        spec = self.spectrum(values)
        padded = np.zeros(self.padded_points // 2 + 1, dtype=np.complex128)
        padded[: n // 2 + 1] = spec
        padded[n // 2] *= 0.5  # split the Nyquist cosine into a +/- pair

        return sp_fft.irfft(padded, n=self.padded_points, norm="forward")

    def from_padded(self, padded_values: NDArray) -> FloatArray:
        """Project padded-grid values back onto the resolved modes."""
        if self.padded_points == self.grid.n_points:
            return np.array(padded_values, dtype=np.float64)

        n = self.grid.n_points
        spec = sp_fft.rfft(padded_values, norm="forward")[: n // 2 + 1].copy()
        spec[n // 2] = 2.0 * spec[n // 2].real  # +/- n/2 fold onto the Nyquist mode

        return self.synthesize(spec)

    # --- operators on raw arrays ---

    def derivative_values(self, values: NDArray, order: int = 1) -> FloatArray:
        if order not in self.derivative_multipliers:
            raise SpectralConfigError(f"Derivative order must be 1, 2 or 3, got {order}")

        return self.synthesize(self.derivative_multipliers[order] * self.spectrum(values))

    def helmholtz_values(self, values: NDArray) -> FloatArray:
        return self.synthesize(self.helmholtz_multiplier * self.spectrum(values))

    def pd_values(self, values: NDArray) -> FloatArray:
        return self.synthesize(self.pd_multiplier * self.spectrum(values))

    def product_values(self, *factors: NDArray) -> FloatArray:
        padded = self.to_padded(factors[0])
        for factor in factors[1:]:
            padded = padded * self.to_padded(factor)

        return self.from_padded(padded)

    def interpolation_matrix(self, positions: ArrayLike) -> ComplexArray:
        """
        Matrix ``E`` such that ``Re(E @ spectrum(values))`` is the interpolant at ``positions``.
        """
        x = np.mod(np.asarray(positions, dtype=np.float64), self.grid.length)

        return self._interp_weights[np.newaxis, :] * np.exp(1j * np.outer(x, self.wavenumbers))

    def interpolate_values(self, values: NDArray, positions: ArrayLike) -> FloatArray:
        return np.real(self.interpolation_matrix(positions) @ self.spectrum(values))


@lru_cache(maxsize=16)
def workspace_for(grid: Grid) -> SpectralWorkspace:
    """Default workspace for ``grid``, shared by the module-level operations."""
    return SpectralWorkspace(grid)


def _workspace(field: Field, workspace: SpectralWorkspace | None) -> SpectralWorkspace:
    if workspace is None:
        return workspace_for(field.grid)

    if workspace.grid != field.grid:
        raise SpectralConfigError("Field and workspace live on different grids")

    return workspace


def derivative(f: Field, order: int = 1, workspace: SpectralWorkspace | None = None) -> Field:
    """
    Spectral derivative of ``f``; exact for band-limited fields.
    """
    ws = _workspace(f, workspace)
    require_finite(f.values, "derivative input")

    return Field(f.grid, ws.derivative_values(f.values, order))


def helmholtz_inverse(f: Field, workspace: SpectralWorkspace | None = None) -> Field:
    """
    Solve ``(1 - ∂x²) g = f``, i.e. convolve with the periodized kernel ``½exp(-|x|)``.
    """
    ws = _workspace(f, workspace)
    require_finite(f.values, "helmholtz input")

    return Field(f.grid, ws.helmholtz_values(f.values))


def apply_pd(f: Field, workspace: SpectralWorkspace | None = None) -> Field:
    """
    Apply ``P(D) = -∂x(1 - ∂x²)⁻¹`` with multiplier ``-iξ/(1 + ξ²)``.
    """
    ws = _workspace(f, workspace)
    require_finite(f.values, "P(D) input")

    return Field(f.grid, ws.pd_values(f.values))


def dealias_product(factors: Sequence[Field], workspace: SpectralWorkspace | None = None) -> Field:
    """
    Pointwise product of 2 to 4 fields formed on the zero-padded grid and truncated back.

    Raises:
        SpectralConfigError: If the number of factors is out of range or the grids differ.
    """
    if not 2 <= len(factors) <= MAX_PRODUCT_DEGREE:  # noqa: PLR2004
        raise SpectralConfigError(f"dealias_product takes 2 to {MAX_PRODUCT_DEGREE} factors, got {len(factors)}")

    grid = factors[0].grid
    if any(f.grid != grid for f in factors[1:]):
        raise SpectralConfigError("dealias_product factors live on different grids")

    ws = _workspace(factors[0], workspace)

    if len(factors) > ws.alias_free_degree:
        logger.debug(f"Product of degree {len(factors)} exceeds alias-free degree {ws.alias_free_degree}")

    return Field(grid, ws.product_values(*(f.values for f in factors)))


def trig_interpolate(f: Field, positions: ArrayLike, workspace: SpectralWorkspace | None = None) -> FloatArray:
    """
    Evaluate the trigonometric interpolant of ``f`` at arbitrary positions (wrapped into ``[0, L)``).
    """
    ws = _workspace(f, workspace)

    return ws.interpolate_values(f.values, positions)
