"""
Littlewood-Paley decomposition and nonhomogeneous Besov norms on a periodic grid.

The cutoff ``χ`` is the smooth step built from ``g(t) = exp(-1/t)``: it equals 1 on ``|ξ| <= 3/4`` and
0 on ``|ξ| >= 4/3``. Blocks are ``Δ_{-1} = χ(D)`` and ``Δ_q = φ(2^-q D)`` with ``φ(ξ) = χ(ξ/2) - χ(ξ)``,
except the last resolvable block which takes the whole remainder ``I - S_{q_max}``.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from numpy.typing import ArrayLike

from ch_vorticity.spectral import Field, FloatArray, Grid, SpectralWorkspace, workspace_for

logger = logging.getLogger(__name__)

PLATEAU = 3.0 / 4.0
SUPPORT = 4.0 / 3.0


class ResolutionError(ValueError):
    """Raised when a dyadic block lies beyond the frequencies the grid resolves."""


def _smooth_step_kernel(t: FloatArray) -> FloatArray:
    positive = t > 0
    safe = np.where(positive, t, 1.0)

    return np.where(positive, np.exp(-1.0 / safe), 0.0)


def chi(xi: ArrayLike) -> FloatArray:
    """Smooth radial cutoff: 1 on ``|ξ| <= 3/4``, 0 on ``|ξ| >= 4/3``, valued in ``[0, 1]``."""
    xi2 = np.square(np.asarray(xi, dtype=np.float64))
    inner = _smooth_step_kernel(SUPPORT**2 - xi2)
    outer = _smooth_step_kernel(xi2 - PLATEAU**2)

    return inner / (inner + outer)


def phi(xi: ArrayLike) -> FloatArray:
    """Dyadic annulus profile ``χ(ξ/2) - χ(ξ)``, supported in ``3/4 <= |ξ| <= 8/3``."""
    xi = np.asarray(xi, dtype=np.float64)

    return chi(xi / 2.0) - chi(xi)


@dataclass(frozen=True)
class BesovParams:
    s: float
    p: float = 2.0
    r: float = 2.0

    def __post_init__(self):
        if not math.isfinite(self.s):
            raise ValueError(f"s must be finite, got {self.s}")
        if not self.p >= 1:
            raise ValueError(f"p must be in [1, inf], got {self.p}")
        if not self.r >= 1:
            raise ValueError(f"r must be in [1, inf], got {self.r}")


class DyadicPartition:
    """
    Multipliers of the dyadic blocks resolvable on one grid.

    ``q_max = floor(log2(ξ_Nyquist)) - 1``; the block ``q_max`` is the remainder ``1 - χ(2^-q_max ξ)``,
    which makes ``Σ_{q=-1}^{q_max} Δ_q`` the identity on every grid.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self.wavenumbers = grid.wavenumbers
        self.q_max = max(math.floor(math.log2(grid.nyquist)) - 1, -1)

        if self.q_max < 0:
            logger.warning(f"Grid resolves no dyadic annulus (Nyquist wavenumber {grid.nyquist:.3g})")

    def lowpass_multiplier(self, j: int) -> FloatArray:
        return chi(self.wavenumbers / 2.0**j)

    def block_multiplier(self, q: int) -> FloatArray:
        if q > self.q_max:
            raise ResolutionError(f"Block {q} is beyond the resolvable range (q_max = {self.q_max})")

        if q < -1:
            return np.zeros_like(self.wavenumbers)

        if q == -1 and self.q_max < 0:
            return np.ones_like(self.wavenumbers)

        if q == self.q_max:
            return 1.0 - self.lowpass_multiplier(q)

        if q == -1:
            return chi(self.wavenumbers)

        return phi(self.wavenumbers / 2.0**q)

    @cached_property
    def blocks(self) -> dict[int, FloatArray]:
        return {q: self.block_multiplier(q) for q in range(-1, self.q_max + 1)}

    def partition_residual(self) -> float:
        """Largest deviation of ``Σ_q Δ_q`` from 1 over the resolvable spectrum."""
        total = sum(self.blocks.values())

        return float(np.max(np.abs(total - 1.0)))


@lru_cache(maxsize=16)
def partition_for(grid: Grid) -> DyadicPartition:
    return DyadicPartition(grid)


def _apply(f: Field, multiplier: FloatArray, workspace: SpectralWorkspace | None) -> FloatArray:
    ws = workspace or workspace_for(f.grid)

    return ws.synthesize(multiplier * ws.spectrum(f.values))


def lp_block(f: Field, q: int, workspace: SpectralWorkspace | None = None) -> Field:
    """
    Dyadic block ``Δ_q f``.

    Raises:
        ResolutionError: If ``q > q_max``.
    """
    partition = partition_for(f.grid)

    return Field(f.grid, _apply(f, partition.block_multiplier(q), workspace))


def lowpass_s(f: Field, j: int, workspace: SpectralWorkspace | None = None) -> Field:
    """Low-frequency cut-off ``S_j f = χ(2^-j D) f``."""
    partition = partition_for(f.grid)

    return Field(f.grid, _apply(f, partition.lowpass_multiplier(j), workspace))


def _lp_norm(values: FloatArray, p: float, dx: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(values)))

    return float((dx * np.sum(np.abs(values) ** p)) ** (1.0 / p))


def block_norms(f: Field, p: float = 2.0, workspace: SpectralWorkspace | None = None) -> dict[int, float]:
    """``‖Δ_q f‖_{L^p}`` for every resolvable block."""
    ws = workspace or workspace_for(f.grid)
    spectrum = ws.spectrum(f.values)
    partition = partition_for(f.grid)

    return {
        q: _lp_norm(ws.synthesize(multiplier * spectrum), p, f.grid.dx) for q, multiplier in partition.blocks.items()
    }


def besov_norm(f: Field, bp: BesovParams, workspace: SpectralWorkspace | None = None) -> float:
    """
    Nonhomogeneous Besov norm ``‖(2^{qs} ‖Δ_q f‖_{L^p})_q‖_{l^r}``, truncated at ``q_max``.
    """
    weighted = np.array([2.0 ** (q * bp.s) * norm for q, norm in block_norms(f, bp.p, workspace).items()])

    if math.isinf(bp.r):
        return float(np.max(weighted))

    return float(np.sum(weighted**bp.r) ** (1.0 / bp.r))
