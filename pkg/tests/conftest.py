import numpy as np
import pytest

from ch_vorticity.config import parse_config
from ch_vorticity.model import State
from ch_vorticity.spectral import Field, Grid, SpectralWorkspace


@pytest.fixture
def grid():
    return Grid(64, 2 * np.pi)


@pytest.fixture
def ws(grid):
    return SpectralWorkspace(grid)


@pytest.fixture
def smooth_state(grid):
    x = grid.x

    return State(0.0, Field(grid, 0.3 * np.sin(x) + 0.1 * np.cos(2 * x)), Field(grid, 0.2 * np.cos(x)))


@pytest.fixture
def random_smooth_state():
    """Band-limited random states with ``ζ > -1``."""

    def make(seed: int, grid: Grid, modes: int = 6, amplitude: float = 0.1) -> State:
        rng = np.random.default_rng(seed)
        k = np.arange(1, modes + 1)[:, np.newaxis] * (2 * np.pi / grid.length)

        def field():
            a = rng.normal(size=(modes, 1)) / np.arange(1, modes + 1)[:, np.newaxis]
            b = rng.normal(size=(modes, 1)) / np.arange(1, modes + 1)[:, np.newaxis]
            return amplitude * np.sum(a * np.cos(k * grid.x) + b * np.sin(k * grid.x), axis=0)

        return State(0.0, Field(grid, field()), Field(grid, field()))

    return make


@pytest.fixture
def make_config():
    """Config built from `key = value` pairs, on a small grid unless overridden."""

    def make(**pairs) -> object:
        values = {"model.preset": "sigma0", "grid.n": "64", "grid.L": "8pi"}
        values.update({key.replace("__", "."): str(value) for key, value in pairs.items()})
        text = "\n".join(f"{key} = {value}" for key, value in values.items())

        return parse_config(text + "\n")

    return make
