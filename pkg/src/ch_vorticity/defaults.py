"""
Documented defaults for every optional configuration key.

The schema dataclasses read their field defaults from here, so this module is the single place
where a default value changes.
"""

from __future__ import annotations

import math

# --- grid ---

GRID_N: int = 512
r"""
Number of grid points. Must be a power of two, at least 16.
"""

GRID_L: float = 40.0 * math.pi
r"""
Length of the periodic domain. Large enough that decaying initial data is below 1e-12 at the edges.
"""

GRID_PADDING_RATIO: float = 2.5
r"""
Ratio of padded to resolved points used for nonlinear products. 2.5 keeps quartic products alias-free.
"""

# --- model ---

MODEL_FRAME: str = "translated"
r"""
Frame the system is evolved in: "translated" (nonlocal form as printed) or "original" (all linear terms kept).
"""

MODEL_SIGMA: float = 1.0
r"""
σ used by the "vorticity", "coriolis", "generalized-2ch" and "custom" presets when not given.
"""

# --- initial data ---

INITIAL_KIND: str = "gaussian"
r"""
Profile of u0: gaussian, sech2, sine_packet, steep_front or file.
"""

INITIAL_AMPLITUDE: float = 0.1
INITIAL_WIDTH: float = 2.0

INITIAL_WAVENUMBER: float = 1.0
r"""
Carrier wavenumber of the "sine_packet" profile.
"""

INITIAL_ZETA_AMPLITUDE: float = 0.0
r"""
Amplitude of the Gaussian ζ0. Its width defaults to `initial.width`.
"""

EDGE_TOLERANCE: float = 1e-12
r"""
Largest magnitude generated data may have at the domain edges.
"""

ENERGY_TOLERANCE: float = 1e-10
r"""
Accuracy of the energy rescaling requested by `initial.target_E0`.
"""

# --- time stepping ---

TIME_T_FINAL: float = 1.0

TIME_CFL: float = 0.3
r"""
CFL number of the transport-speed step control, in (0, 1].
"""

TIME_DT_MIN: float = 1e-8
r"""
Smallest admissible step. A step clamped here while min u_x keeps decreasing counts as breaking.
"""

TIME_DT_MAX: float = 0.05

TIME_BREAKING_THRESHOLD: float = 1e4
r"""
Breaking is declared once |min u_x| reaches this value.
"""

TIME_RESOLUTION_TOLERANCE: float = 1e-4
r"""
Absolute floor for resolution loss: breaking is declared once the fraction of u's spectral energy in the top
third of resolved modes exceeds both this value and 1000 times its initial value, after min u_x has decreased
for 10 consecutive steps.
"""

# --- diagnostics ---

DIAGNOSTICS_INTERVAL: float = 0.1
r"""
Simulated time between two diagnostic records.
"""

DIAGNOSTICS_BESOV: bool = False
DIAGNOSTICS_BESOV_S: float = 3.0
DIAGNOSTICS_BESOV_P: float = 2.0
DIAGNOSTICS_BESOV_R: float = 2.0

# --- flow map ---

FLOWMAP_MAX_DT: float = 0.01
r"""
Largest RK4 step used to integrate characteristics between stored snapshots.
"""

# --- Friedrichs iteration ---

FRIEDRICHS_ITERATIONS: int = 8
FRIEDRICHS_T: float = 0.5
FRIEDRICHS_S: float = 3.0
r"""
Regularity index s: differences are measured in B^{s-1}_{2,2} for u and B^{s-2}_{2,2} for ζ.
"""

FRIEDRICHS_DT_DIVISOR: float = 4.0
r"""
Without `friedrichs.dt`, the transport solves use the adaptive step of the initial state divided by this.
"""

# --- audit ---

AUDIT_A_SAMPLES: tuple[float, ...] = tuple(0.5 * k for k in range(11))
r"""
Shear values checked by the coefficient audit: 0, 0.5, ..., 5.
"""

# --- sweep / output ---

SWEEP_WORKERS: int = 1

OUTPUT_DIRECTORY: str = "runs/output"
