"""
Model catalog and right-hand sides of the two-component system.

The general system, in momentum form with ``m = u - u_xx`` and ``ρ = ζ + 1``::

    m_t + σ(2m u_x + u m_x) + 3(1-σ)u u_x + ½(ρ²)_x + a1(ρ²u)_x + a2(ρu)_x
        + a3 u_x + a4 u_xxx + a5(u²ρ(ρ-1))_x + a6(u³)_x = 0
    ρ_t + (ρu)_x + b1 ρ²ρ_x + b2 ρ u u_x + b3 ρ u² u_x = 0

is evolved in the nonlocal ``(u, ζ)`` form with ``P(D) = -∂x(1-∂x²)⁻¹``.
"""

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal

import numpy as np

from ch_vorticity.spectral import (
    Field,
    FloatArray,
    SolverError,
    SpectralWorkspace,
    require_finite,
    workspace_for,
)

logger = logging.getLogger(__name__)

AUDIT_TOLERANCE = 1e-12

PRESETS = ("vorticity", "coriolis", "generalized-2ch", "sigma0", "custom")
PresetName = Literal["vorticity", "coriolis", "generalized-2ch", "sigma0", "custom"]


class Frame(str, Enum):
    """
    ``translated`` is the nonlocal system as evolved; ``original`` keeps the linear terms
    ``b1 ζ_x`` and ``a4 u_x`` that the translations remove.
    """

    ORIGINAL = "original"
    TRANSLATED = "translated"


@dataclass(frozen=True)
class Provenance:
    """Where a coefficient set comes from, with its defining scalars."""

    kind: Literal["vorticity", "coriolis", "custom"]
    parameter: float | None = None
    c: float | None = None
    beta1: float | None = None
    beta2: float | None = None


@dataclass(frozen=True)
class Coefficients:
    sigma: float
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0
    a4: float = 0.0
    a5: float = 0.0
    a6: float = 0.0
    b1: float = 0.0
    b2: float = 0.0
    b3: float = 0.0
    provenance: Provenance = field(default_factory=lambda: Provenance(kind="custom"))
    preset: str = "custom"

    def as_tuple(self) -> tuple[float, ...]:
        """``(σ, a1..a6, b1..b3)``."""
        return (self.sigma, self.a1, self.a2, self.a3, self.a4, self.a5, self.a6, self.b1, self.b2, self.b3)

    @property
    def conserves_energy(self) -> bool:
        """
        True when ``∫(u² + u_x² + ζ²)`` is an invariant of the system.
        """
        return (
            self.b1 == 0 and self.b2 == 0 and self.a1 == 0 and self.a2 == 0 and self.a3 == 0 and self.a4 == 0
        ) and math.isclose(self.a5, self.b3, rel_tol=0.0, abs_tol=1e-15)

    @property
    def is_sigma0(self) -> bool:
        """True for the σ = 0, A = 0 system used by the global-existence analysis."""
        reference = coefficients_from_vorticity(0.0, sigma=0.0)
        pairs = zip(self.as_tuple(), reference.as_tuple(), strict=True)

        return all(math.isclose(a, b, abs_tol=1e-14) for a, b in pairs)


@dataclass
class State:
    t: float
    u: Field
    zeta: Field

    def __post_init__(self):
        if self.u.grid != self.zeta.grid:
            raise ValueError("u and zeta must live on the same grid")

    @property
    def grid(self):
        return self.u.grid

    @property
    def rho(self) -> Field:
        return Field(self.grid, self.zeta.values + 1.0)

    @classmethod
    def zeros(cls, grid, t: float = 0.0) -> "State":
        return cls(t, Field.zeros(grid), Field.zeros(grid))


# --- coefficient constructors ---


def burns_speed(A: float) -> float:
    """Positive root of ``c² - A c - 1 = 0``."""
    root = math.sqrt(A * A + 4.0)

    # avoid cancellation for negative shear
    if A < 0:
        return 2.0 / (root - A)

    return (A + root) / 2.0


def vorticity_betas(c: float) -> tuple[float, float]:
    return -(c * c + 5.0) / 48.0, (c**3 + 3.0 * c) / 4.0


def vorticity_alphas(c: float) -> tuple[float, float]:
    return (c**3 + c) / 8.0, -c * (c * c + 5.0) / 8.0


def coefficients_from_vorticity(A: float, sigma: float = 1.0, *, preset: str = "vorticity") -> Coefficients:
    """
    Coefficients of the constant-vorticity system with shear ``A``.
    """
    if not math.isfinite(A):
        raise ValueError(f"A must be finite, got {A}")

    c = burns_speed(A)
    beta1, beta2 = vorticity_betas(c)

    return Coefficients(
        sigma=sigma,
        a1=0.0,
        a2=0.0,
        a3=0.0,
        a4=-A,
        a5=24.0 * beta1,
        a6=4.0 * beta2,
        b1=A,
        b2=A,
        b3=24.0 * beta1,
        provenance=Provenance(kind="vorticity", parameter=A, c=c, beta1=beta1, beta2=beta2),
        preset=preset,
    )


def coefficients_from_coriolis(Omega: float, sigma: float = 1.0) -> Coefficients:
    """
    Coefficients of the equatorial system with Coriolis frequency ``Omega``.
    """
    if not math.isfinite(Omega):
        raise ValueError(f"Omega must be finite, got {Omega}")

    root = math.sqrt(1.0 + Omega * Omega)
    c = 1.0 / (root + Omega) if Omega > 0 else root - Omega
    beta1 = (1.0 - 7.0 * c * c) / (48.0 * c * c)
    beta2 = (c**4 + 5.0 * c * c - 2.0) / (4.0 * c**3)

    return Coefficients(
        sigma=sigma,
        a1=2.0 * Omega,
        a2=-8.0 * Omega,
        a3=4.0 * Omega,
        a4=0.0,
        a5=24.0 * beta1,
        a6=4.0 * beta2,
        b1=0.0,
        b2=2.0 * Omega,
        b3=24.0 * beta1,
        provenance=Provenance(kind="coriolis", parameter=Omega, c=c, beta1=beta1, beta2=beta2),
        preset="coriolis",
    )


def coefficients_custom(sigma: float, a: Iterable[float], b: Iterable[float]) -> Coefficients:
    a = tuple(float(v) for v in a)
    b = tuple(float(v) for v in b)

    if len(a) != 6 or len(b) != 3:  # noqa: PLR2004
        raise ValueError(f"Custom coefficients need 6 a-values and 3 b-values, got {len(a)} and {len(b)}")

    return Coefficients(sigma, *a, *b, provenance=Provenance(kind="custom"), preset="custom")


def coefficients_from_preset(
    name: PresetName | str,
    *,
    A: float | None = None,
    Omega: float | None = None,
    sigma: float | None = None,
    coefficients: Iterable[float] | None = None,
) -> Coefficients:
    """
    Build coefficients for a named preset.

    ``generalized-2ch`` is the vorticity system at ``A = 0``; ``sigma0`` additionally fixes ``σ = 0``.
    ``custom`` takes the nine values ``a1..a6, b1..b3``.
    """
    match name:
        case "vorticity":
            if A is None:
                raise ValueError("Preset 'vorticity' requires A")
            return coefficients_from_vorticity(A, 1.0 if sigma is None else sigma)
        case "coriolis":
            if Omega is None:
                raise ValueError("Preset 'coriolis' requires Omega")
            return coefficients_from_coriolis(Omega, 1.0 if sigma is None else sigma)
        case "generalized-2ch":
            return coefficients_from_vorticity(0.0, 1.0 if sigma is None else sigma, preset="generalized-2ch")
        case "sigma0":
            return coefficients_from_vorticity(0.0, 0.0, preset="sigma0")
        case "custom":
            if coefficients is None:
                raise ValueError("Preset 'custom' requires coefficients")
            values = list(coefficients)
            return coefficients_custom(1.0 if sigma is None else sigma, values[:6], values[6:])
        case _:
            raise ValueError(f"Unknown model preset: {name}. Valid presets are: {', '.join(PRESETS)}")


# --- right-hand sides ---


def _checked_sum(terms: dict[str, FloatArray]) -> FloatArray:
    total = None

    for name, term in terms.items():
        if not np.all(np.isfinite(term)):
            raise SolverError(f"Non-finite values in term '{name}'", term=name)
        total = term if total is None else total + term

    return total


def forcing_values(
    ws: SpectralWorkspace,
    u: FloatArray,
    zeta: FloatArray,
    coeffs: Coefficients,
) -> tuple[FloatArray, FloatArray]:
    """
    Source terms ``(F, G)`` of the nonlocal system once the transport terms
    ``σ u u_x`` and ``(u + b1 ζ² + 2 b1 ζ) ζ_x`` are moved to the left-hand side.

    ``F = P(D)[...]`` is the nonlocal bracket; ``G`` collects the stretching and coupling terms
    of the ``ζ`` equation. Every nonlinear term is formed on the padded grid.
    """
    require_finite(u, "u")
    require_finite(zeta, "zeta")

    c = coeffs
    U = ws.to_padded(u)
    Z = ws.to_padded(zeta)
    Ux = ws.to_padded(ws.derivative_values(u, 1))
    U2 = U * U
    Z2 = Z * Z

    bracket = _checked_sum(
        {
            "quadratic": 0.5 * (3.0 - c.sigma) * U2,
            "slope": 0.5 * c.sigma * Ux * Ux,
            "surface": 0.5 * Z2 + Z,
            "a1": c.a1 * (Z2 * U + 2.0 * Z * U + U),
            "a2": c.a2 * (Z * U + U),
            "a3+a4": (c.a3 + c.a4) * U,
            "a5": c.a5 * (U2 * Z2 + U2 * Z),
            "a6": c.a6 * U2 * U,
        }
    )
    zeta_source = _checked_sum(
        {
            "stretching": -(Z + 1.0) * Ux,
            "b2": -c.b2 * (Z + 1.0) * U * Ux,
            "b3": -c.b3 * (Z + 1.0) * U2 * Ux,
        }
    )

    return ws.pd_values(ws.from_padded(bracket)), ws.from_padded(zeta_source)


def transport_values(
    ws: SpectralWorkspace,
    velocity: FloatArray,
    elevation: FloatArray,
    u: FloatArray,
    zeta: FloatArray,
    coeffs: Coefficients,
) -> tuple[FloatArray, FloatArray]:
    """
    Transport terms ``-σ a u_x`` and ``-(a + b1 z² + 2 b1 z) ζ_x`` with coefficient fields ``(a, z)``.

    The nonlinear system uses ``(a, z) = (u, ζ)``; the linearized iteration freezes them at the
    previous iterate.
    """
    c = coeffs
    A = ws.to_padded(velocity)
    Zc = ws.to_padded(elevation)
    Ux = ws.to_padded(ws.derivative_values(u, 1))
    Zx = ws.to_padded(ws.derivative_values(zeta, 1))

    transport = _checked_sum({"transport": -c.sigma * A * Ux})
    zeta_transport = _checked_sum({"zeta transport": -(A + c.b1 * Zc * Zc + 2.0 * c.b1 * Zc) * Zx})

    return ws.from_padded(transport), ws.from_padded(zeta_transport)


def rhs_nonlocal_values(
    ws: SpectralWorkspace,
    u: FloatArray,
    zeta: FloatArray,
    coeffs: Coefficients,
    frame: Frame = Frame.TRANSLATED,
) -> tuple[FloatArray, FloatArray]:
    """Array-level right-hand side of the nonlocal system."""
    forcing_u, forcing_zeta = forcing_values(ws, u, zeta, coeffs)
    transport_u, transport_zeta = transport_values(ws, u, zeta, u, zeta, coeffs)

    du = transport_u + forcing_u
    dzeta = transport_zeta + forcing_zeta

    if Frame(frame) is Frame.ORIGINAL:
        du = du + coeffs.a4 * ws.derivative_values(u, 1)
        dzeta = dzeta - coeffs.b1 * ws.derivative_values(zeta, 1)

    require_finite(du, "du_dt")
    require_finite(dzeta, "dzeta_dt")

    return du, dzeta


def rhs_nonlocal(
    state: State,
    coeffs: Coefficients,
    frame: Frame = Frame.TRANSLATED,
    workspace: SpectralWorkspace | None = None,
) -> tuple[Field, Field]:
    """
    Right-hand side ``(u_t, ζ_t)`` of the nonlocal system.

    Args:
        state: Current ``(u, ζ)``.
        coeffs: Model coefficients.
        frame: ``translated`` returns the nonlocal system exactly; ``original`` adds back the
            linear drift ``a4 u_x`` on ``u`` and the transport ``-b1 ζ_x`` on ``ζ``.
        workspace: Spectral workspace of the state's grid.

    Raises:
        SolverError: If any intermediate term is non-finite; ``term`` names it.
    """
    ws = workspace or workspace_for(state.grid)
    du, dzeta = rhs_nonlocal_values(ws, state.u.values, state.zeta.values, coeffs, frame)

    return Field(state.grid, du), Field(state.grid, dzeta)


def rhs_m_form(
    state: State,
    coeffs: Coefficients,
    workspace: SpectralWorkspace | None = None,
) -> tuple[Field, Field]:
    """
    Right-hand side ``(u_t, ρ_t)`` from the momentum form, term by term, with ``u_t = (1-∂x²)⁻¹ m_t``.

    Agrees with ``rhs_nonlocal`` in the original frame to spectral precision.
    """
    ws = workspace or workspace_for(state.grid)
    c = coeffs

    u = state.u.values
    rho = state.zeta.values + 1.0
    require_finite(u, "u")
    require_finite(rho, "rho")

    def d(values, order=1):
        return ws.derivative_values(values, order)

    def prod(*factors):
        return ws.product_values(*factors)

    ux = d(u)
    uxx = d(u, 2)
    uxxx = d(u, 3)
    rhox = d(rho)
    m = u - uxx
    mx = d(m)

    m_t = -_checked_sum(
        {
            "sigma stretching": c.sigma * (2.0 * prod(m, ux) + prod(u, mx)),
            "quadratic": 3.0 * (1.0 - c.sigma) * prod(u, ux),
            "surface": 0.5 * d(prod(rho, rho)),
            "a1": c.a1 * d(prod(rho, rho, u)),
            "a2": c.a2 * d(prod(rho, u)),
            "a3": c.a3 * ux,
            "a4": c.a4 * uxxx,
            "a5": c.a5 * d(prod(u, u, rho, rho - 1.0)),
            "a6": c.a6 * d(prod(u, u, u)),
        }
    )
    rho_t = -_checked_sum(
        {
            "mass flux": d(prod(rho, u)),
            "b1": c.b1 * prod(rho, rho, rhox),
            "b2": c.b2 * prod(rho, u, ux),
            "b3": c.b3 * prod(rho, u, u, ux),
        }
    )

    return Field(state.grid, ws.helmholtz_values(m_t)), Field(state.grid, rho_t)


# --- coefficient audit ---


@dataclass
class AuditRow:
    A: float
    c: float
    residuals: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(r < AUDIT_TOLERANCE for r in self.residuals.values())


@dataclass
class AuditReport:
    rows: list[AuditRow]
    tolerance: float = AUDIT_TOLERANCE

    @property
    def max_residuals(self) -> dict[str, float]:
        names = self.rows[0].residuals.keys() if self.rows else []
        return {name: max(row.residuals[name] for row in self.rows) for name in names}

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def failures(self) -> list[str]:
        return [
            f"A={row.A}: {name} residual {value:.3e}"
            for row in self.rows
            for name, value in row.residuals.items()
            if value >= self.tolerance
        ]


def audit_coefficient_identities(A_samples: Iterable[float]) -> AuditReport:
    """
    Check the coefficient identities of the vorticity system for each shear value.

    For every ``A``: the Burns relation, the unsimplified and simplified ``β1``, ``β2 = α1 - α2``,
    the closure choice ``6β1 = α2 / c`` and ``A = (c² - 1) / c``. Failures are report entries,
    never exceptions.
    """
    rows = []

    for A in A_samples:
        A = float(A)
        c = burns_speed(A)
        beta1, beta2 = vorticity_betas(c)
        alpha1, alpha2 = vorticity_alphas(c)
        beta1_unsimplified = -((5.0 * c * c + 1.0) / 48.0 + (3.0 * c**3 - c) * A / 48.0 - A * (c**3 + c) / 16.0)

        residuals = {
            "burns": abs(c * c - A * c - 1.0),
            "beta1": abs(beta1_unsimplified - beta1),
            "beta2": abs(beta2 - (alpha1 - alpha2)),
            "closure": abs(6.0 * beta1 - alpha2 / c),
            "shear": abs(A - (c * c - 1.0) / c),
        }
        row = AuditRow(A=A, c=c, residuals=residuals)

        if not row.passed:
            logger.warning(f"Coefficient audit failed at A={A}: {residuals}")

        rows.append(row)

    return AuditReport(rows=rows)
