"""Isentropic flow with fractional dissipation, in perturbation variables.

The state is ``(a, u)`` with density ``rho = 1 + a`` and velocity ``u`` on a
periodic box.  The evolution solved here is

    a_t + u_x           = -(a u)_x
    u_t + (-Lap)^beta u + gamma a_x = K(a) a_x - u u_x + (a/(1+a)) (-Lap)^beta u

with pressure law ``P(rho) = rho^gamma`` (gamma > 1) and

    K(a) = gamma a/(1+a) + gamma (1 - (1+a)^(gamma-1))/(1+a),

the exact correction that turns the quasilinear pressure term into
``gamma a_x`` plus a perturbatively small remainder.  ``K`` vanishes
identically for gamma = 2.

The admissible dissipation range here is ``beta in [1/2, 1)``; large-data
guarantees additionally need ``beta < 3/4`` and are enforced where runs are
assembled, not in `ModelParams` itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ParameterError, VacuumError
from .spectral import Field, SpectralGrid, dealias, derivative, fractional_laplacian

__all__ = [
    "ModelParams",
    "State",
    "DensityReport",
    "pressure_coeff_K",
    "potential_density",
    "nonlinear_rhs",
    "check_density",
    "momentum",
]

DENSITY_BOUNDS_DEFAULT = (0.25, 4.0)


@dataclass(frozen=True)
class ModelParams:
    """Physical and functional parameters of a run.

    Attributes:
        beta: fractional dissipation order, in [1/2, 1).
        gamma: adiabatic exponent of the pressure law, > 1.
        k_cross: weight of the cross term coupling a and u inside the
            Lyapunov functionals; small and positive.
        c2_split: constant C2 of the time-dependent low-frequency cutoff
            |xi|^(2 beta) <= C2/(1+t) used by the frequency-split energy.
        s_reg: regularity index s of the energy functionals.  Defaults to
            beta itself (the critical choice); for beta = 1/2 the critical
            index is excluded and the default moves up to 0.6.
    """

    beta: float
    gamma: float
    k_cross: float = 0.05
    c2_split: float = 10.0
    s_reg: Optional[float] = field(default=None)

    def __post_init__(self):
        if not (0.5 <= self.beta < 1.0):
            raise ParameterError(f"beta must lie in [1/2, 1), got {self.beta}")
        if not (self.gamma > 1.0):
            raise ParameterError(f"gamma must exceed 1, got {self.gamma}")
        if not (self.k_cross > 0.0):
            raise ParameterError(f"k_cross must be positive, got {self.k_cross}")
        if not (self.c2_split > 0.0):
            raise ParameterError(f"c2_split must be positive, got {self.c2_split}")
        if self.s_reg is None:
            object.__setattr__(self, "s_reg", self.beta if self.beta > 0.5 else 0.6)
        if self.s_reg < self.beta:
            raise ParameterError(
                f"s_reg = {self.s_reg} must be at least beta = {self.beta}"
            )
        if self.beta == 0.5 and self.s_reg <= 0.5:
            raise ParameterError("for beta = 1/2 the index s_reg must exceed 1/2")

    @property
    def sound_speed(self) -> float:
        """Speed of the linearised acoustic waves, sqrt(P'(1)) = sqrt(gamma)."""
        return float(np.sqrt(self.gamma))


@dataclass
class State:
    """Instantaneous solution state: density perturbation, velocity, time."""

    a: Field
    u: Field
    time: float = 0.0

    def __post_init__(self):
        if self.a.grid != self.u.grid:
            raise ParameterError("a and u must live on the same grid")

    @property
    def grid(self) -> SpectralGrid:
        return self.a.grid

    def copy(self) -> "State":
        return State(self.a.copy(), self.u.copy(), self.time)


@dataclass(frozen=True)
class DensityReport:
    min_density: float
    max_density: float
    vacuum: bool
    within_bounds: bool
    bounds: tuple[float, float]


def _density_values(a: Field) -> np.ndarray:
    return 1.0 + a.values


def pressure_coeff_K(a: Field, params: ModelParams) -> Field:
    """Pointwise pressure-correction coefficient K(a) as a field.

    Requires the density 1 + a to stay positive; the result is dealiased
    like every other pointwise nonlinearity.
    """
    rho = _density_values(a)
    if rho.min() <= 0.0:
        raise VacuumError(f"density reached {rho.min():.3e}; K(a) undefined")
    g = params.gamma
    vals = (g * (rho - 1.0) + g * (1.0 - rho ** (g - 1.0))) / rho
    return dealias(Field.from_values(a.grid, vals))


def potential_density(rho, gamma: float):
    """Potential energy density of the pressure law, per unit volume.

    This is ``rho * integral_1^rho (s^gamma - 1)/s^2 ds`` in closed form:

        (rho^gamma - rho)/(gamma - 1) + 1 - rho.

    It is nonnegative, vanishes only at rho = 1, and behaves like
    ``(gamma/2) (rho-1)^2`` near equilibrium.  Accepts scalars or arrays.
    """
    if not (gamma > 1.0):
        raise ParameterError(f"gamma must exceed 1, got {gamma}")
    rho = np.asarray(rho, dtype=np.float64)
    if rho.min() <= 0.0:
        raise VacuumError(f"potential density undefined at rho = {rho.min():.3e}")
    out = (rho**gamma - rho) / (gamma - 1.0) + 1.0 - rho
    return float(out) if out.ndim == 0 else out


def nonlinear_rhs(state: State, params: ModelParams) -> tuple[Field, Field]:
    """Full right-hand side (da/dt, du/dt) of the perturbation system.

    All pointwise products are dealiased.  The zero mode of da/dt vanishes
    identically (the mass flux is a perfect derivative).
    """
    a, u = state.a, state.u
    grid = a.grid
    a_vals = a.values
    rho = 1.0 + a_vals
    if rho.min() <= 0.0:
        raise VacuumError(f"density reached {rho.min():.3e} in the right-hand side")
    u_vals = u.values
    ax_vals = derivative(a).values
    lap_u = fractional_laplacian(u, params.beta)
    lap_u_vals = lap_u.values

    g = params.gamma
    k_vals = (g * a_vals + g * (1.0 - rho ** (g - 1.0))) / rho

    flux = dealias(Field.from_values(grid, a_vals * u_vals))
    da = -1.0 * derivative(u) - derivative(flux)

    forcing = k_vals * ax_vals + (a_vals / rho) * lap_u_vals
    du = (
        -1.0 * lap_u
        - g * derivative(a)
        + dealias(Field.from_values(grid, forcing))
        - 0.5 * derivative(dealias(Field.from_values(grid, u_vals * u_vals)))
    )
    return da, du


def check_density(
    state: State, bounds: tuple[float, float] = DENSITY_BOUNDS_DEFAULT
) -> DensityReport:
    """Inspect the density range against a configurable admissible window."""
    lo, hi = bounds
    if not (0.0 < lo < hi):
        raise ParameterError(f"density bounds must satisfy 0 < lo < hi, got {bounds}")
    rho = _density_values(state.a)
    rmin, rmax = float(rho.min()), float(rho.max())
    return DensityReport(
        min_density=rmin,
        max_density=rmax,
        vacuum=rmin <= 0.0,
        within_bounds=(rmin >= lo) and (rmax <= hi),
        bounds=(lo, hi),
    )


def momentum(state: State) -> float:
    """Total momentum integral (1 + a) u dx, a conserved quantity."""
    grid = state.grid
    rho_u = (1.0 + state.a.values) * state.u.values
    return float(rho_u.sum() * grid.dx)
