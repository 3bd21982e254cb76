"""Exponential time integration of the perturbation system.

The linear part of the system is diagonal in Fourier space: per wavenumber
``xi`` the pair ``(a_hat, u_hat)`` evolves by the 2x2 generator

    M(xi) = [[0,            -i xi      ],
             [-i gamma xi,  -|xi|^(2 beta)]]

whose exponential is computed in closed form and applied exactly.  The
nonlinear remainder is advanced with a two-stage (Heun) integrating-factor
scheme, giving a method that is second order overall and *exact* on the
linearised system regardless of the step size.  The propagator never
amplifies a mode (both eigenvalues of M have nonpositive real part).

Two discrete conservation laws are built in: the zero mode of ``a`` is
untouched by construction, and after each nonlinear step the zero mode of
``u`` is resolved from the conserved total momentum rather than integrated,
so ``integral (1+a) u dx`` is preserved to round-off over arbitrarily long
runs.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import ParameterError, StabilityError, VacuumError
from .model import DENSITY_BOUNDS_DEFAULT, ModelParams, State, check_density, momentum
from .spectral import Field, SpectralGrid

__all__ = [
    "StepperConfig",
    "RunResult",
    "linear_propagator",
    "propagator_table",
    "Stepper",
    "cfl_limit",
    "run",
]

# Relative eigenvalue gap below which the defective (Jordan) limit of the
# matrix exponential is used instead of the two-eigenvalue formula.
_JORDAN_GAP = 1e-8


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping controls for `run`.

    ``dt = None`` derives the step from the CFL bound at t = 0; an explicit
    ``dt`` must satisfy that bound.  Whatever its source, the step is then
    shrunk minimally so an integer number of steps lands exactly on each
    sampling time.
    """

    t_end: float
    sample_interval: float
    dt: Optional[float] = None
    cfl_safety: float = 0.5
    density_bounds: tuple[float, float] = DENSITY_BOUNDS_DEFAULT

    def __post_init__(self):
        if self.t_end < 0.0:
            raise ParameterError(f"t_end must be nonnegative, got {self.t_end}")
        if not (self.sample_interval > 0.0):
            raise ParameterError(
                f"sample_interval must be positive, got {self.sample_interval}"
            )
        if self.dt is not None and not (self.dt > 0.0):
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ParameterError(
                f"cfl_safety must lie in (0, 1], got {self.cfl_safety}"
            )


@dataclass
class RunResult:
    """Outcome of a `run`: samples plus how (and whether) the run ended."""

    samples: list
    status: str  # "completed" | "vacuum" | "nan" | "cfl"
    message: str
    warnings: list[str]
    final_state: Optional[State]
    dt: float
    sample_interval: float

    @property
    def completed(self) -> bool:
        return self.status == "completed"


def cfl_limit(state: State, params: ModelParams, cfl_safety: float) -> float:
    """Largest admissible step: cfl * dx / max(1, max|u| + sound speed)."""
    max_u = float(np.max(np.abs(state.u.values)))
    return cfl_safety * state.grid.dx / max(1.0, max_u + params.sound_speed)


def _propagator_entries(xi_damp, xi_wave, dt, params):
    """Entries of exp(dt M(xi)) for damping/coupling wavenumber arrays.

    ``xi_damp`` feeds the dissipation multiplier |xi|^(2 beta); ``xi_wave``
    feeds the acoustic coupling i xi and is zeroed at the Nyquist mode to
    match the derivative convention.  Uses exp(dt M) = e^{mu dt} (cosh(nu dt) I
    + sinh(nu dt)/nu (M - mu I)) with mu the mean eigenvalue and
    nu^2 = mu^2 - gamma xi^2; the sinh ratio degenerates smoothly to dt at
    a defective (double-eigenvalue) point.
    """
    xi_damp = np.asarray(xi_damp, dtype=np.float64)
    xi_wave = np.asarray(xi_wave, dtype=np.float64)
    mu = -0.5 * np.abs(xi_damp) ** (2.0 * params.beta)
    nu = np.sqrt((mu**2 - params.gamma * xi_wave**2).astype(np.complex128))
    gap_tol = _JORDAN_GAP * np.maximum(1.0, np.abs(mu + nu))
    defective = np.abs(2.0 * nu) < gap_tol

    # Both eigenvalues mu +/- nu have nonpositive real part, so their
    # exponentials stay bounded and the symmetric combinations below never
    # overflow.  Near a defective point the sinh ratio switches to its
    # series so the 0/0 limit is taken smoothly.
    exp_plus = np.exp((mu + nu) * dt)
    exp_minus = np.exp((mu - nu) * dt)
    amp_cosh = 0.5 * (exp_plus + exp_minus)
    z = nu * dt
    safe_nu = np.where(defective, 1.0, nu)
    with np.errstate(invalid="ignore", divide="ignore"):
        amp_snc = np.where(
            defective,
            np.exp(mu * dt) * dt * (1.0 + z**2 / 6.0),
            0.5 * (exp_plus - exp_minus) / safe_nu,
        )

    e11 = amp_cosh - mu * amp_snc
    e12 = (-1j * xi_wave) * amp_snc
    e21 = (-1j * params.gamma * xi_wave) * amp_snc
    e22 = amp_cosh + mu * amp_snc
    return e11, e12, e21, e22


def linear_propagator(xi: float, dt: float, params: ModelParams) -> np.ndarray:
    """exp(dt M(xi)) as a 2x2 complex matrix, exact for the linear system."""
    e11, e12, e21, e22 = _propagator_entries(
        np.array([xi]), np.array([xi]), float(dt), params
    )
    return np.array([[e11[0], e12[0]], [e21[0], e22[0]]], dtype=np.complex128)


@lru_cache(maxsize=64)
def _cached_table(n, length, dt, params):
    grid = SpectralGrid(n, length)
    xi_wave = grid.xi.copy()
    xi_wave[-1] = 0.0  # Nyquist carries no representable odd derivative
    return _propagator_entries(grid.xi, xi_wave, dt, params)


def propagator_table(grid: SpectralGrid, dt: float, params: ModelParams):
    """Per-mode propagator entries on a grid, cached per (grid, dt, params)."""
    return _cached_table(grid.n, grid.length, float(dt), params)


class Stepper:
    """Advances a state by a fixed step; owns the cached linear propagator.

    ``include_nonlinear = False`` turns the scheme into the pure linear
    solve (used for exactness checks); in that mode no momentum correction
    is applied because the linear flow conserves the plain mean of u.
    """

    def __init__(
        self,
        grid: SpectralGrid,
        params: ModelParams,
        dt: float,
        include_nonlinear: bool = True,
    ):
        if not (dt > 0.0):
            raise ParameterError(f"dt must be positive, got {dt}")
        self.grid = grid
        self.params = params
        self.dt = float(dt)
        self.include_nonlinear = include_nonlinear
        self.e11, self.e12, self.e21, self.e22 = propagator_table(grid, self.dt, params)
        self._ideriv = 1j * grid.xi.copy()
        self._ideriv[-1] = 0.0
        self._xi2beta = grid.xi_power(2.0 * params.beta)
        self._keep = grid.dealias_keep
        # Half-spectrum weights for mean(f g): [1, 2, ..., 2, 1].
        self._pair_w = grid.mode_weights / grid.length
        self.momentum_target: Optional[float] = None
        self.last_max_speed = 0.0

    # -- spectral-array core ------------------------------------------------

    def _nonlinear(self, wa: np.ndarray, wu: np.ndarray, track_speed: bool):
        grid, params = self.grid, self.params
        a_vals = grid.inverse(wa)
        rho = 1.0 + a_vals
        rho_min = rho.min()
        if rho_min <= 0.0:
            raise VacuumError(f"density reached {rho_min:.3e}")
        u_vals = grid.inverse(wu)
        if track_speed:
            self.last_max_speed = float(np.max(np.abs(u_vals)))
        ax_vals = grid.inverse(self._ideriv * wa)
        lap_vals = grid.inverse(self._xi2beta * wu)
        g = params.gamma
        k_vals = (g * a_vals + g * (1.0 - rho ** (g - 1.0))) / rho

        na = -self._ideriv * np.where(self._keep, grid.forward(a_vals * u_vals), 0.0)
        f_u = np.where(
            self._keep,
            grid.forward(k_vals * ax_vals + (a_vals / rho) * lap_vals),
            0.0,
        )
        f_sq = np.where(self._keep, grid.forward(u_vals * u_vals), 0.0)
        nu = f_u - 0.5 * self._ideriv * f_sq
        return na, nu

    def _apply_linear(self, wa, wu):
        return self.e11 * wa + self.e12 * wu, self.e21 * wa + self.e22 * wu

    def _pair_mean(self, wa, wu) -> float:
        """mean(a * u') with the zero mode of u excluded."""
        prod = (wa[1:] * np.conj(wu[1:])).real
        return float(np.dot(self._pair_w[1:], prod))

    def _momentum_spectral(self, wa, wu) -> float:
        mean_u = wu[0].real
        return self.grid.length * (
            mean_u * (1.0 + wa[0].real) + self._pair_mean(wa, wu)
        )

    def step_arrays(self, wa: np.ndarray, wu: np.ndarray):
        """One step on raw half-spectrum arrays; returns new arrays."""
        if not self.include_nonlinear:
            return self._apply_linear(wa, wu)

        target = self.momentum_target
        if target is None:
            target = self._momentum_spectral(wa, wu)

        na1, nu1 = self._nonlinear(wa, wu, track_speed=True)
        la, lu = self._apply_linear(wa, wu)
        fa1, fu1 = self._apply_linear(na1, nu1)
        pa = la + self.dt * fa1
        pu = lu + self.dt * fu1
        na2, nu2 = self._nonlinear(pa, pu, track_speed=False)
        half = 0.5 * self.dt
        wa_new = la + half * (fa1 + na2)
        wu_new = lu + half * (fu1 + nu2)

        # Resolve the u zero mode from momentum conservation instead of the
        # integrated forcing; the replaced value differs by the local
        # truncation error, the conservation gain is exact.
        wu_new[0] = (target / self.grid.length - self._pair_mean(wa_new, wu_new)) / (
            1.0 + wa_new[0].real
        )
        return wa_new, wu_new

    def step(self, state: State) -> State:
        wa, wu = self.step_arrays(state.a.spectrum, state.u.spectrum)
        return State(
            Field(self.grid, wa), Field(self.grid, wu), state.time + self.dt
        )


def _resolve_dt(state0, params, config) -> tuple[float, int]:
    """Pick a step obeying the CFL bound that divides the sample interval."""
    limit = cfl_limit(state0, params, config.cfl_safety)
    if config.dt is not None:
        dt = config.dt
        if dt > limit * (1.0 + 1e-12):
            raise StabilityError(
                f"dt = {dt:.6g} exceeds the CFL bound {limit:.6g} at t = 0"
            )
    else:
        # Sit below the bound so mild in-run speed growth does not abort.
        dt = 0.9 * limit
    n_sub = max(1, int(np.ceil(config.sample_interval / dt - 1e-12)))
    return config.sample_interval / n_sub, n_sub


def run(
    state0: State,
    params: ModelParams,
    config: StepperConfig,
    sampler: Callable[[State], object],
) -> RunResult:
    """Integrate from ``state0`` and collect ``sampler(state)`` records.

    Sampling happens at t = 0 and every ``sample_interval`` up to the first
    multiple that reaches ``t_end`` (exactly one sample when t_end = 0).
    The run aborts — returning the samples gathered so far, the last of
    which is the last healthy state — when density leaves the configured
    window, a spectrum stops being finite, or the CFL bound is violated by
    in-run speeds.
    """
    report = check_density(state0, config.density_bounds)
    if not report.within_bounds:
        raise VacuumError(
            f"initial density range [{report.min_density:.4g}, "
            f"{report.max_density:.4g}] violates bounds {config.density_bounds}"
        )

    run_warnings: list[str] = []
    grid = state0.grid
    if config.t_end > 0.0:
        spread = config.t_end ** (1.0 / (2.0 * params.beta))
        if spread > grid.length / 4.0:
            msg = (
                f"diffusive support ~{spread:.3g} exceeds a quarter box "
                f"{grid.length / 4.0:.3g}; decay measurements will saturate"
            )
            run_warnings.append(msg)
            _warnings.warn(msg, stacklevel=2)

    if config.t_end == 0.0:
        state0 = State(state0.a, state0.u, 0.0)
        return RunResult(
            [sampler(state0)], "completed", "", run_warnings, state0, 0.0,
            config.sample_interval,
        )

    dt, n_sub = _resolve_dt(state0, params, config)
    n_samples = int(np.ceil(config.t_end / config.sample_interval - 1e-12))
    stepper = Stepper(grid, params, dt)
    stepper.momentum_target = momentum(state0)

    wa = state0.a.spectrum.copy()
    wu = state0.u.spectrum.copy()
    healthy = State(Field(grid, wa.copy()), Field(grid, wu.copy()), 0.0)
    samples = [sampler(healthy)]
    status, message = "completed", ""

    speed_cap = max(1.0, config.cfl_safety * grid.dx / dt - params.sound_speed)
    for k in range(1, n_samples + 1):
        try:
            for _ in range(n_sub):
                wa, wu = stepper.step_arrays(wa, wu)
        except VacuumError as exc:
            status, message = "vacuum", str(exc)
            break
        t_k = k * config.sample_interval
        state_k = State(Field(grid, wa), Field(grid, wu), t_k)
        if not (np.all(np.isfinite(wa)) and np.all(np.isfinite(wu))):
            status, message = "nan", f"non-finite spectrum at t = {t_k:.6g}"
            break
        report = check_density(state_k, config.density_bounds)
        if not report.within_bounds:
            status = "vacuum"
            message = (
                f"density range [{report.min_density:.4g}, {report.max_density:.4g}] "
                f"left bounds {config.density_bounds} at t = {t_k:.6g}"
            )
            break
        if stepper.last_max_speed > speed_cap * (1.0 + 1e-9):
            status = "cfl"
            message = (
                f"max|u| = {stepper.last_max_speed:.4g} at t = {t_k:.6g} "
                f"broke the CFL bound for dt = {dt:.6g}"
            )
            break
        healthy = State(Field(grid, wa.copy()), Field(grid, wu.copy()), t_k)
        samples.append(sampler(healthy))

    return RunResult(
        samples, status, message, run_warnings, healthy, dt,
        config.sample_interval,
    )
