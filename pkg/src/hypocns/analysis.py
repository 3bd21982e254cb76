"""Norms, frequency-block decompositions, and monitored functionals.

Everything here is a pure measurement on a state: Sobolev norms and inner
products evaluated as weighted sums over the half spectrum, smooth dyadic
frequency blocks with the associated negative-regularity block norm, the
damped energy functionals whose time monotonicity the integrator is
expected to reproduce, and the low-frequency energy split used to explain
the polynomial decay rates.

The two monitored functional pairs follow one design: an energy part at a
base regularity plus the same shape at a higher regularity, coupled by a
small cross term ``2 k <velocity, smoothed density gradient>`` that trades
a loss of perfect symmetry for dissipation in the density component.  The
cross coupling is weighted so the whole expression stays comparable to the
plain energies whenever ``k`` is small; `functional_positivity_margin`
quantifies that comparability per wavenumber.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import DegenerateInputError, ParameterError
from .model import ModelParams, State, momentum, potential_density
from .spectral import Field, SpectralGrid

__all__ = [
    "sobolev_inner",
    "sobolev_norm",
    "hsigma_inner",
    "lp_norm",
    "pair_norm",
    "physical_energy",
    "graded_energy",
    "lyapunov_pair",
    "functional_positivity_margin",
    "LPBlocks",
    "besov_pair_norm",
    "split_low_frequency_energy",
    "interpolation_exponent",
    "GNReport",
    "gn_check",
    "FunctionalSample",
    "functional_sampler",
]

_MEAN_FREE_RTOL = 1e-10


def _require_mean_free(field: Field, what: str) -> None:
    spectrum = field.spectrum
    rms = float(
        np.sqrt(np.dot(field.grid.mode_weights, np.abs(spectrum) ** 2)
                / field.grid.length)
    )
    if rms > 0.0 and abs(spectrum[0]) > _MEAN_FREE_RTOL * rms:
        raise DegenerateInputError(
            f"{what} of negative order needs a mean-free field; "
            f"mean = {spectrum[0].real:.3e}"
        )


def sobolev_inner(f: Field, g: Field, order: float = 0.0) -> float:
    """Real inner product of |D|^order f with |D|^order g."""
    if f.grid != g.grid:
        raise ParameterError("fields live on different grids")
    if order < 0.0:
        _require_mean_free(f, "inner product")
        _require_mean_free(g, "inner product")
    weight = f.grid.mode_weights * f.grid.xi_power(2.0 * order)
    return float(np.dot(weight, (f.spectrum * np.conj(g.spectrum)).real))


def sobolev_norm(f: Field, order: float = 0.0) -> float:
    """Homogeneous Sobolev norm || |D|^order f ||_{L^2}."""
    if order < 0.0:
        _require_mean_free(f, "norm")
    weight = f.grid.mode_weights * f.grid.xi_power(2.0 * order)
    return float(np.sqrt(np.dot(weight, np.abs(f.spectrum) ** 2)))


def hsigma_inner(f: Field, g: Field, sigma: float) -> float:
    """Split inhomogeneous pairing: plain inner product plus the order-sigma one.

    Evaluates ``<f, g> + <|D|^sigma f, |D|^sigma g>``, the inner product
    against which the cross-coupled functionals below are assembled.
    """
    return sobolev_inner(f, g, 0.0) + sobolev_inner(f, g, sigma)


def lp_norm(f: Field, p: float) -> float:
    """Lebesgue norm of the physical values by box quadrature."""
    if not (p >= 1.0):
        raise ParameterError(f"Lebesgue exponent must be >= 1, got {p}")
    vals = np.abs(f.values)
    if math.isinf(p):
        return float(vals.max())
    return float((np.sum(vals**p) * f.grid.dx) ** (1.0 / p))


def pair_norm(state: State, order: float = 0.0) -> float:
    """Joint norm sqrt(||.||^2 + ||.||^2) of the pair at a given order."""
    return float(
        math.hypot(sobolev_norm(state.a, order), sobolev_norm(state.u, order))
    )


def physical_energy(state: State, params: ModelParams) -> float:
    """integral of (2 x potential density + (1+a) u^2) over the box.

    Half of this quantity obeys the exact balance law: its time derivative
    plus || |D|^beta u ||^2 vanishes along smooth solutions.
    """
    a_vals = state.a.values
    u_vals = state.u.values
    g_vals = potential_density(1.0 + a_vals, params.gamma)
    integrand = 2.0 * g_vals + (1.0 + a_vals) * u_vals**2
    return float(integrand.sum() * state.grid.dx)


def graded_energy(state: State, params: ModelParams, order: float) -> float:
    """gamma-weighted squared pair energy at a homogeneous regularity."""
    return (
        params.gamma * sobolev_norm(state.a, order) ** 2
        + sobolev_norm(state.u, order) ** 2
    )


def _cross_term(state: State, params: ModelParams, extra: float) -> float:
    """<|D|^extra u, |D|^(extra + 2 beta - 2) da/dx> over the half spectrum."""
    grid = state.grid
    smooth = grid.xi_power(extra + 2.0 * params.beta - 2.0) * grid.xi_power(extra)
    deriv = 1j * grid.xi.copy()
    deriv[-1] = 0.0
    pairing = (state.u.spectrum * np.conj(deriv * state.a.spectrum)).real
    return float(np.dot(grid.mode_weights * smooth, pairing))


def lyapunov_pair(state: State, params: ModelParams, level: int) -> tuple[float, float]:
    """Monitored functional and its dissipation at derivative level 0 or 1.

    Level 0 couples the physical energy with the graded energy at the
    regularity index of the model; level 1 is the same construction one
    derivative up (with the physical part replaced by the graded energy at
    order one, the natural quadratic stand-in).  Returns ``(value,
    dissipation)``; along solutions the value should be nonincreasing at
    rate at least the dissipation, up to quadratic remainders.
    """
    if level not in (0, 1):
        raise ParameterError(f"derivative level must be 0 or 1, got {level}")
    s = params.s_reg
    beta, k = params.beta, params.k_cross
    sigma = s - 2.0 * beta + 1.0
    base = float(level)

    if level == 0:
        energy_part = physical_energy(state, params) + graded_energy(state, params, s)
    else:
        energy_part = graded_energy(state, params, 1.0) + graded_energy(
            state, params, 1.0 + s
        )

    cross = _cross_term(state, params, base) + _cross_term(state, params, base + sigma)
    value = energy_part + 2.0 * k * cross

    diss = (
        k
        * params.gamma
        * (
            sobolev_norm(state.a, base + beta) ** 2
            + sobolev_norm(state.a, base + beta + sigma) ** 2
        )
        + sobolev_norm(state.u, base + beta) ** 2
        + sobolev_norm(state.u, base + beta + s) ** 2
    )
    return value, diss


def functional_positivity_margin(params: ModelParams, xi_max: float) -> float:
    """Worst-case relative definiteness of the coupled quadratic form.

    Per wavenumber the level-0 functional is a 2x2 quadratic form in the
    mode amplitudes whose off-diagonal entry comes from the cross coupling.
    Returns ``min over xi of 1 - |offdiag| / sqrt(diag product)``; a
    positive result certifies the functional is equivalent to the plain
    energy sum uniformly over ``(0, xi_max]``.
    """
    if not (xi_max > 0.0):
        raise ParameterError(f"xi_max must be positive, got {xi_max}")
    s, beta, k = params.s_reg, params.beta, params.k_cross
    sigma = s - 2.0 * beta + 1.0
    xi = np.logspace(-8, np.log10(xi_max), 4001)
    w_s = 1.0 + xi ** (2.0 * s)
    w_sigma = 1.0 + xi ** (2.0 * sigma)
    offdiag = k * w_sigma * xi ** (2.0 * beta - 1.0)
    return float(np.min(1.0 - offdiag / (np.sqrt(params.gamma) * w_s)))


def _smoothstep(r: np.ndarray) -> np.ndarray:
    """C-infinity ramp: 0 for r <= 0, 1 for r >= 1, strictly monotone between."""
    r = np.clip(r, 0.0, 1.0)
    out = np.zeros_like(r)
    interior = (r > 0.0) & (r < 1.0)
    ri = r[interior]
    lo = np.exp(-1.0 / ri)
    hi = np.exp(-1.0 / (1.0 - ri))
    out[interior] = lo / (lo + hi)
    out[r >= 1.0] = 1.0
    return out


def _low_pass(xi: np.ndarray) -> np.ndarray:
    """Smooth cutoff: 1 for |xi| <= 3/4, 0 for |xi| >= 4/3."""
    return _smoothstep((4.0 / 3.0 - np.abs(xi)) / (7.0 / 12.0))


def _annulus(xi: np.ndarray) -> np.ndarray:
    """Dyadic bump supported on 3/4 <= |xi| <= 8/3."""
    return _low_pass(xi / 2.0) - _low_pass(xi)


class LPBlocks:
    """Smooth dyadic frequency blocks adapted to a grid's retained band.

    Block ``j`` multiplies the spectrum by a fixed bump dilated to the
    annulus ``3/4 <= |xi| / 2^j <= 8/3``; over the grid's positive
    wavenumbers the bumps sum to one, so the blocks reassemble any
    mean-free field.  Only blocks that meet the band are materialised,
    each as a contiguous index range.
    """

    def __init__(self, grid: SpectralGrid):
        self.grid = grid
        xi = grid.xi
        xi_min = xi[1]
        xi_top = float(xi[-1])
        j_lo = math.floor(math.log2(xi_min * 3.0 / 8.0))
        j_hi = math.ceil(math.log2(xi_top * 4.0 / 3.0))
        self._blocks: list[tuple[int, int, int, np.ndarray]] = []
        for j in range(j_lo, j_hi + 1):
            scale = 2.0**j
            lo = int(np.searchsorted(xi, 0.75 * scale - 1e-12 * scale))
            hi = int(np.searchsorted(xi, (8.0 / 3.0) * scale + 1e-12 * scale, "right"))
            lo = max(lo, 1)
            if hi <= lo:
                continue
            vals = _annulus(xi[lo:hi] / scale)
            if np.max(vals) <= 1e-300:
                continue
            self._blocks.append((j, lo, hi, vals))

    @property
    def indices(self) -> list[int]:
        return [j for j, _, _, _ in self._blocks]

    def project(self, f: Field, j: int) -> Field:
        """The part of a field carried by block j (zero off the annulus)."""
        for jj, lo, hi, vals in self._blocks:
            if jj == j:
                out = np.zeros_like(f.spectrum)
                out[lo:hi] = vals * f.spectrum[lo:hi]
                return Field(self.grid, out)
        raise ParameterError(f"block {j} does not meet the retained band")

    def partition_values(self) -> np.ndarray:
        """Sum of all block multipliers over positive wavenumbers."""
        total = np.zeros(self.grid.n // 2, dtype=np.float64)
        for _, lo, hi, vals in self._blocks:
            total[lo - 1 : hi - 1] += vals
        return total

    def block_pair_energies(self, state: State) -> list[tuple[int, float]]:
        """Squared joint block norms ||block a||^2 + ||block u||^2 per block."""
        w = self.grid.mode_weights
        wa, wu = state.a.spectrum, state.u.spectrum
        out = []
        for j, lo, hi, vals in self._blocks:
            chunk = w[lo:hi] * vals**2
            energy = float(
                np.dot(chunk, np.abs(wa[lo:hi]) ** 2 + np.abs(wu[lo:hi]) ** 2)
            )
            out.append((j, energy))
        return out


def besov_pair_norm(state: State, blocks: Optional[LPBlocks] = None) -> float:
    """Largest dyadic-weighted joint block norm at regularity -1/2.

    Computes ``sup over j of 2^(-j/2) sqrt(||block_j a||^2 + ||block_j u||^2)``.
    This is the scale-invariant size controlling how large the data may be
    while the high-regularity decay statements still apply.
    """
    if blocks is None:
        blocks = LPBlocks(state.grid)
    best = 0.0
    for j, energy in blocks.block_pair_energies(state):
        best = max(best, 2.0 ** (-0.5 * j) * math.sqrt(energy))
    return best


def split_low_frequency_energy(
    state: State, params: ModelParams, t: float
) -> tuple[float, float]:
    """Energy inside the shrinking low-frequency set and the set's measure.

    The splitting frequency is ``(c2_split / (1+t))^(1/(2 beta))``; the
    returned measure is the full width of the symmetric interval.  The
    energy below it — the plain squared moduli ``|a_hat|^2 + |u_hat|^2``
    summed with quadrature weights — decays only polynomially and dictates
    the overall rate.
    """
    if t < 0.0:
        raise ParameterError(f"time must be nonnegative, got {t}")
    radius = (params.c2_split / (1.0 + t)) ** (1.0 / (2.0 * params.beta))
    grid = state.grid
    mask = grid.xi <= radius
    wa, wu = state.a.spectrum, state.u.spectrum
    energy = float(
        np.dot(
            grid.mode_weights[mask],
            np.abs(wa[mask]) ** 2 + np.abs(wu[mask]) ** 2,
        )
    )
    return energy, 2.0 * radius


def interpolation_exponent(s: float, p: float, s1: float, s2: float) -> float:
    """Interpolation weight for bounding the L^p norm of the s-th derivative.

    Scaling fixes the weight through ``s + 1/2 - 1/p = (1 - theta) s1 +
    theta s2``, i.e. ``theta = (s + 1/2 - 1/p - s1) / (s2 - s1)``, with the
    two reference regularities measured in L^2.  Valid only when the result
    lies in [0, 1].
    """
    if s2 <= s1:
        raise ParameterError(f"need s1 < s2, got s1 = {s1}, s2 = {s2}")
    if not (1.0 <= p):
        raise ParameterError(f"Lebesgue exponent must be >= 1, got {p}")
    theta = (s + 0.5 - 1.0 / p - s1) / (s2 - s1)
    if not (0.0 <= theta <= 1.0):
        raise ParameterError(
            f"orders (s={s}, p={p}) are not between s1={s1} and s2={s2}: "
            f"theta = {theta:.4g}"
        )
    return theta


@dataclass(frozen=True)
class GNReport:
    """Measured interpolation-inequality ratio for one field."""

    theta: float
    measured: float
    reference: float
    ratio: float
    ceiling: float
    flagged: bool


def gn_check(
    f: Field,
    p: float,
    s: float,
    s1: float,
    s2: float,
    ceiling: float = 100.0,
) -> GNReport:
    """Diagnostic ratio for the Lebesgue-interpolation inequality.

    Compares ``|| |D|^s f ||_{L^p}`` against the product
    ``|| |D|^s1 f ||^(1-theta) x || |D|^s2 f ||^theta`` of L^2-based norms,
    with ``theta`` fixed by scaling (see `interpolation_exponent`).  The
    constant-frequency component is excluded throughout (homogeneous
    derivatives annihilate it).  Purely diagnostic: the report flags ratios
    above ``ceiling`` but raises only for inadmissible exponents.
    """
    if not (p >= 2.0):
        raise ParameterError(f"Lebesgue exponent must be >= 2, got {p}")
    if s < 0.0 or s1 < 0.0:
        raise ParameterError(f"derivative orders must be nonnegative: s={s}, s1={s1}")
    if s1 > s2:
        raise ParameterError(f"need s1 <= s2, got s1 = {s1}, s2 = {s2}")
    if s1 == s2:
        balance = s + 0.5 - 1.0 / p
        if abs(balance - s1) > 1e-12 * max(1.0, abs(s1)):
            raise ParameterError(
                f"degenerate orders s1 = s2 = {s1} require s + 1/2 - 1/p = s1, "
                f"got {balance:.6g}"
            )
        theta = 0.5
    else:
        theta = interpolation_exponent(s, p, s1, s2)

    grid = f.grid
    measured = lp_norm(Field(grid, grid.xi_power(s) * f.spectrum), p)
    reference = sobolev_norm(f, s1) ** (1.0 - theta) * sobolev_norm(f, s2) ** theta
    ratio = measured / reference if reference > 0.0 else 0.0
    return GNReport(
        theta=theta,
        measured=measured,
        reference=reference,
        ratio=ratio,
        ceiling=ceiling,
        flagged=ratio > ceiling,
    )


@dataclass(frozen=True)
class FunctionalSample:
    """Everything measured on one state during a run.

    ``weighted_pair_l2`` is ``sqrt(gamma ||a||^2 + ||u||^2)`` with the
    constant mode excluded — the quantity whose decay the linear theory
    floors from below.  ``pair_norms`` maps each requested order to the
    unweighted joint norm used for rate fitting.
    """

    time: float
    e0: float
    e_s: float
    weighted_pair_l2: float
    lyap0: float
    diss0: float
    lyap1: float
    diss1: float
    visc_dissipation: float
    pair_norms: dict[float, float]
    besov_neg_half: float
    low_freq_energy: float
    split_measure: float
    mean_a: float
    momentum: float
    min_density: float
    max_speed: float


def functional_sampler(
    params: ModelParams,
    orders: Iterable[float] = (0.0,),
    blocks: Optional[LPBlocks] = None,
) -> Callable[[State], FunctionalSample]:
    """Build the per-state measurement used as a run sampler.

    ``orders`` selects which joint Sobolev norms are tracked for decay
    fits.  A shared `LPBlocks` may be passed to avoid rebuilding it per
    call; otherwise one is constructed lazily on first use.
    """
    orders = tuple(float(s) for s in orders)
    cache: dict[int, LPBlocks] = {}
    if blocks is not None:
        cache[blocks.grid.n] = blocks

    def sample(state: State) -> FunctionalSample:
        grid = state.grid
        lp = cache.get(grid.n)
        if lp is None or lp.grid != grid:
            lp = LPBlocks(grid)
            cache[grid.n] = lp
        lyap0, diss0 = lyapunov_pair(state, params, 0)
        lyap1, diss1 = lyapunov_pair(state, params, 1)
        low_energy, measure = split_low_frequency_energy(state, params, state.time)
        a_vals = state.a.values
        u_vals = state.u.values
        return FunctionalSample(
            time=state.time,
            e0=physical_energy(state, params),
            e_s=graded_energy(state, params, params.s_reg),
            weighted_pair_l2=math.sqrt(graded_energy(state, params, 0.0)),
            lyap0=lyap0,
            diss0=diss0,
            lyap1=lyap1,
            diss1=diss1,
            visc_dissipation=sobolev_norm(state.u, params.beta) ** 2,
            pair_norms={s: pair_norm(state, s) for s in orders},
            besov_neg_half=besov_pair_norm(state, lp),
            low_freq_energy=low_energy,
            split_measure=measure,
            mean_a=float(state.a.mean),
            momentum=momentum(state),
            min_density=float(1.0 + a_vals.min()),
            max_speed=float(np.max(np.abs(u_vals))),
        )

    return sample
