"""Model-layer checks: parameters, pressure terms, density, momentum."""

import numpy as np
import pytest
from scipy.integrate import quad

from hypocns import (
    Field,
    ModelParams,
    ParameterError,
    SpectralGrid,
    State,
    VacuumError,
    check_density,
    momentum,
    potential_density,
    pressure_coeff_K,
)
from hypocns.model import nonlinear_rhs
from hypocns.spectral import derivative, fractional_laplacian

GRID = SpectralGrid(128, 2.0 * np.pi)


def make_state(a_values, u_values, time=0.0) -> State:
    return State(
        Field.from_values(GRID, np.asarray(a_values, dtype=float)),
        Field.from_values(GRID, np.asarray(u_values, dtype=float)),
        time,
    )


class TestModelParams:
    def test_rejects_beta_outside_admissible_range(self):
        for beta in (0.25, 0.49, 1.0, 1.3):
            with pytest.raises(ParameterError):
                ModelParams(beta=beta, gamma=1.4)

    def test_rejects_gamma_at_most_one(self):
        with pytest.raises(ParameterError):
            ModelParams(beta=0.6, gamma=1.0)

    def test_rejects_nonpositive_cross_weight(self):
        with pytest.raises(ParameterError):
            ModelParams(beta=0.6, gamma=1.4, k_cross=0.0)

    def test_regularity_defaults_to_beta(self):
        assert ModelParams(beta=0.6, gamma=1.4).s_reg == 0.6
        assert ModelParams(beta=0.7, gamma=2.0).s_reg == 0.7

    def test_regularity_default_moves_up_at_critical_beta(self):
        assert ModelParams(beta=0.5, gamma=1.4).s_reg == 0.6

    def test_regularity_below_beta_rejected(self):
        with pytest.raises(ParameterError):
            ModelParams(beta=0.7, gamma=1.4, s_reg=0.6)
        with pytest.raises(ParameterError):
            ModelParams(beta=0.5, gamma=1.4, s_reg=0.5)

    def test_sound_speed_is_root_gamma(self):
        assert ModelParams(beta=0.6, gamma=1.4).sound_speed == pytest.approx(
            np.sqrt(1.4)
        )


class TestPressureCoefficient:
    def test_vanishes_identically_for_quadratic_pressure(self):
        a = Field.from_values(GRID, 0.3 * np.cos(GRID.x))
        k = pressure_coeff_K(a, ModelParams(beta=0.6, gamma=2.0))
        assert np.allclose(k.values, 0.0, atol=1e-14)

    def test_cubic_pressure_gives_minus_three_a(self):
        values = 0.2 * np.cos(GRID.x) - 0.1 * np.sin(3.0 * GRID.x)
        a = Field.from_values(GRID, values)
        k = pressure_coeff_K(a, ModelParams(beta=0.6, gamma=3.0))
        assert np.allclose(k.values, -3.0 * values, atol=1e-12)

    def test_zero_perturbation_gives_zero(self):
        k = pressure_coeff_K(Field.zeros(GRID), ModelParams(beta=0.6, gamma=1.4))
        assert np.allclose(k.values, 0.0, atol=1e-15)

    def test_vacuum_rejected(self):
        a = Field.from_values(GRID, -1.5 * np.ones(GRID.n))
        with pytest.raises(VacuumError):
            pressure_coeff_K(a, ModelParams(beta=0.6, gamma=1.4))


class TestPotentialDensity:
    def test_quadratic_pressure_closed_form(self):
        # gamma = 2 collapses to (rho - 1)^2
        assert potential_density(1.3, 2.0) == pytest.approx(0.09, abs=1e-15)
        rho = np.linspace(0.5, 2.0, 11)
        assert np.allclose(potential_density(rho, 2.0), (rho - 1.0) ** 2, atol=1e-14)

    def test_frozen_value_for_air_like_exponent(self):
        assert potential_density(1.1, 1.4) == pytest.approx(
            0.00686532519873273, abs=1e-16
        )

    def test_matches_quadrature_of_defining_integral(self):
        # dual route: rho * integral_1^rho (s^gamma - 1)/s^2 ds by quadrature
        for rho in (0.4, 0.75, 1.2, 2.5):
            for gamma in (1.4, 2.0, 3.0, 1.05):
                integral, _ = quad(
                    lambda s, g=gamma: (s**g - 1.0) / s**2, 1.0, rho, limit=200
                )
                assert potential_density(rho, gamma) == pytest.approx(
                    rho * integral, abs=1e-10
                ), (rho, gamma)

    def test_vanishes_only_at_equilibrium(self):
        assert potential_density(1.0, 1.4) == 0.0
        rho = np.concatenate([np.linspace(0.2, 0.95, 8), np.linspace(1.05, 3.0, 8)])
        assert np.all(potential_density(rho, 1.4) > 0.0)

    def test_quadratic_behaviour_near_equilibrium(self):
        gamma = 1.4
        eps = 1e-4
        expected = 0.5 * gamma * eps**2
        assert potential_density(1.0 + eps, gamma) == pytest.approx(expected, rel=1e-3)

    def test_vacuum_rejected(self):
        with pytest.raises(VacuumError):
            potential_density(-0.1, 1.4)

    def test_gamma_must_exceed_one(self):
        with pytest.raises(ParameterError):
            potential_density(1.2, 1.0)


class TestNonlinearRhs:
    def test_zero_state_is_stationary(self):
        da, du = nonlinear_rhs(
            State(Field.zeros(GRID), Field.zeros(GRID)),
            ModelParams(beta=0.6, gamma=1.4),
        )
        assert np.allclose(da.values, 0.0, atol=1e-15)
        assert np.allclose(du.values, 0.0, atol=1e-15)

    def test_mass_flux_has_no_constant_mode(self):
        rng = np.random.default_rng(3)
        state = make_state(
            0.2 * np.cos(GRID.x) + 0.05 * np.sin(2 * GRID.x),
            0.1 * np.sin(GRID.x) + 0.02 * rng.standard_normal(GRID.n),
        )
        da, _ = nonlinear_rhs(state, ModelParams(beta=0.6, gamma=1.4))
        assert abs(da.spectrum[0]) == 0.0

    def test_linearisation_error_is_quadratic_in_amplitude(self):
        params = ModelParams(beta=0.6, gamma=1.4)

        def residual(eps: float) -> float:
            state = make_state(eps * np.cos(GRID.x), eps * np.sin(2.0 * GRID.x))
            da, du = nonlinear_rhs(state, params)
            lin_da = -1.0 * derivative(state.u)
            lin_du = (
                -1.0 * fractional_laplacian(state.u, params.beta)
                - params.gamma * derivative(state.a)
            )
            return max(
                (da - lin_da).l2_norm(),
                (du - lin_du).l2_norm(),
            )

        r1, r2 = residual(1e-3), residual(2e-3)
        assert r2 / r1 == pytest.approx(4.0, rel=0.05)

    def test_vacuum_rejected(self):
        state = make_state(-1.2 * np.ones(GRID.n), np.zeros(GRID.n))
        with pytest.raises(VacuumError):
            nonlinear_rhs(state, ModelParams(beta=0.6, gamma=1.4))


class TestDensityAndMomentum:
    def test_density_report_fields(self):
        state = make_state(0.5 * np.cos(GRID.x), np.zeros(GRID.n))
        report = check_density(state)
        assert report.min_density == pytest.approx(0.5, abs=1e-12)
        assert report.max_density == pytest.approx(1.5, abs=1e-12)
        assert not report.vacuum
        assert report.within_bounds

    def test_density_out_of_bounds_flagged(self):
        state = make_state(3.5 * np.cos(GRID.x), np.zeros(GRID.n))
        report = check_density(state)
        assert report.max_density > 4.0
        assert not report.within_bounds
        assert report.vacuum  # min density dips below zero as well

    def test_bounds_must_be_ordered(self):
        state = make_state(np.zeros(GRID.n), np.zeros(GRID.n))
        with pytest.raises(ParameterError):
            check_density(state, bounds=(2.0, 1.0))

    def test_momentum_includes_density_weight(self):
        state = make_state(0.3 * np.cos(GRID.x), np.cos(GRID.x))
        # integral of (1 + 0.3 cos x) cos x over one period is 0.3 pi
        assert momentum(state) == pytest.approx(0.3 * np.pi, rel=1e-12)

    def test_state_requires_matching_grids(self):
        other = SpectralGrid(64, 2.0 * np.pi)
        with pytest.raises(ParameterError):
            State(Field.zeros(GRID), Field.zeros(other))
