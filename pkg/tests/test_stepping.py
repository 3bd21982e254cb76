"""Integrator checks: exact linear propagation, order, conservation, aborts."""

import warnings
from types import SimpleNamespace

import numpy as np
import pytest
from scipy.linalg import expm

from hypocns import (
    Field,
    ModelParams,
    ParameterError,
    SpectralGrid,
    StabilityError,
    State,
    Stepper,
    StepperConfig,
    VacuumError,
    cfl_limit,
    linear_evolve,
    linear_propagator,
    momentum,
    propagator_table,
    run,
)
from hypocns.stepping import _propagator_entries

GRID = SpectralGrid(128, 2.0 * np.pi)
PARAMS = ModelParams(beta=0.6, gamma=1.4)


def make_state(a_values, u_values, time=0.0) -> State:
    return State(
        Field.from_values(GRID, np.asarray(a_values, dtype=float)),
        Field.from_values(GRID, np.asarray(u_values, dtype=float)),
        time,
    )


def generator(xi: float, params) -> np.ndarray:
    return np.array(
        [
            [0.0, -1j * xi],
            [-1j * params.gamma * xi, -abs(xi) ** (2.0 * params.beta)],
        ],
        dtype=np.complex128,
    )


class TestLinearPropagator:
    def test_zero_wavenumber_is_identity(self):
        p = linear_propagator(0.0, 2.5, PARAMS)
        assert np.allclose(p, np.eye(2), atol=1e-15)

    def test_oscillatory_mode_closed_form(self):
        # unit sound speed, square-root dissipation, unit wavenumber: the
        # density response to a pure density datum is
        # e^(-t/2) (cos(sqrt(3) t / 2) + sin(sqrt(3) t / 2)/sqrt(3))
        stand_in = SimpleNamespace(beta=0.5, gamma=1.0)
        for t, frozen in [(0.7, 0.8109281656972523), (1.3, 0.49675599296490314)]:
            e11, _, _, _ = _propagator_entries([1.0], [1.0], t, stand_in)
            assert e11[0].real == pytest.approx(frozen, abs=1e-14)
            assert e11[0].imag == 0.0

    def test_defective_mode_takes_jordan_form(self):
        # quarter sound speed squared at unit wavenumber collapses the two
        # eigenvalues onto -1/2; exp(t M) = e^(mu t) (I + t (M - mu I))
        stand_in = SimpleNamespace(beta=0.5, gamma=0.25)
        t = 1.3
        e11, e12, e21, e22 = _propagator_entries([1.0], [1.0], t, stand_in)
        assert e11[0] == pytest.approx(0.8613755316556765 + 0j, abs=1e-14)
        assert e12[0] == pytest.approx(-0.6786595097893209j, abs=1e-14)
        assert e22[0] == pytest.approx(np.exp(-0.65) * 0.35, abs=1e-14)
        assert e21[0] == pytest.approx(0.25 * e12[0], abs=1e-15)

    def test_matches_dense_matrix_exponential(self):
        for xi in (0.25, 1.0, 3.7, 20.0):
            for dt in (0.05, 0.8):
                p = linear_propagator(xi, dt, PARAMS)
                assert np.allclose(
                    p, expm(dt * generator(xi, PARAMS)), atol=1e-11
                ), (xi, dt)

    def test_near_defective_wavenumber_stays_accurate(self):
        # the discriminant vanishes at xi = (4 gamma)^(1/(4 beta - 2));
        # the formula must hand over to the defective limit smoothly
        params = ModelParams(beta=0.75, gamma=1.4)
        xi_star = (4.0 * params.gamma) ** (1.0 / (4.0 * params.beta - 2.0))
        for xi in (xi_star, xi_star * (1.0 + 1e-10), xi_star * (1.0 - 1e-7)):
            p = linear_propagator(xi, 0.4, params)
            assert np.allclose(p, expm(0.4 * generator(xi, params)), atol=1e-9)

    def test_semigroup_property(self):
        for xi in (0.5, 2.0, 11.0):
            p1 = linear_propagator(xi, 0.3, PARAMS)
            p2 = linear_propagator(xi, 0.7, PARAMS)
            p12 = linear_propagator(xi, 1.0, PARAMS)
            assert np.allclose(p2 @ p1, p12, atol=1e-12)

    def test_never_amplifies(self):
        # both eigenvalues have nonpositive real part for every mode, so
        # the propagator's spectral radius never exceeds one
        for xi in np.geomspace(1e-3, 1e3, 25):
            for dt in (0.01, 1.0, 100.0):
                eigs = np.linalg.eigvals(linear_propagator(float(xi), dt, PARAMS))
                assert np.max(np.abs(eigs)) <= 1.0 + 1e-12

    def test_table_is_cached(self):
        t1 = propagator_table(GRID, 0.1, PARAMS)
        t2 = propagator_table(SpectralGrid(GRID.n, GRID.length), 0.1, PARAMS)
        assert t1[0] is t2[0]


class TestStepper:
    def test_zero_state_is_fixed_point(self):
        stepper = Stepper(GRID, PARAMS, dt=0.25)
        state = make_state(np.zeros(GRID.n), np.zeros(GRID.n))
        out = stepper.step(state)
        assert np.all(out.a.spectrum == 0.0)
        assert np.all(out.u.spectrum == 0.0)
        assert out.time == pytest.approx(0.25)

    def test_linear_mode_reproduces_oracle_for_any_step(self):
        # with the nonlinear terms disabled the scheme is the exact linear
        # flow, no matter how large the step
        state = make_state(0.3 * np.cos(GRID.x), 0.2 * np.sin(2.0 * GRID.x))
        for dt, n_steps in [(1.6, 5), (0.05, 160)]:
            stepper = Stepper(GRID, PARAMS, dt=dt, include_nonlinear=False)
            current = state
            for _ in range(n_steps):
                current = stepper.step(current)
            oracle = linear_evolve(state, PARAMS, dt * n_steps)
            scale = max(oracle.a.l2_norm(), oracle.u.l2_norm())
            assert (current.a - oracle.a).l2_norm() <= 1e-10 * scale
            assert (current.u - oracle.u).l2_norm() <= 1e-10 * scale

    def test_self_convergence_is_second_order(self):
        state = make_state(0.05 * np.cos(GRID.x), -0.03 * np.sin(GRID.x))

        def advance(dt: float) -> State:
            stepper = Stepper(GRID, PARAMS, dt=dt)
            stepper.momentum_target = momentum(state)
            current = state
            for _ in range(round(1.0 / dt)):
                current = stepper.step(current)
            return current

        reference = advance(1.0 / 256)
        errors = []
        for dt in (1.0 / 8, 1.0 / 16, 1.0 / 32):
            got = advance(dt)
            errors.append(
                max(
                    (got.a - reference.a).l2_norm(),
                    (got.u - reference.u).l2_norm(),
                )
            )
        assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.15)
        assert errors[1] / errors[2] == pytest.approx(4.0, rel=0.15)

    def test_small_amplitude_discrepancy_is_quadratic(self):
        def discrepancy(eps: float) -> float:
            state = make_state(eps * np.cos(GRID.x), eps * np.sin(GRID.x))
            stepper = Stepper(GRID, PARAMS, dt=0.02)
            stepper.momentum_target = momentum(state)
            current = state
            for _ in range(100):
                current = stepper.step(current)
            oracle = linear_evolve(state, PARAMS, 2.0)
            return max(
                (current.a - oracle.a).l2_norm(),
                (current.u - oracle.u).l2_norm(),
            )

        d1, d2 = discrepancy(2e-4), discrepancy(1e-4)
        assert d1 / d2 == pytest.approx(4.0, rel=0.2)

    def test_mean_density_is_bitwise_invariant(self):
        state = make_state(
            0.01 + 0.05 * np.cos(GRID.x), 0.02 * np.sin(GRID.x)
        )
        mass_mode = state.a.spectrum[0]
        stepper = Stepper(GRID, PARAMS, dt=0.02)
        stepper.momentum_target = momentum(state)
        current = state
        for _ in range(200):
            current = stepper.step(current)
        assert current.a.spectrum[0] == mass_mode

    def test_momentum_is_conserved_to_round_off(self):
        state = make_state(0.05 * np.cos(GRID.x), 0.1 + 0.04 * np.sin(GRID.x))
        target = momentum(state)
        stepper = Stepper(GRID, PARAMS, dt=0.02)
        stepper.momentum_target = target
        current = state
        for _ in range(500):
            current = stepper.step(current)
        assert momentum(current) == pytest.approx(target, abs=1e-13)

    def test_rejects_nonpositive_step(self):
        with pytest.raises(ParameterError):
            Stepper(GRID, PARAMS, dt=0.0)


class TestRun:
    def sampler(self, state: State):
        return (state.time, state.a.l2_norm(), state.u.l2_norm())

    def test_zero_horizon_returns_single_sample(self):
        state = make_state(0.01 * np.cos(GRID.x), np.zeros(GRID.n))
        result = run(
            state, PARAMS, StepperConfig(t_end=0.0, sample_interval=1.0), self.sampler
        )
        assert result.completed
        assert len(result.samples) == 1
        assert result.samples[0][0] == 0.0

    def test_collects_expected_sample_times(self):
        state = make_state(0.01 * np.cos(GRID.x), np.zeros(GRID.n))
        result = run(
            state,
            PARAMS,
            StepperConfig(t_end=1.0, sample_interval=0.25, dt=0.02),
            self.sampler,
        )
        assert result.completed
        assert [s[0] for s in result.samples] == pytest.approx(
            [0.0, 0.25, 0.5, 0.75, 1.0]
        )
        assert result.final_state is not None
        assert result.final_state.time == pytest.approx(1.0)

    def test_step_is_refined_to_divide_sample_interval(self):
        state = make_state(0.01 * np.cos(GRID.x), np.zeros(GRID.n))
        result = run(
            state,
            PARAMS,
            StepperConfig(t_end=0.5, sample_interval=0.25, dt=0.02),
            self.sampler,
        )
        n_sub = 0.25 / result.dt
        assert n_sub == pytest.approx(round(n_sub), abs=1e-9)
        assert result.dt <= 0.02 * (1.0 + 1e-12)

    def test_explicit_step_above_cfl_is_rejected(self):
        state = make_state(0.01 * np.cos(GRID.x), np.zeros(GRID.n))
        limit = cfl_limit(state, PARAMS, 0.5)
        with pytest.raises(StabilityError):
            run(
                state,
                PARAMS,
                StepperConfig(t_end=1.0, sample_interval=0.5, dt=2.0 * limit),
                self.sampler,
            )

    def test_initial_density_bound_violation_raises(self):
        state = make_state(0.9 * np.cos(GRID.x), np.zeros(GRID.n))
        with pytest.raises(VacuumError):
            run(
                state,
                PARAMS,
                StepperConfig(
                    t_end=1.0, sample_interval=0.5, density_bounds=(0.25, 4.0)
                ),
                self.sampler,
            )

    def test_in_run_density_excursion_aborts_with_last_healthy_state(self):
        # strong velocity sloshing pushes the density outside a tight
        # admissible window after a few samples
        state = make_state(0.005 * np.cos(GRID.x), -0.2 * np.sin(GRID.x))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # box-saturation advisory
            result = run(
                state,
                PARAMS,
                StepperConfig(
                    t_end=5.0, sample_interval=0.05, density_bounds=(0.99, 1.01)
                ),
                self.sampler,
            )
        assert result.status == "vacuum"
        assert "bounds" in result.message
        assert 1 <= len(result.samples) < 101
        assert result.final_state is not None
        # the recorded final state is the last one inside the window
        assert result.final_state.time == result.samples[-1][0]

    def test_long_horizon_on_small_box_warns_of_saturation(self):
        state = make_state(0.01 * np.cos(GRID.x), np.zeros(GRID.n))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = run(
                state,
                PARAMS,
                StepperConfig(t_end=50.0, sample_interval=25.0, dt=0.02),
                self.sampler,
            )
        assert any("saturate" in str(w.message) for w in caught)
        assert any("saturate" in w for w in result.warnings)

    def test_cfl_limit_formula(self):
        state = make_state(np.zeros(GRID.n), 0.5 * np.sin(GRID.x))
        expected = 0.4 * GRID.dx / max(1.0, 0.5 + PARAMS.sound_speed)
        assert cfl_limit(state, PARAMS, 0.4) == pytest.approx(expected, rel=1e-12)
