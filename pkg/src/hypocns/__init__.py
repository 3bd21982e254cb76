"""Pseudo-spectral simulation of 1D isentropic flow with fractional dissipation.

The package integrates the perturbation form of the barotropic mass and
momentum equations on a periodic box, where the velocity is damped by a
fractional power of the Laplacian, and verifies the quantitative theory of
that system numerically: exact energy balance, monotone damped functionals,
sharp algebraic decay rates with matching lower-bound floors, and decay of
large data under a derivative-smallness hypothesis.

Typical entry points: `SpectralGrid` + `generate_initial_data` to build a
state, `run` to integrate it, `functional_sampler` to measure it, the
``verify_*`` functions to judge it, and `run_from_config` to do all of the
above from a YAML description (also exposed as the ``hypocns`` command).
"""

from .analysis import (
    FunctionalSample,
    GNReport,
    LPBlocks,
    besov_pair_norm,
    functional_positivity_margin,
    functional_sampler,
    gn_check,
    graded_energy,
    hsigma_inner,
    interpolation_exponent,
    lp_norm,
    lyapunov_pair,
    pair_norm,
    physical_energy,
    sobolev_inner,
    sobolev_norm,
    split_low_frequency_energy,
)
from .config import RunConfig, load_config, save_config
from .errors import (
    DataSpecError,
    DegenerateInputError,
    ParameterError,
    RegimeError,
    SimulationError,
    StabilityError,
    VacuumError,
)
from .experiments import (
    DecayFit,
    ExperimentResult,
    InitialDataSpec,
    datum_norms,
    fit_decay_exponent,
    generate_initial_data,
    predicted_decay_exponent,
    run_from_config,
    sweep,
    verify_conservation,
    verify_energy_identity,
    verify_intermediate_bound,
    verify_lyapunov,
    write_experiment_report,
)
from .model import (
    ModelParams,
    State,
    check_density,
    momentum,
    potential_density,
    pressure_coeff_K,
)
from .oracle import (
    LowerBoundReport,
    datum_band_constants,
    linear_evolve,
    lower_bound_constant,
    pair_sobolev_norm,
    per_mode_floor,
    verify_lower_bound,
)
from .spectral import (
    Field,
    SpectralGrid,
    dealias,
    derivative,
    fractional_laplacian,
    riesz_power,
)
from .stepping import (
    RunResult,
    Stepper,
    StepperConfig,
    cfl_limit,
    linear_propagator,
    propagator_table,
    run,
)

__version__ = "0.1.0"
