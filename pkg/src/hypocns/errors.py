"""Exception types shared across the package.

Each class marks a distinct failure mode so callers (and the CLI) can map
them to exit codes: configuration/hypothesis problems are ``ParameterError``
subclasses, runtime breakdowns of a simulation are ``SimulationError``
subclasses.
"""


class ParameterError(ValueError):
    """A parameter or configuration value violates its documented range."""


class RegimeError(ParameterError):
    """A run was requested outside the regime its guarantees require."""


class DegenerateInputError(ValueError):
    """An input field lacks a property an operator needs (e.g. zero mean)."""


class DataSpecError(ParameterError):
    """An initial-data request cannot be realised as specified."""


class SimulationError(RuntimeError):
    """Base class for runtime failures of a time integration."""


class VacuumError(SimulationError):
    """Density left the admissible window; the run must abort, not clamp."""


class StabilityError(SimulationError):
    """A stability condition (CFL bound, finiteness) failed during a run."""
