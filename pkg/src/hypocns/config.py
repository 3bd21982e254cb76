"""Declarative run configuration with YAML round-tripping.

A `RunConfig` is the single description of a simulation: grid, physical
parameters, stepping controls, initial data, and which measurements and
verifications to perform.  It converts losslessly to and from plain
mappings so a YAML file, a command line, and a snapshot written next to a
run's outputs all agree exactly.

Box size may be given either as ``domain_length`` (absolute) or
``domain_length_pi`` (in units of pi, convenient for resolution
arithmetic); exactly one must be present.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import yaml

from .errors import ParameterError
from .model import ModelParams
from .spectral import SpectralGrid
from .stepping import StepperConfig

__all__ = ["RunConfig", "VERIFICATION_NAMES", "load_config", "save_config"]

VERIFICATION_NAMES = (
    "energy_identity",
    "lyapunov0",
    "lyapunov1",
    "conservation",
    "intermediate",
)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one simulation run."""

    grid_points: int
    beta: float
    gamma: float
    t_end: float
    sample_interval: float
    initial_data: dict
    domain_length: Optional[float] = None
    domain_length_pi: Optional[float] = None
    k_cross: float = 0.05
    c2_split: float = 10.0
    s_reg: Optional[float] = None
    dt: Optional[float] = None
    cfl_safety: float = 0.5
    density_lo: float = 0.25
    density_hi: float = 4.0
    norm_orders: tuple[float, ...] = (0.0,)
    fit_t_min: Optional[float] = None
    fit_t_max: Optional[float] = None
    verify: tuple[str, ...] = ()
    gradient_threshold: float = 0.05

    def __post_init__(self):
        has_abs = self.domain_length is not None
        has_pi = self.domain_length_pi is not None
        if has_abs == has_pi:
            raise ParameterError(
                "exactly one of domain_length / domain_length_pi must be set"
            )
        if not isinstance(self.initial_data, dict) or "kind" not in self.initial_data:
            raise ParameterError(
                "initial_data must be a mapping with at least a 'kind' entry"
            )
        object.__setattr__(self, "norm_orders",
                           tuple(float(s) for s in self.norm_orders))
        object.__setattr__(self, "verify", tuple(str(v) for v in self.verify))
        for name in self.verify:
            if name not in VERIFICATION_NAMES:
                raise ParameterError(
                    f"unknown verification {name!r}; choose from "
                    f"{VERIFICATION_NAMES}"
                )
        if not (0.0 < self.density_lo < self.density_hi):
            raise ParameterError(
                f"density window must satisfy 0 < lo < hi, got "
                f"({self.density_lo}, {self.density_hi})"
            )
        if (
            self.fit_t_min is not None
            and self.fit_t_max is not None
            and not (self.fit_t_min < self.fit_t_max)
        ):
            raise ParameterError(
                f"fit window must be increasing, got "
                f"[{self.fit_t_min}, {self.fit_t_max}]"
            )

    # -- derived builders ---------------------------------------------------

    @property
    def length(self) -> float:
        if self.domain_length is not None:
            return float(self.domain_length)
        return float(self.domain_length_pi) * math.pi

    @property
    def fit_window(self) -> tuple[float, float]:
        """Fit window, defaulting to the last nine tenths of the run."""
        lo = self.t_end / 10.0 if self.fit_t_min is None else self.fit_t_min
        hi = self.t_end if self.fit_t_max is None else self.fit_t_max
        return (float(lo), float(hi))

    def build_grid(self) -> SpectralGrid:
        return SpectralGrid(self.grid_points, self.length)

    def build_params(self) -> ModelParams:
        return ModelParams(
            beta=self.beta,
            gamma=self.gamma,
            k_cross=self.k_cross,
            c2_split=self.c2_split,
            s_reg=self.s_reg,
        )

    def build_stepper_config(self) -> StepperConfig:
        return StepperConfig(
            t_end=self.t_end,
            sample_interval=self.sample_interval,
            dt=self.dt,
            cfl_safety=self.cfl_safety,
            density_bounds=(self.density_lo, self.density_hi),
        )

    # -- mapping round trip ---------------------------------------------------

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunConfig":
        if not isinstance(mapping, dict):
            raise ParameterError(
                f"configuration must be a mapping, got {type(mapping).__name__}"
            )
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise ParameterError(f"unknown configuration keys: {unknown}")
        try:
            return cls(**mapping)
        except TypeError as exc:
            raise ParameterError(f"incomplete configuration: {exc}") from exc

    def to_mapping(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
            if value is None and f.name in ("domain_length", "domain_length_pi"):
                continue
            out[f.name] = value
        return out


def load_config(path) -> RunConfig:
    """Read one run configuration from a YAML file."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParameterError(f"malformed YAML in {path}: {exc}") from exc
    return RunConfig.from_mapping(data)


def save_config(config: RunConfig, path) -> None:
    """Write a configuration snapshot that `load_config` reads back equal."""
    Path(path).write_text(
        yaml.safe_dump(config.to_mapping(), sort_keys=True, default_flow_style=False)
    )
