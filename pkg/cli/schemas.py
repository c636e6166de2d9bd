"""
Pydantic models for experiment configs.

A config is one TOML file; see README.md for the full schema.
"""
import os
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src import config
from src.catalog import build_battery, build_generalized_function, build_slowly_varying
from src.errors import ConfigError

PIPELINES = (
    "certify",
    "converge",
    "delta-poisson",
    "density",
    "density-point",
    "info",
    "project",
    "qbth2",
    "qbth3",
    "quasi",
)

DistributionSpec = Union[str, dict]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MRAConfig(_Strict):
    """Scaling function selection."""

    filter: str = Field("d4", description="Built-in filter name or path to a coefficient file")
    depth: int = Field(config.DEFAULT_DEPTH, ge=4, le=16, description="Dyadic depth J")
    dimension: int = Field(1, ge=1, le=2, description="1, or 2 for the tensor product")

    @field_validator("filter")
    @classmethod
    def filter_exists(cls, value):
        if value.lower() not in config.BUILTIN_FILTERS and not os.path.isfile(value):
            raise ValueError(
                f"Unknown filter '{value}'; available: {', '.join(sorted(config.BUILTIN_FILTERS))} or a file path"
            )
        return value


class GridConfig(_Strict):
    """Lambda and epsilon grids."""

    lambdas: list[float] = Field(default_factory=lambda: [float(k) for k in range(13)])
    eps: Optional[list[float]] = Field(None, description="Explicit epsilon grid")
    eps_start: float = Field(1e-1, gt=0.0, description="Largest epsilon of the geometric grid")
    eps_stop: float = Field(1e-3, gt=0.0, description="Smallest epsilon of the geometric grid")
    eps_count: int = Field(7, ge=2, le=200)

    @field_validator("lambdas")
    @classmethod
    def strictly_increasing(cls, value):
        if not value or np.any(np.diff(value) <= 0):
            raise ValueError("lambdas must be a non-empty strictly increasing list")
        return value

    @field_validator("eps")
    @classmethod
    def positive(cls, value):
        if value is not None and (not value or min(value) <= 0):
            raise ValueError("eps must be a non-empty list of positive scales")
        return value

    def epsilons(self):
        if self.eps is not None:
            return sorted(self.eps, reverse=True)
        return [float(e) for e in np.geomspace(self.eps_start, self.eps_stop, self.eps_count)]


class ToleranceConfig(_Strict):
    """Overrides of the constants in src.config, by lower-case name."""

    tol_orthonormality: float = Field(config.TOL_ORTHONORMALITY, gt=0.0)
    tol_cascade: float = Field(config.TOL_CASCADE, gt=0.0)
    tol_pou: float = Field(config.TOL_POU, gt=0.0)
    slack_margin: float = Field(config.SLACK_MARGIN, ge=0.0)
    slope_tol: float = Field(config.SLOPE_TOL, gt=0.0)
    degree_margin: float = Field(config.DEGREE_MARGIN, ge=0.0)
    agreement_rtol: float = Field(config.AGREEMENT_RTOL, gt=0.0)
    agreement_atol: float = Field(config.AGREEMENT_ATOL, ge=0.0)
    vanish_tol: float = Field(config.VANISH_TOL, gt=0.0)
    converge_tol: float = Field(config.CONVERGE_TOL, gt=0.0)
    settle_atol: float = Field(config.SETTLE_ATOL, ge=0.0, description="Largest ignored rise of the converge errors")
    path_tol: float = Field(config.PATH_TOL, gt=0.0)
    poisson_rtol: float = Field(config.POISSON_RTOL, gt=0.0)
    alpha_tol: float = Field(config.ALPHA_TOL, gt=0.0)
    counterexample_tol: float = Field(config.COUNTEREXAMPLE_TOL, gt=0.0)
    residual_tol: float = Field(config.RESIDUAL_TOL, gt=0.0)
    ratio_tol: float = Field(config.RATIO_TOL, gt=0.0)
    dispersion_tol: float = Field(config.DISPERSION_TOL, gt=0.0)
    reproduction_tol: float = Field(config.REPRODUCTION_TOL, gt=0.0)


class OptionsConfig(_Strict):
    """Pipeline-specific settings; each pipeline reads the ones it needs."""

    expected: Optional[float] = Field(None, description="Expected value (limit, degree or density)")
    expect: Optional[Union[bool, dict[str, bool]]] = Field(
        None, description="Expected verdict; a mapping per family for density-point"
    )
    expect_clause: Optional[str] = Field(None, description="Hypothesis expected to fail in the density pipeline")
    alpha: Optional[float] = None
    ell: Optional[float] = Field(None, gt=0.0)
    l_model: DistributionSpec = "constant"
    convention: Literal["unit_ball", "printed"] = "unit_ball"
    path: Literal["kernel", "rescaled", "both"] = "kernel"
    tail: int = Field(5, ge=2, description="Trailing lambdas that must not increase the error")
    j_values: list[int] = Field(default_factory=lambda: [0, 1, 2])
    counterexample: bool = Field(False, description="Also fit the projected delta at level 0")
    family: Literal["balls", "hyperrectangles", "both"] = "both"
    a: float = Field(0.5, gt=0.0, le=1.0, description="Regularity constant of the shrinking family")
    samples: int = Field(32, ge=2, le=4096)
    seed: int = config.RANDOM_STATE
    max_outliers: int = Field(0, ge=0)
    limit: Optional[DistributionSpec] = Field(None, description="Homogeneous limit g for qbth2")


class OutputConfig(_Strict):
    dir: Optional[str] = Field(None, description="Output directory (overridden by --out)")
    csv: Optional[str] = Field(None, description="CSV file name, <pipeline>.csv by default")
    summary: str = "summary.json"


class ExperimentConfig(_Strict):
    """One experiment: scaling function, distribution, point, grids and pipeline."""

    name: str = "experiment"
    pipeline: Optional[Literal[PIPELINES]] = None
    mra: MRAConfig = Field(default_factory=MRAConfig)
    distribution: Optional[DistributionSpec] = None
    x0: Union[float, list[float]] = 0.0
    z: float = 0.0
    grids: GridConfig = Field(default_factory=GridConfig)
    battery: Union[str, list[DistributionSpec]] = "default4"
    options: OptionsConfig = Field(default_factory=OptionsConfig)
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @field_validator("x0")
    @classmethod
    def point_shape(cls, value):
        if isinstance(value, list) and len(value) != 2:
            raise ValueError("x0 is a number or a pair of numbers")
        return value

    @model_validator(mode="after")
    def catalog_names_exist(self):
        if isinstance(self.x0, list) and self.mra.dimension != 2:
            raise ValueError("A two-dimensional point needs mra.dimension = 2")
        try:
            if self.distribution is not None:
                build_generalized_function(self.distribution, self.mra.dimension)
            if self.options.limit is not None:
                build_generalized_function(self.options.limit, self.mra.dimension)
            build_battery(self.battery)
            build_slowly_varying(self.options.l_model)
        except ConfigError as exc:
            raise ValueError(str(exc)) from exc
        return self

    def distribution_function(self):
        if self.distribution is None:
            raise ConfigError(f"Pipeline '{self.pipeline}' needs a [distribution] section")
        return build_generalized_function(self.distribution, self.mra.dimension)

    def limit_function(self):
        if self.options.limit is None:
            raise ConfigError("Pipeline 'qbth2' needs options.limit (the homogeneous limit g)")
        return build_generalized_function(self.options.limit, self.mra.dimension)

    def test_battery(self):
        return build_battery(self.battery)

    def slowly_varying(self):
        return build_slowly_varying(self.options.l_model)

    def point(self):
        return tuple(self.x0) if isinstance(self.x0, list) else float(self.x0)
