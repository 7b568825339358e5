"""
Pydantic models for the TOML run configuration.

Every section forbids unknown keys, so a typo in a config file is a
configuration error instead of a silently ignored setting.
"""
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator # type: ignore

from .params import ModelParams, Point3

_STRICT = ConfigDict(extra="forbid", allow_inf_nan=False)


class IntegrationConfig(BaseModel):
    """Settings shared by every subcommand that integrates the SDE."""
    dt: float = Field(1e-3, gt=0)
    T: float = Field(10.0, gt=0, description="Horizon for hitting times and the diagnostic.")
    n_steps: int = Field(10_000, ge=0, description="Steps for `simulate`.")
    n_traj: int = Field(1_000, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    start: Point3 = Field(default_factory=lambda: Point3(x=1.0, y=1.0, z=1.0))
    radius: float = Field(60.0, gt=0, description="Ball radius for hitting times.")
    T_burn: Optional[float] = Field(None, ge=0, description="Defaults to 20% of T_sample.")
    T_sample: float = Field(100.0, gt=0)
    thin: int = Field(1, ge=1)
    bins: int = Field(50, ge=1)
    record_every: int = Field(10, ge=1)
    z0_ladder: List[float] = Field(default_factory=list, description="Extra starts (0,0,z0) for hitting-time.")

    model_config = _STRICT


class CertificateConfig(BaseModel):
    budget: int = Field(200, ge=1)
    search_samples: int = Field(256, ge=1)
    verify_samples: int = Field(10_000, ge=1)
    k_max: int = Field(20, ge=0)
    slack: float = Field(0.99, gt=0, le=1)
    seed: int = Field(0, ge=0, lt=2**64)
    n_starts: int = Field(0, ge=0, description="Return-time cross-check starts; 0 disables it.")
    cross_check_T: float = Field(20.0, gt=0)
    cross_check_n_traj: int = Field(200, ge=2)

    model_config = _STRICT


class RegionsConfig(BaseModel):
    """Optional starting radii for the recurrence search."""
    R0: Optional[float] = Field(None, ge=1)
    R1: Optional[float] = Field(None, ge=1)
    R2: Optional[float] = Field(None, ge=1)
    R3: Optional[float] = Field(None, ge=1)
    kappa1: Optional[float] = Field(None, gt=0)

    model_config = _STRICT


class GeneratorCheckConfig(BaseModel):
    n_points: int = Field(1_000, ge=1)
    n_param_sets: int = Field(5, ge=1)
    h: float = Field(1e-5, gt=0)
    seed: int = Field(0, ge=0)

    model_config = _STRICT


class BracketsConfig(BaseModel):
    max_level: int = Field(4, ge=1, le=8)

    model_config = _STRICT


class FieldsConfig(BaseModel):
    names: List[str] = Field(default_factory=lambda: ["H", "M", "H_tilde"])

    model_config = _STRICT


class RunConfig(BaseModel):
    """A fully resolved run configuration; reports embed its dump."""
    output_dir: Optional[str] = None
    model: ModelParams
    integration: IntegrationConfig = Field(default_factory=IntegrationConfig)
    certificate: CertificateConfig = Field(default_factory=CertificateConfig)
    regions: RegionsConfig = Field(default_factory=RegionsConfig)
    generator_check: GeneratorCheckConfig = Field(default_factory=GeneratorCheckConfig)
    brackets: BracketsConfig = Field(default_factory=BracketsConfig)
    fields: FieldsConfig = Field(default_factory=FieldsConfig)

    model_config = _STRICT

    @model_validator(mode="after")
    def check_regions(self):
        r = self.regions
        if r.R0 is not None and r.R2 is not None and r.R2 < r.R0:
            raise ValueError("regions.R2 must be at least regions.R0")
        return self

    def with_overrides(self, seed: Optional[int] = None, output_dir: Optional[str] = None) -> "RunConfig":
        """Applies CLI overrides; --seed replaces every seed in the file."""
        update = {}
        if seed is not None:
            update["integration"] = self.integration.model_copy(update={"seed": seed})
            update["certificate"] = self.certificate.model_copy(update={"seed": seed})
            update["generator_check"] = self.generator_check.model_copy(update={"seed": seed})
        if output_dir is not None:
            update["output_dir"] = output_dir
        return self.model_copy(update=update)
