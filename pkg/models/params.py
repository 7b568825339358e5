"""
Pydantic models for the model parameters and the value objects of the laboratory.

These models validate every numeric invariant at construction time so that the
services layer can assume well-formed inputs.
"""
import math
from typing import List, Optional, Tuple

import numpy as np # type: ignore
from pydantic import BaseModel, ConfigDict, Field, model_validator # type: ignore


class ModelParams(BaseModel):
    """
    The six scalars defining the stochastic Lorenz system

        dx = σ(y−x) dt + √(2γ₁) dB₁
        dy = (x(ρ−z) − y) dt + √(2γ₂) dB₂
        dz = (xy − βz) dt + √(2γ₃) dB₃
    """
    sigma: float = Field(..., gt=0, description="Prandtl-like coupling σ > 0.")
    rho: float = Field(0.0, ge=0, description="Rayleigh-like forcing ρ ≥ 0.")
    beta: float = Field(0.0, description="Damping of the vertical mode; the degenerate range is β ≤ 0.")
    gamma1: float = Field(0.0, ge=0, description="Noise intensity on x (variance-rate units).")
    gamma2: float = Field(0.0, ge=0, description="Noise intensity on y.")
    gamma3: float = Field(0.0, ge=0, description="Noise intensity on z.")

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    @model_validator(mode="after")
    def require_noise(self):
        if self.gamma1 == 0 and self.gamma2 == 0 and self.gamma3 == 0:
            raise ValueError("at least one of gamma1, gamma2, gamma3 must be positive")
        return self

    @property
    def gamma(self) -> Tuple[float, float, float]:
        return (self.gamma1, self.gamma2, self.gamma3)

    @property
    def gamma_bar(self) -> float:
        """γ̄ = 2(γ₁+γ₂+γ₃), the rate that the recurrence certificate targets."""
        return 2.0 * (self.gamma1 + self.gamma2 + self.gamma3)


class Point3(BaseModel):
    """A state (x, y, z) of the system."""
    x: float
    y: float
    z: float

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    @classmethod
    def of(cls, values) -> "Point3":
        x, y, z = (float(v) for v in values)
        return cls(x=x, y=y, z=z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.x, self.y, self.z)


class Trajectory(BaseModel):
    """
    A simulated path. `states` has shape (len(times), 3); both arrays are
    read-only after construction.
    """
    times: np.ndarray
    states: np.ndarray
    seed: int = Field(..., ge=0, lt=2**64)
    step: float = Field(..., gt=0)
    escaped: bool = False
    escape_time: Optional[float] = Field(None, description="Time of the first out-of-range state, if any.")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def check_shapes(self):
        if self.states.ndim != 2 or self.states.shape[1] != 3:
            raise ValueError("states must have shape (n, 3)")
        if self.times.shape != (self.states.shape[0],):
            raise ValueError("times and states must have the same length")
        if self.times.size and self.times[0] != 0.0:
            raise ValueError("times must start at 0")
        self.times.setflags(write=False)
        self.states.setflags(write=False)
        return self

    def __len__(self) -> int:
        return int(self.times.shape[0])

    def points(self) -> List[Point3]:
        return [Point3.of(row) for row in self.states]


class RecurrenceParams(BaseModel):
    """Region radii and Lyapunov weights of the glued recurrence function V."""
    R0: float = Field(..., ge=1, description="Radius² of the outer cylinder region x²+y² ≥ R₀.")
    R1: float = Field(..., ge=1, description="Threshold on |x||z|^{1/3} separating the inner regions.")
    R2: float = Field(..., ge=1, description="Radius² of the θ₂ plateau; must satisfy R₂ ≥ R₀.")
    R3: float = Field(..., ge=1, description="Height above which the asymptotic corrections are switched on.")
    kappa0: float = Field(..., gt=0, description="Additive constant making V positive.")
    kappa1: float = Field(..., gt=0, description="Weight of ψ₁.")
    kappa2: float = Field(..., gt=0, description="Weight of ψ₂.")

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    @model_validator(mode="after")
    def check_ordering(self):
        if self.R2 < self.R0:
            raise ValueError("R2 must be at least R0")
        return self

    def updated(self, **changes) -> "RecurrenceParams":
        """Returns a validated copy with `changes` applied."""
        return RecurrenceParams(**{**self.model_dump(), **changes})


class TransienceParams(BaseModel):
    """Constants of the two-function transience construction."""
    A: float = Field(..., ge=0, description="Offset (2γ₁+2)/|β| inside V₁.")
    m: float = Field(..., ge=0, description="max{2γ₁, 2σ²γ₃}.")
    B: float = Field(..., gt=2 * math.pi / 3, lt=math.pi, description="Switch point of Ψ from (1−cos)² to the double log.")
    c0: float = Field(..., gt=0)
    c1: float
    c2: float
    lam: float = Field(..., gt=0, lt=1, alias="lambda", description="Scale λ inside V₁.")
    K: float = Field(..., gt=0, description="Normalisation of V₂ so that LV₂ ≤ 1.")
    kappa0: float = Field(..., gt=0, description="Shift of H inside the logarithm of V₂.")
    R: float = Field(..., gt=0, description="Radius outside which the drift inequalities are checked.")

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False, populate_by_name=True)

    @model_validator(mode="after")
    def check_log_argument(self):
        if self.B + self.c1 <= 1:
            raise ValueError("B + c1 must exceed 1")
        return self
