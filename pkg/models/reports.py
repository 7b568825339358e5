"""
Pydantic models for the machine-readable results of the laboratory.

Every report serialises to plain JSON through `model_dump(by_alias=True)`.
"""
import math
from typing import Any, Dict, List, Literal, Optional

import numpy as np # type: ignore
from pydantic import BaseModel, ConfigDict, Field, computed_field # type: ignore

from .params import Point3, RecurrenceParams, TransienceParams

CERTIFICATE_LABEL = "numerical certificate (truncated)"


class Witness(BaseModel):
    """A sampled point together with the checked expression's value there."""
    x: float
    y: float
    z: float
    value: Optional[float] = Field(None, description="None when the generator was not finite.")


class CertificateReport(BaseModel):
    """Verdict of a sampled drift-inequality check over one region."""
    region: str
    kind: Literal["upper", "lower", "growth", "containment", "value"] = "upper"
    params: Dict[str, Any] = Field(default_factory=dict, description="Parameter set the check used.")
    n_samples: int = Field(..., ge=0)
    n_unresolved: int = Field(0, ge=0, description="Samples whose gap to the threshold is below the roundoff envelope.")
    n_violating: int = Field(0, ge=0, description="Resolved samples on the wrong side of the threshold.")
    n_nonfinite: int = Field(0, ge=0)
    bound: float
    threshold: float = Field(..., description="slack × bound, the value actually compared against.")
    worst_margin: Optional[float] = Field(..., description="Max (upper) or min (lower) of the checked expression over resolved samples.")
    passed: bool = Field(..., serialization_alias="pass")
    witnesses: List[Witness] = Field(default_factory=list)
    label: str = CERTIFICATE_LABEL

    model_config = ConfigDict(populate_by_name=True)


class RecurrenceSearchResult(BaseModel):
    """The recurrence certificate bundle produced by the parameter search."""
    found: bool
    message: str
    params: Optional[RecurrenceParams] = None
    iterations: int = 0
    doublings: Dict[str, int] = Field(default_factory=dict)
    c: Optional[float] = Field(None, description="Rate in MV ≤ −c + d·1_K.")
    d: Optional[float] = Field(None, description="Finite correction on the compact set K.")
    min_V: Optional[float] = None
    reports: List[CertificateReport] = Field(default_factory=list)


class SphereLadderEntry(BaseModel):
    """Sphere extrema of V₁ and V₂ at radius S."""
    S: float
    v1_max: float
    v1_argmax: List[float]
    v1_axis: float = Field(..., description="V₁ at (0,0,S).")
    v2_min: float
    ratio: float


class WonhamReport(BaseModel):
    """Outcome of the two-function transience checks."""
    tp: TransienceParams
    S0: float
    ladder: List[SphereLadderEntry]
    p1: bool
    p2: bool
    p3: bool
    p4: bool
    argmax_near_axis: bool
    p2_sphere_min: float = Field(..., description="Min of V₂ on |X| = 2(σ+ρ)+10.")
    reports: List[CertificateReport] = Field(default_factory=list)
    passed: bool = Field(..., serialization_alias="pass")
    label: str = CERTIFICATE_LABEL

    model_config = ConfigDict(populate_by_name=True)


class GeneratorCheckReport(BaseModel):
    """Oracle comparisons for the jet-based generator."""
    n_param_sets: int
    n_points: int
    h_scale: float
    max_rel_err_H: float
    max_rel_err_M: float
    max_rel_err_H_tilde: float = Field(0.0, description="Jet of H̃ against its closed form.")
    max_rel_err_psi1: float = Field(0.0, description="L ψ₁ against its expansion, off the singular sets.")
    max_rel_err_fd: Dict[str, float]
    tolerance_closed_form: float = 1e-10
    tolerance_fd: float = 1e-6
    passed: bool = Field(..., serialization_alias="pass")

    model_config = ConfigDict(populate_by_name=True)


class HittingTimeStats(BaseModel):
    """Censored first-entry times of a batch of trajectories."""
    start: Point3
    R: Optional[float] = Field(None, description="Ball radius; None for a general target set.")
    target: str = "ball"
    n_traj: int = Field(..., ge=0)
    n_hit: int = Field(..., ge=0)
    n_escaped: int = Field(0, ge=0)
    censored_at: float = Field(..., gt=0)
    dt: float = Field(..., gt=0)
    first_entry: List[Optional[float]] = Field(..., description="Per trajectory; None when not hit by the horizon.")

    @computed_field
    @property
    def hit_times(self) -> List[float]:
        return [t for t in self.first_entry if t is not None]

    @computed_field
    @property
    def mean(self) -> Optional[float]:
        """Mean over hitting trajectories only."""
        hits = self.hit_times
        return float(np.mean(hits)) if hits else None

    @computed_field
    @property
    def survival_fraction(self) -> float:
        return 1.0 - self.n_hit / self.n_traj if self.n_traj else 0.0

    @computed_field
    @property
    def censored_mean(self) -> float:
        """Mean of min(ξ, T)."""
        if not self.n_traj:
            return 0.0
        return float(np.mean(self._censored()))

    @computed_field
    @property
    def censored_stderr(self) -> float:
        if self.n_traj < 2:
            return 0.0
        return float(np.std(self._censored(), ddof=1) / math.sqrt(self.n_traj))

    def _censored(self) -> np.ndarray:
        return np.array([self.censored_at if t is None else t for t in self.first_entry])


class Histogram(BaseModel):
    edges: List[float]
    counts: List[int]


class EmpiricalLaw(BaseModel):
    """Time-average law of one long trajectory after burn-in."""
    histograms: Dict[str, Histogram]
    mean: Dict[str, float]
    second_moment: Dict[str, float]
    variance: Dict[str, float]
    n_samples: int
    burn_in: float = Field(..., description="Discarded time before sampling started.")
    dt: float
    thin: int
    samples: Optional[np.ndarray] = Field(None, exclude=True, description="Retained (n, 3) samples, not serialised.")

    model_config = ConfigDict(arbitrary_types_allowed=True)


class DiagnosticSeries(BaseModel):
    """Ensemble means of M = 2σz − x² and of x², z² along time."""
    t: List[float]
    mean_M: List[float]
    stderr: List[float]
    mean_x2: List[float]
    mean_z2: List[float]
    z2_slope: float
    nondecreasing: bool
    n_traj: int


class ReturnTimeCheck(BaseModel):
    """Monte Carlo check of E_X ξ_K ≤ V(X)/c at one start."""
    start: Point3
    bound: float
    censored_mean: float
    stderr: float
    n_traj: int
    n_censored: int
    passed: bool = Field(..., serialization_alias="pass")

    model_config = ConfigDict(populate_by_name=True)
