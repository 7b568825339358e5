"""
Sampled verification of drift inequalities and the parameter searches built on it.

A check evaluates L f at every sample of a region and compares it against
threshold = slack × bound. Samples whose gap to the threshold is within the
roundoff envelope 64·ε·Σ|terms| are counted as unresolved. They cannot fail a
check on their own, but a check with no resolved sample, or with more than
MAX_UNRESOLVED_SHARE of its samples unresolved, fails; non-finite values
always fail. Every pass is labelled a numerical certificate over a truncated
domain, never a proof.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np # type: ignore
from scipy.optimize import minimize # type: ignore

from core.workers import run_chunks, split_range
from models.params import ModelParams, RecurrenceParams, TransienceParams
from models.reports import (
    CertificateReport,
    RecurrenceSearchResult,
    SphereLadderEntry,
    WonhamReport,
    Witness,
)
from .exceptions import ConstructionError, ParameterError
from .generator import generator_terms
from .jets import LinearCombination, ScalarField
from .lyapunov import (
    CutoffProfiles,
    HTildeField,
    Psi1Field,
    Psi2Field,
    V1Field,
    V2Field,
    VField,
    solve_transience_constants,
)
from .regions import (
    DEFAULT_K_MAX,
    RegionSpec,
    region_ball_exterior,
    region_cylinder_tall,
    region_K,
    region_R0,
    region_R1,
    region_R2,
    sphere_directions,
)

ROUNDOFF_FACTOR = 64.0 * np.finfo(float).eps
DEFAULT_SLACK = 0.99
MAX_WITNESSES = 10
BATCH_SIZE = 16_384
MAX_UNRESOLVED_SHARE = 1e-3


# evaluation and verdicts

def evaluate_generator(
    params: ModelParams, field: ScalarField, points: np.ndarray, threads: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """L f and its term magnitude over (N, 3) points, in batches fanned out over threads."""
    n = points.shape[0]
    if n == 0:
        return np.empty(0), np.empty(0)
    pieces = split_range(n, max(1, math.ceil(n / BATCH_SIZE)))
    results = run_chunks(lambda bounds: generator_terms(params, field, points[bounds[0]:bounds[1]]), pieces, threads)
    return np.concatenate([r[0] for r in results]), np.concatenate([r[1] for r in results])


def _params_dict(params: ModelParams, extra: Optional[dict] = None) -> dict:
    out = {"model": params.model_dump()}
    if extra:
        out.update(extra)
    return out


def judge(
    region: str,
    kind: str,
    points: np.ndarray,
    values: np.ndarray,
    scale: np.ndarray,
    bound: float,
    slack: float = DEFAULT_SLACK,
    params: Optional[dict] = None,
) -> CertificateReport:
    """
    Builds the report for `values ≤ threshold` (upper, growth) or
    `values ≥ threshold` (lower, value, containment).
    """
    threshold = slack * bound
    upper = kind in ("upper", "growth")
    finite = np.isfinite(values)
    with np.errstate(invalid="ignore"):
        gap = np.where(finite, threshold - values if upper else values - threshold, -np.inf)
        envelope = ROUNDOFF_FACTOR * np.where(np.isfinite(scale), scale, 0.0)
    unresolved = finite & (envelope > 0) & (np.abs(gap) <= envelope)
    resolved = finite & ~unresolved
    violating = resolved & (gap < 0)
    nonfinite = ~finite

    worst = None
    if resolved.any():
        worst = float(values[resolved].max() if upper else values[resolved].min())

    order = np.argsort(np.where(unresolved, np.inf, gap), kind="stable")[:MAX_WITNESSES]
    witnesses = [
        Witness(
            x=float(points[i, 0]), y=float(points[i, 1]), z=float(points[i, 2]),
            value=float(values[i]) if finite[i] else None,
        )
        for i in order
    ]
    n = int(values.shape[0])
    n_unresolved = int(unresolved.sum())
    decided = bool(resolved.any()) and n_unresolved <= MAX_UNRESOLVED_SHARE * n
    return CertificateReport(
        region=region,
        kind=kind,
        params=params or {},
        n_samples=n,
        n_unresolved=n_unresolved,
        n_violating=int(violating.sum()),
        n_nonfinite=int(nonfinite.sum()),
        bound=float(bound),
        threshold=float(threshold),
        worst_margin=worst,
        passed=decided and not bool(violating.any() or nonfinite.any()),
        witnesses=witnesses,
    )


def _check_drift(params, field, region, bound, kind, slack, threads, extra=None) -> CertificateReport:
    points = region.sample()
    values, scale = evaluate_generator(params, field, points, threads)
    return judge(region.name, kind, points, values, scale, bound, slack, _params_dict(params, extra))


def check_drift_upper(
    params: ModelParams,
    field: ScalarField,
    region: RegionSpec,
    bound: float,
    slack: float = DEFAULT_SLACK,
    threads: int = 1,
) -> CertificateReport:
    """Sampled check of L f ≤ slack·bound over the region."""
    return _check_drift(params, field, region, bound, "upper", slack, threads, {"field": field.name})


def check_drift_lower(
    params: ModelParams,
    field: ScalarField,
    region: RegionSpec,
    bound: float,
    slack: float = DEFAULT_SLACK,
    threads: int = 1,
) -> CertificateReport:
    """Sampled check of L f ≥ slack·bound over the region."""
    return _check_drift(params, field, region, bound, "lower", slack, threads, {"field": field.name})


def check_growth_bound(
    params: ModelParams,
    field: ScalarField,
    region: RegionSpec,
    c: float,
    d: float,
    threads: int = 1,
) -> CertificateReport:
    """Sampled check of L f ≤ c·f + d (no slack)."""
    points = region.sample()
    values, scale = evaluate_generator(params, field, points, threads)
    f = np.asarray(field(points), dtype=float)
    with np.errstate(all="ignore"):
        growth = values - c * f
        scale = scale + np.abs(c * f)
    return judge(
        region.name, "growth", points, growth, scale, d, 1.0,
        _params_dict(params, {"field": field.name, "c": c, "d": d}),
    )


def check_minimum(
    field: ScalarField, region: RegionSpec, bound: float, params: Optional[dict] = None,
) -> CertificateReport:
    """Sampled check of f ≥ bound (no slack)."""
    points = region.sample()
    values = np.asarray(field(points), dtype=float).reshape(-1)
    return judge(region.name, "value", points, values, np.abs(values), bound, 1.0, params)


def check_region_containment(
    rp: RecurrenceParams,
    rho: float = 0.0,
    samples_per_shell: int = 10_000,
    seed: int = 0,
    k_max: int = DEFAULT_K_MAX,
) -> CertificateReport:
    """Sampled {x² + y² ≤ R₀, |ζ| ≥ R₃} ⊆ 𝓡₁ ∪ 𝓡₂."""
    region = region_cylinder_tall(rp, rho, k_max).with_samples(samples_per_shell).with_seed(seed)
    points = region.sample()
    inside = region_R1(rp, rho, k_max).contains(points) | region_R2(rp, rho, k_max).contains(points)
    values = inside.astype(float)
    return judge(
        "cylinder⊆R1∪R2", "containment", points, values, np.zeros_like(values), 1.0, 1.0,
        {"recurrence": rp.model_dump()},
    )


# recurrence search

RegionBuilder = Callable[[RecurrenceParams, float, int], RegionSpec]

PARAMETER_CAP = 2.0**100
DECAY_LIFT = 4096.0
PROFILES = CutoffProfiles.sample()


@dataclass(frozen=True)
class _Check:
    name: str
    region: RegionBuilder
    field: Callable[[ModelParams, RecurrenceParams], ScalarField]
    bound: Callable[[ModelParams, RecurrenceParams], float]


def _psi2_with_h_tilde(params: ModelParams, rp: RecurrenceParams) -> ScalarField:
    return LinearCombination([
        (1.0, HTildeField(params, rp.kappa0)),
        (1.0, Psi2Field(params, rp.kappa2, rp.R1)),
    ])


_SEARCH_CHECKS: Tuple[_Check, ...] = (
    _Check("R1", region_R1, VField, lambda p, rp: -p.gamma_bar),
    _Check("R0", region_R0, VField, lambda p, rp: -p.gamma_bar),
    _Check("psi1", region_R1, lambda p, rp: Psi1Field(rp.kappa1, p.rho), lambda p, rp: -rp.kappa1 / 2.0),
    _Check("R2", region_R2, VField, lambda p, rp: -p.gamma_bar),
    _Check("psi2", region_R2, _psi2_with_h_tilde, lambda p, rp: -rp.kappa2 / 2.0),
)


@dataclass
class _Failure:
    check: _Check
    report: CertificateReport


def lift_witness(point: np.ndarray, rho: float, factor: float = DECAY_LIFT) -> np.ndarray:
    """(x/∛f, ±√(x² + y² − x²/∛f²), ρ + fζ): the same x² + y² and |x||ζ|^{1/3}, with |ζ| scaled by f."""
    x, y, z = (float(c) for c in point)
    shrink = 1.0 / np.cbrt(factor)
    new_x = x * shrink
    new_y = math.copysign(math.sqrt(y * y + x * x - new_x * new_x), y)
    return np.array([new_x, new_y, rho + factor * (z - rho)])


def sampled_points(rp: RecurrenceParams, rho: float, samples: int, seed: int, k_max: int) -> np.ndarray:
    """Samples of 𝓡₀, 𝓡₁, 𝓡₂ and 𝓚, which together cover the truncated domain."""
    return np.concatenate([
        builder.with_samples(samples).with_seed(seed).sample()
        for builder in (region_R0(rp, rho, k_max), region_R1(rp, rho, k_max), region_R2(rp, rho, k_max), region_K(rp, rho))
    ])


def select_kappa0(params: ModelParams, rp: RecurrenceParams, samples: int, seed: int, k_max: int = DEFAULT_K_MAX) -> float:
    """κ₀ putting the sampled minimum of V at 1 + 10% of the shift it needed."""
    points = sampled_points(rp, params.rho, samples, seed, k_max)
    base = np.asarray(VField(params, rp)(points), dtype=float) - rp.kappa0
    need = 1.0 - float(np.min(base))
    return max(need + 0.1 * abs(need), 1e-3)


class RecurrenceSearch:
    """
    Search for the radii and weights of V, in the order the construction fixes them.

    κ₂ = 16γ̄ is fixed. κ₁, R₀, R₁ and R₂ are doubled first, in that order,
    until these sufficient inequalities on the cutoff profiles hold
    (s = min(σ, 1), v ∈ [1, 2]):

        κ₁ ≥ 4γ̄ + 2κ₂·max band2
        s·R₀·v ≥ 3γ̄ + κ₁·radial1(v) + κ₂·max band2
        γ₁κ₁√(2R₀)·max band1 ≤ γ̄R₁³
        R₂ ≥ 2R₀ and s·R₂·v ≥ 3γ̄ + κ₂·max band2 + κ₂R₁³·radial2(v)/(γ₁√R₂)

    Everything left over decays in |ζ|, so R₃ doubles until every sampled
    inequality passes. A failure that does not shrink when its worst witness is
    lifted to a much larger |ζ| at the same x² + y² and |x||ζ|^{1/3} goes back to
    the parameter whose cutoff transition it sits in. A search-level pass is
    re-verified at full sample counts on a fresh seed.
    """

    def __init__(
        self,
        params: ModelParams,
        budget: int = 200,
        search_samples: int = 256,
        verify_samples: int = 10_000,
        k_max: int = DEFAULT_K_MAX,
        slack: float = DEFAULT_SLACK,
        seed: int = 0,
        threads: int = 1,
        initial: Optional[Dict[str, float]] = None,
    ):
        if params.beta != 0:
            raise ParameterError("The recurrence search requires beta = 0.")
        if params.gamma1 <= 0:
            raise ConstructionError("The recurrence search requires gamma1 > 0 (psi2 is undefined otherwise).")
        self.params = params
        self.budget = budget
        self.search_samples = search_samples
        self.verify_samples = verify_samples
        self.k_max = k_max
        self.slack = slack
        self.seed = seed
        self.threads = threads
        gbar = params.gamma_bar
        start = dict(R0=1.0, R1=1.0, R2=1.0, R3=1.0, kappa0=1.0, kappa1=max(1.0, 4.0 * gbar), kappa2=16.0 * gbar)
        start.update({k: float(v) for k, v in (initial or {}).items() if v is not None})
        start["R2"] = max(start["R2"], start["R0"])
        self.rp = RecurrenceParams(**start)
        self.doublings: Dict[str, int] = {name: 0 for name in ("kappa1", "R0", "R1", "R2", "R3")}

    @property
    def threshold(self) -> float:
        return -self.slack * self.params.gamma_bar

    @property
    def spent(self) -> int:
        return sum(self.doublings.values())

    def stage_owner(self, rp: RecurrenceParams) -> Optional[str]:
        """First of κ₁, R₀, R₁, R₂ whose sufficient inequality fails; None once all hold."""
        p, pr = self.params, PROFILES
        gbar = p.gamma_bar
        s = min(p.sigma, 1.0)
        band2 = rp.kappa2 * pr.band2_max
        if rp.kappa1 < 4.0 * gbar + 2.0 * band2:
            return "kappa1"
        if np.any(s * rp.R0 * pr.v < 3.0 * gbar + rp.kappa1 * pr.radial1 + band2):
            return "R0"
        if p.gamma1 * rp.kappa1 * math.sqrt(2.0 * rp.R0) * pr.band1_max > gbar * rp.R1**3:
            return "R1"
        radial2 = rp.kappa2 * rp.R1**3 * pr.radial2 / (p.gamma1 * math.sqrt(rp.R2))
        if rp.R2 < 2.0 * rp.R0 or np.any(s * rp.R2 * pr.v < 3.0 * gbar + band2 + radial2):
            return "R2"
        return None

    def _region(self, check: _Check, rp: RecurrenceParams, samples: int, seed: int) -> RegionSpec:
        return check.region(rp, self.params.rho, self.k_max).with_samples(samples).with_seed(seed)

    def _run_check(self, check: _Check, rp: RecurrenceParams, samples: int, seed: int) -> CertificateReport:
        report = check_drift_upper(
            self.params, check.field(self.params, rp), self._region(check, rp, samples, seed),
            check.bound(self.params, rp), self.slack, self.threads,
        )
        return report.model_copy(update={"region": check.name, "params": {"recurrence": rp.model_dump()}})

    def _first_failure(self, rp: RecurrenceParams, samples: int, seed: int) -> Tuple[Optional[_Failure], List[CertificateReport]]:
        reports = []
        for check in _SEARCH_CHECKS:
            report = self._run_check(check, rp, samples, seed)
            reports.append(report)
            if not report.passed:
                return _Failure(check, report), reports
        return None, reports

    @staticmethod
    def _unfixable(failure: _Failure) -> Optional[str]:
        """Why no doubling can repair the failure, if so."""
        name, report = failure.check.name, failure.report
        if report.n_nonfinite:
            return f"non-finite generator values in check '{name}'"
        if report.n_samples == 0:
            return f"check '{name}' drew no samples"
        if report.n_violating == 0:
            return f"{report.n_unresolved} of {report.n_samples} samples of check '{name}' are within the roundoff envelope"
        return None

    def decays(self, failure: _Failure, rp: RecurrenceParams) -> bool:
        """Whether the excess at the worst witness shrinks by more than 4x once lifted in |ζ|."""
        report = failure.report
        w = report.witnesses[0]
        lifted = lift_witness(np.array([w.x, w.y, w.z]), self.params.rho)
        value, _ = generator_terms(self.params, failure.check.field(self.params, rp), lifted.reshape(1, 3))
        excess = w.value - report.threshold
        lifted_excess = float(value[0]) - report.threshold
        return not lifted_excess > 0.25 * excess

    def choose_owner(self, failure: _Failure, rp: RecurrenceParams) -> str:
        """The parameter whose doubling addresses the worst witness of a failing check."""
        if self.decays(failure, rp):
            return "R3"
        name = failure.check.name
        if name == "psi1":
            return "R1"
        if name == "psi2":
            return "R3"
        w = failure.report.witnesses[0]
        r2 = w.x**2 + w.y**2
        band = abs(w.x) * float(np.cbrt(abs(w.z - self.params.rho)))
        if rp.R0 <= r2 < rp.R2:
            return "R0"
        if rp.R2 <= r2 <= 2.0 * rp.R2:
            return "R2"
        if r2 < rp.R0 and 0.5 * rp.R1 <= band < rp.R1:
            return "R1"
        if r2 < rp.R0 and band >= rp.R1:
            return "kappa1"
        return "R3"

    def _double(self, owner: str) -> None:
        changes = {owner: 2.0 * getattr(self.rp, owner)}
        if owner == "R0":
            changes["R2"] = max(self.rp.R2, changes["R0"])
        self.rp = self.rp.updated(**changes)
        self.doublings[owner] += 1

    def _give_up(self, reason: str, iterations: int, reports: List[CertificateReport]) -> RecurrenceSearchResult:
        return RecurrenceSearchResult(
            found=False, message=f"{reason}; no certificate found", params=self.rp,
            iterations=iterations, doublings=dict(self.doublings), reports=reports,
        )

    def _finalize(self, iterations: int, reports: List[CertificateReport]) -> RecurrenceSearchResult:
        params = self.params
        rho = params.rho
        verify_seed = self.seed + 1
        rp = self.rp.updated(kappa0=select_kappa0(params, self.rp, self.verify_samples, self.seed + 2, self.k_max))

        global_reports = []
        for attempt in range(8):
            global_reports = [
                check_minimum(
                    VField(params, rp),
                    builder.with_samples(self.verify_samples).with_seed(self.seed + 3),
                    1.0, {"recurrence": rp.model_dump()},
                ).model_copy(update={"region": f"V>=1:{builder.name}"})
                for builder in (
                    region_R0(rp, rho, self.k_max), region_R1(rp, rho, self.k_max),
                    region_R2(rp, rho, self.k_max), region_K(rp, rho),
                )
            ]
            lowest = min((r.worst_margin for r in global_reports if r.worst_margin is not None), default=1.0)
            if all(r.passed for r in global_reports):
                break
            rp = rp.updated(kappa0=rp.kappa0 + 1.1 * (1.0 - lowest))
        min_v = min((r.worst_margin for r in global_reports if r.worst_margin is not None), default=None)

        # the M(V) ≤ −c + d bound on 𝓚 with d read off the samples, padded off the sampled maximum
        k_region = region_K(rp, rho).with_samples(self.verify_samples).with_seed(verify_seed)
        k_points = k_region.sample()
        values, scale = evaluate_generator(params, VField(params, rp), k_points, self.threads)
        finite = np.isfinite(values)
        d = 0.0
        if finite.any():
            top = int(np.argmax(np.where(finite, values, -np.inf)))
            pad = max(1e-6 * max(1.0, abs(self.threshold)), 2.0 * ROUNDOFF_FACTOR * float(scale[top]))
            d = max(0.0, float(values[top]) - self.threshold) + pad
        k_report = judge(
            "K", "upper", k_points, values, scale, self.threshold + d, 1.0,
            {"recurrence": rp.model_dump(), "d": d},
        )

        containment = check_region_containment(rp, rho, self.verify_samples, verify_seed, self.k_max)
        final_reports = [r.model_copy(update={"params": {"recurrence": rp.model_dump()}}) for r in reports]
        final_reports += [k_report, *global_reports, containment]
        found = all(r.passed for r in final_reports)
        return RecurrenceSearchResult(
            found=found,
            message="certificate found" if found else "final verification failed; no certificate found",
            params=rp,
            iterations=iterations,
            doublings=dict(self.doublings),
            c=-self.threshold,
            d=d,
            min_V=min_v,
            reports=final_reports,
        )

    def run(self) -> RecurrenceSearchResult:
        last_reports: List[CertificateReport] = []
        iterations = 0
        while self.spent < self.budget:
            iterations += 1
            owner = self.stage_owner(self.rp)
            if owner is None:
                failure, last_reports = self._first_failure(self.rp, self.search_samples, self.seed)
                if failure is None:
                    failure, last_reports = self._first_failure(self.rp, self.verify_samples, self.seed + 1)
                    if failure is None:
                        return self._finalize(iterations, last_reports)
                reason = self._unfixable(failure)
                if reason:
                    return self._give_up(reason, iterations, last_reports)
                owner = self.choose_owner(failure, self.rp)
            if 2.0 * getattr(self.rp, owner) > PARAMETER_CAP:
                return self._give_up(f"{owner} would exceed 2^100", iterations, last_reports)
            self._double(owner)
        return self._give_up(f"budget of {self.budget} doublings exhausted", iterations, last_reports)


def search_recurrence_params(params: ModelParams, budget: int = 200, **options) -> RecurrenceSearchResult:
    """
    Runs the recurrence search.

    Raises:
        ParameterError: If β ≠ 0.
        ConstructionError: If γ₁ = 0.
    """
    return RecurrenceSearch(params, budget=budget, **options).run()


# transience hypotheses

def transience_ladder_start(params: ModelParams, tp: TransienceParams) -> float:
    """
    First radius of the sphere ladder: beyond R and 2(σ+ρ)+10, and far enough
    that λ(2σS − A) + c₁ has ln ≥ e²·max(1, ln(B + c₁)), where the double-log
    branch dominates the ratio V₁/V₂.
    """
    log_target = math.e**2 * max(1.0, math.log(tp.B + tp.c1))
    t_star = math.exp(log_target)
    s_star = ((t_star - tp.c1) / tp.lam + tp.A) / (2.0 * params.sigma)
    return max(tp.R, 2.0 * (params.sigma + params.rho) + 10.0, s_star)


def _tangent_basis(d: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(d, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(d, e1)


def sphere_extremum(
    field: ScalarField, S: float, directions: np.ndarray, maximize: bool,
) -> Tuple[float, np.ndarray]:
    """Extremum of field on |X| = S: best sampled direction, then Nelder–Mead in its tangent plane."""
    sign = -1.0 if maximize else 1.0
    values = np.asarray(field(S * directions), dtype=float)
    best = int(np.argmin(sign * values))
    d = directions[best]
    e1, e2 = _tangent_basis(d)

    def point(ab):
        u = d + ab[0] * e1 + ab[1] * e2
        return S * u / np.linalg.norm(u)

    def objective(ab):
        return sign * float(field(point(ab)))

    start = sign * float(values[best])
    result = minimize(
        objective, np.zeros(2), method="Nelder-Mead",
        options={
            "initial_simplex": np.array([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1]]),
            "xatol": 1e-10, "fatol": 1e-15 * (1.0 + abs(start)), "maxiter": 4000,
        },
    )
    if np.isfinite(result.fun) and result.fun < start:
        return sign * float(result.fun), point(result.x)
    return float(values[best]), S * d


def sphere_candidates(n: int, seed: int) -> np.ndarray:
    """The +z axis followed by n quasi-uniform directions; both V₁ and V₂ take their sphere extremum on the axis."""
    return np.vstack([np.array([[0.0, 0.0, 1.0]]), sphere_directions(n, seed)])


def check_wonham_hypotheses(
    params: ModelParams,
    tp: Optional[TransienceParams] = None,
    k_max: int = DEFAULT_K_MAX,
    n_directions: int = 1000,
    samples_per_shell: int = 2_000,
    slack: float = DEFAULT_SLACK,
    seed: int = 0,
    threads: int = 1,
    axis_tolerance: float = 0.05,
) -> WonhamReport:
    """
    Checks the two-function transience criterion for V₁ and V₂:

    (p1) V₁(0,0,S) increases along the ladder S = 2ᵏS₀;
    (p2) the sphere minimum of V₂ is positive on the ladder and on |X| = 2(σ+ρ)+10;
    (p3) max V₁ / min V₂ over spheres decreases along the ladder;
    (p4) L V₁ ≥ 0 and L V₂ ≤ 1 on sampled |X| ≥ R.

    Raises:
        ParameterError: If β ≥ 0.
    """
    if params.beta >= 0:
        raise ParameterError("The transience checks require beta < 0.")
    tp = tp or solve_transience_constants(params)
    v1 = V1Field(params, tp)
    v2 = V2Field(params, tp.K, tp.kappa0)
    directions = sphere_candidates(n_directions, seed)
    S0 = transience_ladder_start(params, tp)

    ladder: List[SphereLadderEntry] = []
    near_axis = True
    for k in range(k_max + 1):
        S = S0 * 2.0**k
        v1_max, argmax = sphere_extremum(v1, S, directions, maximize=True)
        v2_min, _ = sphere_extremum(v2, S, directions, maximize=False)
        angle = math.acos(min(1.0, max(-1.0, argmax[2] / np.linalg.norm(argmax))))
        near_axis &= angle <= axis_tolerance
        ladder.append(SphereLadderEntry(
            S=S, v1_max=v1_max, v1_argmax=[float(c) for c in argmax],
            v1_axis=float(v1(np.array([0.0, 0.0, S]))), v2_min=v2_min,
            ratio=v1_max / v2_min if v2_min > 0 else math.inf,
        ))

    axis = np.array([e.v1_axis for e in ladder])
    ratios = np.array([e.ratio for e in ladder])
    p1 = bool(np.all(np.diff(axis) > 0) and axis[-1] > axis[0])
    p2_sphere_min, _ = sphere_extremum(v2, 2.0 * (params.sigma + params.rho) + 10.0, directions, maximize=False)
    p2 = bool(all(e.v2_min > 0 for e in ladder) and p2_sphere_min > 0)
    p3 = bool(np.all(np.isfinite(ratios)) and np.all(np.diff(ratios) < 0))

    exterior = region_ball_exterior(tp.R, k_max).with_samples(samples_per_shell).with_seed(seed)
    reports = [
        check_drift_lower(params, v1, exterior, 0.0, slack, threads),
        check_drift_upper(params, v2, exterior, 1.0, slack, threads),
    ]
    p4 = all(r.passed for r in reports)
    return WonhamReport(
        tp=tp, S0=S0, ladder=ladder, p1=p1, p2=p2, p3=p3, p4=p4,
        argmax_near_axis=bool(near_axis), p2_sphere_min=p2_sphere_min, reports=reports,
        passed=p1 and p2 and p3 and p4 and bool(near_axis),
    )
