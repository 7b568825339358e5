"""
Monte Carlo estimates of hitting times, stationary laws and the degenerate-noise
drift diagnostic.

Batch statistics are computed from per-trajectory arrays assembled in trajectory
order, so splitting a batch over any number of workers gives identical results.
Hitting is detected on the discrete states (no sub-step interpolation).
"""
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np # type: ignore
from scipy import stats # type: ignore
from scipy.stats import qmc # type: ignore

from core.workers import resolve_threads, run_chunks, split_range
from models.params import ModelParams, Point3
from models.reports import (
    DiagnosticSeries,
    EmpiricalLaw,
    Histogram,
    HittingTimeStats,
    RecurrenceSearchResult,
    ReturnTimeCheck,
)
from .exceptions import NoStationaryEstimateError, ParameterError
from .lyapunov import VField
from .sde_core import path_chunks, simulate_ensemble

Inside = Callable[[np.ndarray], np.ndarray]
COORDS = ("x", "y", "z")
DEFAULT_BURN_FRACTION = 0.2


def _n_steps(T: float, dt: float) -> int:
    if not (T > 0 and dt > 0):
        raise ValueError("T and dt must be positive")
    return max(1, int(round(T / dt)))


def _first_entry_chunk(params, start, inside, dt, n_steps, seed, bounds) -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = bounds
    first = np.full(hi - lo, -1, dtype=np.int64)

    def observer(step, states, active):
        newly = active & (first < 0) & inside(states)
        first[newly] = step
        return first >= 0

    starts = np.tile(start.as_array(), (hi - lo, 1))
    result = simulate_ensemble(params, starts, dt, n_steps, seed, np.arange(lo, hi), observer)
    return first, result.escaped & (first < 0)


def estimate_hitting_set(
    params: ModelParams,
    start: Point3,
    inside: Inside,
    dt: float,
    T: float,
    n_traj: int,
    seed: int,
    threads: int = 1,
    target: str = "set",
    R: Optional[float] = None,
) -> HittingTimeStats:
    """
    First entry of each trajectory into the closed set {inside}, censored at T.

    Args:
        inside: Vectorised membership test on (N, 3) states.
        threads: Workers; trajectory ids are fixed, so results do not depend on it.

    Escaped trajectories that have not hit count as non-hits.
    """
    n_steps = _n_steps(T, dt)
    pieces = split_range(n_traj, resolve_threads(threads))
    results = run_chunks(
        lambda bounds: _first_entry_chunk(params, start, inside, dt, n_steps, seed, bounds),
        pieces, threads,
    )
    first = np.concatenate([r[0] for r in results]) if results else np.empty(0, dtype=np.int64)
    escaped = np.concatenate([r[1] for r in results]) if results else np.empty(0, dtype=bool)
    entries = [float(k * dt) if k >= 0 else None for k in first]
    return HittingTimeStats(
        start=start, R=R, target=target, n_traj=n_traj, n_hit=int((first >= 0).sum()),
        n_escaped=int(escaped.sum()), censored_at=n_steps * dt, dt=dt, first_entry=entries,
    )


def ball(R: float) -> Inside:
    def inside(states):
        return np.linalg.norm(states, axis=-1) <= R
    return inside


def estimate_hitting(
    params: ModelParams,
    start: Point3,
    R: float,
    dt: float,
    T: float,
    n_traj: int,
    seed: int,
    threads: int = 1,
) -> HittingTimeStats:
    """First entry into the closed ball |X| ≤ R, censored at T."""
    if R <= 0:
        raise ValueError("R must be positive")
    return estimate_hitting_set(params, start, ball(R), dt, T, n_traj, seed, threads, target="ball", R=R)


def hitting_dt_sensitivity(
    params: ModelParams,
    start: Point3,
    R: float,
    dt: float,
    T: float,
    n_traj: int,
    seed: int,
    threads: int = 1,
) -> Tuple[HittingTimeStats, HittingTimeStats]:
    """The same estimate at dt and dt/2, to gauge the bias of discrete entry detection."""
    return (
        estimate_hitting(params, start, R, dt, T, n_traj, seed, threads),
        estimate_hitting(params, start, R, dt / 2.0, T, n_traj, seed, threads),
    )


def survival_ladder(
    params: ModelParams,
    z0s: Sequence[float],
    R: float,
    dt: float,
    T: float,
    n_traj: int,
    seed: int,
    threads: int = 1,
) -> List[HittingTimeStats]:
    """Hitting statistics from (0, 0, z₀) for each z₀, with common random numbers across starts."""
    return [
        estimate_hitting(params, Point3(x=0.0, y=0.0, z=float(z0)), R, dt, T, n_traj, seed, threads)
        for z0 in z0s
    ]


def is_nondecreasing(values: Sequence[float]) -> bool:
    return all(b >= a for a, b in zip(values, values[1:]))


# stationary law

def estimate_stationary(
    params: ModelParams,
    start: Point3,
    dt: float,
    T_burn: Optional[float],
    T_sample: float,
    seed: int,
    thin: int = 1,
    bins: int = 50,
) -> EmpiricalLaw:
    """
    Time-average law along one trajectory after burn-in (default 20% of T_sample).

    Raises:
        NoStationaryEstimateError: If the trajectory leaves the numeric range.
    """
    if T_sample <= 0:
        raise ValueError("T_sample must be positive")
    if thin < 1:
        raise ValueError("thin must be at least 1")
    burn = DEFAULT_BURN_FRACTION * T_sample if T_burn is None else float(T_burn)
    burn_steps = int(round(burn / dt))
    total = burn_steps + _n_steps(T_sample, dt)

    kept: List[np.ndarray] = []
    for first, block, escaped in path_chunks(params, start, dt, total, seed):
        if escaped:
            raise NoStationaryEstimateError(
                f"Trajectory escaped numeric range at step {first + block.shape[0] + 1}; no stationary estimate."
            )
        steps = np.arange(first + 1, first + 1 + block.shape[0])
        mask = (steps > burn_steps) & ((steps - burn_steps) % thin == 0)
        kept.append(block[mask])
    samples = np.concatenate(kept, axis=0) if kept else np.empty((0, 3))

    histograms = {}
    for i, name in enumerate(COORDS):
        counts, edges = np.histogram(samples[:, i], bins=bins)
        histograms[name] = Histogram(edges=edges.tolist(), counts=counts.tolist())
    mean = samples.mean(axis=0)
    second = (samples**2).mean(axis=0)
    return EmpiricalLaw(
        histograms=histograms,
        mean=dict(zip(COORDS, mean.tolist())),
        second_moment=dict(zip(COORDS, second.tolist())),
        variance=dict(zip(COORDS, samples.var(axis=0).tolist())),
        n_samples=int(samples.shape[0]),
        burn_in=burn_steps * dt,
        dt=dt,
        thin=thin,
        samples=samples,
    )


def ks_distance_gaussian(law: EmpiricalLaw, coord: str, mean: float, var: float) -> float:
    """Kolmogorov–Smirnov distance of one marginal to N(mean, var)."""
    column = law.samples[:, COORDS.index(coord)]
    return float(stats.kstest(column, "norm", args=(mean, math.sqrt(var))).statistic)


def total_variation(law_a: EmpiricalLaw, law_b: EmpiricalLaw, coord: str, bins: int = 20) -> float:
    """Total variation between two marginals histogrammed on common bins."""
    i = COORDS.index(coord)
    a, b = law_a.samples[:, i], law_b.samples[:, i]
    edges = np.histogram_bin_edges(np.concatenate([a, b]), bins=bins)
    pa = np.histogram(a, bins=edges)[0] / a.size
    pb = np.histogram(b, bins=edges)[0] / b.size
    return float(0.5 * np.abs(pa - pb).sum())


# degenerate-noise diagnostic

def _moment_chunk(params, start, dt, n_steps, record_every, seed, bounds):
    lo, hi = bounds
    n_records = n_steps // record_every + 1
    m = np.full((n_records, hi - lo), np.nan)
    x2 = np.full_like(m, np.nan)
    z2 = np.full_like(m, np.nan)

    def observer(step, states, active):
        if step % record_every == 0:
            k = step // record_every
            x, z = states[:, 0], states[:, 2]
            m[k] = np.where(active, 2.0 * params.sigma * z - x**2, np.nan)
            x2[k] = np.where(active, x**2, np.nan)
            z2[k] = np.where(active, z**2, np.nan)
        return None

    starts = np.tile(start.as_array(), (hi - lo, 1))
    simulate_ensemble(params, starts, dt, n_steps, seed, np.arange(lo, hi), observer)
    return m, x2, z2


def _within_band(mean: np.ndarray, stderr: np.ndarray, k: float = 3.0) -> bool:
    """No later mean falls below an earlier one by more than k combined standard errors."""
    for j in range(1, mean.size):
        band = k * np.sqrt(stderr[:j] ** 2 + stderr[j] ** 2)
        if np.any(mean[j] < mean[:j] - band):
            return False
    return True


def nonstationarity_drift_diagnostic(
    params: ModelParams,
    start: Point3,
    dt: float,
    T: float,
    n_traj: int,
    seed: int,
    record_every: int = 10,
    threads: int = 1,
) -> DiagnosticSeries:
    """
    Ensemble means of M = 2σz − x², x² and z² along time, the fitted slope of
    mean z², and whether mean M is non-decreasing beyond a 3-standard-error band.

    Raises:
        ParameterError: Unless γ₁ = 0 and β = 0.
    """
    if params.gamma1 != 0 or params.beta != 0:
        raise ParameterError("The drift diagnostic requires gamma1 = 0 and beta = 0.")
    if n_traj < 2:
        raise ValueError("n_traj must be at least 2")
    n_steps = _n_steps(T, dt)
    pieces = split_range(n_traj, resolve_threads(threads))
    results = run_chunks(
        lambda bounds: _moment_chunk(params, start, dt, n_steps, record_every, seed, bounds), pieces, threads,
    )
    m = np.concatenate([r[0] for r in results], axis=1)
    x2 = np.concatenate([r[1] for r in results], axis=1)
    z2 = np.concatenate([r[2] for r in results], axis=1)

    t = np.arange(m.shape[0]) * record_every * dt
    counts = np.sum(np.isfinite(m), axis=1)
    mean_m = np.nanmean(m, axis=1)
    stderr = np.nanstd(m, axis=1, ddof=1) / np.sqrt(counts)
    mean_z2 = np.nanmean(z2, axis=1)
    slope = float(np.polyfit(t, mean_z2, 1)[0])
    return DiagnosticSeries(
        t=t.tolist(),
        mean_M=mean_m.tolist(),
        stderr=stderr.tolist(),
        mean_x2=np.nanmean(x2, axis=1).tolist(),
        mean_z2=mean_z2.tolist(),
        z2_slope=slope,
        nondecreasing=_within_band(mean_m, stderr),
        n_traj=n_traj,
    )


# return-time cross-check

def compact_set(result: RecurrenceSearchResult, rho: float) -> Inside:
    """𝓚 = {x² + y² ≤ R₀, |z − ρ| ≤ R₃}."""
    rp = result.params

    def inside(states):
        return (states[:, 0] ** 2 + states[:, 1] ** 2 <= rp.R0) & (np.abs(states[:, 2] - rho) <= rp.R3)
    return inside


def default_return_starts(result: RecurrenceSearchResult, rho: float, n: int, seed: int) -> List[Point3]:
    """Starts in {1.5R₀ ≤ x² + y² ≤ 4R₀, |z − ρ| ≤ 50}."""
    R0 = result.params.R0
    u = qmc.Halton(d=3, scramble=True, seed=seed).random(n)
    r = np.sqrt(R0 * (1.5 + 2.5 * u[:, 0]))
    phi = 2.0 * math.pi * u[:, 1]
    z = rho + 100.0 * u[:, 2] - 50.0
    return [Point3(x=float(a), y=float(b), z=float(c)) for a, b, c in zip(r * np.cos(phi), r * np.sin(phi), z)]


def cross_check_return_time(
    params: ModelParams,
    result: RecurrenceSearchResult,
    starts: Optional[Sequence[Point3]] = None,
    dt: float = 1e-3,
    T: float = 20.0,
    n_traj: int = 200,
    seed: int = 0,
    n_starts: int = 20,
    threads: int = 1,
) -> List[ReturnTimeCheck]:
    """
    Compares the censored mean of ξ_𝓚 with V(X)/c at each start; a start passes
    when the mean is at most the bound plus three standard errors.

    Raises:
        ParameterError: If the search result carries no certificate.
    """
    if not result.found or result.params is None or not result.c:
        raise ParameterError("The return-time cross-check needs a found recurrence certificate.")
    v = VField(params, result.params)
    inside = compact_set(result, params.rho)
    points = list(starts) if starts is not None else default_return_starts(result, params.rho, n_starts, seed)
    checks = []
    for start in points:
        stats_ = estimate_hitting_set(params, start, inside, dt, T, n_traj, seed, threads, target="K")
        bound = float(v(start.as_array())) / result.c
        checks.append(ReturnTimeCheck(
            start=start,
            bound=bound,
            censored_mean=stats_.censored_mean,
            stderr=stats_.censored_stderr,
            n_traj=n_traj,
            n_censored=n_traj - stats_.n_hit,
            passed=stats_.censored_mean <= bound + 3.0 * stats_.censored_stderr,
        ))
    return checks
