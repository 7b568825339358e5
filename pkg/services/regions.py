"""
Sampled regions for the drift checks.

A region is a membership predicate plus a list of shells. Each shell maps a
scrambled Halton block from the unit cube into (a superset of) its part of the
region, and rejection against the predicate removes the rest, so every emitted
sample satisfies the predicate. Unbounded directions are sampled along a geometric
ladder of shells, |ζ| ∈ [R₃2ᵏ, R₃2ᵏ⁺¹) for the recurrence regions (ζ = z − ρ)
and |X| ∈ [R2ᵏ, R2ᵏ⁺¹) for the transience checks.
"""
import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np # type: ignore
from scipy.stats import qmc # type: ignore

from models.params import ModelParams, RecurrenceParams

DEFAULT_K_MAX = 20
DEFAULT_SAMPLES_PER_SHELL = 10_000

Predicate = Callable[[np.ndarray], np.ndarray]
Mapper = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Shell:
    """A unit-cube → ℝ³ map of dimension `dim`."""
    name: str
    dim: int
    mapper: Mapper


@dataclass(frozen=True)
class RegionSpec:
    """Membership test plus the shells its samples are drawn from."""
    name: str
    predicate: Predicate
    shells: Tuple[Shell, ...]
    samples_per_shell: int = DEFAULT_SAMPLES_PER_SHELL
    seed: int = 0

    def with_samples(self, samples_per_shell: int) -> "RegionSpec":
        return dataclasses.replace(self, samples_per_shell=int(samples_per_shell))

    def with_seed(self, seed: int) -> "RegionSpec":
        return dataclasses.replace(self, seed=int(seed))

    def contains(self, points: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            return self.predicate(np.asarray(points, dtype=float).reshape(-1, 3))

    def sample(self) -> np.ndarray:
        """All accepted samples, shape (N, 3); deterministic given the seed."""
        blocks: List[np.ndarray] = []
        for index, shell in enumerate(self.shells):
            engine = qmc.Halton(d=shell.dim, scramble=True, seed=np.random.default_rng([self.seed, index]))
            u = engine.random(self.samples_per_shell)
            with np.errstate(all="ignore"):
                pts = shell.mapper(u)
                keep = self.predicate(pts) & np.isfinite(pts).all(axis=1)
            blocks.append(pts[keep])
        if not blocks:
            return np.empty((0, 3))
        return np.concatenate(blocks, axis=0)


def log_uniform(u: np.ndarray, lo: float, hi) -> np.ndarray:
    return lo * (hi / lo) ** u


def _signed(magnitude: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.where(u < 0.5, magnitude, -magnitude)


def _ladder_zeta(u: np.ndarray, sign_u: np.ndarray, R3: float, k: int) -> np.ndarray:
    return _signed(R3 * 2.0 ** (k + u), sign_u)


def _stack(x, y, zeta, rho: float) -> np.ndarray:
    return np.stack((x, y, zeta + rho), axis=-1)


def band(points: np.ndarray, rho: float) -> np.ndarray:
    """|x||ζ|^{1/3}."""
    return np.abs(points[:, 0]) * np.cbrt(np.abs(points[:, 2] - rho))


def _radius2(points: np.ndarray) -> np.ndarray:
    return points[:, 0] ** 2 + points[:, 1] ** 2


# recurrence regions

def region_R0(rp: RecurrenceParams, rho: float = 0.0, k_max: int = DEFAULT_K_MAX) -> RegionSpec:
    """
    𝓡₀ = {x² + y² ≥ R₀}, truncated to x² + y² ≤ 4R₂ and |ζ| ≤ R₃2^k_max.

    Half of every shell is spread over the annulus by angle, the other half
    concentrates in the slab |x| ≤ 2R₁/|ζ|^{1/3} where θ₂ lives.
    """
    R0, R1, R2, R3 = rp.R0, rp.R1, rp.R2, rp.R3
    z_cap = R3 * 2.0**k_max

    def make(k: Optional[int]) -> Mapper:
        def mapper(u):
            r2 = log_uniform(u[:, 0], R0, 4.0 * R2)
            r = np.sqrt(r2)
            zeta = R3 * (2.0 * u[:, 4] - 1.0) if k is None else _ladder_zeta(u[:, 4], u[:, 5], R3, k)
            phi = 2.0 * math.pi * u[:, 1]
            half = np.minimum(2.0 * R1 / np.cbrt(np.abs(zeta)), r)
            slab_x = (2.0 * u[:, 1] - 1.0) * half
            slab_y = _signed(np.sqrt(np.maximum(r2 - slab_x**2, 0.0)), u[:, 2])
            slab = u[:, 3] >= 0.5
            x = np.where(slab, slab_x, r * np.cos(phi))
            y = np.where(slab, slab_y, r * np.sin(phi))
            return _stack(x, y, zeta, rho)
        return mapper

    def predicate(p):
        r2 = _radius2(p)
        return (r2 >= R0) & (r2 <= 4.0 * R2) & (np.abs(p[:, 2] - rho) <= z_cap)

    shells = (Shell("bulk", 6, make(None)),) + tuple(Shell(f"z{k}", 6, make(k)) for k in range(k_max))
    return RegionSpec("R0", predicate, shells)


def region_R1(rp: RecurrenceParams, rho: float = 0.0, k_max: int = DEFAULT_K_MAX) -> RegionSpec:
    """𝓡₁ = {x² + y² ≤ R₀, |x||ζ|^{1/3} ≥ R₁, |ζ| ≥ R₃}; half of each shell in the band t < 2R₁."""
    R0, R1, R3 = rp.R0, rp.R1, rp.R3
    z_cap = R3 * 2.0**k_max

    def make(k: int) -> Mapper:
        def mapper(u):
            zeta = _ladder_zeta(u[:, 4], u[:, 5], R3, k)
            c = np.cbrt(np.abs(zeta))
            t_hi = math.sqrt(R0) * c
            t = log_uniform(u[:, 0], R1, np.where(u[:, 1] < 0.5, np.minimum(2.0 * R1, t_hi), t_hi))
            x = _signed(t / c, u[:, 2])
            y = (2.0 * u[:, 3] - 1.0) * np.sqrt(np.maximum(R0 - x**2, 0.0))
            return _stack(x, y, zeta, rho)
        return mapper

    def predicate(p):
        zeta = np.abs(p[:, 2] - rho)
        return (_radius2(p) <= R0) & (band(p, rho) >= R1) & (zeta >= R3) & (zeta <= z_cap)

    return RegionSpec("R1", predicate, tuple(Shell(f"z{k}", 6, make(k)) for k in range(k_max)))


def region_R2(rp: RecurrenceParams, rho: float = 0.0, k_max: int = DEFAULT_K_MAX) -> RegionSpec:
    """𝓡₂ = {x² + y² ≤ R₂, |x||ζ|^{1/3} ≤ R₁, |ζ| ≥ R₃}."""
    R1, R2, R3 = rp.R1, rp.R2, rp.R3
    z_cap = R3 * 2.0**k_max

    def make(k: int) -> Mapper:
        def mapper(u):
            zeta = _ladder_zeta(u[:, 2], u[:, 3], R3, k)
            half = np.minimum(R1 / np.cbrt(np.abs(zeta)), math.sqrt(R2))
            x = (2.0 * u[:, 0] - 1.0) * half
            y = (2.0 * u[:, 1] - 1.0) * np.sqrt(np.maximum(R2 - x**2, 0.0))
            return _stack(x, y, zeta, rho)
        return mapper

    def predicate(p):
        zeta = np.abs(p[:, 2] - rho)
        return (_radius2(p) <= R2) & (band(p, rho) <= R1) & (zeta >= R3) & (zeta <= z_cap)

    return RegionSpec("R2", predicate, tuple(Shell(f"z{k}", 4, make(k)) for k in range(k_max)))


def region_K(rp: RecurrenceParams, rho: float = 0.0, max_shells: int = 64) -> RegionSpec:
    """𝓚 = {x² + y² ≤ R₀, |ζ| ≤ R₃}, with |ζ| ≤ 1 uniform and geometric shells from 1 to R₃."""
    R0, R3 = rp.R0, rp.R3
    n_log = min(max_shells, max(0, math.ceil(math.log2(R3))))

    def make(j: Optional[int]) -> Mapper:
        def mapper(u):
            r = np.sqrt(R0 * u[:, 0])
            phi = 2.0 * math.pi * u[:, 1]
            if j is None:
                zeta = 2.0 * u[:, 2] - 1.0
            else:
                lo = R3 ** (j / n_log)
                hi = R3 ** ((j + 1) / n_log)
                zeta = _signed(log_uniform(u[:, 2], lo, hi), u[:, 3])
            return _stack(r * np.cos(phi), r * np.sin(phi), zeta, rho)
        return mapper

    def predicate(p):
        return (_radius2(p) <= R0) & (np.abs(p[:, 2] - rho) <= R3)

    shells = (Shell("core", 4, make(None)),) + tuple(Shell(f"z{j}", 4, make(j)) for j in range(n_log))
    return RegionSpec("K", predicate, shells)


def region_cylinder_tall(rp: RecurrenceParams, rho: float = 0.0, k_max: int = DEFAULT_K_MAX) -> RegionSpec:
    """{x² + y² ≤ R₀, |ζ| ≥ R₃}, the part of the complement of 𝓚 inside the cylinder."""
    R0, R1, R3 = rp.R0, rp.R1, rp.R3
    z_cap = R3 * 2.0**k_max

    def make(k: int) -> Mapper:
        def mapper(u):
            zeta = _ladder_zeta(u[:, 4], u[:, 5], R3, k)
            r = np.sqrt(R0 * u[:, 0])
            phi = 2.0 * math.pi * u[:, 1]
            half = np.minimum(2.0 * R1 / np.cbrt(np.abs(zeta)), math.sqrt(R0))
            slab_x = (2.0 * u[:, 1] - 1.0) * half
            slab_y = (2.0 * u[:, 3] - 1.0) * np.sqrt(np.maximum(R0 - slab_x**2, 0.0))
            slab = u[:, 2] >= 0.5
            x = np.where(slab, slab_x, r * np.cos(phi))
            y = np.where(slab, slab_y, r * np.sin(phi))
            return _stack(x, y, zeta, rho)
        return mapper

    def predicate(p):
        zeta = np.abs(p[:, 2] - rho)
        return (_radius2(p) <= R0) & (zeta >= R3) & (zeta <= z_cap)

    return RegionSpec("cylinder", predicate, tuple(Shell(f"z{k}", 6, make(k)) for k in range(k_max)))


def recurrence_regions(rp: RecurrenceParams, rho: float = 0.0, k_max: int = DEFAULT_K_MAX):
    return {
        "R0": region_R0(rp, rho, k_max),
        "R1": region_R1(rp, rho, k_max),
        "R2": region_R2(rp, rho, k_max),
        "K": region_K(rp, rho),
    }


# transience regions

def sphere_directions(n: int, seed: int) -> np.ndarray:
    """n quasi-uniform unit vectors (area-preserving map of a 2D Halton block)."""
    u = qmc.Halton(d=2, scramble=True, seed=seed).random(n)
    cos_t = 1.0 - 2.0 * u[:, 0]
    sin_t = np.sqrt(np.maximum(1.0 - cos_t**2, 0.0))
    phi = 2.0 * math.pi * u[:, 1]
    return np.stack((sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t), axis=-1)


def region_ball_exterior(R: float, k_max: int = DEFAULT_K_MAX) -> RegionSpec:
    """{|X| ≥ R}, truncated to |X| ≤ R2^k_max."""
    cap = R * 2.0**k_max

    def make(k: int) -> Mapper:
        def mapper(u):
            radius = R * 2.0 ** (k + u[:, 0])
            cos_t = 1.0 - 2.0 * u[:, 1]
            sin_t = np.sqrt(np.maximum(1.0 - cos_t**2, 0.0))
            phi = 2.0 * math.pi * u[:, 2]
            return radius[:, None] * np.stack((sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t), axis=-1)
        return mapper

    def predicate(p):
        norm = np.linalg.norm(p, axis=1)
        return (norm >= R) & (norm <= cap)

    return RegionSpec(f"|X|>={R:.6g}", predicate, tuple(Shell(f"r{k}", 3, make(k)) for k in range(k_max)))


def region_M_superlevel(params: ModelParams, A: float, k_max: int = DEFAULT_K_MAX) -> RegionSpec:
    """{2σz − x² ≥ A} with z on a dyadic ladder from max(A/(2σ), 1) and |y| ≤ z + 10."""
    sigma = params.sigma
    z0 = max(A / (2.0 * sigma), 1.0)

    def make(k: int) -> Mapper:
        def mapper(u):
            z = z0 * 2.0 ** (k + u[:, 0])
            x = (2.0 * u[:, 1] - 1.0) * np.sqrt(np.maximum(2.0 * sigma * z - A, 0.0))
            y = (2.0 * u[:, 2] - 1.0) * (z + 10.0)
            return np.stack((x, y, z), axis=-1)
        return mapper

    def predicate(p):
        return 2.0 * sigma * p[:, 2] - p[:, 0] ** 2 >= A

    return RegionSpec("M>=A", predicate, tuple(Shell(f"z{k}", 3, make(k)) for k in range(k_max)))


def region_box(half_width: float, name: str = "box") -> RegionSpec:
    """[−w, w]³ in one shell."""

    def mapper(u):
        return (2.0 * u - 1.0) * half_width

    def predicate(p):
        return (np.abs(p) <= half_width).all(axis=1)

    return RegionSpec(name, predicate, (Shell("box", 3, mapper),))
