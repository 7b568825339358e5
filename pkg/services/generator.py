"""
The infinitesimal generator

    L = σ(y−x)∂x + [x(ρ−z)−y]∂y + [xy−βz]∂z + γ₁∂x² + γ₂∂y² + γ₃∂z²

applied to scalar fields through second-order jets, with a central-difference
oracle and the closed forms used to validate both.
"""
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np # type: ignore
from scipy.stats import qmc # type: ignore

from models.params import ModelParams, Point3
from models.reports import GeneratorCheckReport
from .exceptions import FieldDomainError
from .jets import Jet2, ScalarField, _as_points
from .sde_core import drift_components


def _from_jet(params: ModelParams, points: np.ndarray, jet: Jet2) -> Tuple[np.ndarray, np.ndarray]:
    b = drift_components(params, points[..., 0], points[..., 1], points[..., 2])
    terms = [b[i] * jet.grad[i] for i in range(3)] + [g * jet.diag2[i] for i, g in enumerate(params.gamma)]
    value = terms[0] + terms[1] + terms[2] + terms[3] + terms[4] + terms[5]
    scale = sum(np.abs(t) for t in terms)
    return value, scale


def apply_generator(params: ModelParams, f: ScalarField, p: Point3) -> float:
    """
    L f at a single point.

    Raises:
        FieldDomainError: If the jet of f at p has a non-finite component.
    """
    pts = p.as_array()
    jet = f.evaluate(pts)
    if not bool(jet.is_finite()):
        raise FieldDomainError(f"Field '{f.name}' is not C² at {p.as_tuple()}.")
    with np.errstate(all="ignore"):
        value, _ = _from_jet(params, pts, jet)
    return float(value)


def jet_generator_terms(params: ModelParams, f: ScalarField, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """L f and its term magnitude from the jet of f as a whole."""
    pts = np.asarray(points, dtype=float)
    jet = f.evaluate(pts)
    with np.errstate(all="ignore"):
        value, scale = _from_jet(params, pts, jet)
    bad = ~jet.is_finite() | ~np.isfinite(value)
    value = np.where(bad, np.nan, value)
    scale = np.where(bad, np.nan, scale)
    return value, scale


def generator_terms(params: ModelParams, f: ScalarField, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorised L f over points of shape (N, 3), together with the absolute term
    magnitude Σ|bᵢ∂ᵢf| + Σγᵢ|∂ᵢ²f| (a roundoff scale). Non-finite jets give NaN.

    A field with a `closed_generator(params, points)` hook is evaluated in
    closed form, and sums are evaluated summand by summand, so the scale of a
    composite never carries terms that cancel inside one summand.
    """
    pts = np.asarray(points, dtype=float)
    closed = getattr(f, "closed_generator", None)
    if closed is not None:
        result = closed(params, pts)
        if result is not None:
            return result
    parts = f.components()
    if parts is None:
        return jet_generator_terms(params, f, pts)
    value = np.zeros(pts.shape[:-1])
    scale = np.zeros(pts.shape[:-1])
    for c, part in parts:
        v, s = generator_terms(params, part, pts)
        value = value + c * v
        scale = scale + abs(c) * s
    return value, scale


def generator_values(params: ModelParams, f: ScalarField, points: np.ndarray) -> np.ndarray:
    return generator_terms(params, f, points)[0]


DEFAULT_FD_STEP = 1e-5
POLYNOMIAL_FIELDS = ("H", "M", "H_tilde")


def default_fd_steps(p: np.ndarray, scaled_by_norm: bool = False, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """h·max(1, |pᵢ|) per coordinate (or with ‖p‖∞ in place of |pᵢ|), h = 1e-5 by default."""
    return h * np.maximum(1.0, _magnitude(p, scaled_by_norm))


def _magnitude(p: np.ndarray, scaled_by_norm: bool) -> np.ndarray:
    magnitude = np.abs(p)
    if scaled_by_norm:
        magnitude = np.broadcast_to(magnitude.max(axis=-1, keepdims=True), magnitude.shape)
    return magnitude


def default_fd_steps2(p: np.ndarray, scaled_by_norm: bool = False) -> np.ndarray:
    """
    Second differences use 1e-3·max(1, |pᵢ|), or 1e-3·max(1, ‖p‖∞) when
    `scaled_by_norm`; their roundoff grows like ε|f|/h², which matters for
    quadratic fields evaluated near a coordinate plane.
    """
    return 1e-3 * np.maximum(1.0, _magnitude(p, scaled_by_norm))


def finite_difference_jet(
    f: Callable[[np.ndarray], float],
    p,
    h: Optional[float] = None,
    h2: Optional[float] = None,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    (value, gradient, pure second derivatives) of f at p by central differences.

    Raises:
        FieldDomainError: If f is not finite at p or at one of the stencil points.
    """
    pts = _as_points(p)
    steps = default_fd_steps(pts) if h is None else np.full(3, float(h))
    steps2 = default_fd_steps2(pts) if h2 is None else np.full(3, float(h2))
    f0 = float(f(pts))
    if not np.isfinite(f0):
        raise FieldDomainError(f"Field is not finite at {tuple(pts)}.")
    grad = np.zeros(3)
    diag2 = np.zeros(3)
    for i in range(3):
        e1 = np.zeros(3)
        e1[i] = steps[i]
        e2 = np.zeros(3)
        e2[i] = steps2[i]
        samples = [float(f(pts + e1)), float(f(pts - e1)), float(f(pts + e2)), float(f(pts - e2))]
        if not np.all(np.isfinite(samples)):
            raise FieldDomainError(f"Field is not finite near {tuple(pts)} along axis {i}.")
        grad[i] = (samples[0] - samples[1]) / (2.0 * steps[i])
        diag2[i] = (samples[2] - 2.0 * f0 + samples[3]) / steps2[i] ** 2
    return f0, grad, diag2


def apply_generator_fd(
    params: ModelParams,
    f: Callable[[np.ndarray], float],
    p,
    h: Optional[float] = None,
    h2: Optional[float] = None,
) -> float:
    """
    L f by central differences (O(h²) truncation).

    Args:
        params: The model parameters.
        f: Any point → real function; a ScalarField works as well.
        p: The evaluation point (Point3 or length-3 array).
        h: Absolute step for the first differences; defaults to 1e-5·max(1, |pᵢ|).
        h2: Absolute step for the second differences; defaults to 1e-3·max(1, |pᵢ|).

    Raises:
        FieldDomainError: If f is not finite at p or at one of the stencil points.
    """
    pts = _as_points(p)
    _, grad, diag2 = finite_difference_jet(f, pts, h, h2)
    b = drift_components(params, pts[0], pts[1], pts[2])
    return float(sum(b[i] * grad[i] + params.gamma[i] * diag2[i] for i in range(3)))


def finite_difference_generator(
    params: ModelParams,
    f: ScalarField,
    points: np.ndarray,
    scaled_by_norm: bool = False,
    h: float = DEFAULT_FD_STEP,
) -> np.ndarray:
    """
    Vectorised counterpart of `apply_generator_fd` for fields that accept (N, 3)
    arrays. Non-finite stencils give NaN.
    """
    pts = np.asarray(points, dtype=float)
    steps = default_fd_steps(pts, scaled_by_norm, h)
    steps2 = default_fd_steps2(pts, scaled_by_norm)
    f0 = f(pts)
    b = drift_components(params, pts[:, 0], pts[:, 1], pts[:, 2])
    total = np.zeros(pts.shape[0])
    with np.errstate(all="ignore"):
        for i in range(3):
            e1 = np.zeros_like(pts)
            e1[:, i] = steps[:, i]
            e2 = np.zeros_like(pts)
            e2[:, i] = steps2[:, i]
            first = (f(pts + e1) - f(pts - e1)) / (2.0 * steps[:, i])
            second = (f(pts + e2) - 2.0 * f0 + f(pts - e2)) / steps2[:, i] ** 2
            total = total + b[i] * first + params.gamma[i] * second
    return np.where(np.isfinite(total), total, np.nan)


def closed_form_LH(params: ModelParams, points: np.ndarray) -> np.ndarray:
    """L H = −2(σx²+y²) − 2βz² + 2β(σ+ρ)z + 2(γ₁+γ₂+γ₃)."""
    x, y, z = points[..., 0], points[..., 1], points[..., 2]
    s, b = params.sigma, params.beta
    return -2.0 * (s * x**2 + y**2) - 2.0 * b * z**2 + 2.0 * b * (s + params.rho) * z + params.gamma_bar


def closed_form_LM(params: ModelParams, points: np.ndarray) -> np.ndarray:
    """L M = 2σ(x² − βz) − 2γ₁ for M = 2σz − x²."""
    x, z = points[..., 0], points[..., 2]
    return 2.0 * params.sigma * (x**2 - params.beta * z) - 2.0 * params.gamma1


def closed_form_LH_tilde_terms(params: ModelParams, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    L H̃ = −2σx² − 2y² − 2βz(ζ − σ) + 2(γ₁+γ₂+γ₃) with ζ = z − ρ, and the sum of
    the absolute values of those terms. The rotational terms ±2xyζ cancel
    exactly and are left out of both.
    """
    x, y, z = points[..., 0], points[..., 1], points[..., 2]
    with np.errstate(all="ignore"):
        terms = (
            -2.0 * params.sigma * x**2,
            -2.0 * y**2,
            -2.0 * params.beta * z * (z - params.rho - params.sigma),
        )
        value = terms[0] + terms[1] + terms[2] + params.gamma_bar
        scale = np.abs(terms[0]) + np.abs(terms[1]) + np.abs(terms[2]) + params.gamma_bar
    bad = ~np.isfinite(value)
    return np.where(bad, np.nan, value), np.where(bad, np.nan, scale)


def closed_form_LH_tilde(params: ModelParams, points: np.ndarray) -> np.ndarray:
    return closed_form_LH_tilde_terms(params, points)[0]


def closed_form_M_psi1(params: ModelParams, kappa1: float, points: np.ndarray) -> np.ndarray:
    """
    L ψ₁ for ψ₁ = κ₁y/(xζ):

        −κ₁ + κ₁[(σ−1)y/(xζ) − σy²/(x²ζ) − y²/ζ² + 2γ₁y/(x³ζ) + 2γ₃y/(xζ³) + βzy/(xζ²)]
    """
    x, y, z = points[..., 0], points[..., 1], points[..., 2]
    zeta = z - params.rho
    s = params.sigma
    bracket = (
        (s - 1.0) * y / (x * zeta)
        - s * y**2 / (x**2 * zeta)
        - y**2 / zeta**2
        + 2.0 * params.gamma1 * y / (x**3 * zeta)
        + 2.0 * params.gamma3 * y / (x * zeta**3)
        + params.beta * z * y / (x * zeta**2)
    )
    return kappa1 * (bracket - 1.0)


def relative_errors(actual: np.ndarray, reference: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """|actual − reference| relative to max(|reference|, term magnitude, tiny)."""
    denom = np.maximum(np.maximum(np.abs(reference), scale), np.finfo(float).tiny)
    return np.abs(actual - reference) / denom


def random_param_sets(n: int, seed: int) -> List[ModelParams]:
    """Parameter sets spread over the ranges the laboratory studies."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        gammas = rng.uniform(0.0, 2.0, size=3)
        gammas[rng.integers(3)] += 0.1
        out.append(ModelParams(
            sigma=float(rng.uniform(0.5, 20.0)),
            rho=float(rng.uniform(0.0, 50.0)),
            beta=float(rng.uniform(-2.0, 3.0)),
            gamma1=float(gammas[0]), gamma2=float(gammas[1]), gamma3=float(gammas[2]),
        ))
    return out


def box_points(n: int, seed: int, half_width: float = 50.0) -> np.ndarray:
    """Scrambled Halton points in [−w, w]³."""
    sampler = qmc.Halton(d=3, scramble=True, seed=seed)
    return qmc.scale(sampler.random(n), [-half_width] * 3, [half_width] * 3)


def off_singular_sets(params: ModelParams, points: np.ndarray, margin: float = 1.0) -> np.ndarray:
    """Points with |x| ≥ margin and |z − ρ| ≥ margin, away from where ψ₁ and ψ₂ blow up."""
    keep = (np.abs(points[:, 0]) >= margin) & (np.abs(points[:, 2] - params.rho) >= margin)
    return points[keep]


def generator_check(
    param_sets: Sequence[ModelParams],
    points: np.ndarray,
    fields_for: Callable[[ModelParams], Dict[str, ScalarField]],
    fd_points: Optional[np.ndarray] = None,
    h: float = DEFAULT_FD_STEP,
) -> GeneratorCheckReport:
    """
    Runs the oracle bundle: closed-form L H, L M, L H̃ and L ψ₁ against the
    jets, and jets against central differences for every field returned by
    `fields_for(params)`.

    Args:
        param_sets: Parameter sets to test.
        points: (N, 3) evaluation points for the closed-form oracles and the polynomial fields.
        fields_for: Builds the named fields for a parameter set.
        fd_points: Points for the non-polynomial fields; by default `points`
            off the singular sets of each parameter set.
        h: Relative first-difference step.
    """
    from .lyapunov import field_H, field_H_tilde, field_M, field_psi1

    err_h = err_m = err_h_tilde = err_psi1 = 0.0
    err_fd: Dict[str, float] = {}
    for params in param_sets:
        value, scale = generator_terms(params, field_H(params), points)
        err_h = max(err_h, float(np.max(relative_errors(value, closed_form_LH(params, points), scale))))
        value, scale = generator_terms(params, field_M(params), points)
        err_m = max(err_m, float(np.max(relative_errors(value, closed_form_LM(params, points), scale))))
        # the jet of H̃ as a whole, not its closed-form hook
        value, scale = jet_generator_terms(params, field_H_tilde(params, 1.0), points)
        err_h_tilde = max(err_h_tilde, float(np.max(relative_errors(value, closed_form_LH_tilde(params, points), scale))))
        off = off_singular_sets(params, points)
        if off.shape[0]:
            value, scale = generator_terms(params, field_psi1(1.0, params.rho), off)
            err_psi1 = max(err_psi1, float(np.max(relative_errors(value, closed_form_M_psi1(params, 1.0, off), scale))))

        for name, field in fields_for(params).items():
            polynomial = name in POLYNOMIAL_FIELDS
            if polynomial:
                pts = points
            else:
                pts = off_singular_sets(params, points) if fd_points is None else fd_points
            if pts.shape[0] == 0:
                continue
            value, scale = generator_terms(params, field, pts)
            fd = finite_difference_generator(params, field, pts, scaled_by_norm=polynomial, h=h)
            err = float(np.max(relative_errors(value, fd, scale)))
            err_fd[name] = max(err_fd.get(name, 0.0), err)

    tol_closed, tol_fd = 1e-10, 1e-6
    closed = (err_h, err_m, err_h_tilde, err_psi1)
    passed = all(e < tol_closed for e in closed) and all(
        e < (tol_fd if name in POLYNOMIAL_FIELDS else 1e-5) for name, e in err_fd.items()
    )
    return GeneratorCheckReport(
        n_param_sets=len(param_sets),
        n_points=int(points.shape[0]),
        h_scale=h,
        max_rel_err_H=err_h,
        max_rel_err_M=err_m,
        max_rel_err_H_tilde=err_h_tilde,
        max_rel_err_psi1=err_psi1,
        max_rel_err_fd=err_fd,
        tolerance_closed_form=tol_closed,
        tolerance_fd=tol_fd,
        passed=passed,
    )
