"""
Explicit test functions for the stochastic Lorenz system.

Recurrence side (β = 0): H̃, ψ₁, ψ₂, the cutoffs χ and χ̃, the region cutoffs
θ₁ and θ₂, and the glued composite V = H̃ + θ₁ψ₁ + θ₂ψ₂. These are written for the
reduced system and evaluated at (x, y, z − ρ); with β = 0 the shift maps the
full system onto the reduced one exactly.

Transience side (β < 0): the Ψ profile, V₁ = Ψ(λ(2σz − x² − A)) and
V₂ = ln(H + κ₀)/K together with the solver for their constants.

Also the truncation family F_N used by the non-stationarity diagnostics.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np # type: ignore
from scipy.optimize import bisect # type: ignore

from models.params import ModelParams, RecurrenceParams, TransienceParams
from .exceptions import ConstructionError, ParameterError
from .jets import Jet2, ScalarField

TWO_PI_THIRDS = 2.0 * math.pi / 3.0
SCAN_POINTS = 1000
LAMBDA_SAFETY = 0.99


# smoothstep and cutoffs

def smoothstep(t):
    """Quintic smoothstep s(t) = 6t⁵ − 15t⁴ + 10t³ on [0, 1], clamped outside."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def smoothstep_d1(t):
    t = np.clip(t, 0.0, 1.0)
    return 30.0 * t**2 * (1.0 - t) ** 2


def smoothstep_d2(t):
    t = np.clip(t, 0.0, 1.0)
    return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)


class Cutoff:
    """
    Even C² cutoff on ℝ.

    `chi`: 1 on |u| ≤ 1, 0 on |u| ≥ 2.
    `chi_tilde`: 0 on |u| ≤ 1/2, 1 on |u| ≥ 1.
    """

    def __init__(self, kind: str):
        if kind not in ("chi", "chi_tilde"):
            raise ValueError(f"Unknown cutoff '{kind}'.")
        self.kind = kind

    def derivatives(self, u) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Value, first and second derivative at u."""
        u = np.asarray(u, dtype=float)
        a = np.abs(u)
        sign = np.sign(u)
        if self.kind == "chi":
            t = a - 1.0
            return 1.0 - smoothstep(t), -smoothstep_d1(t) * sign, -smoothstep_d2(t)
        t = 2.0 * a - 1.0
        return smoothstep(t), 2.0 * smoothstep_d1(t) * sign, 4.0 * smoothstep_d2(t)

    def __call__(self, u):
        return self.derivatives(u)[0]

    def jet(self, u: Jet2) -> Jet2:
        return u.compose(*self.derivatives(u.value))


def chi() -> Cutoff:
    return Cutoff("chi")


def chi_tilde() -> Cutoff:
    return Cutoff("chi_tilde")


_CHI = chi()
_CHI_TILDE = chi_tilde()


@dataclass(frozen=True)
class CutoffProfiles:
    """
    The cutoff expressions that survive in M(θψ) as |ζ| → ∞, sampled on their
    transition intervals. Per unit weight:

    band2(u)   = ½(4 − u²)χ''(u) − 2uχ'(u),            u ∈ [1, 2]    (θ₂ band, × κ₂)
    radial1(v) = −2vχ'(v),                             v ∈ [1, 2]    (θ₁ radial, × κ₁)
    band1(w)   = |χ̃''(w)|/w + 2|χ̃'(w)|/w² + 2/w³,      w ∈ [1/2, 2]  (θ₁ band, × γ₁κ₁√(2R₀)/R₁³)
    radial2(v) = 8√v|χ'(v)|,                           v ∈ [1, 2]    (θ₂ radial, × κ₂R₁³/(γ₁√R₂))
    """
    v: np.ndarray
    radial1: np.ndarray
    radial2: np.ndarray
    band2_max: float
    band1_max: float

    @classmethod
    def sample(cls, n: int = 2001) -> "CutoffProfiles":
        u = np.linspace(1.0, 2.0, n)
        _, c1, c2 = _CHI.derivatives(u)
        band2 = 0.5 * (4.0 - u**2) * c2 - 2.0 * u * c1
        w = np.linspace(0.5, 2.0, n)
        _, t1, t2 = _CHI_TILDE.derivatives(w)
        band1 = np.abs(t2) / w + 2.0 * np.abs(t1) / w**2 + 2.0 / w**3
        return cls(
            v=u,
            radial1=-2.0 * u * c1,
            radial2=8.0 * np.sqrt(u) * np.abs(c1),
            band2_max=max(0.0, float(band2.max())),
            band1_max=float(band1.max()),
        )


# truncation family

class TruncationFN:
    """
    Odd C² truncation: F_N(x) = x on [0, N], h(x − N) + N on [N, N+2] and N + 1
    beyond, with h(s) = s − s³/4 + s⁴/16.

    h is the unique polynomial of degree ≤ 5 with h(0) = h''(0) = h'(2) = h''(2) = 0,
    h'(0) = 1 and h(2) = 1; its quintic coefficient vanishes. h' = (s+1)(s−2)²/4
    is non-negative and at most 1 on [0, 2].
    """
    c_star = 0.75  # max |h''| on [0, 2], attained at s = 1

    def __init__(self, N: int):
        if N < 1:
            raise ValueError("N must be at least 1")
        self.N = int(N)

    @staticmethod
    def h(s):
        return s - s**3 / 4.0 + s**4 / 16.0

    @staticmethod
    def h_d1(s):
        return 1.0 - 0.75 * s**2 + 0.25 * s**3

    @staticmethod
    def h_d2(s):
        return -1.5 * s + 0.75 * s**2

    def derivatives(self, x) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        a = np.abs(x)
        sign = np.where(x < 0, -1.0, 1.0)
        s = np.clip(a - self.N, 0.0, 2.0)
        inner = a <= self.N
        outer = a >= self.N + 2
        value = np.where(inner, a, np.where(outer, self.N + 1.0, self.h(s) + self.N))
        d1 = np.where(inner, 1.0, np.where(outer, 0.0, self.h_d1(s)))
        d2 = np.where(inner | outer, 0.0, self.h_d2(s))
        return sign * value, d1, sign * d2

    def __call__(self, x):
        return self.derivatives(x)[0]

    def jet(self, u: Jet2) -> Jet2:
        return u.compose(*self.derivatives(u.value))


def field_FN(N: int) -> TruncationFN:
    return TruncationFN(N)


# polynomial fields

class HField(ScalarField):
    """H = x² + y² + z² − 2(σ+ρ)z."""

    def __init__(self, params: ModelParams):
        self.params = params
        self.name = "H"

    def jet(self, x, y, z):
        s = self.params.sigma + self.params.rho
        return x * x + y * y + z * z - 2.0 * s * z


class HTildeField(ScalarField):
    """H̃ = x² + y² + ζ² − 2σζ + κ₀ with ζ = z − ρ."""

    def __init__(self, params: ModelParams, kappa0: float):
        self.params = params
        self.kappa0 = float(kappa0)
        self.name = "H_tilde"

    def jet(self, x, y, z):
        zeta = z - self.params.rho
        return x * x + y * y + zeta * zeta - 2.0 * self.params.sigma * zeta + self.kappa0

    def closed_generator(self, params: ModelParams, points: np.ndarray):
        """L H̃ in closed form; None when the generator belongs to other parameters."""
        if params != self.params:
            return None
        from .generator import closed_form_LH_tilde_terms
        return closed_form_LH_tilde_terms(params, points)


class MField(ScalarField):
    """M = 2σz − x²."""

    def __init__(self, params: ModelParams):
        self.params = params
        self.name = "M"

    def jet(self, x, y, z):
        return 2.0 * self.params.sigma * z - x * x


class FNOfMField(ScalarField):
    """F_N(2σz − x²)."""

    def __init__(self, params: ModelParams, N: int):
        self.inner = MField(params)
        self.truncation = TruncationFN(N)
        self.name = f"F_N:{N}"

    def jet(self, x, y, z):
        return self.truncation.jet(self.inner.jet(x, y, z))


def field_H(params: ModelParams) -> HField:
    return HField(params)


def field_H_tilde(params: ModelParams, kappa0: float) -> HTildeField:
    return HTildeField(params, kappa0)


def field_M(params: ModelParams) -> MField:
    return MField(params)


def field_FN_of_M(params: ModelParams, N: int) -> FNOfMField:
    return FNOfMField(params, N)


# asymptotic corrections

def _abs_cbrt_sq(zeta: Jet2, power: float) -> Jet2:
    """|ζ|^(2·power) written as (ζ²)^power so the jet is smooth away from 0."""
    return (zeta * zeta) ** power


class Psi1Field(ScalarField):
    """ψ₁ = κ₁ y / (xζ); singular on x = 0 and on ζ = 0."""

    def __init__(self, kappa1: float, rho: float = 0.0):
        self.kappa1 = float(kappa1)
        self.rho = float(rho)
        self.name = "psi1"

    def jet(self, x, y, z):
        return self.kappa1 * y / (x * (z - self.rho))


class Psi2Field(ScalarField):
    """ψ₂ = (κ₂/(2γ₁)) (4R₁²/|ζ|^{2/3} − x²); singular on ζ = 0."""

    def __init__(self, params: ModelParams, kappa2: float, R1: float):
        if params.gamma1 <= 0:
            raise ConstructionError("psi2 requires gamma1 > 0.")
        self.params = params
        self.kappa2 = float(kappa2)
        self.R1 = float(R1)
        self.name = "psi2"

    def jet(self, x, y, z):
        zeta = z - self.params.rho
        scale = self.kappa2 / (2.0 * self.params.gamma1)
        return scale * (4.0 * self.R1**2 * _abs_cbrt_sq(zeta, -1.0 / 3.0) - x * x)


def field_psi1(kappa1: float, rho: float = 0.0) -> Psi1Field:
    return Psi1Field(kappa1, rho)


def field_psi2(params: ModelParams, kappa2: float, R1: float) -> Psi2Field:
    return Psi2Field(params, kappa2, R1)


class ThetaField(ScalarField):
    """
    θ₁ = χ((x²+y²)/R₀) χ̃(|x||ζ|^{1/3}/R₁) χ̃(|ζ|/R₃)     (which = 1)
    θ₂ = χ((x²+y²)/R₂) χ(|x||ζ|^{1/3}/R₁) χ̃(|ζ|/R₃)      (which = 2)
    """

    def __init__(self, rp: RecurrenceParams, which: int, rho: float = 0.0):
        if which not in (1, 2):
            raise ValueError("which must be 1 or 2")
        self.rp = rp
        self.which = which
        self.rho = float(rho)
        self.name = f"theta{which}"

    def jet(self, x, y, z):
        rp = self.rp
        zeta = z - self.rho
        radial = (x * x + y * y) / (rp.R0 if self.which == 1 else rp.R2)
        band = abs(x) * _abs_cbrt_sq(zeta, 1.0 / 6.0) / rp.R1
        height = abs(zeta) / rp.R3
        middle = _CHI_TILDE.jet(band) if self.which == 1 else _CHI.jet(band)
        return _CHI.jet(radial) * middle * _CHI_TILDE.jet(height)


def field_theta1(rp: RecurrenceParams, rho: float = 0.0) -> ThetaField:
    return ThetaField(rp, 1, rho)


def field_theta2(rp: RecurrenceParams, rho: float = 0.0) -> ThetaField:
    return ThetaField(rp, 2, rho)


def glue(theta: Jet2, psi: Jet2) -> Jet2:
    """θ·ψ, defined as the zero jet wherever θ vanishes identically."""
    product = theta * psi
    off = theta.is_zero()
    return Jet2(
        np.where(off, 0.0, product.value),
        np.where(off, 0.0, product.grad),
        np.where(off, 0.0, product.diag2),
    )


class GluedTerm(ScalarField):
    """θ·ψ with the singularities of ψ excised by the support of θ."""

    def __init__(self, theta: ScalarField, psi: ScalarField):
        self.theta = theta
        self.psi = psi
        self.name = f"{theta.name}*{psi.name}"

    def jet(self, x, y, z):
        return glue(self.theta.jet(x, y, z), self.psi.jet(x, y, z))


class VField(ScalarField):
    """V = H̃ + θ₁ψ₁ + θ₂ψ₂, globally C²."""

    def __init__(self, params: ModelParams, rp: RecurrenceParams):
        self.params = params
        self.rp = rp
        self.name = "V"
        rho = params.rho
        self.h_tilde = HTildeField(params, rp.kappa0)
        self.theta1 = ThetaField(rp, 1, rho)
        self.theta2 = ThetaField(rp, 2, rho)
        self.psi1 = Psi1Field(rp.kappa1, rho)
        self.psi2 = Psi2Field(params, rp.kappa2, rp.R1)
        self.term1 = GluedTerm(self.theta1, self.psi1)
        self.term2 = GluedTerm(self.theta2, self.psi2)

    def components(self):
        return ((1.0, self.h_tilde), (1.0, self.term1), (1.0, self.term2))

    def jet(self, x, y, z):
        return self.h_tilde.jet(x, y, z) + self.term1.jet(x, y, z) + self.term2.jet(x, y, z)


def field_V(params: ModelParams, rp: RecurrenceParams) -> VField:
    return VField(params, rp)


# transience construction

def _f(s):
    return (1.0 - np.cos(s)) ** 2


def _f_d1(s):
    return 2.0 * (1.0 - np.cos(s)) * np.sin(s)


def _f_d2(s):
    c = np.cos(s)
    return 2.0 * (1.0 - c) * (1.0 + 2.0 * c)


def _g(t):
    """(1 + ln t)/(t ln t), strictly decreasing on t > 1."""
    lt = math.log(t)
    return (1.0 + lt) / (t * lt)


class PsiProfile:
    """
    Ψ(s) = 0 for s < 0, (1 − cos s)² on [0, B], c₀ ln ln(s + c₁) + c₂ beyond B.
    """

    def __init__(self, B: float, c0: float, c1: float, c2: float):
        self.B, self.c0, self.c1, self.c2 = float(B), float(c0), float(c1), float(c2)

    def derivatives(self, s) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        s = np.asarray(s, dtype=float)
        low = s < 0
        mid = (s >= 0) & (s <= self.B)
        # keep the log branch's argument admissible on the other branches
        t = np.where(s > self.B, s, self.B) + self.c1
        lt = np.log(t)
        log_value = self.c0 * np.log(lt) + self.c2
        log_d1 = self.c0 / (t * lt)
        log_d2 = -self.c0 * (1.0 + lt) / (t * lt) ** 2
        sm = np.where(mid, s, 0.0)
        value = np.where(low, 0.0, np.where(mid, _f(sm), log_value))
        d1 = np.where(low, 0.0, np.where(mid, _f_d1(sm), log_d1))
        d2 = np.where(low, 0.0, np.where(mid, _f_d2(sm), log_d2))
        return value, d1, d2

    def __call__(self, s):
        return self.derivatives(s)[0]

    def branch_mismatch(self) -> Tuple[float, float, float]:
        """Relative mismatch of value, first and second derivative at B."""
        B = self.B
        t = B + self.c1
        lt = math.log(t)
        left = (float(_f(B)), float(_f_d1(B)), float(_f_d2(B)))
        right = (
            self.c0 * math.log(lt) + self.c2,
            self.c0 / (t * lt),
            -self.c0 * (1.0 + lt) / (t * lt) ** 2,
        )
        return tuple(abs(a - b) / max(1.0, abs(a)) for a, b in zip(left, right))

    def jet(self, u: Jet2) -> Jet2:
        return u.compose(*self.derivatives(u.value))


def _admissible(m_eff: float, lo: float, hi: float, n: int = SCAN_POINTS) -> bool:
    grid = lo + (hi - lo) * np.arange(1, n + 1) / n
    return bool(np.all(_f_d1(grid) + m_eff * _f_d2(grid) >= 0.0))


def nonexplosion_constants(params: ModelParams) -> Tuple[float, float, float]:
    """
    (c, d, κ) with L(H + κ) ≤ c(H + κ) + d everywhere and H + κ ≥ 1.

    With s = σ+ρ and κ = s² + 1, H + κ = x² + y² + (z − s)² + 1 and
    −2βz² + 2βsz ≤ 4 max(−β, 0)(z − s)² + |β|s².
    """
    s = params.sigma + params.rho
    kappa = s * s + 1.0
    c = 4.0 * max(-params.beta, 0.0)
    d = abs(params.beta) * s * s + params.gamma_bar
    return c, d, kappa


class ShiftedEnergyField(ScalarField):
    """H + κ = x² + y² + (z − s)² + 1 with s = σ + ρ."""

    def __init__(self, params: ModelParams):
        self.shift = params.sigma + params.rho
        self.name = "H+kappa"

    def jet(self, x, y, z):
        w = z - self.shift
        return x * x + y * y + w * w + 1.0


def solve_transience_constants(params: ModelParams) -> TransienceParams:
    """
    Solves the constants of V₁ and V₂ for β < 0.

    B is the midpoint between 2π/3 and the first scan point where
    f' + m̂ f'' < 0, with m̂ = m / min(1, σ) (the LV₁ estimate needs
    2σx² + 2 ≥ 2 min(1, σ)(x² + 1)); the condition is re-verified and B halved
    towards 2π/3 until it holds. c₁ solves (1 + ln t)/(t ln t) = −f''(B)/f'(B)
    for t = B + c₁ by bisection, c₀ and c₂ then make Ψ C² at B, and λ is the
    largest admissible scale times 0.99.

    Raises:
        ParameterError: If β ≥ 0.
        ConstructionError: If no admissible B is found.
    """
    if params.beta >= 0:
        raise ParameterError("Transience constants require beta < 0.")
    sigma, beta = params.sigma, params.beta
    A = (2.0 * params.gamma1 + 2.0) / abs(beta)
    m = max(2.0 * params.gamma1, 2.0 * sigma**2 * params.gamma3)
    m_eff = m / min(1.0, sigma)

    lo = TWO_PI_THIRDS
    grid = lo + (math.pi - lo) * np.arange(1, SCAN_POINTS) / SCAN_POINTS
    failing = np.flatnonzero(_f_d1(grid) + m_eff * _f_d2(grid) < 0.0)
    B_max = float(grid[failing[0]]) if failing.size else math.pi
    B = lo + 0.5 * (B_max - lo)
    for _ in range(60):
        if _admissible(m_eff, lo, B):
            break
        B = lo + 0.5 * (B - lo)
    else:
        raise ConstructionError("No admissible switch point B in (2π/3, π).")

    r = -float(_f_d2(B)) / float(_f_d1(B))
    t_lo = 1.0 + 1e-12
    t_hi = 2.0
    while _g(t_hi) > r:
        t_hi *= 2.0
    t = bisect(lambda v: _g(v) - r, t_lo, t_hi, xtol=1e-14, maxiter=500)
    lt = math.log(t)
    c1 = t - B
    c0 = float(_f_d1(B)) * t * lt
    c2 = float(_f(B)) - c0 * math.log(lt)

    lam = LAMBDA_SAFETY * (min(1.0, min(1.0, sigma) / (m * r)) if m > 0 else 1.0)

    s = sigma + params.rho
    kappa0 = s * s + math.e
    # with G = H + κ₀ ≥ e:  L H ≤ 3|β|G + |β|s² + 2Σγ, so L ln G ≤ L H / G ≤ bound
    K = (3.0 * abs(beta) + (abs(beta) * s * s + params.gamma_bar) / math.e) / 0.95
    R = s + math.sqrt(s * s + 1.0) + 1.0

    return TransienceParams(
        A=A, m=m, B=B, c0=c0, c1=c1, c2=c2, lam=lam, K=K, kappa0=kappa0, R=R,
    )


class V1Field(ScalarField):
    """V₁ = Ψ(λ(2σz − x² − A))."""

    def __init__(self, params: ModelParams, tp: TransienceParams):
        if params.beta >= 0:
            raise ParameterError("V1 requires beta < 0.")
        self.params = params
        self.tp = tp
        self.profile = PsiProfile(tp.B, tp.c0, tp.c1, tp.c2)
        self.name = "V1"

    def jet(self, x, y, z):
        arg = self.tp.lam * (2.0 * self.params.sigma * z - x * x - self.tp.A)
        return self.profile.jet(arg)


class V2Field(ScalarField):
    """V₂ = ln(H + κ₀)/K."""

    def __init__(self, params: ModelParams, K: float, kappa0: float):
        self.h = HField(params)
        self.K = float(K)
        self.kappa0 = float(kappa0)
        self.name = "V2"

    def jet(self, x, y, z):
        return (self.h.jet(x, y, z) + self.kappa0).log() * (1.0 / self.K)


def field_V1(params: ModelParams, tp: TransienceParams) -> V1Field:
    return V1Field(params, tp)


def field_V2(params: ModelParams, K: float, kappa0: float) -> V2Field:
    return V2Field(params, K, kappa0)


def default_recurrence_params(params: ModelParams) -> RecurrenceParams:
    """Small radii used when a field needs region parameters but none were given."""
    w = max(1.0, 4.0 * sum(params.gamma))
    return RecurrenceParams(R0=4.0, R1=2.0, R2=8.0, R3=4.0, kappa0=params.sigma**2 + 1.0, kappa1=w, kappa2=w)


FIELD_NAMES = ("H", "H_tilde", "psi1", "psi2", "V", "M", "V1", "V2", "theta1", "theta2", "F_N:<N>")


def field_by_name(
    name: str,
    params: ModelParams,
    rp: Optional[RecurrenceParams] = None,
    tp: Optional[TransienceParams] = None,
) -> ScalarField:
    """
    Looks up a field by its CLI name.

    Raises:
        ValueError: For an unknown name.
        ParameterError: When the field's precondition on params fails.
    """
    rp = rp or default_recurrence_params(params)
    if name.startswith("F_N:"):
        return field_FN_of_M(params, int(name.split(":", 1)[1]))
    if name in ("V1", "V2") and tp is None:
        tp = solve_transience_constants(params)
    builders: Dict[str, Callable[[], ScalarField]] = {
        "H": lambda: HField(params),
        "H_tilde": lambda: HTildeField(params, rp.kappa0),
        "M": lambda: MField(params),
        "psi1": lambda: Psi1Field(rp.kappa1, params.rho),
        "psi2": lambda: Psi2Field(params, rp.kappa2, rp.R1),
        "theta1": lambda: ThetaField(rp, 1, params.rho),
        "theta2": lambda: ThetaField(rp, 2, params.rho),
        "V": lambda: VField(params, rp),
        "V1": lambda: V1Field(params, tp),
        "V2": lambda: V2Field(params, tp.K, tp.kappa0),
    }
    if name not in builders:
        raise ValueError(f"Unknown field '{name}'. Known fields: {', '.join(FIELD_NAMES)}.")
    return builders[name]()
