"""
Exact polynomial vector fields, Lie brackets and the iterated-bracket hierarchy.

Fields are triples of sympy polynomials in (x, y, z). The noise amplitudes
√(2γᵢ) enter as opaque positive atoms a1, a2, a3, so rank decisions are made on
exact expressions. The model coefficients σ, ρ, β are positive/real symbols
unless a ModelParams is given, in which case they become exact rationals.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np # type: ignore
import sympy as sp # type: ignore
from scipy.integrate import solve_ivp # type: ignore

from models.params import ModelParams

X, Y, Z = sp.symbols("x y z", real=True)
GENS = (X, Y, Z)
LAM = sp.Symbol("lambda_", real=True)
SIGMA, RHO = sp.symbols("sigma rho", positive=True)
BETA = sp.Symbol("beta", real=True)
ATOMS = sp.symbols("a1 a2 a3", positive=True)


def _poly(expr) -> sp.Poly:
    return sp.Poly(sp.expand(expr), *GENS)


@dataclass(frozen=True)
class PolyVectorField:
    """
    U = Σ Uʲ ∂ⱼ with polynomial components. Equality and hashing are structural
    on the canonical polynomials; `label` records provenance only.
    """
    components: Tuple[sp.Poly, sp.Poly, sp.Poly]
    label: str = field(default="", compare=False)

    @classmethod
    def of(cls, exprs: Sequence, label: str = "") -> "PolyVectorField":
        if len(exprs) != 3:
            raise ValueError("A vector field on R^3 needs three components.")
        return cls(tuple(_poly(e) for e in exprs), label)

    @classmethod
    def constant(cls, vector: Sequence, label: str = "") -> "PolyVectorField":
        return cls.of(vector, label)

    def exprs(self) -> Tuple[sp.Expr, sp.Expr, sp.Expr]:
        return tuple(c.as_expr() for c in self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.components)

    def is_constant(self) -> bool:
        return all(c.is_zero or c.total_degree() == 0 for c in self.components)

    def relabel(self, label: str) -> "PolyVectorField":
        return PolyVectorField(self.components, label)

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField.of([a + b for a, b in zip(self.exprs(), other.exprs())])

    def __neg__(self) -> "PolyVectorField":
        return PolyVectorField.of([-e for e in self.exprs()], self.label)

    def __sub__(self, other: "PolyVectorField") -> "PolyVectorField":
        return self + (-other)

    def scaled(self, factor) -> "PolyVectorField":
        return PolyVectorField.of([factor * e for e in self.exprs()], self.label)

    def numeric(self, values: Optional[Dict[sp.Symbol, float]] = None):
        """A numpy callable p ↦ U(p) after substituting every non-coordinate symbol."""
        exprs = [e.subs(values or {}) for e in self.exprs()]
        fn = sp.lambdify(GENS, exprs, "numpy")

        def evaluate(p):
            return np.array(fn(*np.asarray(p, dtype=float)), dtype=float)

        return evaluate

    def to_dict(self) -> Dict[str, object]:
        return {"label": self.label, "components": [str(e) for e in self.exprs()]}

    def __str__(self) -> str:
        terms = [f"({e})∂{g}" for e, g in zip(self.exprs(), "xyz") if e != 0]
        return " + ".join(terms) if terms else "0"


def lie_bracket(U: PolyVectorField, W: PolyVectorField) -> PolyVectorField:
    """[U, W]ʲ = Σₖ Uᵏ ∂ₖWʲ − Wᵏ ∂ₖUʲ."""
    components = []
    for j in range(3):
        total = _poly(0)
        for k, g in enumerate(GENS):
            total += U.components[k] * W.components[j].diff(g) - W.components[k] * U.components[j].diff(g)
        components.append(total.as_expr())
    # components keep the coefficient domain of their own expressions
    return PolyVectorField.of(components, f"[{U.label},{W.label}]")


def ad(G: PolyVectorField, W: PolyVectorField, n: int) -> PolyVectorField:
    """adⁿ_G(W) = [G, [G, … [G, W]]]."""
    result = W
    for _ in range(n):
        result = lie_bracket(G, result)
    if n > 1:
        result = result.relabel(f"ad^{n}({G.label})({W.label})")
    return result


def degree_n(G: PolyVectorField, W: PolyVectorField) -> int:
    """
    max over j of deg_λ Wʲ(λG), for a constant direction G; 0 for W = 0.

    Raises:
        ValueError: If G is not constant.
    """
    if not G.is_constant():
        raise ValueError("degree_n needs a constant direction field G.")
    direction = dict(zip(GENS, (LAM * e for e in G.exprs())))
    degree = 0
    for component in W.exprs():
        restricted = sp.expand(component.subs(direction, simultaneous=True))
        if restricted != 0:
            degree = max(degree, sp.Poly(restricted, LAM).degree())
    return degree


@dataclass(frozen=True)
class HierarchyLevel:
    """Cumulative sets at one level: odd-produced, its constant members, even-produced."""
    level: int
    odd: Tuple[PolyVectorField, ...]
    constant: Tuple[PolyVectorField, ...]
    even: Tuple[PolyVectorField, ...]

    def to_dict(self) -> Dict[str, object]:
        return {
            "level": self.level,
            "odd": [f.to_dict() for f in self.odd],
            "constant": [f.to_dict() for f in self.constant],
            "even": [f.to_dict() for f in self.even],
        }


@dataclass(frozen=True)
class BracketHierarchy:
    drift: PolyVectorField
    noise: Tuple[PolyVectorField, ...]
    levels: Tuple[HierarchyLevel, ...]

    @property
    def constant_fields(self) -> Tuple[PolyVectorField, ...]:
        return self.levels[-1].constant if self.levels else ()

    def to_dict(self) -> Dict[str, object]:
        return {
            "drift": self.drift.to_dict(),
            "noise": [g.to_dict() for g in self.noise],
            "levels": [level.to_dict() for level in self.levels],
        }


def _extend(existing: List[PolyVectorField], new: PolyVectorField) -> None:
    if not new.is_zero() and new not in existing:
        existing.append(new)


def build_hierarchy(
    F: PolyVectorField, noise: Sequence[PolyVectorField], max_level: int = 4,
) -> BracketHierarchy:
    """
    Level 0 holds the noise fields. Level 1 adds ad^𝔫(G,F)_G(F) for every noise
    field G, as odd or even according to 𝔫 (𝔫 = 0 puts F itself in the even
    set). Level j+1 ≥ 2 adds ad^𝔫(G,W)_G(W) for constant odd G and odd W of
    level j, skipping 𝔫 = 0. Sets are cumulative and structurally deduplicated.

    Raises:
        ValueError: If a noise field is not constant.
    """
    if any(not g.is_constant() for g in noise):
        raise ValueError("Noise fields must be constant.")
    odd: List[PolyVectorField] = []
    even: List[PolyVectorField] = []
    for g in noise:
        _extend(odd, g)

    def snapshot(level: int) -> HierarchyLevel:
        return HierarchyLevel(level, tuple(odd), tuple(f for f in odd if f.is_constant()), tuple(even))

    levels = [snapshot(0)]
    for level in range(1, max_level + 1):
        if level == 1:
            pairs = [(g, F) for g in list(odd)]
        else:
            constants = [f for f in odd if f.is_constant()]
            pairs = [(g, w) for g in constants for w in list(odd)]
        for g, w in pairs:
            n = degree_n(g, w)
            if n == 0 and level > 1:
                continue
            produced = ad(g, w, n)
            _extend(odd if n % 2 else even, produced)
        levels.append(snapshot(level))
    return BracketHierarchy(F, tuple(noise), tuple(levels))


@dataclass(frozen=True)
class SpanResult:
    spans: bool
    rank: int
    basis: Tuple[PolyVectorField, ...]

    def to_dict(self) -> Dict[str, object]:
        return {"spans": self.spans, "rank": self.rank, "basis": [f.to_dict() for f in self.basis]}


def spanning_test(h: BracketHierarchy) -> SpanResult:
    """
    Whether the constant odd-produced fields span ℝ³, decided by exact rank with
    the positive atoms set to 1; the witness basis is chosen greedily.
    """
    ones = {a: 1 for a in ATOMS}
    basis: List[PolyVectorField] = []
    rows: List[List[sp.Expr]] = []
    for candidate in h.constant_fields:
        row = [sp.simplify(e.subs(ones)) for e in candidate.exprs()]
        if sp.Matrix(rows + [row]).rank() > len(rows):
            rows.append(row)
            basis.append(candidate)
        if len(rows) == 3:
            break
    return SpanResult(spans=len(rows) == 3, rank=len(rows), basis=tuple(basis))


# Lorenz fields

def _coefficients(params: Optional[ModelParams]):
    if params is None:
        return SIGMA, RHO, BETA
    return sp.Rational(params.sigma), sp.Rational(params.rho), sp.Rational(params.beta)


def lorenz_drift(params: Optional[ModelParams] = None) -> PolyVectorField:
    s, r, b = _coefficients(params)
    return PolyVectorField.of([s * (Y - X), X * (r - Z) - Y, X * Y - b * Z], "F")


def noise_fields(
    params: Optional[ModelParams] = None, active: Optional[Sequence[int]] = None,
) -> Tuple[PolyVectorField, ...]:
    """Gᵢ = aᵢ∂ᵢ for every active index (1-based); by default those with γᵢ > 0."""
    if active is None:
        active = [i + 1 for i, g in enumerate(params.gamma) if g > 0] if params else [1, 2, 3]
    out = []
    for i in active:
        vector = [0, 0, 0]
        vector[i - 1] = ATOMS[i - 1]
        out.append(PolyVectorField.constant(vector, f"G{i}"))
    return tuple(out)


def lorenz_fields(params: Optional[ModelParams] = None, active: Optional[Sequence[int]] = None):
    """(F, noise fields) of the stochastic Lorenz system."""
    return lorenz_drift(params), noise_fields(params, active)


def numeric_values(params: Optional[ModelParams] = None) -> Dict[sp.Symbol, float]:
    """Substitutions turning every symbol into a float: atoms → √(2γᵢ) (1 if γᵢ = 0)."""
    if params is None:
        return {SIGMA: 10.0, RHO: 28.0, BETA: 8.0 / 3.0, **{a: 1.0 for a in ATOMS}}
    amps = {a: (float(np.sqrt(2.0 * g)) if g > 0 else 1.0) for a, g in zip(ATOMS, params.gamma)}
    return {SIGMA: params.sigma, RHO: params.rho, BETA: params.beta, **amps}


# independent numerical oracle

def _flow(fn, p: np.ndarray, t: float) -> np.ndarray:
    sol = solve_ivp(lambda _s, u: fn(u), (0.0, t), p, method="DOP853", rtol=1e-13, atol=1e-13)
    return sol.y[:, -1]


def commutator_of_flows(
    U: PolyVectorField,
    W: PolyVectorField,
    point: Sequence[float],
    t: float = 1e-3,
    values: Optional[Dict[sp.Symbol, float]] = None,
) -> np.ndarray:
    """
    [U, W](p) ≈ (φ_W^{−t} ∘ φ_U^{−t} ∘ φ_W^{t} ∘ φ_U^{t}(p) − p)/t², averaged over
    ±t so the O(t) term cancels.
    """
    u_fn, w_fn = U.numeric(values), W.numeric(values)
    p = np.asarray(point, dtype=float)

    def loop(s: float) -> np.ndarray:
        q = _flow(u_fn, p, s)
        q = _flow(w_fn, q, s)
        q = _flow(u_fn, q, -s)
        q = _flow(w_fn, q, -s)
        return (q - p) / s**2

    return 0.5 * (loop(t) + loop(-t))
