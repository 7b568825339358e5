"""
Second-order forward-mode jets with a diagonal Hessian.

A `Jet2` carries value, gradient and the three pure second derivatives of a
scalar field, vectorised over an arbitrary batch shape. Mixed partials are never
tracked because the generator only needs ∂ᵢ² (the diffusion matrix is diagonal).
"""
from typing import Callable, Optional, Tuple, Union

import numpy as np # type: ignore

Number = Union[float, int]


class Jet2:
    """
    value has the batch shape S; grad and diag2 have shape (3,) + S.
    """
    __slots__ = ("value", "grad", "diag2")
    # numpy arrays on the left defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, value, grad, diag2):
        self.value = np.asarray(value, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.diag2 = np.asarray(diag2, dtype=float)

    @classmethod
    def constant(cls, c, shape=()) -> "Jet2":
        value = np.broadcast_to(np.asarray(c, dtype=float), shape).copy()
        zeros = np.zeros((3,) + tuple(value.shape))
        return cls(value, zeros, zeros.copy())

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    def is_finite(self) -> np.ndarray:
        """Pointwise: all seven components finite."""
        return (
            np.isfinite(self.value)
            & np.isfinite(self.grad).all(axis=0)
            & np.isfinite(self.diag2).all(axis=0)
        )

    def is_zero(self) -> np.ndarray:
        """Pointwise: the jet vanishes identically (value and derivatives)."""
        return (self.value == 0) & (self.grad == 0).all(axis=0) & (self.diag2 == 0).all(axis=0)

    # arithmetic

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.diag2)

    def __add__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return Jet2(self.value + other.value, self.grad + other.grad, self.diag2 + other.diag2)
        return Jet2(self.value + other, self.grad, self.diag2)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2":
        return self + (-other)

    def __rsub__(self, other) -> "Jet2":
        return (-self) + other

    def __mul__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            u, v = self, other
            return Jet2(
                u.value * v.value,
                u.grad * v.value + u.value * v.grad,
                u.diag2 * v.value + 2.0 * u.grad * v.grad + u.value * v.diag2,
            )
        return Jet2(self.value * other, self.grad * other, self.diag2 * other)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet2":
        v = self.value
        return self.compose(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return self * other.reciprocal()
        return self * (1.0 / other)

    def __rtruediv__(self, other) -> "Jet2":
        return self.reciprocal() * other

    def __pow__(self, p: Number) -> "Jet2":
        """Real powers; for non-integer p the base must be positive."""
        v = self.value
        if p == 0:
            return Jet2.constant(1.0, self.shape)
        if p == 1:
            return self
        if p == 2:
            return self * self
        return self.compose(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def compose(self, f0, f1, f2) -> "Jet2":
        """
        Chain rule for φ∘u given φ(u), φ'(u), φ''(u) at the jet's value.

        Where φ' (resp. φ'') is exactly zero the corresponding term is dropped,
        so a plateau of φ yields a clean zero jet even if u's derivatives are
        not finite there.
        """
        f1 = np.asarray(f1, dtype=float)
        f2 = np.asarray(f2, dtype=float)
        first = np.where(f1 == 0, 0.0, f1 * self.grad)
        second = np.where(f2 == 0, 0.0, f2 * self.grad**2) + np.where(f1 == 0, 0.0, f1 * self.diag2)
        return Jet2(f0, first, second)

    def map(self, fn: Callable, d1: Callable, d2: Callable) -> "Jet2":
        v = self.value
        return self.compose(fn(v), d1(v), d2(v))

    def log(self) -> "Jet2":
        v = self.value
        return self.compose(np.log(v), 1.0 / v, -1.0 / v**2)

    def cos(self) -> "Jet2":
        v = self.value
        return self.compose(np.cos(v), -np.sin(v), -np.cos(v))

    def sqrt(self) -> "Jet2":
        return self ** 0.5

    def __abs__(self) -> "Jet2":
        """|u| away from 0; the sign is frozen at the jet's value."""
        s = np.sign(self.value)
        return Jet2(np.abs(self.value), self.grad * s, self.diag2 * s)

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, grad={self.grad!r}, diag2={self.diag2!r})"


def lift(points: np.ndarray) -> Tuple[Jet2, Jet2, Jet2]:
    """
    Lifts points of shape (..., 3) to the three coordinate jets: coordinate i
    has value pᵢ, gradient eᵢ and zero second derivatives.
    """
    pts = np.asarray(points, dtype=float)
    shape = pts.shape[:-1]
    coords = []
    for i in range(3):
        grad = np.zeros((3,) + shape)
        grad[i] = 1.0
        coords.append(Jet2(pts[..., i], grad, np.zeros((3,) + shape)))
    return tuple(coords)


def lift_constant(points: np.ndarray) -> Tuple[Jet2, Jet2, Jet2]:
    """Constant lift: coordinate values with zero derivatives."""
    pts = np.asarray(points, dtype=float)
    return tuple(Jet2.constant(pts[..., i], pts.shape[:-1]) for i in range(3))


class ScalarField:
    """
    A C² test function on ℝ³, evaluated through jets.

    Subclasses implement `jet(x, y, z)` in terms of Jet2 arithmetic and must be
    immutable, so one instance can be evaluated from many threads.
    """
    name: str = "field"

    def jet(self, x: Jet2, y: Jet2, z: Jet2) -> Jet2:
        raise NotImplementedError

    def components(self) -> Optional[Tuple[Tuple[float, "ScalarField"], ...]]:
        """Weighted summands to apply a linear operator to one by one; None for an atomic field."""
        return None

    def evaluate(self, points) -> Jet2:
        """Jet of the field at points of shape (..., 3)."""
        with np.errstate(all="ignore"):
            return self.jet(*lift(_as_points(points)))

    def __call__(self, points):
        """Plain evaluation (constant lift); a float for a single point."""
        pts = _as_points(points)
        with np.errstate(all="ignore"):
            value = self.jet(*lift_constant(pts)).value
        return float(value) if value.ndim == 0 else value


class FunctionField(ScalarField):
    """Wraps a function of the three coordinate jets."""

    def __init__(self, fn: Callable[[Jet2, Jet2, Jet2], Jet2], name: str = "function"):
        self._fn = fn
        self.name = name

    def jet(self, x, y, z):
        result = self._fn(x, y, z)
        if not isinstance(result, Jet2):
            result = Jet2.constant(result, x.shape)
        return result


class LinearCombination(ScalarField):
    """Σ cᵢ fᵢ."""

    def __init__(self, terms):
        self._terms = tuple((float(c), f) for c, f in terms)
        self.name = " + ".join(f"{c:g}*{f.name}" for c, f in self._terms)

    def components(self):
        return self._terms

    def jet(self, x, y, z):
        total = Jet2.constant(0.0, x.shape)
        for c, f in self._terms:
            total = total + c * f.jet(x, y, z)
        return total


def _as_points(points) -> np.ndarray:
    if hasattr(points, "as_array"):
        return points.as_array()
    return np.asarray(points, dtype=float)
