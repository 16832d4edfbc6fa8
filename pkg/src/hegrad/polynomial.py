"""Sparse polynomials over state variables ``x`` and coefficient variables ``y``.

State variables are identified by their flat index into the stacked state
vector; coefficient variables by a string id. A monomial may also carry a
public literal multiplier (``2`` in ``2*lam*R``, ``60`` in ``D*omega``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import DimensionMismatch, MissingVariable, NotAffine, ValidationError
from .fixedpoint import ScaledDecimal

ONE = ScaledDecimal(1)
ZERO = ScaledDecimal(0)


def _freeze(exps: Mapping, key_type) -> tuple:
    items = []
    for k, e in exps.items():
        k = key_type(k)
        e = int(e)
        if e < 0:
            raise ValidationError(f"negative exponent for {k!r}")
        if e:
            items.append((k, e))
    return tuple(sorted(items))


@dataclass(frozen=True)
class Monomial:
    """``literal * prod(x[j]**e) * prod(y[c]**e)`` with sorted sparse exponent tuples."""

    x_exponents: tuple = ()
    y_exponents: tuple = ()
    literal: ScaledDecimal = ONE

    @classmethod
    def make(cls, x=None, y=None, literal=1) -> "Monomial":
        return cls(
            _freeze(x or {}, int),
            _freeze(y or {}, str),
            ScaledDecimal.coerce(literal),
        )

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.x_exponents) + sum(e for _, e in self.y_exponents)

    @property
    def x_degree(self) -> int:
        return sum(e for _, e in self.x_exponents)

    @property
    def key(self) -> tuple:
        return (self.x_exponents, self.y_exponents)

    def evaluate(self, x, c: Mapping[str, ScaledDecimal]) -> ScaledDecimal:
        value = self.literal
        for j, e in self.x_exponents:
            value = value * x[j] ** e
        for name, e in self.y_exponents:
            try:
                value = value * c[name] ** e
            except KeyError:
                raise MissingVariable(f"no value for coefficient {name!r}") from None
        return value

    def to_json(self) -> dict:
        out = {}
        if self.literal != ONE:
            out["coef"] = str(self.literal)
        if self.x_exponents:
            out["x"] = {str(j): e for j, e in self.x_exponents}
        if self.y_exponents:
            out["y"] = {name: e for name, e in self.y_exponents}
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "Monomial":
        return cls.make(data.get("x"), data.get("y"), data.get("coef", "1"))


def _sort_key(mono: Monomial):
    # higher degree first, then lexicographic on the exponent tuples
    return (-mono.degree, mono.x_exponents, mono.y_exponents)


@dataclass(frozen=True)
class PolynomialFunction:
    """Canonical sum of monomials: coalesced, zero terms dropped, deterministic order."""

    monomials: tuple = field(default=())

    def __post_init__(self):
        merged: dict = {}
        for m in self.monomials:
            if m.key in merged:
                prev = merged[m.key]
                merged[m.key] = Monomial(m.x_exponents, m.y_exponents, prev.literal + m.literal)
            else:
                merged[m.key] = m
        canon = tuple(sorted((m for m in merged.values() if m.literal), key=_sort_key))
        object.__setattr__(self, "monomials", canon)

    @classmethod
    def of(cls, *monomials: Monomial) -> "PolynomialFunction":
        return cls(tuple(monomials))

    @property
    def degree(self) -> int:
        return max((m.degree for m in self.monomials), default=0)

    def x_vars(self) -> set:
        return {j for m in self.monomials for j, _ in m.x_exponents}

    def y_vars(self) -> set:
        return {name for m in self.monomials for name, _ in m.y_exponents}

    def __add__(self, other: "PolynomialFunction") -> "PolynomialFunction":
        return PolynomialFunction(self.monomials + other.monomials)

    def __neg__(self) -> "PolynomialFunction":
        return self.scaled(-1)

    def __sub__(self, other: "PolynomialFunction") -> "PolynomialFunction":
        return self + (-other)

    def __mul__(self, other: "PolynomialFunction") -> "PolynomialFunction":
        out = []
        for a in self.monomials:
            for b in other.monomials:
                xs = dict(a.x_exponents)
                for j, e in b.x_exponents:
                    xs[j] = xs.get(j, 0) + e
                ys = dict(a.y_exponents)
                for name, e in b.y_exponents:
                    ys[name] = ys.get(name, 0) + e
                out.append(Monomial.make(xs, ys, a.literal * b.literal))
        return PolynomialFunction(tuple(out))

    def scaled(self, k) -> "PolynomialFunction":
        k = ScaledDecimal.coerce(k)
        return PolynomialFunction(
            tuple(Monomial(m.x_exponents, m.y_exponents, m.literal * k) for m in self.monomials)
        )

    def to_json(self) -> dict:
        return {"monomials": [m.to_json() for m in self.monomials]}

    @classmethod
    def from_json(cls, data: Mapping) -> "PolynomialFunction":
        return cls(tuple(Monomial.from_json(m) for m in data.get("monomials", [])))


# small builders used by the case studies and tests
def const(value) -> PolynomialFunction:
    return PolynomialFunction.of(Monomial.make(literal=value))


def xvar(j: int) -> PolynomialFunction:
    return PolynomialFunction.of(Monomial.make(x={j: 1}))


def yvar(name: str) -> PolynomialFunction:
    return PolynomialFunction.of(Monomial.make(y={name: 1}))


def poly_sum(polys) -> PolynomialFunction:
    mons: tuple = ()
    for p in polys:
        mons += p.monomials
    return PolynomialFunction(mons)


def eval_plain(poly: PolynomialFunction, x, c: Mapping[str, ScaledDecimal]) -> ScaledDecimal:
    """Exact evaluation with coefficient variables bound to their values."""
    n = len(x)
    total = ZERO
    for m in poly.monomials:
        for j, _ in m.x_exponents:
            if not 0 <= j < n:
                raise DimensionMismatch(f"state variable {j} outside dimension {n}")
        total = total + m.evaluate(x, c)
    return total


def to_affine(poly: PolynomialFunction, n: int, c: Mapping[str, ScaledDecimal] | None = None):
    """Split an affine polynomial into ``(A, B)`` with ``A`` a length-``n`` row.

    Coefficient variables are replaced by their values from ``c`` (under the
    affine scheme the operator knows every coefficient). Raises NotAffine if
    any monomial has degree above one in ``x``.
    """
    c = c or {}
    A = [ZERO] * n
    B = ZERO
    for m in poly.monomials:
        if m.x_degree > 1:
            raise NotAffine(f"monomial of degree {m.x_degree} in x: {m.to_json()}")
        weight = Monomial((), m.y_exponents, m.literal).evaluate((), c)
        if m.x_exponents:
            (j, _), = m.x_exponents
            if not 0 <= j < n:
                raise DimensionMismatch(f"state variable {j} outside dimension {n}")
            A[j] = A[j] + weight
        else:
            B = B + weight
    return A, B
