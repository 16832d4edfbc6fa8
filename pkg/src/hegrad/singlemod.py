"""Private-key SingleMod scheme: ``Enc(z) = u*w + z`` under a secret odd modulus ``w``.

Supports addition and multiplication of ciphertexts, so any polynomial can be
evaluated by the operator. Fixed-point scaling is tracked through a per-
ciphertext *degree*: a fresh encryption of ``10**sigma * r`` has degree 1,
and a product's degree is the sum of its factors' degrees.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import kernels
from .errors import DegreeMismatch, EvenModulus, MissingVariable, PlaintextTooLarge, PrecisionExceeded, ValidationError
from .fixedpoint import ScaledDecimal, t_transform
from .polynomial import PolynomialFunction


@dataclass(frozen=True)
class SingleModKey:
    w: int

    def __post_init__(self):
        if self.w < 3:
            raise ValidationError(f"key must be at least 3, got {self.w}")
        if self.w % 2 == 0:
            raise EvenModulus(f"key must be odd, got {self.w}")

    @property
    def bit_length(self) -> int:
        return self.w.bit_length()

    def to_json(self) -> dict:
        return {"scheme": "singlemod", "w": str(self.w)}

    @classmethod
    def from_json(cls, data: Mapping) -> "SingleModKey":
        return cls(int(data["w"]))


@dataclass(frozen=True)
class SingleModCiphertext:
    """Ciphertext integer plus the scaling degree of its plaintext.

    Fresh encryptions are non-negative. Operator-held constants enter
    unblinded and may be negative, since the operator cannot reduce mod ``w``.
    """

    value: int
    degree: int = 1

    def __add__(self, other: "SingleModCiphertext") -> "SingleModCiphertext":
        if self.degree != other.degree:
            raise DegreeMismatch(f"cannot add degree {self.degree} to degree {other.degree}")
        return SingleModCiphertext(self.value + other.value, self.degree)

    def __mul__(self, other: "SingleModCiphertext") -> "SingleModCiphertext":
        return SingleModCiphertext(self.value * other.value, self.degree + other.degree)

    def to_json(self) -> dict:
        return {"v": str(self.value), "d": self.degree}

    @classmethod
    def from_json(cls, data: Mapping) -> "SingleModCiphertext":
        return cls(int(data["v"]), int(data["d"]))


def keygen(bits: int, rng: random.Random) -> SingleModKey:
    """Uniform odd integer with exactly ``bits`` bits."""
    if bits < 16:
        raise ValidationError("key size must be at least 16 bits")
    w = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
    return SingleModKey(w)


def check_key_bound(key: SingleModKey, bounds: Sequence, degrees: Sequence[int], sigma: int) -> bool:
    """True iff ``w >= 1 + 2 * max(10**(deg*sigma) * |bound|)`` over all entries."""
    worst = ScaledDecimal(0)
    for bound, deg in zip(bounds, degrees, strict=True):
        bound = ScaledDecimal.coerce(bound)
        if bound < 0:
            raise ValidationError("bounds must be non-negative")
        worst = max(worst, bound * 10 ** (deg * sigma))
    return key.w >= 1 + 2 * worst


def key_threshold(bounds: Sequence, degrees: Sequence[int], sigma: int) -> ScaledDecimal:
    worst = ScaledDecimal(0)
    for bound, deg in zip(bounds, degrees, strict=True):
        worst = max(worst, abs(ScaledDecimal.coerce(bound)) * 10 ** (deg * sigma))
    return 1 + 2 * worst


def draw_blinding(rng: random.Random, bits: int) -> int:
    """Blinding factor ``u``, uniform in ``[1, 2**bits)``."""
    return rng.randrange(1, 1 << bits)


def encrypt(key: SingleModKey, z: int, u: int | random.Random, u_bits: int | None = None) -> SingleModCiphertext:
    """Encrypt the integer ``z`` as ``u*w + z``.

    ``u`` is either the blinding factor itself or a random source to draw it
    from (``u_bits`` defaults to the key size).
    """
    if abs(z) > (key.w - 1) // 2:
        raise PlaintextTooLarge(f"|{z}| exceeds (w-1)/2")
    if not isinstance(u, int):
        u = draw_blinding(u, u_bits or key.bit_length)
    if u < 1:
        raise ValidationError("blinding factor must be a positive integer")
    return SingleModCiphertext(u * key.w + z, 1)


def plain_constant(z: int) -> SingleModCiphertext:
    """Unblinded degree-1 operand for a coefficient the operator owns."""
    return SingleModCiphertext(z, 1)


def _literal_multiplier(literal: ScaledDecimal, spare_digits: int) -> int:
    # literal * 10**spare_digits must be an integer
    lit = literal.reduced()
    if lit.scale > spare_digits:
        raise PrecisionExceeded(
            f"literal {literal} needs {lit.scale} fraction digits but only {spare_digits} are available"
        )
    return lit.mantissa * 10 ** (spare_digits - lit.scale)


def eval_polynomial(
    x_cts: Mapping[int, SingleModCiphertext],
    y_cts: Mapping[str, SingleModCiphertext],
    poly: PolynomialFunction,
    sigma: int,
) -> SingleModCiphertext:
    """Evaluate ``poly`` over ciphertexts, scaling each monomial to the polynomial's degree.

    Monomial ``Q`` is multiplied by ``10**((deg(poly) - deg(Q)) * sigma)`` so that
    every summand carries the same ``10**(deg(poly)*sigma)`` factor.
    """
    target = poly.degree
    coeffs, factors = [], []
    for mono in poly.monomials:
        fs = []
        mono_degree = 0
        for j, e in mono.x_exponents:
            try:
                ct = x_cts[j]
            except KeyError:
                raise MissingVariable(f"no ciphertext for state variable {j}") from None
            fs.append((ct.value, e))
            mono_degree += ct.degree * e
        for name, e in mono.y_exponents:
            try:
                ct = y_cts[name]
            except KeyError:
                raise MissingVariable(f"no ciphertext for coefficient {name!r}") from None
            fs.append((ct.value, e))
            mono_degree += ct.degree * e
        if mono_degree > target:
            raise DegreeMismatch(f"monomial reaches degree {mono_degree} above target {target}")
        coeffs.append(_literal_multiplier(mono.literal, (target - mono_degree) * sigma))
        factors.append(fs)
    return SingleModCiphertext(kernels.monomial_sum(coeffs, factors), target)


def decrypt(key: SingleModKey, ct: SingleModCiphertext, sigma: int) -> ScaledDecimal:
    """Reduce mod ``w`` and read the residue as a signed decimal with ``degree*sigma`` digits."""
    return t_transform(ct.value % key.w, ct.degree * sigma, key.w)
