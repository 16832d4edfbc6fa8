"""Exact decimal arithmetic and the integer <-> signed decimal transforms.

Every real number in hegrad is a :class:`ScaledDecimal`: an integer
mantissa over a power of ten. Nothing on the numeric path touches binary
floating point, so plain and encrypted runs can be compared for exact
equality.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import total_ordering

from .errors import BoundViolated, EvenModulus, OutOfRange, PrecisionExceeded, ValidationError

__all__ = [
    "ScaledDecimal",
    "FixedPointCodec",
    "encode",
    "decode",
    "t_transform",
    "roundtrip",
    "quantize",
    "to_decimal",
]

_DECIMAL_RE = re.compile(r"^\s*([+-]?)(\d*)(?:\.(\d*))?\s*$")


@total_ordering
class ScaledDecimal:
    """The exact value ``mantissa / 10**scale``.

    Arithmetic keeps the scale that falls out of the operation (sums take
    the larger scale, products add scales), so ``str`` shows the digits a
    computation actually produced. Equality and hashing use the reduced
    form, i.e. ``ScaledDecimal(120, 2) == ScaledDecimal(12, 1)``.
    """

    __slots__ = ("mantissa", "scale")

    def __init__(self, mantissa: int, scale: int = 0):
        if not isinstance(mantissa, int) or isinstance(mantissa, bool):
            raise TypeError(f"mantissa must be int, got {type(mantissa).__name__}")
        if scale < 0:
            raise ValidationError("scale must be non-negative")
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "scale", int(scale))

    def __setattr__(self, name, value):
        raise AttributeError("ScaledDecimal is immutable")

    # construction -----------------------------------------------------
    @classmethod
    def parse(cls, text: str) -> "ScaledDecimal":
        """Parse a plain decimal string such as ``"-12.665213"``."""
        m = _DECIMAL_RE.match(text.replace("−", "-"))
        if m is None or (m.group(2) == "" and not m.group(3)):
            raise ValidationError(f"not a decimal number: {text!r}")
        sign, whole, frac = m.group(1), m.group(2) or "0", m.group(3) or ""
        mantissa = int(whole + frac)
        return cls(-mantissa if sign == "-" else mantissa, len(frac))

    @classmethod
    def coerce(cls, value) -> "ScaledDecimal":
        if isinstance(value, ScaledDecimal):
            return value
        if isinstance(value, bool):
            raise TypeError("bool is not a number here")
        if isinstance(value, int):
            return cls(value, 0)
        if isinstance(value, str):
            return cls.parse(value)
        if isinstance(value, Fraction):
            return cls.from_fraction(value)
        raise TypeError(f"cannot convert {type(value).__name__} to ScaledDecimal")

    @classmethod
    def from_fraction(cls, value: Fraction) -> "ScaledDecimal":
        """Exact conversion; fails when the denominator has prime factors other than 2 and 5."""
        den = value.denominator
        twos = fives = 0
        while den % 2 == 0:
            den //= 2
            twos += 1
        while den % 5 == 0:
            den //= 5
            fives += 1
        if den != 1:
            raise ValidationError(f"{value} has no finite decimal expansion")
        scale = max(twos, fives)
        return cls(value.numerator * 10**scale // value.denominator, scale)

    # views -------------------------------------------------------------
    def reduced(self) -> "ScaledDecimal":
        m, s = self.mantissa, self.scale
        if m == 0:
            return ScaledDecimal(0, 0)
        while s > 0 and m % 10 == 0:
            m //= 10
            s -= 1
        return ScaledDecimal(m, s)

    @property
    def digits(self) -> int:
        """Number of significant fraction digits."""
        return self.reduced().scale

    def with_scale(self, scale: int) -> "ScaledDecimal":
        """Same value written with ``scale`` fraction digits (never rounds)."""
        if scale >= self.scale:
            return ScaledDecimal(self.mantissa * 10 ** (scale - self.scale), scale)
        r = self.reduced()
        if r.scale > scale:
            raise PrecisionExceeded(f"{self} has more than {scale} fraction digits")
        return ScaledDecimal(r.mantissa * 10 ** (scale - r.scale), scale)

    def to_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 10**self.scale)

    def is_integer(self) -> bool:
        return self.mantissa % 10**self.scale == 0

    # arithmetic ----------------------------------------------------------
    def _align(self, other):
        other = ScaledDecimal.coerce(other)
        s = max(self.scale, other.scale)
        return (
            self.mantissa * 10 ** (s - self.scale),
            other.mantissa * 10 ** (s - other.scale),
            s,
        )

    def __add__(self, other):
        try:
            a, b, s = self._align(other)
        except TypeError:
            return NotImplemented
        return ScaledDecimal(a + b, s)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            a, b, s = self._align(other)
        except TypeError:
            return NotImplemented
        return ScaledDecimal(a - b, s)

    def __rsub__(self, other):
        try:
            a, b, s = self._align(other)
        except TypeError:
            return NotImplemented
        return ScaledDecimal(b - a, s)

    def __mul__(self, other):
        try:
            other = ScaledDecimal.coerce(other)
        except TypeError:
            return NotImplemented
        return ScaledDecimal(self.mantissa * other.mantissa, self.scale + other.scale)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        return ScaledDecimal(self.mantissa**exponent, self.scale * exponent)

    def __neg__(self):
        return ScaledDecimal(-self.mantissa, self.scale)

    def __pos__(self):
        return self

    def __abs__(self):
        return ScaledDecimal(abs(self.mantissa), self.scale)

    # comparison ----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (ScaledDecimal, int)) and not isinstance(other, bool):
            a, b, _ = self._align(other)
            return a == b
        if isinstance(other, Fraction):
            return self.to_fraction() == other
        return NotImplemented

    def __lt__(self, other):
        try:
            a, b, _ = self._align(other)
        except TypeError:
            return NotImplemented
        return a < b

    def __hash__(self):
        r = self.reduced()
        return hash((r.mantissa, r.scale))

    def __bool__(self):
        return self.mantissa != 0

    # printing --------------------------------------------------------------
    def __str__(self):
        sign = "-" if self.mantissa < 0 else ""
        digits = str(abs(self.mantissa))
        if self.scale == 0:
            return sign + digits
        digits = digits.rjust(self.scale + 1, "0")
        return f"{sign}{digits[:-self.scale]}.{digits[-self.scale:]}"

    def __repr__(self):
        return f"ScaledDecimal('{self}')"

    def __float__(self):
        # display only; never used on the numeric path
        return self.mantissa / 10**self.scale


def to_decimal(value) -> ScaledDecimal:
    return ScaledDecimal.coerce(value)


def encode(r, sigma: int) -> int:
    """Return ``10**sigma * r`` as an integer.

    Raises PrecisionExceeded if ``r`` carries more than ``sigma`` fraction
    digits; use :func:`quantize` first to opt into rounding.
    """
    if sigma < 0:
        raise ValidationError("sigma must be non-negative")
    r = ScaledDecimal.coerce(r)
    return r.with_scale(sigma).mantissa


def decode(z: int, sigma: int) -> ScaledDecimal:
    return ScaledDecimal(z, sigma)


def _check_modulus(m: int) -> None:
    if m <= 0:
        raise OutOfRange(f"modulus must be positive, got {m}")
    if m % 2 == 0:
        raise EvenModulus(f"modulus must be odd, got {m}")


def t_transform(z: int, s: int, m: int) -> ScaledDecimal:
    """Map a residue ``z`` in ``[0, m)`` to a signed decimal with ``s`` fraction digits.

    Residues up to ``(m-1)/2`` are read as non-negative, the upper half as
    ``z - m``.
    """
    _check_modulus(m)
    if not 0 <= z < m:
        raise OutOfRange(f"residue {z} outside [0, {m})")
    if z <= (m - 1) // 2:
        return ScaledDecimal(z, s)
    return ScaledDecimal(z - m, s)


def roundtrip(r, s: int, m: int) -> ScaledDecimal:
    """``t_transform((10**s * r) mod m, s, m)``; identity whenever ``|10**s r| <= (m-1)/2``."""
    _check_modulus(m)
    z = encode(r, s)
    if abs(z) > (m - 1) // 2:
        raise BoundViolated(f"|10^{s} r| = {abs(z)} exceeds (m-1)/2 = {(m - 1) // 2}")
    return t_transform(z % m, s, m)


def quantize(r, sigma: int, mode: str = "half_away") -> ScaledDecimal:
    """Round ``r`` to ``sigma`` fraction digits.

    ``mode`` is ``"half_away"`` (round half away from zero) or
    ``"truncate"`` (drop the extra digits, rounding toward zero).
    """
    if mode not in ("half_away", "truncate"):
        raise ValidationError(f"unknown rounding mode {mode!r}")
    r = ScaledDecimal.coerce(r)
    if r.scale <= sigma:
        return r.with_scale(sigma)
    drop = 10 ** (r.scale - sigma)
    q, rem = divmod(abs(r.mantissa), drop)
    if mode == "half_away" and 2 * rem >= drop:
        q += 1
    return ScaledDecimal(-q if r.mantissa < 0 else q, sigma)


class FixedPointCodec:
    """Bundles the shared precision parameter ``sigma`` with the transforms."""

    def __init__(self, sigma: int):
        if not isinstance(sigma, int) or sigma < 0:
            raise ValidationError(f"sigma must be a natural number, got {sigma!r}")
        self.sigma = sigma

    def encode(self, r) -> int:
        return encode(r, self.sigma)

    def decode(self, z: int) -> ScaledDecimal:
        return decode(z, self.sigma)

    def t_transform(self, z: int, m: int, degree: int = 1) -> ScaledDecimal:
        return t_transform(z, degree * self.sigma, m)

    def quantize(self, r, mode: str = "half_away") -> ScaledDecimal:
        return quantize(r, self.sigma, mode)

    def __eq__(self, other):
        return isinstance(other, FixedPointCodec) and other.sigma == self.sigma

    def __hash__(self):
        return hash(("FixedPointCodec", self.sigma))

    def __repr__(self):
        return f"FixedPointCodec(sigma={self.sigma})"
