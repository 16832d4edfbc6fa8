from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hegrad.errors import BoundViolated, EvenModulus, OutOfRange, PrecisionExceeded, ValidationError
from hegrad.fixedpoint import FixedPointCodec, ScaledDecimal, decode, encode, quantize, roundtrip, t_transform

D = ScaledDecimal.parse


def test_parse_and_str():
    assert str(D("-12.665213")) == "-12.665213"
    assert D("−0.5") == ScaledDecimal(-5, 1)  # unicode minus
    assert D(".25") == ScaledDecimal(25, 2)
    with pytest.raises(ValidationError):
        D("1e5")


def test_equality_ignores_trailing_zeros():
    assert ScaledDecimal(120, 2) == ScaledDecimal(12, 1)
    assert hash(ScaledDecimal(120, 2)) == hash(ScaledDecimal(12, 1))


def test_from_fraction_rejects_non_terminating():
    assert ScaledDecimal.from_fraction(Fraction(3, 8)) == D("0.375")
    with pytest.raises(ValidationError):
        ScaledDecimal.from_fraction(Fraction(1, 3))


def test_encode_refuses_silent_rounding():
    assert encode("3.32", 2) == 332
    assert encode(-1, 3) == -1000
    with pytest.raises(PrecisionExceeded):
        encode("0.125", 2)


def test_t_transform_halves():
    assert t_transform(3, 0, 7) == 3
    assert t_transform(4, 0, 7) == -3
    assert t_transform(12734788, 6, 25400001) == D("-12.665213")
    with pytest.raises(EvenModulus):
        t_transform(1, 0, 8)
    with pytest.raises(OutOfRange):
        t_transform(7, 0, 7)


def test_roundtrip_bound_is_enforced():
    assert roundtrip("0.3", 1, 7) == D("0.3")
    with pytest.raises(BoundViolated):
        roundtrip("0.4", 1, 7)


def test_quantize_modes():
    assert quantize("1.235", 2) == D("1.24")
    assert quantize("-1.235", 2) == D("-1.24")
    assert quantize("-1.239", 2, "truncate") == D("-1.23")
    with pytest.raises(ValidationError):
        quantize("1", 2, "banker")


def test_codec():
    codec = FixedPointCodec(2)
    assert codec.decode(codec.encode("4.67")) == D("4.67")
    assert codec.t_transform(10, 21, degree=2) == D("0.0010")
    assert codec.t_transform(11, 21, degree=2) == D("-0.0010")
    with pytest.raises(ValidationError):
        FixedPointCodec(-1)


decimals = st.builds(ScaledDecimal, st.integers(-10**30, 10**30), st.integers(0, 12))


@given(decimals, decimals)
def test_arithmetic_matches_fractions(a, b):
    assert (a + b).to_fraction() == a.to_fraction() + b.to_fraction()
    assert (a - b).to_fraction() == a.to_fraction() - b.to_fraction()
    assert (a * b).to_fraction() == a.to_fraction() * b.to_fraction()
    assert (a < b) == (a.to_fraction() < b.to_fraction())


@given(st.integers(-10**40, 10**40), st.integers(0, 10))
def test_encode_decode_inverse(z, s):
    assert encode(decode(z, s), s) == z


@given(st.integers(1, 2**200), st.integers(0, 10), st.data())
def test_roundtrip_is_identity_within_bound(half, s, data):
    m = 2 * half + 1
    r = ScaledDecimal(data.draw(st.integers(-half, half)), s)
    assert roundtrip(r, s, m) == r


@given(decimals, st.integers(0, 8), st.sampled_from(["half_away", "truncate"]))
def test_quantize_error_is_bounded(r, sigma, mode):
    q = quantize(r, sigma, mode)
    err = abs(q.to_fraction() - r.to_fraction())
    ulp = Fraction(1, 10**sigma)
    assert err <= (ulp / 2 if mode == "half_away" else ulp)
    if mode == "truncate":
        assert abs(q.to_fraction()) <= abs(r.to_fraction())
