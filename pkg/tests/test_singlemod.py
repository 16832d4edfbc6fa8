import random

import pytest
from hypothesis import given, settings, strategies as st

from hegrad import singlemod
from hegrad.errors import DegreeMismatch, EvenModulus, MissingVariable, PlaintextTooLarge, PrecisionExceeded
from hegrad.fixedpoint import ScaledDecimal
from hegrad.polynomial import Monomial, PolynomialFunction, eval_plain

D = ScaledDecimal.parse


def test_key_validation():
    with pytest.raises(EvenModulus):
        singlemod.SingleModKey(100)
    key = singlemod.keygen(64, random.Random(1))
    assert key.bit_length == 64 and key.w % 2 == 1
    assert singlemod.SingleModKey.from_json(key.to_json()) == key


def test_encrypt_decrypt_known_value():
    key = singlemod.SingleModKey(25400001)
    ct = singlemod.encrypt(key, 332, 103)
    assert ct.value == 2616200435
    assert singlemod.decrypt(key, ct, 2) == D("3.32")


def test_plaintext_bound():
    key = singlemod.SingleModKey(101)
    singlemod.encrypt(key, -50, 1)
    with pytest.raises(PlaintextTooLarge):
        singlemod.encrypt(key, 51, 1)


def test_degree_mismatch_on_add():
    a = singlemod.SingleModCiphertext(5, 1)
    with pytest.raises(DegreeMismatch):
        a + a * a


def test_key_bound_threshold():
    # |value| 12.5 at degree 2 with sigma 1 -> 1250; need w >= 2501
    assert singlemod.key_threshold(["12.5"], [2], 1) == 2501
    assert singlemod.check_key_bound(singlemod.SingleModKey(2501), ["12.5"], [2], 1)
    assert not singlemod.check_key_bound(singlemod.SingleModKey(2499), ["12.5"], [2], 1)


def test_missing_and_fractional_literal():
    x = PolynomialFunction.of(Monomial.make({0: 1}, literal="0.5"))
    with pytest.raises(MissingVariable):
        singlemod.eval_polynomial({}, {}, x, 2)
    ct = singlemod.encrypt(singlemod.SingleModKey(10**9 + 7), 100, 3)
    # degree-1 polynomial leaves no spare digits for a fractional literal
    with pytest.raises(PrecisionExceeded):
        singlemod.eval_polynomial({0: ct}, {}, x, 2)


values = st.builds(ScaledDecimal, st.integers(-999, 999), st.just(2))


@settings(max_examples=60, deadline=None)
@given(values, values, values, st.integers(1, 2**64), st.integers(1, 2**64), st.integers(1, 2**64))
def test_polynomial_evaluation_matches_plain(x0, x1, y, u0, u1, uy):
    sigma = 2
    key = singlemod.SingleModKey((1 << 127) | 1 | (12345 << 3))
    poly = PolynomialFunction.of(
        Monomial.make({0: 2, 1: 1}, literal=3),
        Monomial.make({1: 1}, {"c": 1}, literal=-2),
        Monomial.make({}, {"c": 1}),
        Monomial.make(literal=7),
    )
    x_cts = {0: singlemod.encrypt(key, x0.with_scale(2).mantissa, u0), 1: singlemod.encrypt(key, x1.with_scale(2).mantissa, u1)}
    y_cts = {"c": singlemod.encrypt(key, y.with_scale(2).mantissa, uy)}
    ct = singlemod.eval_polynomial(x_cts, y_cts, poly, sigma)
    assert ct.degree == 3
    assert singlemod.decrypt(key, ct, sigma) == eval_plain(poly, [x0, x1], {"c": y})


@given(st.integers(-(10**12), 10**12), st.integers(1, 2**80))
def test_roundtrip_with_operator_constant(z, u):
    key = singlemod.SingleModKey(2**61 - 1)
    summed = singlemod.encrypt(key, z, u) + singlemod.plain_constant(-z)
    assert singlemod.decrypt(key, summed, 0) == 0
