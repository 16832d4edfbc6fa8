import json
import random

import pytest
from hypothesis import given, strategies as st

from conftest import random_affine_problem, random_polynomial_problem
from hegrad.errors import DimensionMismatch, NotAffine, UnownedCoefficient, ValidationError
from hegrad.fixedpoint import ScaledDecimal
from hegrad.polynomial import Monomial, PolynomialFunction, const, eval_plain, to_affine, xvar, yvar
from hegrad.problem import (
    SO,
    AllReals,
    Box,
    NonNegativeOrthant,
    ProblemInstance,
    StepSchedule,
    build_partition,
    dump_problem,
    gradient_update,
    load_problem,
)

D = ScaledDecimal.parse


def test_polynomial_canonical_form():
    p = xvar(0) * xvar(1) + xvar(1) * xvar(0) - xvar(0) * xvar(1).scaled(2)
    assert p.monomials == ()
    q = (xvar(0) + const(1)) * (xvar(0) - const(1))
    assert q == xvar(0) * xvar(0) - const(1)
    assert q.degree == 2 and q.x_vars() == {0}


def test_polynomial_json_roundtrip():
    p = xvar(2) * yvar("c1").scaled("0.5") + const(-3)
    assert PolynomialFunction.from_json(json.loads(json.dumps(p.to_json()))) == p


def test_eval_plain_and_dimension_check():
    p = xvar(0) * yvar("c") + const(2)
    assert eval_plain(p, [D("1.5")], {"c": D("-2")}) == D("-1")
    with pytest.raises(DimensionMismatch):
        eval_plain(xvar(3), [1], {})


def test_to_affine_substitutes_coefficients():
    p = xvar(0) * yvar("c").scaled(2) + yvar("c") * yvar("d") + xvar(2)
    A, B = to_affine(p, 3, {"c": D("0.5"), "d": D("4")})
    assert A == [1, 0, 1] and B == 2
    with pytest.raises(NotAffine):
        to_affine(xvar(0) * xvar(1), 2)


def test_feasible_sets():
    box = Box((D("0"), None), (D("1"), D("2")))
    assert box.project([D("-1"), D("5")]) == [0, 2]
    assert box.project([D("0.5"), D("-9")]) == [D("0.5"), D("-9")]
    assert NonNegativeOrthant(2).project([D("-1"), D("3")]) == [0, 3]
    assert AllReals(1).contains([D("-100")])
    assert box.shifted([1, -1]).contains([D("2"), D("1")])


def test_gradient_update_exact():
    new = gradient_update([D("1")], D("0.1"), [D("2.5")], AllReals(1))
    assert new == [D("0.75")]
    with pytest.raises(ValidationError):
        gradient_update([D("1")], D("0"), [D("1")], AllReals(1))


def test_partition_lowest_holder_and_operator_rule():
    part = build_partition({"a": (2, 1), "b": (0, 3), "c": (3,)})
    assert part.owner == {"a": 1, "b": SO, "c": 3}
    assert part.owned_by(3) == ["c"]
    with pytest.raises(UnownedCoefficient):
        build_partition({"z": ()})


def test_step_schedule():
    assert StepSchedule(constant=D("0.1"))(99) == D("0.1")
    table = StepSchedule(table=(D("1"), D("0.5")))
    assert table(1) == D("0.5")
    with pytest.raises(ValidationError):
        table(2)
    with pytest.raises(ValidationError):
        StepSchedule()


def test_encode_state_truncates_toward_zero():
    p = random_polynomial_problem(random.Random(0))
    out = p.encode_state([D("-1.23456789"), D("1.99999999")])
    s = p.sigma
    assert out[0] == ScaledDecimal(-int("123456789"[: s + 1]), s)
    assert out[1] == ScaledDecimal(int("199999999"[: s + 1]), s)


def test_validation_errors():
    good = random_polynomial_problem(random.Random(1)).to_json()
    bad = json.loads(json.dumps(good))
    bad["agents"][0]["id"] = 5
    with pytest.raises(ValidationError):
        ProblemInstance.from_json(bad)
    bad = json.loads(json.dumps(good))
    bad["schema"] = "other"
    with pytest.raises(ValidationError):
        ProblemInstance.from_json(bad)
    bad = json.loads(json.dumps(good))
    bad["agents"][0]["gradients"].append({"monomials": []})
    with pytest.raises(DimensionMismatch):
        ProblemInstance.from_json(bad)


@given(st.integers(0, 10**6), st.booleans())
def test_problem_json_roundtrip(seed, affine):
    rng = random.Random(seed)
    p = random_affine_problem(rng) if affine else random_polynomial_problem(rng)
    again = ProblemInstance.from_json(json.loads(json.dumps(p.to_json())))
    assert again.to_json() == p.to_json()
    assert again.is_affine() == p.is_affine()
    if affine:
        assert p.is_affine()


def test_problem_file_roundtrip(tmp_path):
    p = random_polynomial_problem(random.Random(3))
    dump_problem(p, tmp_path / "p.json")
    assert load_problem(tmp_path / "p.json").to_json() == p.to_json()
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ValidationError):
        load_problem(tmp_path / "bad.json")


def test_monomial_rejects_negative_exponent():
    with pytest.raises(ValidationError):
        Monomial.make({0: -1})
