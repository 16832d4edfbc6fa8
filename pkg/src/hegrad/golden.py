"""Embedded two-agent worked examples replayed step by step with fixed randomness.

Each replay yields ``(label, expected, actual)`` triples; :func:`replay`
checks them in order and stops at the first mismatch.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import paillier, singlemod
from .fixedpoint import ScaledDecimal, encode, t_transform
from .polynomial import Monomial, PolynomialFunction, const, xvar
from .problem import (
    SO,
    AgentSpec,
    AllReals,
    Coefficient,
    CoefficientPartition,
    ProblemInstance,
    StepSchedule,
    gradient_update,
)
from .protocol import ScriptedNonces, run_algorithm1, run_algorithm2, run_plain

D = ScaledDecimal.parse


class GoldenMismatch(AssertionError):
    def __init__(self, label, expected, actual):
        super().__init__(f"{label}: expected {expected}, got {actual}")
        self.label = label
        self.expected = expected
        self.actual = actual


# private-key example -------------------------------------------------------------
PRIVATE_W = 25400001
PRIVATE_COEFFS = {"c1": "3.32", "c2": "-1.53", "c3": "4.67", "c4": "-0.28", "c5": "2.42"}
PRIVATE_OWNERS = {"c1": (1,), "c2": (2,), "c3": (1, 2), "c4": (1,), "c5": (SO,)}
PRIVATE_U = {"c1": 103, "c3": 307, "c4": 205, "c2": 501}
PRIVATE_STATE_U = {1: 107, 2: 409}


def private_problem() -> ProblemInstance:
    """``c1 x1^2 + c2 x2^2 + c3 x1 x2 + c4 x1 + c5`` for agent 1; agent 2's gradient is zero."""
    phi1 = PolynomialFunction.of(
        Monomial.make(x={0: 2}, y={"c1": 1}),
        Monomial.make(x={1: 2}, y={"c2": 1}),
        Monomial.make(x={0: 1, 1: 1}, y={"c3": 1}),
        Monomial.make(x={0: 1}, y={"c4": 1}),
        Monomial.make(y={"c5": 1}),
    )
    return ProblemInstance(
        sigma=2,
        agents=(
            AgentSpec(1, (D("0.76"),), AllReals(1), (phi1,)),
            AgentSpec(2, (D("-2.35"),), AllReals(1), (PolynomialFunction(),)),
        ),
        coefficients=tuple(Coefficient(c, D(v), PRIVATE_OWNERS[c]) for c, v in PRIVATE_COEFFS.items()),
        gamma=StepSchedule(constant=ScaledDecimal(1)),
        partition=CoefficientPartition({"c1": 1, "c3": 1, "c4": 1, "c2": 2, "c5": SO}),
        name="private-key worked example",
    )


def private_nonces() -> ScriptedNonces:
    blinding = {("coef", c): u for c, u in PRIVATE_U.items()}
    blinding.update({("state", 0, i, 0): u for i, u in PRIVATE_STATE_U.items()})
    return ScriptedNonces(blinding=blinding)


def replay_private():
    problem = private_problem()
    sigma = problem.sigma
    key = singlemod.SingleModKey(PRIVATE_W)
    values = problem.coefficient_values
    x0 = problem.stack(problem.initial_state())
    phi1 = problem.agents[0].gradients[0]

    phi1_value = sum((m.evaluate(x0, values) for m in phi1.monomials), ScaledDecimal(0))
    threshold = singlemod.key_threshold([abs(phi1_value)], [phi1.degree], sigma)
    yield "key threshold", 25330427, int(threshold.to_fraction())
    y = {}
    for cid, expected in (("c1", 2616200435), ("c3", 7797800774), ("c4", 5207000177), ("c2", 12725400348)):
        y[cid] = singlemod.encrypt(key, encode(values[cid], sigma), PRIVATE_U[cid])
        yield f"ciphertext of {cid}", expected, y[cid].value
    y["c5"] = singlemod.plain_constant(encode(values["c5"], sigma))
    yield "operator constant c5", 242, y["c5"].value
    x = {}
    for i, expected in ((1, 2717800183), (2, 10388600174)):
        x[i - 1] = singlemod.encrypt(key, encode(x0[i - 1], sigma), PRIVATE_STATE_U[i])
        yield f"state ciphertext x{i}(0)", expected, x[i - 1].value
    result = singlemod.eval_polynomial(x, y, phi1, sigma)
    yield "evaluated ciphertext", 1612852152286627752945361608571, result.value
    yield "residue mod w", 12734788, result.value % key.w
    phi_hat = singlemod.decrypt(key, result, sigma)
    yield "decrypted gradient", D("-12.665213"), phi_hat
    yield "plain gradient", D("-12.665213"), phi1_value
    x1_next = gradient_update([x0[0]], ScaledDecimal(1), [phi_hat], AllReals(1))[0]
    yield "updated x1(1)", D("13.425213"), x1_next

    run = run_algorithm1(problem, key, 1, private_nonces())
    yield "protocol run x1(1)", D("13.425213"), run.trajectory[1][0][0]
    yield "plain run x1(1)", D("13.425213"), run_plain(problem, 1).trajectory[1][0][0]


# public-key example ---------------------------------------------------------------
PUBLIC_P, PUBLIC_Q = 733, 523
PUBLIC_R = {1: 196827, 2: 199762}
# agent 2 is a bystander in the example; its small key only completes the run
BYSTANDER_P, BYSTANDER_Q = 5, 7


def public_problem() -> ProblemInstance:
    phi1 = xvar(0).scaled(D("2.45")) + xvar(1).scaled(D("-3.03")) + const(D("5.22"))
    return ProblemInstance(
        sigma=2,
        agents=(
            AgentSpec(1, (D("1.36"),), AllReals(1), (phi1,)),
            AgentSpec(2, (D("-1.42"),), AllReals(1), (PolynomialFunction(),)),
        ),
        coefficients=(),
        gamma=StepSchedule(constant=ScaledDecimal(1)),
        name="public-key worked example",
    )


def public_nonces() -> ScriptedNonces:
    rs = {("state", 0, i, 0, 1): r for i, r in PUBLIC_R.items()}
    rs.update({("state", 0, i, 0, 2): 2 for i in (1, 2)})
    return ScriptedNonces(randomizers=rs)


def replay_public():
    problem = public_problem()
    sigma = problem.sigma
    x0 = problem.stack(problem.initial_state())
    (A, B), = problem.affine_form()[0]
    yield "affine weights", ("2.45", "-3.03", "5.22"), tuple(str(v) for v in (A[0], A[1], B))

    kp = paillier.PaillierKeypair.from_primes(PUBLIC_P, PUBLIC_Q)
    yield "alpha", 383359, kp.alpha
    yield "nu", 63684, kp.nu
    yield "beta", 383360, kp.beta
    yield "pi", 198247, kp.pi
    value = A[0] * x0[0] + A[1] * x0[1] + B
    threshold = 1 + 2 * 10 ** (2 * sigma) * abs(value)
    yield "key threshold", 257093, int(threshold.to_fraction())

    pub = kp.public
    pts = [encode(v, sigma) % pub.alpha for v in x0]
    yield "plaintext of x2(0)", 383217, pts[1]
    cts = {}
    for i, expected in ((1, 38891374903), (2, 112847502000)):
        cts[i - 1] = paillier.encrypt(pub, pts[i - 1], PUBLIC_R[i])
        yield f"state ciphertext x{i}(0)", expected, cts[i - 1].value
    result = paillier.eval_affine(pub, cts, A, B, sigma)
    yield "evaluated ciphertext", 125129165734, result.value
    residue = paillier.decrypt(kp, result)
    yield "decrypted residue", 128546, residue
    phi_hat = t_transform(residue, 2 * sigma, kp.alpha)
    yield "decrypted gradient", D("12.8546"), phi_hat
    x1_next = gradient_update([x0[0]], ScaledDecimal(1), [phi_hat], AllReals(1))[0]
    yield "updated x1(1)", D("-11.4946"), x1_next

    bystander = paillier.PaillierKeypair.from_primes(BYSTANDER_P, BYSTANDER_Q)
    run = run_algorithm2(problem, [kp, bystander], 1, public_nonces())
    yield "protocol run x1(1)", D("-11.4946"), run.trajectory[1][0][0]


EXAMPLES = {"alg1": replay_private, "alg2": replay_public}


@dataclass
class GoldenStep:
    label: str
    expected: object
    actual: object

    def __str__(self):
        return f"{self.label:<28} {self.actual}"


def replay(which: str, trace=None) -> list:
    """Run one worked example; raise GoldenMismatch at the first differing value."""
    try:
        steps = EXAMPLES[which]
    except KeyError:
        raise ValueError(f"unknown example {which!r}; choose from {sorted(EXAMPLES)}") from None
    done = []
    for label, expected, actual in steps():
        step = GoldenStep(label, expected, actual)
        if trace is not None:
            trace(str(step))
        if expected != actual:
            raise GoldenMismatch(label, expected, actual)
        done.append(step)
    return done
