import dataclasses
import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_affine_problem, random_polynomial_problem, states_feasible
from hegrad import golden, paillier, protocol, singlemod
from hegrad.errors import AuditViolation, KeyBoundViolated, NotAffine, ShapeMismatch, ValidationError
from hegrad.fixedpoint import ScaledDecimal
from hegrad.problem import SO


@pytest.fixture(scope="module")
def alg1_run():
    rng = random.Random(1)
    p = random_polynomial_problem(rng)
    while p.N < 3:
        p = random_polynomial_problem(rng)
    return protocol.run_algorithm1(p, singlemod.keygen(192, rng), 5, rng)


@pytest.fixture(scope="module")
def alg2_run():
    rng = random.Random(2)
    p = random_affine_problem(rng)
    while p.N < 3:
        p = random_affine_problem(rng)
    return protocol.run_algorithm2(p, [paillier.keygen(128, rng) for _ in range(p.N)], 5, rng)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**9))
def test_algorithm1_matches_plain(seed):
    rng = random.Random(seed)
    p = random_polynomial_problem(rng)
    run = protocol.run_algorithm1(p, singlemod.keygen(160, rng), 6, rng)
    assert protocol.compare_runs(run, protocol.run_plain(p, 6)).all_zero
    assert states_feasible(run)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**9))
def test_algorithm2_matches_plain(seed):
    rng = random.Random(seed)
    p = random_affine_problem(rng)
    keys = [paillier.keygen(96, rng) for _ in range(p.N)]
    run = protocol.run_algorithm2(p, keys, 6, rng)
    plain = protocol.run_plain(p, 6)
    assert protocol.compare_runs(run, plain).all_zero
    assert run.gradients == plain.gradients


def test_zero_iterations():
    p = random_polynomial_problem(random.Random(5))
    run = protocol.run_algorithm1(p, singlemod.keygen(128, random.Random(5)), 0, 5)
    assert run.K == 0 and run.trajectory == [p.initial_state()]
    assert protocol.transcript_audit(run).passed
    with pytest.raises(ValidationError):
        protocol.run_plain(p, -1)


def test_same_seed_same_transcript():
    p = random_polynomial_problem(random.Random(8))
    key = singlemod.keygen(128, random.Random(8))
    a = protocol.run_algorithm1(p, key, 4, random.Random(99))
    b = protocol.run_algorithm1(p, key, 4, random.Random(99))
    c = protocol.run_algorithm1(p, key, 4, random.Random(100))
    assert a.transcript.to_jsonl() == b.transcript.to_jsonl()
    assert a.transcript.to_jsonl() != c.transcript.to_jsonl() or not p.partition.owner
    assert a.trajectory == c.trajectory


def test_algorithm2_requires_affine():
    rng = random.Random(3)
    p = random_polynomial_problem(rng)
    while p.is_affine():
        p = random_polynomial_problem(rng)
    with pytest.raises(NotAffine):
        protocol.run_algorithm2(p, [paillier.keygen(64, rng) for _ in range(p.N)], 1)


def test_small_key_aborts_with_step():
    p = golden.private_problem()
    with pytest.raises(KeyBoundViolated) as info:
        protocol.run_algorithm1(p, singlemod.SingleModKey(1001), 2, 0)
    assert info.value.step == 0


def test_state_bound_precheck():
    p = dataclasses.replace(golden.private_problem(), state_bound=ScaledDecimal(10**6))
    with pytest.raises(KeyBoundViolated):
        protocol.run_algorithm1(p, singlemod.SingleModKey(golden.PRIVATE_W), 1, 0)


def test_golden_protocol_path_uses_scripted_nonces():
    run = protocol.run_algorithm1(golden.private_problem(), singlemod.SingleModKey(golden.PRIVATE_W), 1, golden.private_nonces())
    assert str(run.trajectory[1][0][0]) == "13.425213"
    with pytest.raises(ValidationError):
        golden.private_nonces().blinding(None, ("state", 1, 1, 0))


def test_golden_replay_detects_tampering(monkeypatch):
    assert len(golden.replay("alg1")) > 0

    def tampered():
        yield "evaluated", 1, 2

    monkeypatch.setitem(golden.EXAMPLES, "alg1", tampered)
    with pytest.raises(golden.GoldenMismatch):
        golden.replay("alg1")


def test_message_counts(alg1_run, alg2_run):
    for run, per_step in ((alg1_run, alg1_run.problem.N), (alg2_run, alg2_run.problem.N ** 2)):
        N = run.problem.N
        for k in range(run.K):
            kinds = [m.kind for m in run.transcript.messages if m.step == k]
            assert kinds.count("state_ct") == per_step and kinds.count("grad_ct") == N
    keys = [m for m in alg2_run.transcript.messages if m.kind == "public_key"]
    assert len(keys) == alg2_run.problem.N and "nu" not in json.dumps([m.payload for m in keys])


def test_agent_view_excludes_other_gradients(alg1_run):
    view = alg1_run.transcript.view(2)
    assert all(m.payload["agent"] == 2 for m in view if m.kind == "grad_ct")


def _tampered(run, mutate):
    msgs = list(run.transcript.messages)
    mutate(msgs)
    return dataclasses.replace(run, transcript=protocol.Transcript(msgs))


def test_audit_passes(alg1_run, alg2_run):
    assert protocol.transcript_audit(alg1_run).passed
    assert protocol.transcript_audit(alg2_run).passed


def test_audit_rejects_plaintext_to_operator(alg1_run):
    bad = _tampered(alg1_run, lambda m: m.append(protocol.Message(0, 1, SO, "plaintext", {"agent": 1})))
    with pytest.raises(AuditViolation):
        protocol.transcript_audit(bad)


def test_audit_rejects_misrouted_gradient(alg1_run):
    def reroute(msgs):
        i = next(n for n, m in enumerate(msgs) if m.kind == "grad_ct")
        msgs[i] = dataclasses.replace(msgs[i], receiver=msgs[i].receiver % alg1_run.problem.N + 1)

    with pytest.raises(AuditViolation):
        protocol.transcript_audit(_tampered(alg1_run, reroute))


def test_audit_rejects_duplicate_coefficient(alg1_run):
    coef = [m for m in alg1_run.transcript.messages if m.kind == "coef_ct"]
    if not coef:
        pytest.skip("instance has no agent-owned coefficients")
    with pytest.raises(AuditViolation):
        protocol.transcript_audit(_tampered(alg1_run, lambda m: m.append(coef[0])))


def test_audit_rejects_missing_round_message(alg2_run):
    def drop(msgs):
        i = next(n for n, m in enumerate(msgs) if m.kind == "state_ct" and m.step == 1)
        del msgs[i]

    with pytest.raises(AuditViolation):
        protocol.transcript_audit(_tampered(alg2_run, drop))


def test_compare_runs_shapes(alg1_run):
    short = protocol.run_plain(alg1_run.problem, 2)
    with pytest.raises(ShapeMismatch):
        protocol.compare_runs(alg1_run, short)
    report = protocol.compare_runs(alg1_run, alg1_run)
    assert report.all_zero and report.first_nonzero is None
    assert report.to_csv().startswith("step,squared_deviation,deviation\n0,0,0")


def test_outputs(alg1_run):
    rows = alg1_run.trajectory_csv().splitlines()
    assert rows[0] == "step,participant,coordinate,value"
    assert len(rows) == 1 + (alg1_run.K + 1) * alg1_run.problem.n
    assert json.loads(alg1_run.trajectory_json())["scheme"] == "alg1"
    summary = alg1_run.timing_summary()
    assert summary["samples"] == alg1_run.K * alg1_run.problem.N
    assert 0 <= summary["average"] <= summary["maximum"]
    assert alg1_run.timing_csv().splitlines()[0] == "step,agent,encrypt,eval,decrypt,update,total"
