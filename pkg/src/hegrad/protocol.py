"""In-process simulation of the encrypted projected-gradient protocols.

Every round runs in lockstep: all agents encrypt, the operator evaluates,
then all agents decrypt and update. Messages go over a star-shaped bus to
and from the operator (participant ``0``) and land in a single ordered
:class:`Transcript`. The operator is modelled as an eavesdropper on every
link, so its view is the whole transcript.
"""
from __future__ import annotations

import csv
import io
import json
import math
import random
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import paillier, singlemod
from .errors import AuditViolation, KeyBoundViolated, NotAffine, ShapeMismatch, ValidationError
from .fixedpoint import ScaledDecimal, encode, t_transform
from .polynomial import Monomial
from .problem import SO, ProblemInstance, gradient_update, gradient_values

BROADCAST = -1
SETUP_STEP = -1

PHASES = ("encrypt", "eval", "decrypt", "update")


# randomness ------------------------------------------------------------------
class RandomNonces:
    """Draws blinding factors and randomizers from a seeded ``random.Random``."""

    def __init__(self, rng: random.Random | int | None = None, u_bits: int | None = None):
        if rng is None or isinstance(rng, int):
            rng = random.Random(rng)
        self.rng = rng
        self.u_bits = u_bits

    def blinding(self, key: singlemod.SingleModKey, purpose: tuple) -> int:
        return singlemod.draw_blinding(self.rng, self.u_bits or key.bit_length)

    def randomizer(self, pub: paillier.PaillierPublicKey, purpose: tuple) -> int:
        return paillier.draw_randomizer(pub, self.rng)


class ScriptedNonces:
    """Replays fixed nonces keyed by purpose.

    Purposes are ``("coef", coefficient_id)``, ``("state", k, agent, coord)``
    for the private-key scheme and ``("state", k, agent, coord, key_owner)``
    for the public-key scheme.
    """

    def __init__(self, blinding: Mapping | None = None, randomizers: Mapping | None = None):
        self._blinding = dict(blinding or {})
        self._randomizers = dict(randomizers or {})

    def blinding(self, key, purpose):
        try:
            return self._blinding[purpose]
        except KeyError:
            raise ValidationError(f"no scripted blinding factor for {purpose}") from None

    def randomizer(self, pub, purpose):
        try:
            return self._randomizers[purpose]
        except KeyError:
            raise ValidationError(f"no scripted randomizer for {purpose}") from None


def _nonces(rng, u_bits=None):
    if hasattr(rng, "blinding") and hasattr(rng, "randomizer"):
        return rng
    return RandomNonces(rng, u_bits)


# transcript --------------------------------------------------------------------
@dataclass(frozen=True)
class Message:
    step: int
    sender: int
    receiver: int
    kind: str
    payload: Mapping

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "sender": self.sender,
            "receiver": self.receiver,
            "kind": self.kind,
            "payload": self.payload,
        }


@dataclass
class Transcript:
    messages: list = field(default_factory=list)

    def send(self, step, sender, receiver, kind, payload) -> Message:
        msg = Message(step, sender, receiver, kind, payload)
        self.messages.append(msg)
        return msg

    def view(self, participant: int) -> list:
        """Messages visible to ``participant`` (the operator sees every link)."""
        if participant == SO:
            return list(self.messages)
        return [
            m
            for m in self.messages
            if m.receiver in (participant, BROADCAST) or m.sender == participant
        ]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(m.to_json(), sort_keys=True) + "\n" for m in self.messages)


# results -------------------------------------------------------------------------
@dataclass
class RunResult:
    scheme: str
    trajectory: list  # [k][agent][coord] -> ScaledDecimal, k = 0..K
    gradients: list  # [k][agent][coord] -> ScaledDecimal, k = 0..K-1
    transcript: Transcript
    timings: list = field(default_factory=list)  # dicts: step, agent, encrypt, eval, decrypt, update
    setup_seconds: float = 0.0
    problem: ProblemInstance | None = field(default=None, repr=False)

    @property
    def K(self) -> int:
        return len(self.trajectory) - 1

    def stacked(self, k: int) -> list:
        return [v for s in self.trajectory[k] for v in s]

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "participant", "coordinate", "value"])
        for k, states in enumerate(self.trajectory):
            for i, state in enumerate(states, start=1):
                for ell, v in enumerate(state):
                    w.writerow([k, i, ell, str(v)])
        return buf.getvalue()

    def trajectory_json(self) -> str:
        data = [[[str(v) for v in s] for s in states] for states in self.trajectory]
        return json.dumps({"scheme": self.scheme, "trajectory": data}, indent=1) + "\n"

    def timing_summary(self) -> dict:
        """Average and maximum seconds per iteration per agent, over all phases."""
        totals = [sum(t[p] for p in PHASES) for t in self.timings]
        if not totals:
            return {"average": 0.0, "maximum": 0.0, "samples": 0}
        return {"average": sum(totals) / len(totals), "maximum": max(totals), "samples": len(totals)}

    def timing_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "agent", *PHASES, "total"])
        for t in self.timings:
            w.writerow([t["step"], t["agent"], *(f"{t[p]:.6f}" for p in PHASES), f"{sum(t[p] for p in PHASES):.6f}"])
        return buf.getvalue()


def _new_timing(k, i):
    return {"step": k, "agent": i, "encrypt": 0.0, "eval": 0.0, "decrypt": 0.0, "update": 0.0}


# key-bound guards ------------------------------------------------------------------
def _monomial_bound(mono: Monomial, coeffs, state_bound: ScaledDecimal) -> ScaledDecimal:
    value = abs(mono.literal)
    for name, e in mono.y_exponents:
        value = value * abs(coeffs[name]) ** e
    return value * state_bound ** mono.x_degree


def gradient_bounds(problem: ProblemInstance, state_bound) -> list:
    """Worst-case ``|Phi_il|`` over states with every coordinate at most ``state_bound`` in magnitude."""
    state_bound = ScaledDecimal.coerce(state_bound)
    c = problem.coefficient_values
    out = []
    for a in problem.agents:
        for p in a.gradients:
            total = ScaledDecimal(0)
            for m in p.monomials:
                total = total + _monomial_bound(m, c, state_bound)
            out.append(total)
    return out


def _check_state_bound(problem, x_sent, k):
    if problem.state_bound is not None:
        worst = max((abs(v) for v in x_sent), default=ScaledDecimal(0))
        if worst > problem.state_bound:
            raise KeyBoundViolated(
                f"step {k}: state magnitude {worst} exceeds configured bound {problem.state_bound}", step=k
            )


def _check_plaintexts(key: singlemod.SingleModKey, values, sigma: int, step: int) -> None:
    limit = (key.w - 1) // 2
    worst = max((abs(encode(v, sigma)) for v in values), default=0)
    if worst > limit:
        where = "setup" if step == SETUP_STEP else f"step {step}"
        raise KeyBoundViolated(f"{where}: plaintext {worst} exceeds (w-1)/2 = {limit}", step=step)


def precheck_singlemod(problem: ProblemInstance, key: singlemod.SingleModKey) -> None:
    if problem.state_bound is None:
        return
    bounds = gradient_bounds(problem, problem.state_bound)
    degrees = [p.degree for a in problem.agents for p in a.gradients]
    if not singlemod.check_key_bound(key, bounds, degrees, problem.sigma):
        need = singlemod.key_threshold(bounds, degrees, problem.sigma)
        raise KeyBoundViolated(f"key w={key.w} below worst-case threshold {need}")


def precheck_paillier(problem: ProblemInstance, keypairs) -> None:
    if problem.state_bound is None:
        return
    forms = problem.affine_form()
    for a, kp in zip(problem.agents, keypairs):
        rows = [A for A, _ in forms[a.id - 1]]
        consts = [B for _, B in forms[a.id - 1]]
        if rows and not paillier.check_key_bound(kp.alpha, rows, consts, problem.state_bound, problem.sigma):
            raise KeyBoundViolated(f"agent {a.id}: modulus too small for the configured state bound")


# plain baseline ----------------------------------------------------------------------
def run_plain(problem: ProblemInstance, K: int) -> RunResult:
    """Iterate the projected-gradient update with no encryption.

    Gradients are evaluated at the same sigma-truncated state the encrypted
    protocols transmit, so trajectories are directly comparable.
    """
    if K < 0:
        raise ValidationError("K must be non-negative")
    states = problem.initial_state()
    traj = [[list(s) for s in states]]
    grads = []
    timings = []
    for k in range(K):
        t0 = time.perf_counter()
        phis = gradient_values(problem, problem.encode_state(problem.stack(states)))
        t_eval = (time.perf_counter() - t0) / problem.N
        gamma = problem.gamma(k)
        new_states = []
        for a, x_i, phi_i in zip(problem.agents, states, phis):
            t0 = time.perf_counter()
            new_states.append(gradient_update(x_i, gamma, phi_i, a.feasible))
            t = _new_timing(k, a.id)
            t["eval"] = t_eval
            t["update"] = time.perf_counter() - t0
            timings.append(t)
        states = new_states
        grads.append(phis)
        traj.append([list(s) for s in states])
    return RunResult("plain", traj, grads, Transcript(), timings, problem=problem)


# private-key scheme -------------------------------------------------------------------
def run_algorithm1(
    problem: ProblemInstance,
    key: singlemod.SingleModKey,
    K: int,
    rng=None,
    u_bits: int | None = None,
) -> RunResult:
    """Private-key protocol: coefficients encrypted once, states every round, polynomial evaluation by the operator."""
    if K < 0:
        raise ValidationError("K must be non-negative")
    precheck_singlemod(problem, key)
    nonces = _nonces(rng, u_bits)
    sigma = problem.sigma
    transcript = Transcript()
    partition = problem.partition
    values = problem.coefficient_values

    # coefficients are encrypted once; operator-owned ones enter unblinded
    _check_plaintexts(key, [values[cid] for cid in partition.owner], sigma, SETUP_STEP)
    t_setup = time.perf_counter()
    y_cts = {}
    for a in problem.agents:
        owned = partition.owned_by(a.id)
        if not owned:
            continue
        bundle = {}
        for cid in owned:
            z = encode(values[cid], sigma)
            ct = singlemod.encrypt(key, z, nonces.blinding(key, ("coef", cid)))
            bundle[cid] = ct.to_json()
            y_cts[cid] = ct
        transcript.send(SETUP_STEP, a.id, SO, "coef_ct", {"agent": a.id, "cts": bundle})
    for cid in partition.owned_by(SO):
        y_cts[cid] = singlemod.plain_constant(encode(values[cid], sigma))
    setup_seconds = time.perf_counter() - t_setup

    degrees = [p.degree for a in problem.agents for p in a.gradients]
    states = problem.initial_state()
    traj = [[list(s) for s in states]]
    grads, timings = [], []
    for k in range(K):
        tim = {a.id: _new_timing(k, a.id) for a in problem.agents}
        x_sent = problem.encode_state(problem.stack(states))
        _check_state_bound(problem, x_sent, k)
        # simulator-side guard: the key must cover this round's true values
        _check_plaintexts(key, x_sent, sigma, k)
        truth = [v for row in gradient_values(problem, x_sent) for v in row]
        if not singlemod.check_key_bound(key, [abs(v) for v in truth], degrees, sigma):
            raise KeyBoundViolated(f"step {k}: key too small for the gradient values", step=k)

        # agents encrypt their states
        x_cts = {}
        for a in problem.agents:
            t0 = time.perf_counter()
            off = problem.offset(a.id)
            cts = []
            for ell in range(a.dim):
                z = encode(x_sent[off + ell], sigma)
                ct = singlemod.encrypt(key, z, nonces.blinding(key, ("state", k, a.id, ell)))
                x_cts[off + ell] = ct
                cts.append(ct.to_json())
            tim[a.id]["encrypt"] = time.perf_counter() - t0
            transcript.send(k, a.id, SO, "state_ct", {"agent": a.id, "cts": cts})

        # operator evaluates every gradient over ciphertexts
        results = {}
        for a in problem.agents:
            t0 = time.perf_counter()
            results[a.id] = [singlemod.eval_polynomial(x_cts, y_cts, p, sigma) for p in a.gradients]
            tim[a.id]["eval"] = time.perf_counter() - t0
            transcript.send(k, SO, a.id, "grad_ct", {"agent": a.id, "cts": [c.to_json() for c in results[a.id]]})

        # decryption and local update
        phis, new_states = [], []
        for a, x_i in zip(problem.agents, states):
            t0 = time.perf_counter()
            phi = [singlemod.decrypt(key, ct, sigma) for ct in results[a.id]]
            t1 = time.perf_counter()
            new_states.append(gradient_update(x_i, problem.gamma(k), phi, a.feasible))
            tim[a.id]["decrypt"] = t1 - t0
            tim[a.id]["update"] = time.perf_counter() - t1
            phis.append(phi)
        states = new_states
        grads.append(phis)
        traj.append([list(s) for s in states])
        timings.extend(tim[a.id] for a in problem.agents)
    return RunResult("alg1", traj, grads, transcript, timings, setup_seconds, problem=problem)


# public-key scheme --------------------------------------------------------------------
def run_algorithm2(problem: ProblemInstance, keypairs, K: int, rng=None) -> RunResult:
    """Public-key protocol for affine gradients: one Paillier keypair per agent.

    ``keypairs[i-1]`` belongs to agent ``i``. Every agent encrypts its state
    once under each agent's public key; the operator combines the
    ciphertexts under agent ``i``'s key with the known affine weights.
    """
    if K < 0:
        raise ValidationError("K must be non-negative")
    if not problem.is_affine():
        raise NotAffine("every gradient must be affine in the state for the public-key scheme")
    keypairs = list(keypairs)
    if len(keypairs) != problem.N:
        raise ValidationError(f"need {problem.N} keypairs, got {len(keypairs)}")
    forms = problem.affine_form()
    precheck_paillier(problem, keypairs)
    nonces = _nonces(rng)
    sigma = problem.sigma
    transcript = Transcript()
    pubs = [kp.public for kp in keypairs]
    for a, pub in zip(problem.agents, pubs):
        transcript.send(SETUP_STEP, a.id, BROADCAST, "public_key", {"agent": a.id, **pub.to_json()})

    states = problem.initial_state()
    traj = [[list(s) for s in states]]
    grads, timings = [], []
    for k in range(K):
        tim = {a.id: _new_timing(k, a.id) for a in problem.agents}
        x_sent = problem.encode_state(problem.stack(states))
        _check_state_bound(problem, x_sent, k)
        for a, kp in zip(problem.agents, keypairs):
            for A, B in forms[a.id - 1]:
                value = B + sum((w * x for w, x in zip(A, x_sent)), ScaledDecimal(0))
                if kp.alpha < 1 + 2 * 10 ** (2 * sigma) * abs(value):
                    raise KeyBoundViolated(f"step {k}: agent {a.id} modulus too small", step=k)

        # each agent encrypts its state under every agent's public key
        by_key = defaultdict(dict)  # key owner -> flat index -> ciphertext
        for a in problem.agents:
            t0 = time.perf_counter()
            off = problem.offset(a.id)
            for j, pub in enumerate(pubs, start=1):
                cts = []
                for ell in range(a.dim):
                    pt = encode(x_sent[off + ell], sigma) % pub.alpha
                    ct = paillier.encrypt(pub, pt, nonces.randomizer(pub, ("state", k, a.id, ell, j)))
                    by_key[j][off + ell] = ct
                    cts.append(ct.to_json())
                transcript.send(k, a.id, SO, "state_ct", {"agent": a.id, "key_owner": j, "cts": cts})
            tim[a.id]["encrypt"] = time.perf_counter() - t0

        # affine evaluation under each agent's own key
        results = {}
        for a, pub in zip(problem.agents, pubs):
            t0 = time.perf_counter()
            results[a.id] = [paillier.eval_affine(pub, by_key[a.id], A, B, sigma) for A, B in forms[a.id - 1]]
            tim[a.id]["eval"] = time.perf_counter() - t0
            transcript.send(k, SO, a.id, "grad_ct", {"agent": a.id, "cts": [c.to_json() for c in results[a.id]]})

        # decryption and local update
        phis, new_states = [], []
        for a, kp, x_i in zip(problem.agents, keypairs, states):
            t0 = time.perf_counter()
            phi = [t_transform(paillier.decrypt(kp, ct), 2 * sigma, kp.alpha) for ct in results[a.id]]
            t1 = time.perf_counter()
            new_states.append(gradient_update(x_i, problem.gamma(k), phi, a.feasible))
            tim[a.id]["decrypt"] = t1 - t0
            tim[a.id]["update"] = time.perf_counter() - t1
            phis.append(phi)
        states = new_states
        grads.append(phis)
        traj.append([list(s) for s in states])
        timings.extend(tim[a.id] for a in problem.agents)
    return RunResult("alg2", traj, grads, transcript, timings, problem=problem)


# comparison ------------------------------------------------------------------------------
@dataclass
class DeviationReport:
    squared: list  # exact squared Euclidean deviation per step (Fraction)

    @property
    def per_step(self) -> list:
        return [math.sqrt(v) for v in self.squared]

    @property
    def max_squared(self) -> Fraction:
        return max(self.squared, default=Fraction(0))

    @property
    def max(self) -> float:
        return math.sqrt(self.max_squared)

    @property
    def all_zero(self) -> bool:
        return all(v == 0 for v in self.squared)

    @property
    def first_nonzero(self):
        return next((k for k, v in enumerate(self.squared) if v != 0), None)

    def to_csv(self) -> str:
        lines = ["step,squared_deviation,deviation"]
        lines += [f"{k},{v},{math.sqrt(v):.17g}" for k, v in enumerate(self.squared)]
        return "\n".join(lines) + "\n"


def compare_runs(a: RunResult, b: RunResult) -> DeviationReport:
    """Per-step Euclidean distance between two trajectories, exact (squared) and as floats."""
    if len(a.trajectory) != len(b.trajectory):
        raise ShapeMismatch(f"runs have {a.K} and {b.K} iterations")
    out = []
    for k in range(len(a.trajectory)):
        xa, xb = a.stacked(k), b.stacked(k)
        if len(xa) != len(xb):
            raise ShapeMismatch(f"state dimensions differ at step {k}")
        out.append(sum(((u - v).to_fraction() ** 2 for u, v in zip(xa, xb)), Fraction(0)))
    return DeviationReport(out)


# audit ------------------------------------------------------------------------------------
_ALLOWED_TO_SO = {"coef_ct", "state_ct", "public_key"}


@dataclass
class AuditReport:
    scheme: str
    messages: int
    checks: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def transcript_audit(run: RunResult) -> AuditReport:
    """Check the transcript against the protocol's information-flow rules.

    Raises AuditViolation on the first offending message. Checks: the
    operator never receives key material or plaintexts; agents only receive
    their own gradient ciphertexts; (private-key scheme) each partitioned
    coefficient is encrypted exactly once, by its assigned owner; and each
    round has the message counts the protocol prescribes.
    """
    msgs = run.transcript.messages
    problem = run.problem
    for m in msgs:
        if m.receiver in (SO, BROADCAST) and m.kind not in _ALLOWED_TO_SO:
            raise AuditViolation(f"operator received a {m.kind!r} message from {m.sender}", m)
        if m.kind in ("coef_ct", "state_ct") and m.sender == SO:
            raise AuditViolation("operator sent an input ciphertext", m)
        if m.kind == "grad_ct":
            if m.sender != SO or m.payload.get("agent") != m.receiver:
                raise AuditViolation(
                    f"gradient for agent {m.payload.get('agent')} delivered to {m.receiver}", m
                )
        if m.kind in ("coef_ct", "state_ct") and m.payload.get("agent") != m.sender:
            raise AuditViolation("agent sent ciphertexts in another agent's name", m)

    seen = Counter()
    sender_of = {}
    for m in msgs:
        if m.kind == "coef_ct":
            for cid in m.payload["cts"]:
                seen[cid] += 1
                sender_of[cid] = m.sender
    dup = [cid for cid, n in seen.items() if n > 1]
    if dup:
        raise AuditViolation(f"coefficient {dup[0]!r} encrypted {seen[dup[0]]} times", dup[0])
    if run.scheme == "alg1" and problem is not None:
        for cid, owner in problem.partition.owner.items():
            if owner == SO:
                if cid in seen:
                    raise AuditViolation(f"operator-owned coefficient {cid!r} was sent by an agent", cid)
                continue
            if seen[cid] != 1:
                raise AuditViolation(f"coefficient {cid!r} encrypted {seen[cid]} times", cid)
            if sender_of[cid] != owner:
                raise AuditViolation(f"coefficient {cid!r} encrypted by {sender_of[cid]}, owner is {owner}", cid)

    if problem is not None and run.scheme in ("alg1", "alg2"):
        N = problem.N
        per_step = defaultdict(Counter)
        for m in msgs:
            if m.step >= 0:
                per_step[m.step][m.kind] += 1
        want_state = N if run.scheme == "alg1" else N * N
        for k in range(run.K):
            got = per_step.get(k, Counter())
            if got["state_ct"] != want_state or got["grad_ct"] != N or sum(got.values()) != want_state + N:
                raise AuditViolation(f"step {k}: message counts {dict(got)} do not match the protocol", k)
    return AuditReport(run.scheme, len(msgs), {"operator_inputs": True, "gradient_routing": True, "single_encryption": True, "round_structure": True})
