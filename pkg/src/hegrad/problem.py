"""Optimization problem model: feasible sets, coefficient ownership, step sizes, and the update rule.

Participants are numbered with the system operator as ``0`` and agents as
``1..N``. The stacked state vector concatenates the agents' states in id
order; polynomial state variables index into it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import DimensionMismatch, UnownedCoefficient, ValidationError
from .fixedpoint import ScaledDecimal, quantize
from .polynomial import PolynomialFunction, eval_plain, to_affine

SO = 0
SCHEMA = "hegrad/problem"
SCHEMA_VERSION = 1

__all__ = [
    "SO",
    "Box",
    "NonNegativeOrthant",
    "AllReals",
    "CoefficientPartition",
    "Coefficient",
    "AgentSpec",
    "StepSchedule",
    "ProblemInstance",
    "build_partition",
    "project",
    "gradient_update",
    "eval_plain",
    "to_affine",
    "load_problem",
    "dump_problem",
]


def _dec(v):
    return None if v is None else ScaledDecimal.coerce(v)


# feasible sets -------------------------------------------------------------
@dataclass(frozen=True)
class Box:
    """Coordinatewise interval; ``None`` marks an unbounded side."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(_dec(v) for v in self.lo)
        hi = tuple(_dec(v) for v in self.hi)
        if len(lo) != len(hi):
            raise DimensionMismatch("box bounds have different lengths")
        for a, b in zip(lo, hi):
            if a is not None and b is not None and a > b:
                raise ValidationError(f"empty box side: {a} > {b}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def project(self, z):
        out = []
        for v, a, b in zip(z, self.lo, self.hi):
            if a is not None and v < a:
                v = a
            elif b is not None and v > b:
                v = b
            out.append(v)
        return out

    def contains(self, z) -> bool:
        return all((a is None or v >= a) and (b is None or v <= b) for v, a, b in zip(z, self.lo, self.hi))

    def shifted(self, delta) -> "Box":
        return Box(
            tuple(None if a is None else a + d for a, d in zip(self.lo, delta)),
            tuple(None if b is None else b + d for b, d in zip(self.hi, delta)),
        )

    def to_json(self) -> dict:
        return {
            "kind": "box",
            "lo": [None if v is None else str(v) for v in self.lo],
            "hi": [None if v is None else str(v) for v in self.hi],
        }


@dataclass(frozen=True)
class NonNegativeOrthant:
    dim: int

    def project(self, z):
        zero = ScaledDecimal(0)
        return [v if v >= 0 else zero for v in z]

    def contains(self, z) -> bool:
        return all(v >= 0 for v in z)

    def shifted(self, delta) -> Box:
        return Box(tuple(delta), (None,) * self.dim)

    def to_json(self) -> dict:
        return {"kind": "orthant", "dim": self.dim}


@dataclass(frozen=True)
class AllReals:
    dim: int

    def project(self, z):
        return list(z)

    def contains(self, z) -> bool:
        return True

    def shifted(self, delta) -> "AllReals":
        return self

    def to_json(self) -> dict:
        return {"kind": "reals", "dim": self.dim}


def feasible_from_json(data: Mapping, dim: int):
    kind = data.get("kind")
    if kind == "box":
        box = Box(tuple(data["lo"]), tuple(data["hi"]))
        if box.dim != dim:
            raise DimensionMismatch(f"box has dimension {box.dim}, agent has {dim}")
        return box
    if kind == "orthant":
        return NonNegativeOrthant(dim)
    if kind == "reals":
        return AllReals(dim)
    raise ValidationError(f"unknown feasible set kind {kind!r}")


def project(fset, z):
    """Euclidean projection of ``z`` onto ``fset``."""
    if len(z) != fset.dim:
        raise DimensionMismatch(f"vector of length {len(z)} for a set of dimension {fset.dim}")
    return fset.project([ScaledDecimal.coerce(v) for v in z])


def gradient_update(x_i, gamma_k, phi_i, fset):
    """One projected step ``P_X[x - gamma * phi]``, exact."""
    if len(x_i) != len(phi_i):
        raise DimensionMismatch("state and gradient lengths differ")
    gamma_k = ScaledDecimal.coerce(gamma_k)
    if gamma_k <= 0:
        raise ValidationError("step size must be positive")
    return project(fset, [ScaledDecimal.coerce(x) - gamma_k * ScaledDecimal.coerce(g) for x, g in zip(x_i, phi_i)])


# coefficient ownership ---------------------------------------------------------
@dataclass(frozen=True)
class CoefficientPartition:
    """Each coefficient assigned to exactly one participant that holds it."""

    owner: Mapping[str, int]

    def owned_by(self, participant: int) -> list:
        return sorted(c for c, p in self.owner.items() if p == participant)

    def validate(self, ownership: Mapping[str, Sequence[int]]) -> None:
        if set(self.owner) != set(ownership):
            raise ValidationError("partition and ownership cover different coefficients")
        for cid, holders in ownership.items():
            holders = set(holders)
            assigned = self.owner[cid]
            if assigned not in holders:
                raise ValidationError(f"{cid} assigned to {assigned}, which does not hold it")
            if SO in holders and assigned != SO:
                raise ValidationError(f"{cid} is held by the operator and must stay with it")


def build_partition(ownership: Mapping[str, Sequence[int]]) -> CoefficientPartition:
    """Assign every coefficient to its lowest-index holder (the operator is index 0)."""
    owner = {}
    for cid, holders in ownership.items():
        holders = list(holders)
        if not holders:
            raise UnownedCoefficient(f"coefficient {cid!r} has no owner")
        if any(h < 0 for h in holders):
            raise ValidationError(f"negative participant id for {cid!r}")
        owner[cid] = min(holders)
    return CoefficientPartition(owner)


# problem instance ---------------------------------------------------------------
@dataclass(frozen=True)
class Coefficient:
    id: str
    value: ScaledDecimal
    owners: tuple


@dataclass(frozen=True)
class AgentSpec:
    id: int
    x0: tuple
    feasible: object
    gradients: tuple  # one PolynomialFunction per coordinate

    @property
    def dim(self) -> int:
        return len(self.x0)


@dataclass(frozen=True)
class StepSchedule:
    """Constant step size or an explicit per-iteration table, identical for all agents."""

    constant: ScaledDecimal | None = None
    table: tuple = ()

    def __post_init__(self):
        if (self.constant is None) == (not self.table):
            if self.constant is None:
                raise ValidationError("step schedule needs a constant or a table")
            raise ValidationError("step schedule takes a constant or a table, not both")
        for g in ([self.constant] if self.constant is not None else list(self.table)):
            if g <= 0:
                raise ValidationError("step sizes must be positive")

    def __call__(self, k: int) -> ScaledDecimal:
        if self.constant is not None:
            return self.constant
        if k >= len(self.table):
            raise ValidationError(f"step table has no entry for iteration {k}")
        return self.table[k]

    def to_json(self) -> dict:
        if self.constant is not None:
            return {"constant": str(self.constant)}
        return {"table": [str(g) for g in self.table]}

    @classmethod
    def from_json(cls, data) -> "StepSchedule":
        if isinstance(data, (str, int)):
            return cls(constant=ScaledDecimal.coerce(data))
        if "constant" in data:
            return cls(constant=ScaledDecimal.coerce(data["constant"]))
        return cls(table=tuple(ScaledDecimal.coerce(g) for g in data["table"]))


@dataclass(frozen=True)
class ProblemInstance:
    sigma: int
    agents: tuple
    coefficients: tuple
    gamma: StepSchedule
    partition: CoefficientPartition = None
    state_bound: ScaledDecimal | None = None
    name: str = ""
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.sigma, int) or self.sigma < 0:
            raise ValidationError("sigma must be a natural number")
        ids = [a.id for a in self.agents]
        if ids != list(range(1, len(ids) + 1)):
            raise ValidationError(f"agent ids must be 1..N in order, got {ids}")
        ownership = self.ownership
        if len(ownership) != len(self.coefficients):
            raise ValidationError("duplicate coefficient ids")
        for c in self.coefficients:
            if any(not 0 <= o <= len(self.agents) for o in c.owners):
                raise ValidationError(f"coefficient {c.id!r} has an unknown owner")
        if self.partition is None:
            object.__setattr__(self, "partition", build_partition(ownership))
        else:
            self.partition.validate(ownership)
        n = self.n
        known = set(ownership)
        for a in self.agents:
            if len(a.gradients) != a.dim:
                raise DimensionMismatch(f"agent {a.id}: {len(a.gradients)} gradients for dimension {a.dim}")
            if a.feasible.dim != a.dim:
                raise DimensionMismatch(f"agent {a.id}: feasible set dimension mismatch")
            if not a.feasible.contains(a.x0):
                raise ValidationError(f"agent {a.id}: initial state outside its feasible set")
            for poly in a.gradients:
                bad = [j for j in poly.x_vars() if not 0 <= j < n]
                if bad:
                    raise DimensionMismatch(f"agent {a.id}: state variables {bad} out of range")
                missing = poly.y_vars() - known
                if missing:
                    raise ValidationError(f"agent {a.id}: unknown coefficients {sorted(missing)}")

    @property
    def N(self) -> int:
        return len(self.agents)

    @property
    def n(self) -> int:
        return sum(a.dim for a in self.agents)

    @property
    def ownership(self) -> dict:
        return {c.id: tuple(c.owners) for c in self.coefficients}

    @property
    def coefficient_values(self) -> dict:
        return {c.id: c.value for c in self.coefficients}

    def offset(self, agent_id: int) -> int:
        return sum(a.dim for a in self.agents[: agent_id - 1])

    def agent(self, agent_id: int) -> AgentSpec:
        return self.agents[agent_id - 1]

    def initial_state(self) -> list:
        return [list(a.x0) for a in self.agents]

    def stack(self, states) -> list:
        return [v for s in states for v in s]

    def encode_state(self, x):
        """The value agents transmit: each coordinate truncated to ``sigma`` digits."""
        return [quantize(v, self.sigma, "truncate") for v in x]

    def is_affine(self) -> bool:
        return all(m.x_degree <= 1 for a in self.agents for p in a.gradients for m in p.monomials)

    def affine_form(self):
        """Per agent, per coordinate ``(A_row, B)`` with coefficient values substituted."""
        c = self.coefficient_values
        return [[to_affine(p, self.n, c) for p in a.gradients] for a in self.agents]

    # serialization -------------------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "schema": SCHEMA,
            "version": SCHEMA_VERSION,
            "name": self.name,
            "sigma": self.sigma,
            "gamma": self.gamma.to_json(),
            "agents": [
                {
                    "id": a.id,
                    "x0": [str(v) for v in a.x0],
                    "feasible": a.feasible.to_json(),
                    "gradients": [p.to_json() for p in a.gradients],
                }
                for a in self.agents
            ],
            "coefficients": [
                {"id": c.id, "value": str(c.value), "owners": list(c.owners)} for c in self.coefficients
            ],
            "partition": dict(sorted(self.partition.owner.items())),
        }
        if self.state_bound is not None:
            out["state_bound"] = str(self.state_bound)
        if self.meta:
            out["meta"] = dict(self.meta)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "ProblemInstance":
        if data.get("schema", SCHEMA) != SCHEMA:
            raise ValidationError(f"not a problem file (schema {data.get('schema')!r})")
        if int(data.get("version", SCHEMA_VERSION)) != SCHEMA_VERSION:
            raise ValidationError(f"unsupported problem schema version {data.get('version')}")
        try:
            agents = []
            for entry in data["agents"]:
                x0 = tuple(ScaledDecimal.coerce(v) for v in entry["x0"])
                agents.append(
                    AgentSpec(
                        int(entry["id"]),
                        x0,
                        feasible_from_json(entry.get("feasible", {"kind": "reals"}), len(x0)),
                        tuple(PolynomialFunction.from_json(p) for p in entry["gradients"]),
                    )
                )
            coefs = tuple(
                Coefficient(c["id"], ScaledDecimal.coerce(c["value"]), tuple(int(o) for o in c["owners"]))
                for c in data.get("coefficients", [])
            )
            partition = None
            if data.get("partition") is not None:
                partition = CoefficientPartition({k: int(v) for k, v in data["partition"].items()})
            return cls(
                sigma=int(data["sigma"]),
                agents=tuple(agents),
                coefficients=coefs,
                gamma=StepSchedule.from_json(data["gamma"]),
                partition=partition,
                state_bound=_dec(data.get("state_bound")),
                name=data.get("name", ""),
                meta=data.get("meta", {}),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed problem file: {exc!r}") from exc


def load_problem(path) -> ProblemInstance:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: {exc}") from exc
    return ProblemInstance.from_json(data)


def dump_problem(problem: ProblemInstance, path) -> None:
    Path(path).write_text(json.dumps(problem.to_json(), indent=2) + "\n")


def gradient_values(problem: ProblemInstance, x_stacked) -> list:
    """Plain evaluation of every agent's gradient at the stacked state."""
    c = problem.coefficient_values
    return [[eval_plain(p, x_stacked, c) for p in a.gradients] for a in problem.agents]
