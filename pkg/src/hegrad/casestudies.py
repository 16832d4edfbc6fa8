"""Power-system case studies built as ProblemInstances.

* Demand response: customers choose load reductions ``R_i`` under supply
  and line-flow limits; primal-dual projected gradient with the duals
  ``(mu0, mu_plus, mu_minus)`` dealt round-robin to the customers.
* DC optimal power flow: generators hold ``(P_i, theta_i, lambda_i, mu_ij)``;
  every gradient is affine, so the public-key protocol applies.

Networks come from :func:`synth_network` (ring, star or path) with exact
shift factors computed for unit line reactances.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import linalg
from .errors import ConfigInvalid, SizeTooSmall
from .fixedpoint import ScaledDecimal, quantize
from .polynomial import Monomial, PolynomialFunction, poly_sum
from .problem import SO, AgentSpec, Box, Coefficient, ProblemInstance, StepSchedule

D = ScaledDecimal.coerce
OMEGA = ScaledDecimal(60)


def _round_fraction(value: Fraction, sigma: int) -> ScaledDecimal:
    """Nearest ``sigma``-digit decimal, ties away from zero."""
    scaled = abs(value) * 10**sigma
    q = int(scaled + Fraction(1, 2))
    return ScaledDecimal(-q if value < 0 else q, sigma)


# synthetic networks --------------------------------------------------------------
@dataclass(frozen=True)
class Network:
    kind: str
    size: int
    edges: tuple  # (u, v) with u < v, buses numbered 0..size-1

    def neighbors(self) -> dict:
        out = {b: [] for b in range(self.size)}
        for u, v in self.edges:
            out[u].append(v)
            out[v].append(u)
        return {b: sorted(ns) for b, ns in out.items()}

    def shift_factors(self, sigma: int = 4) -> list:
        """Line flow per unit injection at each bus (slack bus 0), unit reactances, rounded to ``sigma`` digits.

        Row ``e`` is the flow on ``edges[e]`` in the ``u -> v`` direction; the
        slack column is zero. Entries lie in ``[-1, 1]``.
        """
        n = self.size
        # reduced Laplacian (slack removed), inverted exactly
        lap = [[Fraction(0)] * (n - 1) for _ in range(n - 1)]
        for u, v in self.edges:
            for a, b in ((u, v), (v, u)):
                if a:
                    lap[a - 1][a - 1] += 1
                    if b:
                        lap[a - 1][b - 1] -= 1
        aug = [row + [Fraction(int(r == c)) for c in range(n - 1)] for r, row in enumerate(lap)]
        R, _ = linalg.rref(aug, n - 1)
        inv = [row[n - 1 :] for row in R]

        def angle(bus, inj):
            return Fraction(0) if bus == 0 or inj == 0 else inv[bus - 1][inj - 1]

        return [
            [_round_fraction(angle(u, b) - angle(v, b), sigma) for b in range(n)]
            for u, v in self.edges
        ]


def synth_network(kind: str, size: int) -> Network:
    if size < 2:
        raise SizeTooSmall(f"network needs at least 2 buses, got {size}")
    if kind == "path":
        edges = [(b, b + 1) for b in range(size - 1)]
    elif kind == "ring":
        if size < 3:
            raise SizeTooSmall("a ring needs at least 3 buses")
        edges = [(b, b + 1) for b in range(size - 1)] + [(0, size - 1)]
    elif kind == "star":
        edges = [(0, b) for b in range(1, size)]
    else:
        raise ConfigInvalid(f"unknown network kind {kind!r}; choose ring, star or path")
    return Network(kind, size, tuple(sorted(edges)))


# helpers ---------------------------------------------------------------------------
def _mono(literal=1, x=None, y=None) -> PolynomialFunction:
    return PolynomialFunction.of(Monomial.make(x, y, literal))


def _decimals(values, name, sigma) -> tuple:
    try:
        out = tuple(D(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"{name}: {exc}") from exc
    for v in out:
        if v.reduced().scale > sigma:
            raise ConfigInvalid(f"{name}: {v} has more than {sigma} fraction digits")
    return out


# demand response -------------------------------------------------------------------
@dataclass(frozen=True)
class DemandResponseConfig:
    """Customers ``1..N`` sit on load buses; ``H_s``/``H_l`` are line-by-bus shift factors."""

    S: tuple  # max supply per supply bus
    L: tuple  # intended load per customer
    f_max: tuple  # line capacities
    H_s: tuple  # |E| x |V_s|
    H_l: tuple  # |E| x N
    c: tuple
    a: tuple
    b: tuple
    lam: ScaledDecimal
    tau: ScaledDecimal = ScaledDecimal(5, 1)
    sigma: int = 4
    gamma: ScaledDecimal = ScaledDecimal(1, 3)
    R0: tuple | None = None
    state_bound: ScaledDecimal | None = None

    def __post_init__(self):
        s = self.sigma
        if not isinstance(s, int) or s < 0:
            raise ConfigInvalid("sigma must be a natural number")
        for name in ("S", "L", "f_max", "c", "a", "b"):
            object.__setattr__(self, name, _decimals(getattr(self, name), name, s))
        for name in ("H_s", "H_l"):
            mat = tuple(_decimals(row, name, s) for row in getattr(self, name))
            if any(abs(v) > 1 for row in mat for v in row):
                raise ConfigInvalid(f"{name}: shift factors must lie in [-1, 1]")
            object.__setattr__(self, name, mat)
        object.__setattr__(self, "lam", _decimals([self.lam], "lambda", s)[0])
        object.__setattr__(self, "tau", D(self.tau))
        object.__setattr__(self, "gamma", D(self.gamma))
        N, E = len(self.L), len(self.f_max)
        if N < 1:
            raise ConfigInvalid("need at least one customer")
        if not self.S:
            raise ConfigInvalid("need at least one supply bus")
        if any(len(v) != N for v in (self.c, self.a, self.b)):
            raise ConfigInvalid("c, a, b must have one entry per customer")
        if len(self.H_s) != E or any(len(r) != len(self.S) for r in self.H_s):
            raise ConfigInvalid("H_s must be |lines| x |supply buses|")
        if len(self.H_l) != E or any(len(r) != N for r in self.H_l):
            raise ConfigInvalid("H_l must be |lines| x |customers|")
        if any(v <= 0 for v in self.a):
            raise ConfigInvalid("benefit curvature a_i must be positive")
        if any(v <= 0 for v in self.c):
            raise ConfigInvalid("disutility c_i must be positive")
        if self.lam <= 0:
            raise ConfigInvalid("price factor lambda must be positive")
        if self.tau != ScaledDecimal(5, 1):
            raise ConfigInvalid("only tau = 0.5 (quadratic pricing) gives polynomial gradients")
        if any(v < 0 for v in self.S + self.L + self.f_max):
            raise ConfigInvalid("supplies, loads and capacities must be non-negative")
        if self.gamma <= 0:
            raise ConfigInvalid("step size must be positive")
        if self.R0 is not None:
            R0 = _decimals(self.R0, "R0", s)
            if len(R0) != N or any(not 0 <= r <= l for r, l in zip(R0, self.L)):
                raise ConfigInvalid("R0 must lie in [0, L_i] for each customer")
            object.__setattr__(self, "R0", R0)
        if self.state_bound is not None:
            object.__setattr__(self, "state_bound", D(self.state_bound))

    @property
    def N(self) -> int:
        return len(self.L)

    @property
    def lines(self) -> int:
        return len(self.f_max)

    def to_json(self) -> dict:
        out = {
            "S": [str(v) for v in self.S],
            "L": [str(v) for v in self.L],
            "f_max": [str(v) for v in self.f_max],
            "H_s": [[str(v) for v in r] for r in self.H_s],
            "H_l": [[str(v) for v in r] for r in self.H_l],
            "c": [str(v) for v in self.c],
            "a": [str(v) for v in self.a],
            "b": [str(v) for v in self.b],
            "lambda": str(self.lam),
            "tau": str(self.tau),
            "sigma": self.sigma,
            "gamma": str(self.gamma),
        }
        if self.R0 is not None:
            out["R0"] = [str(v) for v in self.R0]
        if self.state_bound is not None:
            out["state_bound"] = str(self.state_bound)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "DemandResponseConfig":
        try:
            return cls(
                S=tuple(data["S"]),
                L=tuple(data["L"]),
                f_max=tuple(data["f_max"]),
                H_s=tuple(tuple(r) for r in data["H_s"]),
                H_l=tuple(tuple(r) for r in data["H_l"]),
                c=tuple(data["c"]),
                a=tuple(data["a"]),
                b=tuple(data["b"]),
                lam=data["lambda"],
                tau=data.get("tau", "0.5"),
                sigma=int(data.get("sigma", 4)),
                gamma=data.get("gamma", "0.001"),
                R0=tuple(data["R0"]) if "R0" in data else None,
                state_bound=data.get("state_bound"),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigInvalid(f"malformed demand-response config: {exc!r}") from exc


def demand_response_config(network: Network, supply_buses: int = 1, sigma: int = 4) -> DemandResponseConfig:
    """Deterministic fixture: the first ``supply_buses`` buses supply, the rest are customers.

    Total supply covers 80% of the intended load, so some curtailment is needed.
    """
    if not 1 <= supply_buses < network.size:
        raise ConfigInvalid("need at least one supply bus and one load bus")
    H = network.shift_factors(sigma)
    supply = list(range(supply_buses))
    loads = list(range(supply_buses, network.size))
    N = len(loads)
    L = [ScaledDecimal(10 + (i % 3)) for i in range(N)]
    total = sum(L, ScaledDecimal(0))
    S = [quantize(total * ScaledDecimal(8, 1) * ScaledDecimal.from_fraction(Fraction(1, supply_buses)), sigma) for _ in supply]
    return DemandResponseConfig(
        S=tuple(S),
        L=tuple(L),
        f_max=tuple(ScaledDecimal(25) for _ in network.edges),
        H_s=tuple(tuple(row[s] for s in supply) for row in H),
        H_l=tuple(tuple(row[b] for b in loads) for row in H),
        c=tuple(ScaledDecimal(1) + ScaledDecimal(i % 4, 1) for i in range(N)),
        a=tuple(ScaledDecimal(5 + (i % 3), 1) for i in range(N)),
        b=tuple(ScaledDecimal(2) for _ in range(N)),
        lam=ScaledDecimal(1, 3),
        sigma=sigma,
        gamma=ScaledDecimal(1, 3),
    )


def _dual_layout(cfg: DemandResponseConfig):
    """Dual names in order mu0, mu+_e, mu-_e, each dealt round-robin; returns name -> (customer, slot)."""
    names = ["mu0"] + [f"mu+{e}" for e in range(cfg.lines)] + [f"mu-{e}" for e in range(cfg.lines)]
    counts = [0] * cfg.N
    layout = {}
    for d, name in enumerate(names):
        owner = d % cfg.N + 1
        counts[owner - 1] += 1
        layout[name] = (owner, counts[owner - 1])  # slot 0 is R_i
    return names, layout, counts


def build_demand_response(cfg: DemandResponseConfig) -> ProblemInstance:
    """Customer ``i`` holds ``[R_i, its duals...]``; gradients are polynomials of degree 3."""
    N, E = cfg.N, cfg.lines
    names, layout, counts = _dual_layout(cfg)
    offsets = [0]
    for i in range(N):
        offsets.append(offsets[-1] + 1 + counts[i])

    def R(i):  # 1-based customer
        return offsets[i - 1]

    def mu(name):
        owner, slot = layout[name]
        return offsets[owner - 1] + slot

    coefs = [Coefficient("lambda", cfg.lam, (SO,))]
    coefs += [Coefficient(f"S{s}", v, (SO,)) for s, v in enumerate(cfg.S)]
    coefs += [Coefficient(f"f{e}", v, (SO,)) for e, v in enumerate(cfg.f_max)]
    coefs += [Coefficient(f"Hs{e}_{s}", v, (SO,)) for e, row in enumerate(cfg.H_s) for s, v in enumerate(row)]
    coefs += [Coefficient(f"Hl{e}_{i}", v, (SO,)) for e, row in enumerate(cfg.H_l) for i, v in enumerate(row, start=1)]
    for i in range(1, N + 1):
        for name, vals in (("a", cfg.a), ("b", cfg.b), ("c", cfg.c), ("L", cfg.L)):
            coefs.append(Coefficient(f"{name}{i}", vals[i - 1], (i,)))

    # actual load of customer j, and total actual load T = sum_j (L_j - R_j)
    def load(j):
        return _mono(y={f"L{j}": 1}) - _mono(x={R(j): 1})

    total = poly_sum(load(j) for j in range(1, N + 1))
    lam = _mono(y={"lambda": 1})

    def grad_R(i):
        terms = [
            _mono(y={f"c{i}": 1}),
            -(_mono(y={f"a{i}": 1}) * load(i)),
            _mono(y={f"b{i}": 1}),
            -(lam * total * load(i)).scaled(2),
            -(lam * total * total),
            -_mono(x={mu("mu0"): 1}),
        ]
        for e in range(E):
            h = _mono(y={f"Hl{e}_{i}": 1})
            terms.append(_mono(x={mu(f"mu+{e}"): 1}) * h)
            terms.append(-(_mono(x={mu(f"mu-{e}"): 1}) * h))
        return poly_sum(terms)

    supply_total = poly_sum(_mono(y={f"S{s}": 1}) for s in range(len(cfg.S)))

    def flow(e):  # H_s S - H_l (L - R) on line e
        gen = poly_sum(_mono(y={f"Hs{e}_{s}": 1, f"S{s}": 1}) for s in range(len(cfg.S)))
        withdrawn = poly_sum(_mono(y={f"Hl{e}_{j}": 1}) * load(j) for j in range(1, N + 1))
        return gen - withdrawn

    dual_grad = {"mu0": -(total - supply_total)}
    for e in range(E):
        cap = _mono(y={f"f{e}": 1})
        dual_grad[f"mu+{e}"] = -(flow(e) - cap)
        dual_grad[f"mu-{e}"] = -(-flow(e) - cap)

    R0 = cfg.R0 or tuple(ScaledDecimal(0) for _ in range(N))
    agents = []
    for i in range(1, N + 1):
        mine = [n for n in names if layout[n][0] == i]
        x0 = (R0[i - 1],) + tuple(ScaledDecimal(0) for _ in mine)
        lo = (ScaledDecimal(0),) * len(x0)
        hi = (cfg.L[i - 1],) + (None,) * len(mine)
        grads = (grad_R(i),) + tuple(dual_grad[n] for n in mine)
        agents.append(AgentSpec(i, x0, Box(lo, hi), grads))
    return ProblemInstance(
        sigma=cfg.sigma,
        agents=tuple(agents),
        coefficients=tuple(coefs),
        gamma=StepSchedule(constant=cfg.gamma),
        state_bound=cfg.state_bound,
        name="demand response",
        meta={"kind": "demand_response", "duals": {n: list(layout[n]) for n in names}},
    )


# optimal power flow ----------------------------------------------------------------
@dataclass(frozen=True)
class OpfConfig:
    """Generators ``1..N``; ``neighbors[i]`` lists 1-based neighbours of generator ``i``."""

    neighbors: tuple
    a: tuple
    b: tuple
    P_min: tuple
    P_max: tuple
    L: tuple
    P_line_max: Mapping = field(default_factory=dict)  # (i, j) -> capacity
    D: tuple = ()
    t: Mapping = field(default_factory=dict)  # frozenset-like key (min, max) -> stiffness
    omega: ScaledDecimal = OMEGA
    sigma: int = 4
    gamma: ScaledDecimal = ScaledDecimal(1, 2)
    P0: tuple | None = None
    state_bound: ScaledDecimal | None = None

    def __post_init__(self):
        s = self.sigma
        N = len(self.neighbors)
        if N < 2:
            raise ConfigInvalid("need at least two generators")
        nb = tuple(tuple(sorted(int(j) for j in ns)) for ns in self.neighbors)
        for i, ns in enumerate(nb, start=1):
            for j in ns:
                if not 1 <= j <= N or j == i:
                    raise ConfigInvalid(f"generator {i} has invalid neighbour {j}")
                if i not in nb[j - 1]:
                    raise ConfigInvalid(f"neighbour relation not symmetric between {i} and {j}")
        object.__setattr__(self, "neighbors", nb)
        for name in ("a", "b", "P_min", "P_max", "L", "D"):
            vals = _decimals(getattr(self, name), name, s)
            if len(vals) != N:
                raise ConfigInvalid(f"{name} must have one entry per generator")
            object.__setattr__(self, name, vals)
        if any(v <= 0 for v in self.a):
            raise ConfigInvalid("cost curvature a_i must be positive")
        if any(lo > hi for lo, hi in zip(self.P_min, self.P_max)):
            raise ConfigInvalid("P_min must not exceed P_max")
        edges = {(min(i, j), max(i, j)) for i, ns in enumerate(nb, start=1) for j in ns}
        t = {}
        for key, v in self.t.items():
            i, j = _pair(key)
            t[(min(i, j), max(i, j))] = _decimals([v], "t", s)[0]
        if set(t) != edges:
            raise ConfigInvalid("need exactly one stiffness per line")
        object.__setattr__(self, "t", t)
        cap = {}
        for key, v in self.P_line_max.items():
            cap[_pair(key)] = _decimals([v], "P_line_max", s)[0]
        if set(cap) != {(i, j) for i, ns in enumerate(nb, start=1) for j in ns}:
            raise ConfigInvalid("need a capacity for each ordered neighbour pair")
        object.__setattr__(self, "P_line_max", cap)
        object.__setattr__(self, "omega", D(self.omega))
        object.__setattr__(self, "gamma", D(self.gamma))
        if self.gamma <= 0:
            raise ConfigInvalid("step size must be positive")
        if self.P0 is not None:
            P0 = _decimals(self.P0, "P0", s)
            if len(P0) != N or any(not lo <= p <= hi for p, lo, hi in zip(P0, self.P_min, self.P_max)):
                raise ConfigInvalid("P0 must lie within generator limits")
            object.__setattr__(self, "P0", P0)
        if self.state_bound is not None:
            object.__setattr__(self, "state_bound", D(self.state_bound))

    @property
    def N(self) -> int:
        return len(self.neighbors)

    def stiffness(self, i, j) -> ScaledDecimal:
        return self.t[(min(i, j), max(i, j))]

    def to_json(self) -> dict:
        out = {
            "neighbors": [list(ns) for ns in self.neighbors],
            "a": [str(v) for v in self.a],
            "b": [str(v) for v in self.b],
            "P_min": [str(v) for v in self.P_min],
            "P_max": [str(v) for v in self.P_max],
            "L": [str(v) for v in self.L],
            "D": [str(v) for v in self.D],
            "t": {f"{i},{j}": str(v) for (i, j), v in sorted(self.t.items())},
            "P_line_max": {f"{i},{j}": str(v) for (i, j), v in sorted(self.P_line_max.items())},
            "omega": str(self.omega),
            "sigma": self.sigma,
            "gamma": str(self.gamma),
        }
        if self.P0 is not None:
            out["P0"] = [str(v) for v in self.P0]
        if self.state_bound is not None:
            out["state_bound"] = str(self.state_bound)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "OpfConfig":
        try:
            return cls(
                neighbors=tuple(tuple(ns) for ns in data["neighbors"]),
                a=tuple(data["a"]),
                b=tuple(data["b"]),
                P_min=tuple(data["P_min"]),
                P_max=tuple(data["P_max"]),
                L=tuple(data["L"]),
                D=tuple(data["D"]),
                t=data["t"],
                P_line_max=data["P_line_max"],
                omega=data.get("omega", "60"),
                sigma=int(data.get("sigma", 4)),
                gamma=data.get("gamma", "0.5"),
                P0=tuple(data["P0"]) if "P0" in data else None,
                state_bound=data.get("state_bound"),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigInvalid(f"malformed OPF config: {exc!r}") from exc


def _pair(key) -> tuple:
    if isinstance(key, str):
        parts = key.split(",")
    else:
        parts = list(key)
    if len(parts) != 2:
        raise ConfigInvalid(f"bad line key {key!r}")
    return int(parts[0]), int(parts[1])


def opf_config(network: Network, sigma: int = 4) -> OpfConfig:
    """Uniform fixture on ``network``: D=1, t=1.5, a=0.1, b=10, P in [10, 100], L=10, line cap 80."""
    nb = network.neighbors()
    N = network.size
    gens = tuple(tuple(j + 1 for j in nb[b]) for b in range(N))
    return OpfConfig(
        neighbors=gens,
        a=(ScaledDecimal(1, 1),) * N,
        b=(ScaledDecimal(10),) * N,
        P_min=(ScaledDecimal(10),) * N,
        P_max=(ScaledDecimal(100),) * N,
        L=(ScaledDecimal(10),) * N,
        D=(ScaledDecimal(1),) * N,
        t={(u + 1, v + 1): ScaledDecimal(15, 1) for u, v in network.edges},
        P_line_max={(i, j): ScaledDecimal(80) for i, ns in enumerate(gens, start=1) for j in ns},
        sigma=sigma,
    )


def build_opf(cfg: OpfConfig) -> ProblemInstance:
    """Generator ``i`` holds ``[P_i, theta_i, lambda_i, mu_ij for j in neighbours]``; all gradients affine."""
    N = cfg.N
    offsets = [0]
    for ns in cfg.neighbors:
        offsets.append(offsets[-1] + 3 + len(ns))

    def P(i):
        return offsets[i - 1]

    def theta(i):
        return offsets[i - 1] + 1

    def lam(i):
        return offsets[i - 1] + 2

    def mu(i, j):
        return offsets[i - 1] + 3 + cfg.neighbors[i - 1].index(j)

    def t_id(i, j):
        return f"t{min(i, j)}_{max(i, j)}"

    coefs = []
    for i in range(1, N + 1):
        for name, vals in (("a", cfg.a), ("b", cfg.b), ("L", cfg.L)):
            coefs.append(Coefficient(f"{name}{i}", vals[i - 1], (i,)))
        coefs.append(Coefficient(f"D{i}", cfg.D[i - 1], (SO,)))
    coefs += [Coefficient(f"t{i}_{j}", v, (SO,)) for (i, j), v in sorted(cfg.t.items())]
    coefs += [Coefficient(f"Pl{i}_{j}", v, (SO,)) for (i, j), v in sorted(cfg.P_line_max.items())]

    def angle_diff(i, j):  # t_ij (theta_i - theta_j)
        return _mono(x={theta(i): 1}, y={t_id(i, j): 1}) - _mono(x={theta(j): 1}, y={t_id(i, j): 1})

    agents = []
    P0 = cfg.P0 or cfg.P_min
    for i in range(1, N + 1):
        ns = cfg.neighbors[i - 1]
        g_P = _mono(2, x={P(i): 1}, y={f"a{i}": 1}) + _mono(y={f"b{i}": 1}) - _mono(x={lam(i): 1})
        g_theta = poly_sum(
            _mono(x={lam(i): 1}, y={t_id(i, j): 1})
            + _mono(x={mu(i, j): 1}, y={t_id(i, j): 1})
            - _mono(x={lam(j): 1}, y={t_id(i, j): 1})
            - _mono(x={mu(j, i): 1}, y={t_id(i, j): 1})
            for j in ns
        )
        g_lam = -(
            _mono(y={f"L{i}": 1})
            - _mono(x={P(i): 1})
            + _mono(cfg.omega, y={f"D{i}": 1})
            + poly_sum(angle_diff(i, j) for j in ns)
        )
        g_mu = [-(angle_diff(i, j) - _mono(y={f"Pl{i}_{j}": 1})) for j in ns]
        x0 = (P0[i - 1], ScaledDecimal(0), ScaledDecimal(0)) + (ScaledDecimal(0),) * len(ns)
        lo = (cfg.P_min[i - 1], None, None) + (ScaledDecimal(0),) * len(ns)
        hi = (cfg.P_max[i - 1], None, None) + (None,) * len(ns)
        agents.append(AgentSpec(i, x0, Box(lo, hi), (g_P, g_theta, g_lam, *g_mu)))
    return ProblemInstance(
        sigma=cfg.sigma,
        agents=tuple(agents),
        coefficients=tuple(coefs),
        gamma=StepSchedule(constant=cfg.gamma),
        state_bound=cfg.state_bound,
        name="optimal power flow",
        meta={"kind": "opf"},
    )


def load_config(path):
    """Read a demand-response or OPF config; the ``kind`` field picks which."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"{path}: {exc}") from exc
    kind = data.get("kind")
    if kind == "demand_response":
        return DemandResponseConfig.from_json(data)
    if kind == "opf":
        return OpfConfig.from_json(data)
    raise ConfigInvalid(f"{path}: unknown config kind {kind!r}")


def config_to_json(cfg) -> dict:
    kind = "demand_response" if isinstance(cfg, DemandResponseConfig) else "opf"
    return {"kind": kind, **cfg.to_json()}
