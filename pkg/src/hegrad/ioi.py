"""Input-output inference analysis for quadratic gradient families.

Agent ``j``'s ``l``-th gradient is ``x^T H x + A x + B`` with ``H`` and
``A`` public and ``B`` known only to some agents. The questions answered
here, for a fixed adversary ``i``:

* does the stacked weight matrix of the other agents' coordinates have a
  null vector with no zero entry (:func:`find_allnonzero_nullvector`);
* if so, build the shifted "shadow" instance that produces exactly the
  adversary's observations (:func:`construct_shadow`, :func:`verify_shadow`)
  and scale it to show the adversary's uncertainty is unbounded;
* for affine systems, what the adversary can solve for outright
  (:func:`linear_attack`).

Agents and gradient components are 1-based, matching ``(j, l)`` labels;
flat state indices are 0-based. All arithmetic is on Fractions.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import linalg
from .errors import DimensionMismatch, InvalidDelta, MalformedObservations, ValidationError

ZERO = Fraction(0)


def _frac(v) -> Fraction:
    return Fraction(str(v)) if isinstance(v, float) else Fraction(v)


# feasible sets over the rationals ----------------------------------------------
@dataclass(frozen=True)
class RationalBox:
    """Coordinatewise interval with rational ends; ``None`` is unbounded."""

    lo: tuple
    hi: tuple

    @classmethod
    def unbounded(cls, dim: int) -> "RationalBox":
        return cls((None,) * dim, (None,) * dim)

    @classmethod
    def orthant(cls, dim: int) -> "RationalBox":
        return cls((ZERO,) * dim, (None,) * dim)

    def __post_init__(self):
        lo = tuple(None if v is None else _frac(v) for v in self.lo)
        hi = tuple(None if v is None else _frac(v) for v in self.hi)
        if len(lo) != len(hi):
            raise DimensionMismatch("box bounds have different lengths")
        for a, b in zip(lo, hi):
            if a is not None and b is not None and a > b:
                raise ValidationError(f"empty interval [{a}, {b}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def is_unbounded(self) -> bool:
        return all(v is None for v in self.lo + self.hi)

    def project(self, z) -> list:
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

    def shifted(self, delta) -> "RationalBox":
        return RationalBox(
            tuple(None if a is None else a + d for a, d in zip(self.lo, delta)),
            tuple(None if b is None else b + d for b, d in zip(self.hi, delta)),
        )

    def to_json(self) -> dict:
        return {
            "lo": [None if v is None else str(v) for v in self.lo],
            "hi": [None if v is None else str(v) for v in self.hi],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "RationalBox":
        return cls(tuple(data["lo"]), tuple(data["hi"]))


# the family ------------------------------------------------------------------------
@dataclass(frozen=True)
class QuadraticFamily:
    """Quadratic gradients plus the dynamics needed to simulate them.

    ``H``, ``A`` and ``B`` map a label ``(j, l)`` to an ``n x n`` matrix, a
    length-``n`` row and a scalar. ``knows[i]`` is the set of labels whose
    constant agent ``i`` knows; every other label is unknown to ``i``.
    Missing ``H``/``A``/``B`` entries are zero. ``gamma`` is a constant
    step size or a per-step table.
    """

    dims: tuple
    H: Mapping = field(default_factory=dict)
    A: Mapping = field(default_factory=dict)
    B: Mapping = field(default_factory=dict)
    knows: Mapping = field(default_factory=dict)
    x0: tuple = ()
    feasible: tuple = ()
    gamma: object = Fraction(1)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValidationError("every agent needs at least one coordinate")
        object.__setattr__(self, "dims", dims)
        n = sum(dims)
        labels = set(self.labels)

        H, A, B = {}, {}, {}
        for lab, mat in self.H.items():
            lab = self._label(lab, labels)
            mat = tuple(tuple(_frac(v) for v in row) for row in mat)
            if len(mat) != n or any(len(row) != n for row in mat):
                raise DimensionMismatch(f"H{lab} must be {n}x{n}")
            H[lab] = mat
        for lab, row in self.A.items():
            lab = self._label(lab, labels)
            row = tuple(_frac(v) for v in row)
            if len(row) != n:
                raise DimensionMismatch(f"A{lab} must have length {n}")
            A[lab] = row
        for lab, v in self.B.items():
            B[self._label(lab, labels)] = _frac(v)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

        knows = {}
        for i in range(1, len(dims) + 1):
            known = self.knows.get(i, self.knows.get(str(i)))
            if known is None:
                known = [(i, l) for l in range(1, dims[i - 1] + 1)]
            knows[i] = frozenset(self._label(lab, labels) for lab in known)
        object.__setattr__(self, "knows", knows)

        x0 = self.x0 or tuple((ZERO,) * d for d in dims)
        x0 = tuple(tuple(_frac(v) for v in s) for s in x0)
        if [len(s) for s in x0] != list(dims):
            raise DimensionMismatch("initial state dimensions do not match dims")
        object.__setattr__(self, "x0", x0)
        feas = self.feasible or tuple(RationalBox.unbounded(d) for d in dims)
        feas = tuple(f if isinstance(f, RationalBox) else RationalBox.from_json(f) for f in feas)
        if [f.dim for f in feas] != list(dims):
            raise DimensionMismatch("feasible set dimensions do not match dims")
        object.__setattr__(self, "feasible", feas)
        gamma = self.gamma
        gamma = tuple(_frac(g) for g in gamma) if isinstance(gamma, (list, tuple)) else _frac(gamma)
        if any(g <= 0 for g in (gamma if isinstance(gamma, tuple) else (gamma,))):
            raise ValidationError("step sizes must be positive")
        object.__setattr__(self, "gamma", gamma)

    @staticmethod
    def _label(lab, labels) -> tuple:
        if isinstance(lab, str):
            lab = tuple(int(p) for p in lab.split(","))
        lab = (int(lab[0]), int(lab[1]))
        if lab not in labels:
            raise DimensionMismatch(f"no gradient component {lab}")
        return lab

    @property
    def N(self) -> int:
        return len(self.dims)

    @property
    def n(self) -> int:
        return sum(self.dims)

    @property
    def labels(self) -> list:
        return [(j, l) for j, d in enumerate(self.dims, start=1) for l in range(1, d + 1)]

    def offset(self, agent: int) -> int:
        return sum(self.dims[: agent - 1])

    def flat(self, label) -> int:
        j, l = label
        return self.offset(j) + l - 1

    def coords(self, agent: int) -> range:
        off = self.offset(agent)
        return range(off, off + self.dims[agent - 1])

    def unknown(self, i: int) -> list:
        return [lab for lab in self.labels if lab not in self.knows[i]]

    def step(self, k: int) -> Fraction:
        if isinstance(self.gamma, tuple):
            if k >= len(self.gamma):
                raise ValidationError(f"no step size for step {k}")
            return self.gamma[k]
        return self.gamma

    def h(self, label) -> tuple | None:
        return self.H.get(label)

    def a(self, label) -> tuple:
        return self.A.get(label, (ZERO,) * self.n)

    def b(self, label) -> Fraction:
        return self.B.get(label, ZERO)

    def is_affine(self) -> bool:
        return all(all(v == 0 for row in m for v in row) for m in self.H.values())

    def gradient(self, label, x, constant=None) -> Fraction:
        """``x^T H x + A x + B`` for component ``label``; ``constant`` overrides ``B``."""
        value = sum((a * v for a, v in zip(self.a(label), x)), ZERO)
        H = self.h(label)
        if H is not None:
            for r, row in enumerate(H):
                if x[r]:
                    value += x[r] * sum((h * v for h, v in zip(row, x)), ZERO)
        return value + (self.b(label) if constant is None else constant)

    def to_json(self) -> dict:
        def lab(l):
            return f"{l[0]},{l[1]}"

        return {
            "dims": list(self.dims),
            "H": {lab(l): [[str(v) for v in row] for row in m] for l, m in self.H.items()},
            "A": {lab(l): [str(v) for v in row] for l, row in self.A.items()},
            "B": {lab(l): str(v) for l, v in self.B.items()},
            "knows": {str(i): sorted([list(l) for l in s]) for i, s in self.knows.items()},
            "x0": [[str(v) for v in s] for s in self.x0],
            "feasible": [f.to_json() for f in self.feasible],
            "gamma": [str(g) for g in self.gamma] if isinstance(self.gamma, tuple) else str(self.gamma),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "QuadraticFamily":
        try:
            return cls(
                dims=tuple(data["dims"]),
                H=data.get("H", {}),
                A=data.get("A", {}),
                B=data.get("B", {}),
                knows={int(i): [tuple(l) for l in ls] for i, ls in data.get("knows", {}).items()},
                x0=tuple(tuple(s) for s in data.get("x0", ())),
                feasible=tuple(data.get("feasible", ())),
                gamma=data.get("gamma", "1"),
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"malformed family file: {exc}") from exc


def load_family(path) -> QuadraticFamily:
    with open(path, encoding="utf-8") as fh:
        return QuadraticFamily.from_json(json.load(fh))


def simulate(family: QuadraticFamily, K: int, x0=None) -> list:
    """Exact projected-gradient trajectory ``[x(0), ..., x(K)]`` of stacked states."""
    x = [v for s in (x0 or family.x0) for v in s]
    traj = [list(x)]
    for k in range(K):
        g = family.step(k)
        z = [x[family.flat(lab)] - g * family.gradient(lab, x) for lab in family.labels]
        x = []
        for j in range(1, family.N + 1):
            x.extend(family.feasible[j - 1].project([z[c] for c in family.coords(j)]))
        traj.append(list(x))
    return traj


def _trajectory(run) -> list:
    if hasattr(run, "trajectory") and hasattr(run, "stacked"):
        return [[v.to_fraction() for v in run.stacked(k)] for k in range(len(run.trajectory))]
    return [[_frac(v) for v in x] for x in run]


# stacking ----------------------------------------------------------------------------
@dataclass(frozen=True)
class StackedMatrix:
    """Quadratic block rows stacked over the non-adversary blocks, then known-constant affine rows.

    ``row_labels`` entries are ``("H", (j, l), v, r)`` for the row of state
    coordinate ``r`` in the block of agent ``v``, or ``("A", (j, l))``.
    ``col_labels`` entries are ``(agent, coordinate)`` with 1-based agent.
    """

    adversary: int
    rows: tuple
    row_labels: tuple
    col_labels: tuple

    @property
    def ncols(self) -> int:
        return len(self.col_labels)

    def h_block(self) -> list:
        return [list(r) for r, lab in zip(self.rows, self.row_labels) if lab[0] == "H"]

    def a_block(self) -> list:
        return [list(r) for r, lab in zip(self.rows, self.row_labels) if lab[0] == "A"]

    def a_labels(self) -> list:
        return [lab[1] for lab in self.row_labels if lab[0] == "A"]


def stack_for_adversary(family: QuadraticFamily, i: int) -> StackedMatrix:
    if not 1 <= i <= family.N:
        raise DimensionMismatch(f"no agent {i}")
    others = [v for v in range(1, family.N + 1) if v != i]
    cols = [c for v in others for c in family.coords(v)]
    col_labels = tuple((v, c - family.offset(v)) for v in others for c in family.coords(v))
    col_pos = {c: p for p, c in enumerate(cols)}
    rows, labels = [], []
    for lab in family.labels:
        H = family.h(lab)
        for v in others:
            vcols = list(family.coords(v))
            for r in range(family.n):
                row = [ZERO] * len(cols)
                if H is not None:
                    # block (u, v) of H + H^T restricted to row r
                    for c in vcols:
                        row[col_pos[c]] = H[r][c] + H[c][r]
                rows.append(tuple(row))
                labels.append(("H", lab, v, r))
    for lab in family.labels:
        if lab in family.knows[i]:
            a = family.a(lab)
            rows.append(tuple(a[c] for c in cols))
            labels.append(("A", lab))
    return StackedMatrix(i, tuple(rows), tuple(labels), col_labels)


# null vectors --------------------------------------------------------------------------
@dataclass(frozen=True)
class NotFound:
    """No null vector without zero entries. ``forced_zero`` lists coordinates every null vector zeroes."""

    reason: str
    forced_zero: tuple = ()

    def __bool__(self):
        return False


def _matrix_and_width(M):
    if isinstance(M, StackedMatrix):
        return [list(r) for r in M.rows], M.ncols
    rows = [list(r) for r in M]
    return rows, (len(rows[0]) if rows else 0)


def find_allnonzero_nullvector(M, ncols: int | None = None):
    """Null vector with every entry nonzero, as coprime integers, or :class:`NotFound`.

    Tries the combinations ``b1 + t b2 + t^2 b3 + ...`` of the null basis for
    ``t = 1, 2, ...``. Each coordinate is a nonzero polynomial in ``t`` unless
    the whole null space vanishes there, so a candidate without zeros turns
    up after at most ``(basis size - 1) * width + 1`` values of ``t``.
    """
    rows, width = _matrix_and_width(M)
    if ncols is not None:
        width = ncols
    if width == 0:
        return NotFound("no unknown coordinates")
    basis = linalg.nullspace(rows, width)
    if not basis:
        return NotFound("null space is trivial")
    forced = tuple(c for c in range(width) if all(b[c] == 0 for b in basis))
    if forced:
        return NotFound(f"every null vector vanishes at coordinate(s) {list(forced)}", forced)
    limit = (len(basis) - 1) * width + 1
    for t in range(1, limit + 1):
        v = [ZERO] * width
        for p, b in enumerate(basis):
            w = Fraction(t) ** p
            v = [a + w * x for a, x in zip(v, b)]
        if all(v):
            return linalg.primitive(v)
    raise AssertionError("unreachable: polynomial root bound exceeded")  # pragma: no cover


# shadow instances ------------------------------------------------------------------------
@dataclass(frozen=True)
class ShadowInstance:
    adversary: int
    delta: tuple  # full stacked perturbation, zero on the adversary's block
    trajectory: tuple  # shifted states x(k) + delta
    feasible: tuple  # per-agent sets, shifted for everyone but the adversary
    constants: Mapping  # adjusted B for every label the adversary does not know

    def constant(self, family: QuadraticFamily, label) -> Fraction:
        return self.constants[label] if label in self.constants else family.b(label)


def _full_delta(family: QuadraticFamily, i: int, delta) -> list:
    delta = [_frac(v) for v in delta]
    mine = family.coords(i)
    if len(delta) == family.n:
        if any(delta[c] for c in mine):
            raise InvalidDelta(f"perturbation must be zero on adversary {i}'s coordinates")
        return delta
    if len(delta) == family.n - family.dims[i - 1]:
        it = iter(delta)
        return [ZERO if c in mine else next(it) for c in range(family.n)]
    raise InvalidDelta(f"perturbation has length {len(delta)}")


def _others(family, i, v) -> list:
    return [v[c] for j in range(1, family.N + 1) if j != i for c in family.coords(j)]


def check_delta(family: QuadraticFamily, i: int, delta, M: StackedMatrix | None = None) -> list:
    """Validate a perturbation and return it in full stacked form.

    All-zero is accepted as the degenerate identity shadow; otherwise every
    non-adversary entry must be nonzero and the stacked matrix must map it to zero.
    """
    full = _full_delta(family, i, delta)
    rest = _others(family, i, full)
    if any(rest):
        if not all(rest):
            raise InvalidDelta("every entry of a non-adversary perturbation must be nonzero")
        M = M or stack_for_adversary(family, i)
        if any(linalg.matvec(M.rows, rest)):
            raise InvalidDelta("perturbation is not in the null space of the stacked matrix")
    return full


def construct_shadow(family: QuadraticFamily, i: int, delta, true_run) -> ShadowInstance:
    full = check_delta(family, i, delta)
    traj = _trajectory(true_run)
    shifted = tuple(tuple(v + d for v, d in zip(x, full)) for x in traj)
    feasible = tuple(
        f if j == i else f.shifted([full[c] for c in family.coords(j)])
        for j, f in enumerate(family.feasible, start=1)
    )
    constants = {}
    for lab in family.unknown(i):
        constants[lab] = family.b(lab) - sum((a * d for a, d in zip(family.a(lab), full)), ZERO)
    return ShadowInstance(i, tuple(full), shifted, feasible, constants)


@dataclass(frozen=True)
class ShadowCheck:
    ok: bool
    violation: str | None = None

    def __bool__(self):
        return self.ok


def verify_shadow(family: QuadraticFamily, i: int, shadow: ShadowInstance, true_run, K: int | None = None) -> ShadowCheck:
    """Exact check that the shadow instance is indistinguishable to adversary ``i``.

    Checks, for every step: the adversary's own states are unchanged; every
    shadow state lies in its shifted set; every other agent's shadow update
    follows its rule (known constants kept, unknown ones adjusted); and the
    adversary's own gradient values are reproduced.
    """
    truth = _trajectory(true_run)
    if K is None:
        K = len(truth) - 1
    if len(truth) < K + 1 or len(shadow.trajectory) < K + 1:
        return ShadowCheck(False, f"trajectories shorter than {K + 1} steps")
    mine = family.coords(i)
    for k in range(K + 1):
        xt, xs = truth[k], list(shadow.trajectory[k])
        if any(xs[c] != xt[c] for c in mine):
            return ShadowCheck(False, f"step {k}: adversary's own state differs")
        for j in range(1, family.N + 1):
            if not shadow.feasible[j - 1].contains([xs[c] for c in family.coords(j)]):
                return ShadowCheck(False, f"step {k}: agent {j} state outside its shifted set")
        for l in range(1, family.dims[i - 1] + 1):
            lab = (i, l)
            if family.gradient(lab, xs, shadow.constant(family, lab)) != family.gradient(lab, xt):
                kind = "known" if lab in family.knows[i] else "unknown"
                return ShadowCheck(False, f"step {k}: observed gradient {lab} ({kind} constant) differs")
        if k == K:
            break
        g = family.step(k)
        nxt = list(shadow.trajectory[k + 1])
        for j in range(1, family.N + 1):
            if j == i:
                continue
            coords = list(family.coords(j))
            z = [
                xs[c] - g * family.gradient((j, c - coords[0] + 1), xs, shadow.constant(family, (j, c - coords[0] + 1)))
                for c in coords
            ]
            if shadow.feasible[j - 1].project(z) != [nxt[c] for c in coords]:
                kind = "known" if any((j, l) in family.knows[i] for l in range(1, len(coords) + 1)) else "unknown"
                return ShadowCheck(False, f"step {k}: agent {j} update inconsistent ({kind} constants)")
    return ShadowCheck(True)


# unboundedness ladder ----------------------------------------------------------------------
DEFAULT_LADDER = (1, 10, 10**3, 10**6)


@dataclass
class Rung:
    scale: Fraction
    verified: bool
    violation: str | None
    squared_distance: dict  # agent -> exact ||r delta_j - delta_j||^2

    def distance(self, agent: int) -> float:
        return math.sqrt(self.squared_distance[agent])


@dataclass
class UncertaintyReport:
    adversary: int
    guaranteed: bool
    witness: list | None
    rungs: list
    reason: str = ""

    @property
    def all_verified(self) -> bool:
        return self.guaranteed and all(r.verified for r in self.rungs)

    @property
    def verdict(self) -> str:
        if self.guaranteed:
            return "guaranteed resistant: null-space condition holds, uncertainty unbounded along the witness ray"
        return "no guarantee from the null-space test"

    def to_json(self) -> dict:
        return {
            "adversary": self.adversary,
            "verdict": self.verdict,
            "guaranteed": self.guaranteed,
            "reason": self.reason,
            "witness": None if self.witness is None else [str(v) for v in self.witness],
            "rungs": [
                {
                    "scale": str(r.scale),
                    "verified": r.verified,
                    "violation": r.violation,
                    "distance": {str(j): r.distance(j) for j in r.squared_distance},
                }
                for r in self.rungs
            ],
        }

    def to_text(self) -> str:
        lines = [f"adversary {self.adversary}: {self.verdict}"]
        if self.reason:
            lines.append(f"  {self.reason}")
        if self.witness is not None:
            lines.append("  witness delta: " + " ".join(str(v) for v in self.witness))
        for r in self.rungs:
            dist = ", ".join(f"agent {j}: {r.distance(j):.6g}" for j in r.squared_distance)
            lines.append(f"  r={r.scale}: {'verified' if r.verified else 'FAILED ' + str(r.violation)}; {dist}")
        return "\n".join(lines)


def uncertainty_report(
    family: QuadraticFamily,
    i: int,
    base_delta=None,
    true_run=None,
    K: int = 3,
    ladder: Sequence = DEFAULT_LADDER,
) -> UncertaintyReport:
    """Verify the shadow at every scale in ``ladder`` and report how far the shadow states move.

    ``base_delta`` defaults to the witness from :func:`find_allnonzero_nullvector`;
    ``true_run`` defaults to simulating ``K`` steps from the family's initial state.
    """
    M = stack_for_adversary(family, i)
    if base_delta is None:
        found = find_allnonzero_nullvector(M)
        if isinstance(found, NotFound):
            return UncertaintyReport(i, False, None, [], found.reason)
        base_delta = found
    full = check_delta(family, i, base_delta, M)
    if not any(_others(family, i, full)):
        raise InvalidDelta("the zero perturbation witnesses nothing")
    truth = _trajectory(true_run) if true_run is not None else simulate(family, K)
    steps = len(truth) - 1
    rungs = []
    for r in ladder:
        r = _frac(r)
        if r == 0:
            raise InvalidDelta("scale must be nonzero")
        scaled = [r * d for d in full]
        shadow = construct_shadow(family, i, scaled, truth)
        check = verify_shadow(family, i, shadow, truth, steps)
        sq = {
            j: sum(((r - 1) * full[c]) ** 2 for c in family.coords(j))
            for j in range(1, family.N + 1)
            if j != i
        }
        rungs.append(Rung(r, check.ok, check.violation, sq))
    return UncertaintyReport(i, True, _others(family, i, full), rungs)


# planted families for testing and demos ---------------------------------------------------
def planted_family(rng: random.Random, dims: Sequence[int], adversary: int, quadratic: bool = True, K_gamma=Fraction(1, 64)):
    """Random family with a known all-nonzero null vector for ``adversary``.

    Returns ``(family, delta)`` with ``delta`` in full stacked form. Quadratic
    weights are built from symmetric rank-two terms ``a b^T + b a^T`` where
    each non-adversary block of ``a`` and ``b`` is orthogonal to that block of
    ``delta``; affine rows with known constants are corrected to annihilate ``delta``.
    """
    dims = tuple(dims)
    probe = QuadraticFamily(dims)
    n = probe.n
    mine = set(probe.coords(adversary))

    def small():
        v = 0
        while v == 0:
            v = rng.randint(-5, 5)
        return Fraction(v)

    delta = [ZERO if c in mine else small() for c in range(n)]

    def orthogonal_vector():
        v = [Fraction(rng.randint(-3, 3)) for _ in range(n)]
        for j in range(1, len(dims) + 1):
            if j == adversary:
                continue
            cs = list(probe.coords(j))
            dot = sum((v[c] * delta[c] for c in cs), ZERO)
            v[cs[-1]] -= dot / delta[cs[-1]]
        return v

    H, A, B, knows = {}, {}, {}, {}
    for j in range(1, len(dims) + 1):
        knows[j] = [(j, l) for l in range(1, dims[j - 1] + 1)]
    # the adversary also knows a random extra subset of constants
    for lab in probe.labels:
        if lab[0] != adversary and rng.random() < 0.3:
            knows[adversary].append(lab)
    for lab in probe.labels:
        if quadratic:
            a, b = orthogonal_vector(), orthogonal_vector()
            s = Fraction(1, rng.randint(4, 16))
            H[lab] = [[s * (a[r] * b[c] + b[r] * a[c]) / 2 for c in range(n)] for r in range(n)]
        row = [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(n)]
        if lab in knows[adversary]:
            nz = [c for c in range(n) if c not in mine]
            dot = sum((row[c] * delta[c] for c in nz), ZERO)
            row[nz[-1]] -= dot / delta[nz[-1]]
        A[lab] = row
        B[lab] = Fraction(rng.randint(-20, 20), rng.randint(1, 4))
    x0 = tuple(tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 3)) for _ in range(d)) for d in dims)
    feasible = []
    for j, d in enumerate(dims, start=1):
        kind = rng.choice(("reals", "orthant", "box"))
        xs = x0[j - 1]
        if kind == "reals":
            feasible.append(RationalBox.unbounded(d))
        elif kind == "orthant":
            feasible.append(RationalBox(tuple(min(ZERO, v) for v in xs), (None,) * d))
        else:
            feasible.append(RationalBox(tuple(v - 5 for v in xs), tuple(v + 5 for v in xs)))
    fam = QuadraticFamily(dims, H, A, B, knows, x0, tuple(feasible), K_gamma)
    return fam, delta


# the linear reconstruction attack -----------------------------------------------------------
@dataclass
class AttackResult:
    status: str  # "unique" | "underdetermined" | "inconsistent"
    solution: dict | None  # flat index -> value, when unique
    rank: int
    unknowns: list  # flat indices of the other agents' coordinates at the first observed step
    equations: list  # rows [coefficients..., right-hand side]
    degenerate_directions: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "rank": self.rank,
            "unknowns": self.unknowns,
            "solution": None if self.solution is None else {str(k): str(v) for k, v in self.solution.items()},
            "degenerate_directions": [[str(v) for v in d] for d in self.degenerate_directions],
        }


def _affine_step_matrix(family: QuadraticFamily, k: int):
    """``x(k+1) = S x(k) + s`` for an unconstrained affine family."""
    n = family.n
    g = family.step(k)
    S = [[(ZERO if r != c else Fraction(1)) for c in range(n)] for r in range(n)]
    s = [ZERO] * n
    for lab in family.labels:
        r = family.flat(lab)
        a = family.a(lab)
        for c in range(n):
            S[r][c] -= g * a[c]
        s[r] = -g * family.b(lab)
    return S, s


def linear_attack(family: QuadraticFamily, adversary: int, observations: Sequence, start: int = 0) -> AttackResult:
    """Solve for the other agents' states at step ``start`` from the adversary's own trajectory.

    ``observations`` are the adversary's states at steps ``start``,
    ``start + 1``, ... . The family must be affine and unconstrained with all
    weights and constants known to the adversary, so every observed step
    gives linear equations in the unknown states.
    """
    if not family.is_affine():
        raise ValidationError("the linear attack needs affine gradients")
    if any(not f.is_unbounded for f in family.feasible):
        raise ValidationError("the linear attack assumes unconstrained states")
    if not 1 <= adversary <= family.N:
        raise MalformedObservations(f"no agent {adversary}")
    mine = list(family.coords(adversary))
    obs = []
    for t, o in enumerate(observations):
        o = [_frac(v) for v in o]
        if len(o) != len(mine):
            raise MalformedObservations(f"observation {t} has {len(o)} entries, agent has {len(mine)}")
        obs.append(o)
    n = family.n
    unknowns = [c for c in range(n) if c not in set(mine)]
    # propagate x(start + t) = P x(start) + p symbolically
    P = [[Fraction(int(r == c)) for c in range(n)] for r in range(n)]
    p = [ZERO] * n
    equations = []
    for t in range(1, len(obs)):
        S, s = _affine_step_matrix(family, start + t - 1)
        P = [[sum((S[r][m] * P[m][c] for m in range(n)), ZERO) for c in range(n)] for r in range(n)]
        p = [sum((S[r][m] * p[m] for m in range(n)), ZERO) + s[r] for r in range(n)]
        for q, r in enumerate(mine):
            known = sum((P[r][c] * obs[0][mine.index(c)] for c in mine), ZERO) + p[r]
            equations.append([P[r][c] for c in unknowns] + [obs[t][q] - known])

    width = len(unknowns)
    coeffs = [row[:width] for row in equations]
    rk = linalg.rank(coeffs, width) if coeffs else 0
    aug_rank = linalg.rank(equations, width + 1) if equations else 0
    if aug_rank > rk:
        return AttackResult("inconsistent", None, rk, unknowns, equations)
    if rk < width:
        directions = [linalg.primitive(v) for v in linalg.nullspace(coeffs, width)] if coeffs else [
            [Fraction(int(a == b)) for b in range(width)] for a in range(width)
        ]
        return AttackResult("underdetermined", None, rk, unknowns, equations, directions)
    R, pivots = linalg.rref(equations, width + 1)
    solution = {unknowns[c]: R[r][width] for r, c in enumerate(pivots)}
    return AttackResult("unique", solution, rk, unknowns, equations)


# the three-agent illustrative systems -------------------------------------------------------
def three_agent_example(modified: bool = False) -> QuadraticFamily:
    """Scalar agents, unit steps, unconstrained, every weight public.

    Default: gradients ``-x2-x3``, ``-2x3``, ``-x1``. Modified:
    ``-x2-x3``, ``x2-x1-x3``, ``x3-x1-x2``.
    """
    if modified:
        A = {(1, 1): (0, -1, -1), (2, 1): (-1, 1, -1), (3, 1): (-1, -1, 1)}
    else:
        A = {(1, 1): (0, -1, -1), (2, 1): (0, 0, -2), (3, 1): (-1, 0, 0)}
    everything = [(1, 1), (2, 1), (3, 1)]
    return QuadraticFamily((1, 1, 1), A=A, knows={1: everything, 2: everything, 3: everything})
