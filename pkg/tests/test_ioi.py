import json
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from hegrad import ioi, linalg
from hegrad.errors import DimensionMismatch, InvalidDelta, MalformedObservations, ValidationError

F = Fraction


def test_stacked_indexing_four_agents_three_coords():
    dims = (3, 3, 3, 3)
    rng = random.Random(0)
    n = 12
    H = {}
    for j in range(1, 5):
        for l in range(1, 4):
            H[(j, l)] = [[F(rng.randint(-3, 3)) for _ in range(n)] for _ in range(n)]
    fam = ioi.QuadraticFamily(dims, H=H, knows={2: [(2, 1), (2, 2), (2, 3), (4, 1)]})
    M = ioi.stack_for_adversary(fam, 2)
    assert M.col_labels == tuple((v, c) for v in (1, 3, 4) for c in range(3))
    assert len(M.h_block()) == 12 * 3 * n
    assert M.a_labels() == [(2, 1), (2, 2), (2, 3), (4, 1)]
    # row (label (3,2), block of agent 4, state row 5), column of agent 4 coordinate 1
    r = M.row_labels.index(("H", (3, 2), 4, 5))
    col = M.col_labels.index((4, 1))
    h = H[(3, 2)]
    assert M.rows[r][col] == h[5][10] + h[10][5]
    # entries outside agent 4's columns stay zero in that block
    assert all(M.rows[r][c] == 0 for c in range(9) if M.col_labels[c][0] != 4)
    assert fam.flat((3, 2)) == 7 and list(fam.coords(4)) == [9, 10, 11]
    assert set(fam.unknown(2)) == set(fam.labels) - set(M.a_labels())


matrices = st.integers(1, 4).flatmap(
    lambda rows: st.integers(1, 5).flatmap(
        lambda cols: st.lists(st.lists(st.integers(-3, 3), min_size=cols, max_size=cols), min_size=rows, max_size=rows)
    )
)


@settings(max_examples=80, deadline=None)
@given(matrices)
def test_nullspace_matches_sympy(rows):
    cols = len(rows[0])
    ours = linalg.nullspace(rows, cols)
    oracle = sympy.Matrix(rows).nullspace()
    assert len(ours) == len(oracle)
    assert linalg.rank(rows, cols) == sympy.Matrix(rows).rank()
    for v in ours:
        assert not any(linalg.matvec(rows, v))
    if ours:
        # same span: stacking both bases does not raise the rank
        both = [list(v) for v in ours] + [[F(int(x.p), int(x.q)) for x in v] for v in oracle]
        assert linalg.rank(both, cols) == len(ours)


@settings(max_examples=80, deadline=None)
@given(matrices)
def test_allnonzero_search_is_sound_and_complete(rows):
    cols = len(rows[0])
    found = ioi.find_allnonzero_nullvector(rows, cols)
    basis = sympy.Matrix(rows).nullspace()
    if isinstance(found, ioi.NotFound):
        # complete: no basis combination can avoid every zero only when a coordinate is forced
        forced = [c for c in range(cols) if all(b[c] == 0 for b in basis)]
        assert not basis or forced
    else:
        assert all(found) and not any(linalg.matvec(rows, found))
        assert all(v.denominator == 1 for v in found)


def test_first_example_not_found_and_forced_zero():
    M = ioi.stack_for_adversary(ioi.three_agent_example(), 1)
    assert ioi.find_allnonzero_nullvector(M).reason == "null space is trivial"
    res = ioi.find_allnonzero_nullvector([[1, 0, 0], [0, 1, -1]], 3)
    assert not res and res.forced_zero == (0,)


def test_check_delta_rejects_bad_perturbations():
    fam, delta = ioi.planted_family(random.Random(3), (2, 2, 1), 1)
    assert ioi.check_delta(fam, 1, delta) == delta
    with pytest.raises(InvalidDelta):
        ioi.check_delta(fam, 1, [F(1)] + delta[1:])  # touches the adversary
    partial = list(delta)
    partial[2] = F(0)
    with pytest.raises(InvalidDelta):
        ioi.check_delta(fam, 1, partial)
    with pytest.raises(InvalidDelta):
        ioi.check_delta(fam, 1, [F(1)] * 3)  # not in the null space (generically)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**9))
def test_planted_shadow_is_indistinguishable(seed):
    rng = random.Random(seed)
    N = rng.randint(2, 4)
    dims = [rng.randint(1, 3) for _ in range(N)]
    adversary = rng.randint(1, N)
    fam, delta = ioi.planted_family(rng, dims, adversary, quadratic=rng.random() < 0.5)
    truth = ioi.simulate(fam, 4)
    for scale in (1, -7, F(1, 3), 10**6):
        shadow = ioi.construct_shadow(fam, adversary, [scale * d for d in delta], truth)
        assert ioi.verify_shadow(fam, adversary, shadow, truth)


def test_verify_shadow_catches_wrong_constant():
    fam, delta = ioi.planted_family(random.Random(9), (1, 2, 2), 2, quadratic=False)
    truth = ioi.simulate(fam, 3)
    shadow = ioi.construct_shadow(fam, 2, delta, truth)
    assert ioi.verify_shadow(fam, 2, shadow, truth)
    label = next(iter(shadow.constants))
    broken = ioi.ShadowInstance(shadow.adversary, shadow.delta, shadow.trajectory, shadow.feasible,
                                {**shadow.constants, label: shadow.constants[label] + 1})
    check = ioi.verify_shadow(fam, 2, broken, truth)
    assert not check
    assert "inconsistent" in check.violation or "differs" in check.violation


def test_uncertainty_report_distances_grow():
    fam, delta = ioi.planted_family(random.Random(4), (2, 1, 2), 3)
    report = ioi.uncertainty_report(fam, 3, delta, K=3)
    assert report.all_verified and report.guaranteed
    d = [r.distance(1) for r in report.rungs]
    assert d[0] == 0 and d == sorted(d) and d[-1] > 1e5
    assert json.loads(json.dumps(report.to_json()))["guaranteed"] is True
    assert "r=1000000" in report.to_text()
    none = ioi.uncertainty_report(ioi.three_agent_example(), 1)
    assert not none.guaranteed and none.rungs == []


def test_family_json_roundtrip(tmp_path):
    fam, _ = ioi.planted_family(random.Random(5), (1, 2), 1)
    again = ioi.QuadraticFamily.from_json(json.loads(json.dumps(fam.to_json())))
    assert again == fam
    path = tmp_path / "fam.json"
    path.write_text(json.dumps(fam.to_json()))
    assert ioi.load_family(path) == fam


def test_bundled_families_load():
    from importlib.resources import files

    data = files("hegrad") / "data"
    first = ioi.QuadraticFamily.from_json(json.loads((data / "three_agent.json").read_text()))
    assert first.A == ioi.three_agent_example().A
    modified = ioi.QuadraticFamily.from_json(json.loads((data / "three_agent_modified.json").read_text()))
    assert modified.A == ioi.three_agent_example(True).A
    planted = ioi.QuadraticFamily.from_json(json.loads((data / "planted_quadratic.json").read_text()))
    assert ioi.find_allnonzero_nullvector(ioi.stack_for_adversary(planted, 1))


def test_family_validation():
    with pytest.raises(DimensionMismatch):
        ioi.QuadraticFamily((1, 1), A={(3, 1): (0, 0)})
    with pytest.raises(DimensionMismatch):
        ioi.QuadraticFamily((1, 1), A={(1, 1): (0, 0, 0)})
    with pytest.raises(ValidationError):
        ioi.QuadraticFamily((1,), gamma=0)


def test_attack_on_first_example_matches_simulation():
    fam = ioi.three_agent_example()
    traj = ioi.simulate(fam, 3, [(2,), (-5,), (7,)])
    result = ioi.linear_attack(fam, 1, [[x[0]] for x in traj])
    assert result.status == "unique" and result.solution == {1: -5, 2: 7}
    assert result.rank == 2


def test_attack_underdetermined_direction():
    fam = ioi.three_agent_example(modified=True)
    traj = ioi.simulate(fam, 5, [(1,), (2,), (3,)])
    result = ioi.linear_attack(fam, 1, [[x[0]] for x in traj])
    assert result.status == "underdetermined"
    (direction,) = result.degenerate_directions
    # moving x2 and x3 along the direction leaves agent 1's trajectory unchanged
    shifted = ioi.simulate(fam, 5, [(1,), (2 + direction[0],), (3 + direction[1],)])
    assert [x[0] for x in shifted] == [x[0] for x in traj]


def test_attack_input_checks():
    fam = ioi.three_agent_example()
    with pytest.raises(MalformedObservations):
        ioi.linear_attack(fam, 1, [[1, 2]])
    boxed = ioi.QuadraticFamily((1, 1), feasible=(ioi.RationalBox.orthant(1), ioi.RationalBox.orthant(1)))
    with pytest.raises(ValidationError):
        ioi.linear_attack(boxed, 1, [[0], [0]])


def test_attack_detects_inconsistent_observations():
    fam = ioi.three_agent_example()
    traj = ioi.simulate(fam, 4, [(1,), (1,), (1,)])
    obs = [[x[0]] for x in traj]
    obs[4] = [obs[4][0] + 1]
    assert ioi.linear_attack(fam, 1, obs).status == "inconsistent"
