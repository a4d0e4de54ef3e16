import numpy as np
import pytest

from dpunfair.maxsat import (
    BUDGET_EXCEEDED,
    INFEASIBLE,
    OPTIMAL,
    CnfInstance,
    brute_force,
    export_wdimacs,
    parse_wdimacs,
    random_instance,
    satisfies_hard,
    solve,
    violated_weight,
)
from oracles import maxsat_oracle

# polarized instance: x1=(M,1) w2, x2=(M,0) neg, x3=(F,1) neg, x4=(F,0) w2
POLARIZED = CnfInstance(
    4,
    hard=[(-1, -4, 2), (-4, -1, 3)],
    soft=[(1, 2), (-2, 1), (-3, 1), (4, 2)],
)


def test_polarized_optimum():
    out = solve(POLARIZED)
    assert out.status == OPTIMAL
    assert out.violated_weight == 2
    assert brute_force(POLARIZED).violated_weight == 2
    assert maxsat_oracle(4, POLARIZED.hard, POLARIZED.soft) == 2


def test_no_soft_literals():
    inst = CnfInstance(3, hard=[(1, 2), (-1, 3)])
    assert solve(inst).violated_weight == 0


def test_empty_instance():
    assert brute_force(CnfInstance(0)).violated_weight == 0
    assert solve(CnfInstance(0)).violated_weight == 0


def test_forced_assignment():
    inst = CnfInstance(1, hard=[(1,)], soft=[(-1, 3)])
    assert brute_force(inst).violated_weight == 3
    assert solve(inst).violated_weight == 3


def test_infeasible():
    inst = CnfInstance(1, hard=[(1,), (-1,)], soft=[(1, 1)])
    assert solve(inst).status == INFEASIBLE
    assert brute_force(inst).status == INFEASIBLE


def test_budget_exceeded():
    inst = random_instance(np.random.default_rng(0), 14, 10, 30)
    assert solve(inst, budget=1).status == BUDGET_EXCEEDED


def test_validation():
    with pytest.raises(ValueError):
        CnfInstance(2, hard=[(3,)]).validate()
    with pytest.raises(ValueError):
        CnfInstance(2, soft=[(1, 0)]).validate()
    with pytest.raises(ValueError):
        CnfInstance(2, hard=[()]).validate()


def test_brute_force_size_limit():
    with pytest.raises(ValueError):
        brute_force(CnfInstance(21))


@pytest.mark.parametrize("seed", range(100))
def test_solve_matches_oracles(seed):
    rng = np.random.default_rng(seed)
    nv = int(rng.integers(1, 11))
    inst = random_instance(rng, nv, int(rng.integers(0, 3 * nv)), int(rng.integers(0, 2 * nv + 1)))
    expected = maxsat_oracle(nv, inst.hard, inst.soft)
    out, bf = solve(inst), brute_force(inst)
    if expected is None:
        assert out.status == bf.status == INFEASIBLE
        return
    assert out.violated_weight == bf.violated_weight == expected
    assert satisfies_hard(inst, out.assignment)
    assert violated_weight(inst, out.assignment) == out.violated_weight


@pytest.mark.parametrize("seed", range(20))
def test_raising_a_soft_weight_never_lowers_optimum(seed):
    rng = np.random.default_rng(100 + seed)
    inst = random_instance(rng, 8, 10, 12)
    base = solve(inst)
    if base.status != OPTIMAL or not inst.soft:
        return
    i = int(rng.integers(len(inst.soft)))
    soft = list(inst.soft)
    soft[i] = (soft[i][0], soft[i][1] + int(rng.integers(1, 4)))
    assert solve(CnfInstance(inst.num_vars, inst.hard, soft)).violated_weight >= base.violated_weight


def test_wdimacs_polarized():
    text = export_wdimacs(POLARIZED)
    lines = text.splitlines()
    assert lines[0] == "p wcnf 4 6 7"
    assert lines[1:3] == ["7 -1 -4 2 0", "7 -4 -1 3 0"]
    assert lines[3:] == ["2 1 0", "1 -2 0", "1 -3 0", "2 4 0"]


def test_wdimacs_no_soft_top_is_one():
    text = export_wdimacs(CnfInstance(2, hard=[(1, -2)]))
    assert text.splitlines() == ["p wcnf 2 1 1", "1 1 -2 0"]


@pytest.mark.parametrize("seed", range(20))
def test_wdimacs_round_trip(seed):
    inst = random_instance(np.random.default_rng(seed), 9, 12, 10)
    again = parse_wdimacs(export_wdimacs(inst))
    assert again.num_vars == inst.num_vars
    assert again.hard == inst.hard
    assert again.soft == inst.soft
