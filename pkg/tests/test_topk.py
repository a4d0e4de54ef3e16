from fractions import Fraction

import numpy as np
import pytest

from dpunfair.data_model import DataError
from dpunfair.dp import INF, make_rng
from dpunfair.mi_tvd import criterion_tvd
from dpunfair.prob import contingency
from dpunfair.topk import cell_md, marginal_difference, tc_sensitivity, top_k, tuple_md, u_tc, u_tc_dp
from oracles import COND, UNCOND, fair_rows, make_db, md_oracle, random_rows, topk_oracle, triples

POLARIZED = make_db([[0, 1, 0], [0, 1, 0], [1, 0, 0], [1, 0, 0]])


def test_polarized_md():
    assert tuple_md(UNCOND, POLARIZED).tolist() == [0.25] * 4
    assert marginal_difference(UNCOND, POLARIZED, 2) == 0.25


def test_polarized_topk():
    assert u_tc(UNCOND, POLARIZED, 2) == 0.5
    assert u_tc(UNCOND, POLARIZED, 4) == 1.0


def test_k_out_of_range():
    with pytest.raises(DataError):
        u_tc(UNCOND, POLARIZED, 0)
    with pytest.raises(DataError):
        u_tc(UNCOND, POLARIZED, 5)


def test_unknown_tuple_id():
    with pytest.raises(DataError):
        marginal_difference(UNCOND, POLARIZED, 99)


def test_singleton_group_rejected():
    db = make_db([[0, 0, 0], [1, 1, 0], [0, 1, 1]])
    with pytest.raises(DataError, match="at least twice"):
        u_tc(COND, db, 1)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("f", [UNCOND, COND], ids=["uncond", "cond"])
def test_fair_db_zero(seed, f):
    db = make_db(fair_rows(np.random.default_rng(seed), f.conditional))
    if f.conditional and min(contingency(db, f).group_sizes.values()) < 2:
        pytest.skip("singleton group")
    assert u_tc(f, db, db.n) == 0


def _db_with_groups(rng, n):
    # every admissible value at least twice
    rows = random_rows(rng, n)
    rows[:, 2] = np.sort(np.repeat(rng.integers(0, 3, (n + 1) // 2), 2)[:n])
    return rows[rng.permutation(n)]


@pytest.mark.parametrize("seed", range(30))
@pytest.mark.parametrize("f", [UNCOND, COND], ids=["uncond", "cond"])
def test_matches_fraction_oracle(seed, f):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 60))
    ids = rng.permutation(1000)[:n]
    db = make_db(_db_with_groups(rng, n), ids=ids)
    ts = triples(db, f)
    md = md_oracle(ts)
    np.testing.assert_allclose(tuple_md(f, db), [float(x) for x in md], atol=1e-15)
    k = int(rng.integers(1, n + 1))
    value, top = topk_oracle(ts, db.ids.tolist(), k)
    got, got_ids = top_k(f, db, k)
    assert got == pytest.approx(float(value), abs=1e-12)
    assert got_ids.tolist() == top


def test_ties_by_ascending_id():
    db = make_db([[0, 1, 0], [0, 1, 0], [1, 0, 0], [1, 0, 0]], ids=[7, 3, 9, 1])
    assert top_k(UNCOND, db, 3)[1].tolist() == [1, 3, 7]


def test_equal_values_different_ids_both_counted():
    db = make_db([[0, 1, 0], [0, 1, 0], [1, 0, 0], [1, 0, 0]])
    _, ids = top_k(UNCOND, db, 2)
    assert ids.tolist() == [0, 1]


@pytest.mark.parametrize("seed", range(10))
def test_monotone_in_k(seed):
    db = make_db(random_rows(np.random.default_rng(seed), 50))
    values = [u_tc(UNCOND, db, k) for k in range(1, 51)]
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert values[-1] <= 50 / 4


@pytest.mark.parametrize("seed", range(20))
def test_sum_over_tuples_relates_to_tvd(seed):
    rng = np.random.default_rng(seed)
    db = make_db(random_rows(rng, int(rng.integers(10, 80)), sizes=(3, 2, 1)))
    t = contingency(db, UNCOND)
    ts = triples(db, UNCOND)
    md = md_oracle(ts)
    # sum over tuples equals sum over cells of count * |joint - product|
    per_cell = {}
    for cell, m in zip(ts, md):
        per_cell.setdefault(cell, []).append(m)
    total = sum(md, Fraction(0))
    assert total == sum(len(v) * v[0] for v in per_cell.values())
    np.testing.assert_allclose(sorted(cell_md(t)), sorted(float(v[0]) for v in per_cell.values()))
    full = len(set(t.p.tolist())) * len(set(t.y.tolist())) == len(t.count)
    if full:
        assert float(total) >= 2 * criterion_tvd(UNCOND, db) - 1e-12


def test_sensitivity_branches():
    assert tc_sensitivity([UNCOND], 100, 10) == pytest.approx(0.3)
    assert tc_sensitivity([UNCOND, COND], 100, 10) == pytest.approx(1.4)


def test_dp_release():
    res = u_tc_dp([UNCOND], POLARIZED, 2, INF, make_rng(0))
    assert res.noisy == res.exact == 0.5
    assert res.top_ids == [[0, 1]]
    assert res.range_max == 0.5
    res = u_tc_dp([UNCOND], POLARIZED, 2, 1.0, make_rng(0))
    assert res.scale == pytest.approx(1.5)
