import math

import numpy as np
import pytest

from dpunfair.data_model import FairnessCriterion
from dpunfair.dp import INF, make_rng
from dpunfair.mi_tvd import tvd_sensitivity, u_mi, u_tvd, u_tvd_dp
from dpunfair.synth import INCOME, SEX, GapSpec, synth_polarized
from oracles import COND, UNCOND, fair_rows, make_db, random_rows

POLARIZED = make_db([[0, 1, 0], [0, 1, 0], [1, 0, 0], [1, 0, 0]])


def test_polarized_values():
    assert u_tvd(UNCOND, POLARIZED) == pytest.approx(0.5)
    assert u_mi(UNCOND, POLARIZED) == pytest.approx(math.log(2))
    # sandwich with alpha = 1/4
    assert 0.25 * math.log(2) <= u_tvd(UNCOND, POLARIZED) <= math.log(2)


def test_gap_zero_synthetic_is_fair():
    db = synth_polarized(GapSpec(1000, 0.0))
    f = FairnessCriterion(SEX, INCOME)
    assert u_mi(f, db) < 1e-12
    assert u_tvd(f, db) < 1e-12


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("f", [UNCOND, COND], ids=["uncond", "cond"])
def test_fair_db_is_zero(seed, f):
    db = make_db(fair_rows(np.random.default_rng(seed), f.conditional))
    assert u_tvd(f, db) < 1e-12
    assert u_mi(f, db) < 1e-12


def test_conditional_uses_weighted_group_tvd():
    # group 0 polarized (tvd 1/2), group 1 fair; Pr(a=0) = 4/8
    rows = [[0, 1, 0], [0, 1, 0], [1, 0, 0], [1, 0, 0], [0, 0, 1], [0, 1, 1], [1, 0, 1], [1, 1, 1]]
    assert u_tvd(COND, make_db(rows)) == pytest.approx(2 * (0.5 * 0.5) ** 2)


def test_range():
    rng = np.random.default_rng(0)
    for _ in range(50):
        db = make_db(random_rows(rng, 30))
        assert 0 <= u_tvd(COND, db) <= 2


def test_sensitivity_values():
    assert tvd_sensitivity([UNCOND], 100) == 0.16
    assert tvd_sensitivity([UNCOND, COND], 100) == 0.32
    assert tvd_sensitivity([UNCOND], 100, tight_unconditional=True) == 0.12
    assert tvd_sensitivity([UNCOND, COND], 100, tight_unconditional=True) == 0.32


def test_dp_infinite_budget_is_exact():
    res = u_tvd_dp([UNCOND], POLARIZED, INF, make_rng(0))
    assert res.noisy == res.exact == pytest.approx(0.5)
    assert res.scale == 0
    assert res.range_max == 2


def test_dp_two_criteria_sum_and_scale():
    db = make_db(random_rows(np.random.default_rng(4), 50))
    one = u_tvd_dp([UNCOND], db, 1.0, make_rng(0))
    two = u_tvd_dp([UNCOND, COND], db, 1.0, make_rng(0))
    assert two.exact == pytest.approx(u_tvd(UNCOND, db) + u_tvd(COND, db))
    assert two.scale == pytest.approx(2 * one.scale)
    assert one.scale == pytest.approx(16 / 50)


def test_dp_reproducible():
    a = u_tvd_dp([UNCOND], POLARIZED, 0.5, make_rng(42))
    b = u_tvd_dp([UNCOND], POLARIZED, 0.5, make_rng(42))
    assert a.noisy == b.noisy


def test_dp_rejects_bad_epsilon():
    with pytest.raises(ValueError):
        u_tvd_dp([UNCOND], POLARIZED, 0.0, make_rng(0))
    with pytest.raises(ValueError):
        u_tvd_dp([], POLARIZED, 1.0, make_rng(0))
