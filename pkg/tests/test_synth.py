import math

import numpy as np
import pytest

from dpunfair.data_model import DataError, FairnessCriterion, from_records
from dpunfair.mi_tvd import u_mi, u_tvd
from dpunfair.repair import u_repair
from dpunfair.synth import INCOME, SEX, SHUFFLED, GapSpec, csp_gap, dp_gap, positives, synth_polarized
from dpunfair.topk import u_tc

F = FairnessCriterion(SEX, INCOME)


@pytest.mark.parametrize("n", [4, 10, 1000, 1002])
@pytest.mark.parametrize("gap", [0.0, 0.1, 0.33, 0.5, 1.0])
def test_exact_counts(n, gap):
    db = synth_polarized(GapSpec(n, gap))
    sex, inc = db.column(SEX), db.column(INCOME)
    assert (sex == 0).sum() == (sex == 1).sum() == n // 2
    pos_m, pos_f = positives(GapSpec(n, gap))
    assert inc[sex == 0].sum() == pos_m == round(n / 2 * (0.5 + gap / 2))
    assert inc[sex == 1].sum() == pos_f == round(n / 2 * (0.5 - gap / 2))
    assert abs(dp_gap(db, SEX, INCOME) - gap) <= 2 / n + 1e-12


def test_gap_zero_is_fair():
    db = synth_polarized(GapSpec(1000, 0.0))
    assert u_tvd(F, db) == 0
    assert u_tc(F, db, 500) == 0
    assert u_repair([F], db, 100) == 0


def test_gap_one_is_polarized():
    db = synth_polarized(GapSpec(1000, 1.0))
    assert u_tvd(F, db) == pytest.approx(0.5)
    assert u_mi(F, db) == pytest.approx(math.log(2))


def test_deterministic_and_shuffled_layout():
    a = synth_polarized(GapSpec(100, 0.3))
    assert a == synth_polarized(GapSpec(100, 0.3))
    s = synth_polarized(GapSpec(100, 0.3, seed=5, layout=SHUFFLED))
    assert sorted(map(tuple, s.rows.tolist())) == sorted(map(tuple, a.rows.tolist()))
    assert s == synth_polarized(GapSpec(100, 0.3, seed=5, layout=SHUFFLED))


@pytest.mark.parametrize("spec", [(3, 0.1), (2, 0.1), (10, -0.1), (10, 1.5)])
def test_invalid_spec(spec):
    with pytest.raises(DataError):
        GapSpec(*spec)


def test_dp_gap_single_group_is_zero():
    db = from_records(["s", "o"], [["M", "1"], ["M", "0"]])
    assert dp_gap(db, "s", "o") == 0


def test_dp_gap_non_binary_outcome():
    db = from_records(["s", "o"], [["M", "1"], ["F", "0"], ["F", "2"]])
    with pytest.raises(DataError):
        dp_gap(db, "s", "o")


def test_csp_gap_weighted_average():
    # two equal groups with gaps 0.2 and 0.4
    recs = []
    for a, pm, pf in (("x", 6, 4), ("y", 7, 3)):
        recs += [["M", "1", a]] * pm + [["M", "0", a]] * (10 - pm)
        recs += [["F", "1", a]] * pf + [["F", "0", a]] * (10 - pf)
    db = from_records(["s", "o", "a"], recs)
    assert csp_gap(db, "s", "o", "a") == pytest.approx(0.3)


def test_csp_gap_single_group_equals_dp_gap():
    db = synth_polarized(GapSpec(100, 0.4))
    recs = [row + ["g"] for row in db.decoded_rows()]
    db2 = from_records([SEX, INCOME, "a"], recs)
    assert csp_gap(db2, SEX, INCOME, "a") == pytest.approx(dp_gap(db, SEX, INCOME))


def test_csp_gap_missing_protected_value():
    db = from_records(["s", "o", "a"], [["M", "1", "x"], ["F", "0", "x"], ["M", "0", "y"]])
    with pytest.raises(DataError):
        csp_gap(db, "s", "o", "a")


def test_chunked_repair_is_linear_in_gap():
    # a fraction g of the 100-row chunks ends up fully polarized, each costing 2
    values = [u_repair([F], synth_polarized(GapSpec(2000, g / 10)), 100) for g in range(11)]
    assert values == [4 * g for g in range(11)]
