"""Mutual-information unfairness and its TVD proxy, exact and private."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data_model import Database, FairnessCriterion
from .dp import NoiseSpec, add_noise, check_epsilon
from .prob import contingency, independence_tvd, mutual_information


def u_mi(f: FairnessCriterion, db: Database) -> float:
    """Conditional mutual information of the criterion, in nats. Not private."""
    return mutual_information(contingency(db, f))


def criterion_tvd(f: FairnessCriterion, db: Database) -> float:
    """``sum_a Pr(a) * TVD(Pr(P,Y|a), Pr(P|a)Pr(Y|a))``; a single term when unconditional."""
    t = contingency(db, f)
    _, tvd_g, n_g = independence_tvd(t)
    return float(np.dot(n_g / t.n, tvd_g))


def u_tvd(f: FairnessCriterion, db: Database) -> float:
    """``2 * TVD**2``, in ``[0, 2]``."""
    return 2.0 * criterion_tvd(f, db) ** 2


def tvd_sensitivity(criteria: Sequence[FairnessCriterion], n: int, *, tight_unconditional: bool = False) -> float:
    """``16|F|/n``; with ``tight_unconditional`` an all-unconditional set uses ``12|F|/n``."""
    per = 16.0
    if tight_unconditional and not any(f.conditional for f in criteria):
        per = 12.0
    return per * len(criteria) / n


@dataclass
class TvdMeasureResult:
    criteria: list[FairnessCriterion]
    per_criterion: list[float]
    exact: float
    noisy: float
    sensitivity: float
    scale: float
    epsilon: float
    n: int

    @property
    def range_max(self) -> float:
        return 2.0 * len(self.criteria)


def u_tvd_dp(
    criteria: Sequence[FairnessCriterion],
    db: Database,
    epsilon: float,
    rng: np.random.Generator,
    *,
    tight_unconditional: bool = False,
) -> TvdMeasureResult:
    """Sum of ``u_tvd`` over the criteria plus one ``Lap(16|F|/(n eps))`` draw."""
    epsilon = check_epsilon(epsilon)
    criteria = list(criteria)
    if not criteria:
        raise ValueError("need at least one criterion")
    per = [u_tvd(f, db) for f in criteria]
    exact = math.fsum(per)
    spec = NoiseSpec(tvd_sensitivity(criteria, db.n, tight_unconditional=tight_unconditional), epsilon)
    return TvdMeasureResult(
        criteria=criteria,
        per_criterion=per,
        exact=exact,
        noisy=add_noise(exact, spec, rng),
        sensitivity=spec.sensitivity,
        scale=spec.scale,
        epsilon=epsilon,
        n=db.n,
    )
