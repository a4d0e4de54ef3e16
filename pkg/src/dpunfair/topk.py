"""Top-k tuple contribution unfairness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data_model import Database, DataError, FairnessCriterion
from .dp import NoiseSpec, add_noise, check_epsilon
from .prob import ContingencyTable, contingency

DEFAULT_K = 500


def _check_groups(t: ContingencyTable, f: FairnessCriterion) -> None:
    if not f.conditional:
        return
    small = {a: s for a, s in t.group_sizes.items() if s < 2}
    if small:
        raise DataError(
            f"{f}: admissible values must occur at least twice; "
            f"{len(small)} value(s) occur once (e.g. code {next(iter(small))})"
        )


def cell_md(t: ContingencyTable) -> np.ndarray:
    """Marginal difference of each observed cell.

    ``Pr(a) * |Pr(p,y|a) - Pr(p|a)Pr(y|a)|`` equals
    ``|count * n_a - n_pa * n_ya| / (n * n_a)``.
    """
    dev = np.abs(t.count * t.n_a - t.n_pa * t.n_ya)
    return dev / (float(t.n) * t.n_a)


def tuple_md(f: FairnessCriterion, db: Database) -> np.ndarray:
    """Marginal difference of every tuple, in stored order."""
    t = contingency(db, f)
    _check_groups(t, f)
    return cell_md(t)[t.inverse]


def marginal_difference(f: FairnessCriterion, db: Database, tuple_id: int) -> float:
    pos = np.flatnonzero(db.ids == tuple_id)
    if pos.size == 0:
        raise DataError(f"unknown tuple id {tuple_id}")
    return float(tuple_md(f, db)[pos[0]])


def top_k(f: FairnessCriterion, db: Database, k: int) -> tuple[float, np.ndarray]:
    """Sum of the ``k`` largest marginal differences and the ids achieving it.

    Ties at equal value are broken by ascending tuple id.
    """
    if not 1 <= k <= db.n:
        raise DataError(f"k must be in [1, n={db.n}], got {k}")
    md = tuple_md(f, db)
    order = np.lexsort((db.ids, -md))[:k]
    return math.fsum(md[order].tolist()), db.ids[order]


def u_tc(f: FairnessCriterion, db: Database, k: int) -> float:
    return top_k(f, db, k)[0]


def tc_sensitivity(criteria: Sequence[FairnessCriterion], n: int, k: int) -> float:
    per = 7.0 if any(f.conditional for f in criteria) else 3.0
    return per * k / n * len(criteria)


@dataclass
class TopKResult:
    criteria: list[FairnessCriterion]
    k: int
    per_criterion: list[float]
    exact: float
    noisy: float
    sensitivity: float
    scale: float
    epsilon: float
    n: int
    top_ids: list[list[int]] = field(default_factory=list, repr=False)

    @property
    def range_max(self) -> float:
        return self.k / 4.0 * len(self.criteria)


def u_tc_dp(
    criteria: Sequence[FairnessCriterion],
    db: Database,
    k: int,
    epsilon: float,
    rng: np.random.Generator,
) -> TopKResult:
    """Sum of ``u_tc`` over the criteria plus one Laplace draw.

    The scale is ``|F| * (7k/n) / eps`` if any criterion is conditional and
    ``|F| * (3k/n) / eps`` otherwise.
    """
    epsilon = check_epsilon(epsilon)
    criteria = list(criteria)
    if not criteria:
        raise ValueError("need at least one criterion")
    per, ids = [], []
    for f in criteria:
        value, top = top_k(f, db, k)
        per.append(value)
        ids.append(top.tolist())
    exact = math.fsum(per)
    spec = NoiseSpec(tc_sensitivity(criteria, db.n, k), epsilon)
    return TopKResult(
        criteria=criteria,
        k=k,
        per_criterion=per,
        exact=exact,
        noisy=add_noise(exact, spec, rng),
        sensitivity=spec.sensitivity,
        scale=spec.scale,
        epsilon=epsilon,
        n=db.n,
        top_ids=ids,
    )
