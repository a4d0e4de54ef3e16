"""Repair-cost unfairness through a weighted MaxSAT encoding.

For a criterion ``P ⫫ Y | A`` the candidate tuples are, per admissible value
``a``, all pairs of an observed ``p`` with an observed ``y`` (the self-join).
A repair keeps a subset of them that is closed under ``(p1,y1), (p2,y2) ->
(p1,y2)``, i.e. a per-group product set.  Its cost is the number of deleted
tuple occurrences plus the number of inserted candidate tuples.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .data_model import Database, DataError, FairnessCriterion
from .dp import NoiseSpec, add_noise, check_epsilon
from .maxsat import (
    BUDGET_EXCEEDED,
    DEFAULT_BUDGET,
    INFEASIBLE,
    CnfInstance,
    SolveOutcome,
    SolverBudgetExceeded,
    solve,
)

STORED = "stored"
SORTED = "sorted"


@dataclass(frozen=True)
class SelfJoinDb:
    """Per admissible value: observed protected values x observed outcome values.

    ``groups`` maps ``a`` (``None`` when unconditional) to ``(ps, ys)``;
    ``counts`` holds the multiplicity of each observed ``(p, y, a)`` cell.
    """

    criterion: FairnessCriterion
    groups: dict[int | None, tuple[tuple[int, ...], tuple[int, ...]]]
    counts: dict[tuple[int, int, int | None], int]

    @property
    def cells(self) -> list[tuple[int, int, int | None]]:
        out = []
        for a in sorted(self.groups, key=lambda g: (g is not None, g)):
            ps, ys = self.groups[a]
            out.extend((p, y, a) for p in ps for y in ys)
        return out

    def __contains__(self, cell) -> bool:
        p, y, a = cell
        if a not in self.groups:
            return False
        ps, ys = self.groups[a]
        return p in ps and y in ys

    def __len__(self) -> int:
        return sum(len(ps) * len(ys) for ps, ys in self.groups.values())


def _cell_keys(db: Database, f: FairnessCriterion) -> np.ndarray:
    f.check(db.schema)
    cols = [db.column(f.protected), db.column(f.outcome)]
    if f.conditional:
        cols.append(db.column(f.admissible))
    return np.column_stack(cols)


def _self_join_from_keys(keys: np.ndarray, f: FairnessCriterion) -> SelfJoinDb:
    if len(keys) == 0:
        raise DataError("empty database")
    uniq, count = np.unique(keys, axis=0, return_counts=True)
    groups: dict[int | None, tuple[set, set]] = {}
    counts = {}
    for row, c in zip(uniq.tolist(), count.tolist()):
        a = row[2] if f.conditional else None
        ps, ys = groups.setdefault(a, (set(), set()))
        ps.add(row[0])
        ys.add(row[1])
        counts[(row[0], row[1], a)] = c
    return SelfJoinDb(
        f,
        {a: (tuple(sorted(ps)), tuple(sorted(ys))) for a, (ps, ys) in groups.items()},
        counts,
    )


def self_join(db: Database, f: FairnessCriterion) -> SelfJoinDb:
    return _self_join_from_keys(_cell_keys(db, f), f)


def build_cnf(sj: SelfJoinDb) -> CnfInstance:
    """Weighted partial CNF over the self-join cells.

    Variable ``i`` (1-based) is ``sj.cells[i - 1]``.  Observed cells get a
    positive soft literal weighted by their multiplicity, unobserved ones a
    negative soft literal of weight 1.  Hard clauses
    ``(¬x_{p1,y1} ∨ ¬x_{p2,y2} ∨ x_{p1,y2})`` for same-group pairs, skipping
    tautologies.
    """
    cells = sj.cells
    var = {c: i + 1 for i, c in enumerate(cells)}
    soft = []
    for c in cells:
        m = sj.counts.get(c, 0)
        soft.append((var[c], m) if m else (-var[c], 1))
    hard = []
    seen = set()
    for a in sorted(sj.groups, key=lambda g: (g is not None, g)):
        ps, ys = sj.groups[a]
        for p1 in ps:
            for y1 in ys:
                for p2 in ps:
                    if p2 == p1:
                        continue
                    for y2 in ys:
                        if y2 == y1:
                            continue
                        clause = (-var[(p1, y1, a)], -var[(p2, y2, a)], var[(p1, y2, a)])
                        key = frozenset(clause)
                        if key not in seen:
                            seen.add(key)
                            hard.append(clause)
    return CnfInstance(len(cells), hard, soft, labels=list(cells))


@dataclass
class RepairSolution:
    cost: int
    repaired: frozenset  # cells kept in the repaired database
    cnf: CnfInstance
    outcome: SolveOutcome


def _solve_keys(keys: np.ndarray, f: FairnessCriterion, budget: int) -> RepairSolution:
    sj = _self_join_from_keys(keys, f)
    cnf = build_cnf(sj)
    outcome = solve(cnf, budget=budget)
    if outcome.status == BUDGET_EXCEEDED:
        raise SolverBudgetExceeded(f"solver budget of {budget} nodes exceeded for {f}")
    if outcome.status == INFEASIBLE:  # cannot happen: the all-true assignment is feasible
        raise RuntimeError(f"repair CNF unexpectedly infeasible for {f}")
    repaired = frozenset(cnf.labels[v - 1] for v in outcome.true_vars())
    return RepairSolution(outcome.violated_weight, repaired, cnf, outcome)


def repair(db: Database, f: FairnessCriterion, *, budget: int = DEFAULT_BUDGET) -> RepairSolution:
    """Optimal repair of ``db`` projected on the criterion attributes."""
    return _solve_keys(_cell_keys(db, f), f, budget)


def repair_cost(db: Database, f: FairnessCriterion, *, budget: int = DEFAULT_BUDGET) -> int:
    return repair(db, f, budget=budget).cost


def chunk_bounds(n: int, chunk_size: float | None) -> list[tuple[int, int]]:
    """Consecutive ``[start, stop)`` blocks; ``None`` or ``inf`` gives one block."""
    if chunk_size is None or math.isinf(chunk_size):
        return [(0, n)]
    size = int(chunk_size)
    if size < 1 or size != chunk_size:
        raise ValueError(f"chunk size must be a positive integer or inf, got {chunk_size}")
    return [(s, min(s + size, n)) for s in range(0, n, size)]


def _ordered_keys(db: Database, f: FairnessCriterion, mode: str) -> np.ndarray:
    keys = _cell_keys(db, f)
    if mode == STORED:
        return keys
    if mode == SORTED:
        # stable lexicographic sort puts duplicates next to each other
        return keys[np.lexsort(keys.T[::-1])]
    raise ValueError(f"unknown chunk mode {mode!r}")


def chunked_repair_cost(
    db: Database,
    f: FairnessCriterion,
    chunk_size: float | None = 100,
    *,
    mode: str = STORED,
    budget: int = DEFAULT_BUDGET,
) -> tuple[int, list[int]]:
    """Sum of per-chunk optimal repair costs; also returns the per-chunk costs."""
    if db.n == 0:
        raise DataError("empty database")
    keys = _ordered_keys(db, f, mode)
    costs = [_solve_keys(keys[s:e], f, budget).cost for s, e in chunk_bounds(db.n, chunk_size)]
    return sum(costs), costs


@dataclass
class RepairResult:
    criteria: list[FairnessCriterion]
    per_criterion: list[int]
    exact: int
    noisy: float
    sensitivity: float
    scale: float
    epsilon: float
    n: int
    chunk_size: float | None
    n_chunks: int
    solve_seconds: float = 0.0
    chunk_costs: list[list[int]] = field(default_factory=list, repr=False)

    @property
    def range_max(self) -> int:
        return self.n * len(self.criteria)


def u_repair(
    criteria: Sequence[FairnessCriterion],
    db: Database,
    chunk_size: float | None = 100,
    *,
    mode: str = STORED,
    budget: int = DEFAULT_BUDGET,
) -> int:
    return sum(chunked_repair_cost(db, f, chunk_size, mode=mode, budget=budget)[0] for f in criteria)


def u_repair_dp(
    criteria: Sequence[FairnessCriterion],
    db: Database,
    epsilon: float,
    rng: np.random.Generator,
    *,
    chunk_size: float | None = 100,
    mode: str = STORED,
    budget: int = DEFAULT_BUDGET,
) -> RepairResult:
    """Chunked repair cost summed over criteria plus one ``Lap(2|F|/eps)`` draw."""
    epsilon = check_epsilon(epsilon)
    criteria = list(criteria)
    if not criteria:
        raise ValueError("need at least one criterion")
    t0 = time.perf_counter()
    per, chunks = [], []
    for f in criteria:
        total, costs = chunked_repair_cost(db, f, chunk_size, mode=mode, budget=budget)
        per.append(total)
        chunks.append(costs)
    elapsed = time.perf_counter() - t0
    exact = sum(per)
    spec = NoiseSpec(2.0 * len(criteria), epsilon)
    return RepairResult(
        criteria=criteria,
        per_criterion=per,
        exact=exact,
        noisy=add_noise(exact, spec, rng),
        sensitivity=spec.sensitivity,
        scale=spec.scale,
        epsilon=epsilon,
        n=db.n,
        chunk_size=chunk_size,
        n_chunks=len(chunk_bounds(db.n, chunk_size)),
        solve_seconds=elapsed,
        chunk_costs=chunks,
    )


def is_product_closed(cells: frozenset | set) -> bool:
    """True when every group's cell set equals the product of its p- and y-projections."""
    groups: dict[Hashable, set] = {}
    for p, y, a in cells:
        groups.setdefault(a, set()).add((p, y))
    for pairs in groups.values():
        ps = {p for p, _ in pairs}
        ys = {y for _, y in pairs}
        if len(pairs) != len(ps) * len(ys):
            return False
    return True
