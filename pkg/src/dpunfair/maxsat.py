"""Exact weighted partial MaxSAT.

Instances are small (one variable per distinct candidate tuple), so the
solver is a plain depth-first branch and bound: unit propagation on the hard
clauses, pruning against the best feasible cost found so far, and branching
on the unassigned variable carrying the most soft weight (lowest index on
ties).  Independent components of the hard-clause graph are solved
separately.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
BUDGET_EXCEEDED = "budget-exceeded"

DEFAULT_BUDGET = 10**7
BRUTE_FORCE_MAX_VARS = 20


class SolverBudgetExceeded(RuntimeError):
    pass


@dataclass
class CnfInstance:
    """Weighted partial CNF.

    Literals are signed 1-based variable indices.  ``soft`` holds unit
    literals with positive integer weights; ``labels[v - 1]`` optionally names
    the tuple behind variable ``v``.
    """

    num_vars: int
    hard: list[tuple[int, ...]] = field(default_factory=list)
    soft: list[tuple[int, int]] = field(default_factory=list)
    labels: list[Hashable] | None = None

    def validate(self) -> None:
        for clause in self.hard:
            if not clause:
                raise ValueError("empty hard clause")
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")
        for lit, w in self.soft:
            if lit == 0 or abs(lit) > self.num_vars:
                raise ValueError(f"soft literal {lit} out of range 1..{self.num_vars}")
            if int(w) != w or w <= 0:
                raise ValueError(f"soft weight must be a positive integer, got {w}")
        if self.labels is not None and len(self.labels) != self.num_vars:
            raise ValueError("labels must name every variable")

    @property
    def total_soft_weight(self) -> int:
        return sum(w for _, w in self.soft)

    def var_of(self, label: Hashable) -> int:
        if self.labels is None:
            raise KeyError(label)
        return self.labels.index(label) + 1


@dataclass
class SolveOutcome:
    assignment: tuple[bool, ...]
    violated_weight: int
    status: str
    nodes: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def true_vars(self) -> list[int]:
        return [i + 1 for i, v in enumerate(self.assignment) if v]


def lit_value(lit: int, assignment: Sequence[bool]) -> bool:
    v = assignment[abs(lit) - 1]
    return v if lit > 0 else not v


def satisfies_hard(inst: CnfInstance, assignment: Sequence[bool]) -> bool:
    return all(any(lit_value(l, assignment) for l in clause) for clause in inst.hard)


def violated_weight(inst: CnfInstance, assignment: Sequence[bool]) -> int:
    return sum(w for lit, w in inst.soft if not lit_value(lit, assignment))


def _soft_costs(inst: CnfInstance) -> tuple[list[int], list[int]]:
    # cost_true[v]: weight lost if v is True; cost_false[v]: if v is False
    cost_true = [0] * (inst.num_vars + 1)
    cost_false = [0] * (inst.num_vars + 1)
    for lit, w in inst.soft:
        if lit > 0:
            cost_false[lit] += w
        else:
            cost_true[-lit] += w
    return cost_true, cost_false


def _components(inst: CnfInstance) -> list[list[int]]:
    parent = list(range(inst.num_vars + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for clause in inst.hard:
        r = find(abs(clause[0]))
        for lit in clause[1:]:
            s = find(abs(lit))
            if s != r:
                parent[max(r, s)] = min(r, s)
                r = min(r, s)
    comps: dict[int, list[int]] = {}
    for v in range(1, inst.num_vars + 1):
        comps.setdefault(find(v), []).append(v)
    return list(comps.values())


class _Search:
    """Branch and bound over one connected component."""

    def __init__(self, variables, clauses, cost_true, cost_false, budget):
        self.vars = variables
        self.clauses = clauses
        self.cost_true = cost_true
        self.cost_false = cost_false
        self.budget = budget
        self.nodes = 0
        self.value: dict[int, bool] = {}
        self.occ: dict[int, list[int]] = {}
        for ci, clause in enumerate(clauses):
            for lit in clause:
                self.occ.setdefault(lit, []).append(ci)
        self.order = sorted(variables, key=lambda v: (-(cost_true[v] + cost_false[v]), v))
        self.cost = 0
        self.rem_min = sum(min(cost_true[v], cost_false[v]) for v in variables)
        self.trail: list[int] = []
        self.best = float("inf")
        self.best_value: dict[int, bool] | None = None

    def _set(self, v: int, val: bool) -> None:
        self.value[v] = val
        self.trail.append(v)
        self.cost += self.cost_true[v] if val else self.cost_false[v]
        self.rem_min -= min(self.cost_true[v], self.cost_false[v])

    def _undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            v = self.trail.pop()
            val = self.value.pop(v)
            self.cost -= self.cost_true[v] if val else self.cost_false[v]
            self.rem_min += min(self.cost_true[v], self.cost_false[v])

    def propagate(self, lit: int) -> bool:
        """Assert ``lit`` and run unit propagation; False on conflict."""
        queue = [lit]
        value = self.value
        while queue:
            l = queue.pop()
            v, val = abs(l), l > 0
            cur = value.get(v)
            if cur is not None:
                if cur != val:
                    return False
                continue
            self._set(v, val)
            for ci in self.occ.get(-l, ()):
                unit = 0
                free = 0
                sat = False
                for m in self.clauses[ci]:
                    mv = value.get(abs(m))
                    if mv is None:
                        free += 1
                        unit = m
                    elif mv == (m > 0):
                        sat = True
                        break
                if sat:
                    continue
                if free == 0:
                    return False
                if free == 1:
                    queue.append(unit)
        return True

    def seed(self, val: bool) -> None:
        """Try the constant assignment as an incumbent."""
        assign = {v: val for v in self.vars}
        for clause in self.clauses:
            if not any(assign[abs(m)] == (m > 0) for m in clause):
                return
        cost = sum(self.cost_true[v] if val else self.cost_false[v] for v in self.vars)
        if cost < self.best:
            self.best, self.best_value = cost, assign

    def run(self) -> None:
        for clause in self.clauses:
            if len(clause) == 1 and not self.propagate(clause[0]):
                return
        self.dfs()

    def dfs(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise SolverBudgetExceeded
        if self.cost + self.rem_min >= self.best:
            return
        branch = 0
        for v in self.order:
            if v not in self.value:
                branch = v
                break
        if not branch:
            self.best = self.cost
            self.best_value = dict(self.value)
            return
        first = self.cost_false[branch] >= self.cost_true[branch] and self.cost_false[branch] > 0
        for val in (first, not first):
            mark = len(self.trail)
            if self.propagate(branch if val else -branch):
                self.dfs()
            self._undo(mark)


def solve(inst: CnfInstance, budget: int = DEFAULT_BUDGET) -> SolveOutcome:
    """Minimum violated soft weight over assignments satisfying every hard clause."""
    inst.validate()
    cost_true, cost_false = _soft_costs(inst)
    assignment = [False] * inst.num_vars
    total = 0
    nodes = 0
    comps = _components(inst)
    root_of = {}
    for comp in comps:
        for v in comp:
            root_of[v] = comp[0]
    clauses_of: dict[int, list[tuple[int, ...]]] = {}
    for clause in inst.hard:
        clauses_of.setdefault(root_of[abs(clause[0])], []).append(tuple(clause))
    limit = sys.getrecursionlimit()
    status = OPTIMAL
    for comp in comps:
        clauses = clauses_of.get(comp[0], [])
        if not clauses:
            for v in comp:
                val = cost_true[v] < cost_false[v]
                assignment[v - 1] = val
                total += cost_true[v] if val else cost_false[v]
            continue
        search = _Search(comp, clauses, cost_true, cost_false, budget - nodes)
        search.seed(False)
        search.seed(True)
        if len(comp) + 100 > limit:
            sys.setrecursionlimit(len(comp) + 1000)
        try:
            search.run()
        except SolverBudgetExceeded:
            status = BUDGET_EXCEEDED
        finally:
            sys.setrecursionlimit(limit)
        nodes += search.nodes
        if status == BUDGET_EXCEEDED:
            break
        if search.best_value is None:
            return SolveOutcome(tuple(assignment), 0, INFEASIBLE, nodes)
        for v in comp:
            assignment[v - 1] = search.best_value[v]
        total += search.best
    if status == BUDGET_EXCEEDED:
        return SolveOutcome(tuple(assignment), violated_weight(inst, assignment), status, nodes)
    return SolveOutcome(tuple(assignment), int(total), OPTIMAL, nodes)


def brute_force(inst: CnfInstance) -> SolveOutcome:
    """Exhaustive optimum; ties go to the lexicographically smallest assignment."""
    inst.validate()
    n = inst.num_vars
    if n > BRUTE_FORCE_MAX_VARS:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_VARS} variables, got {n}")
    codes = np.arange(1 << n, dtype=np.int64)
    # column v-1 is variable v; variable 1 is the most significant bit
    bits = ((codes[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(bool)

    def lit_col(lit):
        col = bits[:, abs(lit) - 1]
        return col if lit > 0 else ~col

    feasible = np.ones(len(codes), dtype=bool)
    for clause in inst.hard:
        sat = np.zeros(len(codes), dtype=bool)
        for lit in clause:
            sat |= lit_col(lit)
        feasible &= sat
    cost = np.zeros(len(codes), dtype=np.int64)
    for lit, w in inst.soft:
        cost += np.where(lit_col(lit), 0, w)
    if not feasible.any():
        return SolveOutcome(tuple([False] * n), 0, INFEASIBLE, len(codes))
    cost = np.where(feasible, cost, np.iinfo(np.int64).max)
    best = int(np.argmin(cost))
    return SolveOutcome(tuple(bool(b) for b in bits[best]), int(cost[best]), OPTIMAL, len(codes))


def export_wdimacs(inst: CnfInstance) -> str:
    """``p wcnf`` text: hard clauses at weight ``top = 1 + sum(soft)``, then soft units."""
    inst.validate()
    top = 1 + inst.total_soft_weight
    lines = [f"p wcnf {inst.num_vars} {len(inst.hard) + len(inst.soft)} {top}"]
    for clause in inst.hard:
        lines.append(" ".join(map(str, (top, *clause, 0))))
    for lit, w in inst.soft:
        lines.append(f"{w} {lit} 0")
    return "\n".join(lines) + "\n"


def parse_wdimacs(text: str) -> CnfInstance:
    header = None
    hard: list[tuple[int, ...]] = []
    soft: list[tuple[int, int]] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            _, fmt, nv, _nc, top = line.split()
            if fmt != "wcnf":
                raise ValueError(f"not a wcnf header: {line!r}")
            header = (int(nv), int(top))
            continue
        if header is None:
            raise ValueError("clause before header")
        nums = [int(x) for x in line.split()]
        if nums[-1] != 0:
            raise ValueError(f"clause not 0-terminated: {line!r}")
        w, lits = nums[0], tuple(nums[1:-1])
        if w >= header[1]:
            hard.append(lits)
        elif len(lits) == 1:
            soft.append((lits[0], w))
        else:
            raise ValueError("only unit soft clauses are supported")
    if header is None:
        raise ValueError("missing header")
    return CnfInstance(header[0], hard, soft)


def random_instance(rng: np.random.Generator, num_vars: int, n_hard: int, n_soft: int, max_weight: int = 5) -> CnfInstance:
    """Random instance with clauses of 1..3 distinct variables (test and benchmark helper)."""
    hard = []
    for _ in range(n_hard):
        k = int(rng.integers(1, min(3, num_vars) + 1))
        vs = rng.choice(np.arange(1, num_vars + 1), size=k, replace=False)
        signs = rng.choice([-1, 1], size=k)
        hard.append(tuple(int(v * s) for v, s in zip(vs, signs)))
    soft = []
    for _ in range(n_soft):
        v = int(rng.integers(1, num_vars + 1))
        soft.append((v * int(rng.choice([-1, 1])), int(rng.integers(1, max_weight + 1))))
    return CnfInstance(num_vars, hard, soft)
