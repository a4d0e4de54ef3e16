"""Empirical distributions over criterion attributes, TVD and mutual information.

Everything works from a :class:`ContingencyTable` of observed ``(p, y, a)``
cells.  Differences between the joint and the product of marginals are
formed in integer arithmetic (``count * n_a - n_pa * n_ya``) so that an
exactly independent table yields exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping

import numpy as np

from .data_model import Database, DataError, FairnessCriterion


@dataclass(frozen=True)
class ContingencyTable:
    """Observed cells of a criterion with their multiplicities.

    Per-cell arrays are aligned: ``p[i], y[i], a[i]`` is cell ``i`` with
    ``count[i]`` tuples.  ``a`` is all zeros for an unconditional criterion.
    ``inverse[j]`` is the cell index of the j-th tuple of the source database.
    """

    p: np.ndarray
    y: np.ndarray
    a: np.ndarray
    count: np.ndarray
    n: int
    conditional: bool
    inverse: np.ndarray
    # per-cell group statistics
    n_a: np.ndarray
    n_pa: np.ndarray
    n_ya: np.ndarray

    @property
    def cells(self) -> list[tuple[int, ...]]:
        if self.conditional:
            return list(zip(self.p.tolist(), self.y.tolist(), self.a.tolist()))
        return list(zip(self.p.tolist(), self.y.tolist()))

    @property
    def counts(self) -> dict[tuple[int, ...], int]:
        return dict(zip(self.cells, self.count.tolist()))

    @property
    def group_sizes(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for a, c in zip(self.a.tolist(), self.count.tolist()):
            out[a] = out.get(a, 0) + c
        return out

    def group_mask(self, a: int) -> np.ndarray:
        return self.a == a

    def scaled(self, factor: int) -> ContingencyTable:
        """Same cells with every count multiplied by ``factor``."""
        return from_counts(
            dict(zip(self.cells, (self.count * factor).tolist())), conditional=self.conditional
        )


def _group_stats(p, y, a, count):
    # per-cell sums of count over cells sharing (a), (p, a), (y, a)
    def per_cell(keys):
        _, inv = np.unique(keys, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        return np.bincount(inv, weights=count, minlength=inv.max(initial=-1) + 1).astype(np.int64)[inv]

    n_a = per_cell(a[:, None])
    n_pa = per_cell(np.column_stack([p, a]))
    n_ya = per_cell(np.column_stack([y, a]))
    return n_a, n_pa, n_ya


def contingency(db: Database, f: FairnessCriterion) -> ContingencyTable:
    """Count tuples per ``(p, y[, a])`` cell."""
    f.check(db.schema)
    if db.n == 0:
        raise DataError("empty database")
    cols = [db.column(f.protected), db.column(f.outcome)]
    if f.conditional:
        cols.append(db.column(f.admissible))
    else:
        cols.append(np.zeros(db.n, dtype=np.int64))
    keys = np.column_stack(cols)
    uniq, inverse, count = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    p, y, a = uniq[:, 0], uniq[:, 1], uniq[:, 2]
    count = count.astype(np.int64)
    n_a, n_pa, n_ya = _group_stats(p, y, a, count)
    return ContingencyTable(
        p=p, y=y, a=a, count=count, n=int(db.n), conditional=f.conditional,
        inverse=inverse.reshape(-1), n_a=n_a, n_pa=n_pa, n_ya=n_ya,
    )


def from_counts(counts: Mapping[tuple, int], *, conditional: bool | None = None) -> ContingencyTable:
    """Build a table from ``{(p, y): c}`` or ``{(p, y, a): c}``; zero counts dropped."""
    items = [(k, int(c)) for k, c in counts.items() if c]
    if not items:
        raise DataError("empty contingency table")
    if any(c < 0 for _, c in items):
        raise DataError("negative count")
    width = len(items[0][0])
    if conditional is None:
        conditional = width == 3
    keys = np.array([k if width == 3 else (*k, 0) for k, _ in items], dtype=np.int64)
    order = np.lexsort(keys.T[::-1])
    keys = keys[order]
    count = np.array([c for _, c in items], dtype=np.int64)[order]
    p, y, a = keys[:, 0], keys[:, 1], keys[:, 2]
    n_a, n_pa, n_ya = _group_stats(p, y, a, count)
    inverse = np.repeat(np.arange(len(count)), count)
    return ContingencyTable(
        p=p, y=y, a=a, count=count, n=int(count.sum()), conditional=conditional,
        inverse=inverse, n_a=n_a, n_pa=n_pa, n_ya=n_ya,
    )


@dataclass(frozen=True)
class Distribution:
    support: tuple[Hashable, ...]
    mass: tuple[float, ...]

    def as_dict(self) -> dict[Hashable, float]:
        return dict(zip(self.support, self.mass))

    def __getitem__(self, cell: Hashable) -> float:
        return self.as_dict().get(cell, 0.0)

    @classmethod
    def from_dict(cls, d: Mapping[Hashable, float]) -> Distribution:
        return cls(tuple(d), tuple(float(v) for v in d.values()))


def _group(t: ContingencyTable, a: int | None) -> tuple[np.ndarray, int]:
    if a is None:
        if t.conditional:
            raise DataError("conditional table needs an admissible value")
        a = 0
    mask = t.a == a
    n_a = int(t.count[mask].sum())
    if n_a == 0:
        raise DataError(f"no tuples with admissible value {a}")
    return mask, n_a


def joint_conditional(t: ContingencyTable, a: int | None = None) -> Distribution:
    """``Pr(P=p, Y=y | A=a)`` over observed cells (unconditional when ``a`` is None)."""
    mask, n_a = _group(t, a)
    return Distribution(
        tuple(zip(t.p[mask].tolist(), t.y[mask].tolist())),
        tuple((t.count[mask] / n_a).tolist()),
    )


def _marginal(values, counts, n_a) -> Distribution:
    out: dict[int, int] = {}
    for v, c in zip(values.tolist(), counts.tolist()):
        out[v] = out.get(v, 0) + c
    return Distribution(tuple(out), tuple(c / n_a for c in out.values()))


def marginal_p(t: ContingencyTable, a: int | None = None) -> Distribution:
    mask, n_a = _group(t, a)
    return _marginal(t.p[mask], t.count[mask], n_a)


def marginal_y(t: ContingencyTable, a: int | None = None) -> Distribution:
    mask, n_a = _group(t, a)
    return _marginal(t.y[mask], t.count[mask], n_a)


def product(p: Distribution, q: Distribution) -> Distribution:
    return Distribution(
        tuple((u, v) for u in p.support for v in q.support),
        tuple(mu * mv for mu in p.mass for mv in q.mass),
    )


def tvd(p: Distribution, q: Distribution) -> float:
    """Half the L1 distance, over the union of both supports."""
    dp, dq = p.as_dict(), q.as_dict()
    support = set(dp) | set(dq)
    return 0.5 * sum(abs(dp.get(x, 0.0) - dq.get(x, 0.0)) for x in support)


def independence_tvd(t: ContingencyTable) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-cell-group TVD between the joint and the product of marginals.

    Returns ``(groups, tvd_per_group, n_per_group)``; unobserved ``(p, y)``
    pairs of a group contribute their product mass, computed as
    ``1 - sum over observed cells of the product mass``.
    """
    dev = np.abs(t.count * t.n_a - t.n_pa * t.n_ya)
    prod = t.n_pa * t.n_ya
    groups, inv = np.unique(t.a, return_inverse=True)
    inv = inv.reshape(-1)
    prod_sum = np.zeros(len(groups), dtype=np.int64)
    np.add.at(prod_sum, inv, prod)
    n_g = np.zeros(len(groups), dtype=np.int64)
    np.add.at(n_g, inv, t.count)
    # exact integer part first, then one division per group
    numer = np.zeros(len(groups), dtype=np.int64)
    np.add.at(numer, inv, dev)
    numer = numer + n_g * n_g - prod_sum
    return groups, numer / (2.0 * n_g.astype(np.float64) ** 2), n_g


def mutual_information(t: ContingencyTable) -> float:
    """Conditional mutual information ``I(P; Y | A)`` in nats."""
    ratio = (t.count * t.n_a) / (t.n_pa * t.n_ya).astype(np.float64)
    terms = (t.count / t.n) * np.log(ratio)
    return max(float(terms.sum()), 0.0)
