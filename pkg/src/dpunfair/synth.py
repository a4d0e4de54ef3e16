"""Synthetic polarized dataset and parity-gap statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import CATEGORICAL, Attribute, Database, DataError, Schema

SEX = "sex"
INCOME = "income>50K"
INTERLEAVED = "interleaved"
SHUFFLED = "shuffled"


@dataclass(frozen=True)
class GapSpec:
    n: int
    gap: float
    seed: int = 0
    layout: str = INTERLEAVED

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise DataError(f"n must be even and >= 4, got {self.n}")
        if not 0.0 <= self.gap <= 1.0:
            raise DataError(f"gap must be in [0, 1], got {self.gap}")
        if self.layout not in (INTERLEAVED, SHUFFLED):
            raise DataError(f"unknown layout {self.layout!r}")


def positives(spec: GapSpec) -> tuple[int, int]:
    """Exact number of ``income>50K = 1`` rows among M and among F."""
    half = spec.n // 2
    return round(half * (0.5 + spec.gap / 2)), round(half * (0.5 - spec.gap / 2))


def synth_polarized(spec: GapSpec) -> Database:
    """Binary ``sex``/``income>50K`` table with exactly ``n/2`` rows per sex.

    Rows alternate M, F.  The fair base pattern gives every other male and
    every other female a positive outcome; the gap is then produced by
    flipping male negatives to positive and female positives to negative in
    row order, so early blocks of rows polarize first.  ``layout="shuffled"``
    permutes the rows with ``seed`` afterwards.
    """
    half = spec.n // 2
    pos_m, pos_f = positives(spec)
    j = np.arange(half)
    base_pos = (half + 1) // 2  # even j
    # male: even j positive first, then odd j in row order
    rank_m = np.where(j % 2 == 0, j // 2, base_pos + j // 2)
    male = (rank_m < pos_m).astype(np.int64)
    # female: odd j negative first, then even j in row order
    rank_f = np.where(j % 2 == 1, j // 2, half // 2 + j // 2)
    female = (rank_f >= half - pos_f).astype(np.int64)
    rows = np.empty((spec.n, 2), dtype=np.int64)
    rows[0::2, 0] = 0
    rows[1::2, 0] = 1
    rows[0::2, 1] = male
    rows[1::2, 1] = female
    if spec.layout == SHUFFLED:
        rows = rows[np.random.default_rng(spec.seed).permutation(spec.n)]
    schema = Schema((Attribute(SEX, CATEGORICAL, ("M", "F")), Attribute(INCOME, CATEGORICAL, ("0", "1"))))
    # labels are ("0", "1") so the outcome code equals its value
    return Database(schema, rows)


def _positive_code(db: Database, outcome: str) -> int:
    attr = db.schema[outcome]
    if attr.kind == CATEGORICAL:
        if "1" not in attr.labels:
            raise DataError(f"outcome {outcome!r} has no '1' label")
        return attr.labels.index("1")
    return 1


def _rates(prot: np.ndarray, out: np.ndarray, pos: int) -> np.ndarray:
    groups, inv = np.unique(prot, return_inverse=True)
    inv = inv.reshape(-1)
    sizes = np.bincount(inv)
    hits = np.bincount(inv, weights=(out == pos))
    return hits / sizes


def dp_gap(db: Database, protected: str, outcome: str) -> float:
    """``max_p Pr(O=1|P=p) - min_p Pr(O=1|P=p)`` over observed protected values."""
    if db.n == 0:
        raise DataError("empty database")
    out = db.column(outcome)
    pos = _positive_code(db, outcome)
    if len(np.unique(out)) > 2:
        raise DataError(f"outcome {outcome!r} is not binary")
    rates = _rates(db.column(protected), out, pos)
    return float(rates.max() - rates.min())


def csp_gap(db: Database, protected: str, outcome: str, admissible: str) -> float:
    """``sum_a Pr(a) * dp_gap`` within each admissible group."""
    if db.n == 0:
        raise DataError("empty database")
    prot, out, adm = db.column(protected), db.column(outcome), db.column(admissible)
    pos = _positive_code(db, outcome)
    if len(np.unique(out)) > 2:
        raise DataError(f"outcome {outcome!r} is not binary")
    all_p = np.unique(prot)
    total = 0.0
    for a in np.unique(adm):
        mask = adm == a
        if len(np.unique(prot[mask])) != len(all_p):
            raise DataError(f"admissible group {int(a)} lacks some protected value")
        rates = _rates(prot[mask], out[mask], pos)
        total += mask.sum() / db.n * (rates.max() - rates.min())
    return float(total)
