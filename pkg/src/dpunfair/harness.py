"""Measure runs, parameter sweeps and their machine-readable reports.

Every run of a measure computes the exact value once and then draws the
Laplace noise for repeat ``i`` from a fresh generator seeded with
``seed + i``; that draw is the only randomness, so a report is a pure
function of its inputs and seed.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

from .data_model import Database, DataError, FairnessCriterion
from .dp import INF, check_epsilon, laplace_sample, make_rng, relative_l1
from .maxsat import DEFAULT_BUDGET
from .mi_tvd import u_mi, u_tvd_dp
from .repair import STORED, u_repair_dp
from .synth import INCOME, SEX, GapSpec, synth_polarized
from .topk import DEFAULT_K, u_tc_dp

MEASURES = ("tvd", "repair", "topk")
SWEEP_KINDS = ("epsilon", "k", "scale", "gap")


def fmt_num(x: float | None) -> Any:
    """JSON-safe number: infinities become the string ``"inf"``."""
    if x is None:
        return None
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class MeasureParams:
    measure: str
    epsilon: float = 1.0
    k: int = DEFAULT_K
    chunk_size: float | None = 100
    chunk_mode: str = STORED
    tight_unconditional: bool = False
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise DataError(f"unknown measure {self.measure!r}; choose from {MEASURES}")
        self.epsilon = check_epsilon(self.epsilon)


@dataclass
class ExactValue:
    """Deterministic part of a measure: its exact value and noise calibration."""

    measure: str
    per_criterion: list[float]
    exact: float
    sensitivity: float
    n: int
    seconds: float
    solve_seconds: float | None = None


def compute_exact(params: MeasureParams, criteria: Sequence[FairnessCriterion], db: Database) -> ExactValue:
    # epsilon = inf draws no noise and consumes no randomness
    t0 = time.perf_counter()
    rng = make_rng(0)
    solve_s = None
    if params.measure == "tvd":
        res = u_tvd_dp(criteria, db, INF, rng, tight_unconditional=params.tight_unconditional)
    elif params.measure == "repair":
        res = u_repair_dp(
            criteria, db, INF, rng, chunk_size=params.chunk_size,
            mode=params.chunk_mode, budget=params.budget,
        )
        solve_s = res.solve_seconds
    else:
        res = u_tc_dp(criteria, db, params.k, INF, rng)
    elapsed = time.perf_counter() - t0
    if not 0 <= res.exact <= res.range_max + 1e-9:
        raise RuntimeError(f"{params.measure}: exact value {res.exact} outside [0, {res.range_max}]")
    return ExactValue(
        params.measure, [float(v) for v in res.per_criterion], float(res.exact),
        res.sensitivity, db.n, elapsed, solve_s,
    )


def noisy_value(exact: ExactValue, epsilon: float, seed: int) -> float:
    """Identical to the measure's DP function run with ``make_rng(seed)``."""
    epsilon = check_epsilon(epsilon)
    scale = 0.0 if math.isinf(epsilon) else exact.sensitivity / epsilon
    return exact.exact + laplace_sample(scale, make_rng(seed))


@dataclass
class MeasureReport:
    measure: str
    criteria: list[dict]
    exact: float
    noisy: float
    sensitivity: float
    scale: float
    epsilon: float
    seed: int
    n: int
    per_criterion: list[float]
    k: int | None = None
    chunk_size: float | None = None
    timings: dict[str, float] | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("epsilon", "chunk_size", "scale"):
            d[key] = fmt_num(d[key])
        if d["timings"] is None:
            del d["timings"]
        return {"type": "run", **d}


@dataclass
class Aggregate:
    measure: str
    runs: int
    seeds: list[int]
    exact: float
    noisy_values: list[float]
    mean: float
    std: float

    def to_dict(self) -> dict:
        return {"type": "aggregate", **asdict(self)}


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    values = list(values)
    return statistics.fmean(values), statistics.pstdev(values)


def cmd_measure(
    db: Database,
    criteria: Sequence[FairnessCriterion],
    params: MeasureParams,
    *,
    seed: int = 0,
    repeats: int = 1,
    timings: bool = False,
    ingest_seconds: float | None = None,
) -> tuple[list[MeasureReport], Aggregate]:
    if repeats < 1:
        raise DataError("repeats must be >= 1")
    criteria = list(criteria)
    ex = compute_exact(params, criteria, db)
    scale = 0.0 if math.isinf(params.epsilon) else ex.sensitivity / params.epsilon
    reports = []
    for i in range(repeats):
        t0 = time.perf_counter()
        noisy = noisy_value(ex, params.epsilon, seed + i)
        t_noise = time.perf_counter() - t0
        phase = None
        if timings:
            phase = {"compute": ex.seconds, "noise": t_noise}
            if ingest_seconds is not None:
                phase["ingest"] = ingest_seconds
            if ex.solve_seconds is not None:
                phase["solve"] = ex.solve_seconds
        reports.append(
            MeasureReport(
                measure=params.measure,
                criteria=[f.to_dict() for f in criteria],
                exact=ex.exact,
                noisy=noisy,
                sensitivity=ex.sensitivity,
                scale=scale,
                epsilon=params.epsilon,
                seed=seed + i,
                n=db.n,
                per_criterion=ex.per_criterion,
                k=params.k if params.measure == "topk" else None,
                chunk_size=params.chunk_size if params.measure == "repair" else None,
                timings=phase,
            )
        )
    values = [r.noisy for r in reports]
    mean, std = mean_std(values)
    agg = Aggregate(params.measure, repeats, [r.seed for r in reports], ex.exact, values, mean, std)
    return reports, agg


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepPoint:
    value: float
    mean: float
    std: float
    raw: list[float]
    exact: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["value"] = fmt_num(d["value"])
        return d


@dataclass
class SweepReport:
    axis: str
    measure: str
    metric: str
    repeats: int
    seeds: list[int]
    points: list[SweepPoint] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "type": "sweep",
            "axis": self.axis,
            "measure": self.measure,
            "metric": self.metric,
            "repeats": self.repeats,
            "seeds": self.seeds,
            "params": self.params,
            "points": [p.to_dict() for p in self.points],
        }


def _point(x: float, raw: list[float], exact: float | None = None) -> SweepPoint:
    mean, std = mean_std(raw)
    return SweepPoint(x, mean, std, raw, exact)


def _params_dict(params: MeasureParams) -> dict:
    d = {"epsilon": fmt_num(params.epsilon)}
    if params.measure == "topk":
        d["k"] = params.k
    if params.measure == "repair":
        d["chunk_size"] = fmt_num(params.chunk_size)
        d["chunk_mode"] = params.chunk_mode
    return d


def sweep_epsilon(db, criteria, params: MeasureParams, grid, *, seed=0, repeats=10) -> SweepReport:
    """Relative L1 error of the noisy value against the exact one, per budget."""
    ex = compute_exact(params, criteria, db)
    seeds = [seed + i for i in range(repeats)]
    rep = SweepReport("epsilon", params.measure, "relative_l1", repeats, seeds, params=_params_dict(params))
    for eps in grid:
        raw = [relative_l1(noisy_value(ex, eps, s), ex.exact) for s in seeds]
        rep.points.append(_point(eps, raw, ex.exact))
    rep.params.pop("epsilon")
    return rep


def sweep_k(db, criteria, params: MeasureParams, grid, *, seed=0, repeats=1) -> SweepReport:
    seeds = [seed + i for i in range(repeats)]
    rep = SweepReport("k", "topk", "value", repeats, seeds, params={"epsilon": fmt_num(params.epsilon)})
    for k in grid:
        p = MeasureParams("topk", epsilon=params.epsilon, k=int(k))
        ex = compute_exact(p, criteria, db)
        rep.points.append(_point(int(k), [noisy_value(ex, params.epsilon, s) for s in seeds], ex.exact))
    return rep


def sweep_gap(params: MeasureParams, grid, *, n=100_000, seed=0, repeats=1, with_mi=False) -> SweepReport:
    """Measure value on the synthetic polarized table for each target gap."""
    criteria = [FairnessCriterion(SEX, INCOME)]
    seeds = [seed + i for i in range(repeats)]
    rep = SweepReport("gap", params.measure, "value", repeats, seeds, params={"n": n, **_params_dict(params)})
    for g in grid:
        db = synth_polarized(GapSpec(n, float(g), seed=seed))
        ex = compute_exact(params, criteria, db)
        pt = _point(float(g), [noisy_value(ex, params.epsilon, s) for s in seeds], ex.exact)
        rep.points.append(pt)
    if with_mi:
        rep.params["u_mi"] = [u_mi(criteria[0], synth_polarized(GapSpec(n, float(g), seed=seed))) for g in grid]
    return rep


def sweep_scale(db, criteria, params: MeasureParams, grid, *, axis="n", seed=0, repeats=1) -> SweepReport:
    """Wall-clock seconds of the exact computation versus n (row prefix) or |F| (criteria prefix)."""
    if axis not in ("n", "criteria"):
        raise DataError(f"scale axis must be 'n' or 'criteria', got {axis!r}")
    seeds = [seed + i for i in range(repeats)]
    rep = SweepReport(axis, params.measure, "seconds", repeats, seeds, params=_params_dict(params))
    for x in grid:
        x = int(x)
        if axis == "n":
            if not 1 <= x <= db.n:
                raise DataError(f"n={x} outside [1, {db.n}]")
            sub, crit = db.slice(0, x), criteria
        else:
            if not 1 <= x <= len(criteria):
                raise DataError(f"|F|={x} outside [1, {len(criteria)}]")
            sub, crit = db, criteria[:x]
        raw = [compute_exact(params, crit, sub).seconds for _ in seeds]
        rep.points.append(_point(x, raw))
    return rep


# ---------------------------------------------------------------------------
# serialisation


def dumps_json_lines(objs: Sequence[dict]) -> str:
    return "".join(json.dumps(o, sort_keys=True, allow_nan=False) + "\n" for o in objs)


def reports_to_csv(reports: Sequence[MeasureReport]) -> str:
    buf = io.StringIO()
    cols = [
        "measure", "seed", "n", "epsilon", "k", "chunk_size",
        "exact", "noisy", "sensitivity", "scale", "criteria",
    ]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in reports:
        d = r.to_dict()
        d["criteria"] = ";".join(str(FairnessCriterion(**c)) for c in r.criteria)
        w.writerow(["" if d.get(c) is None else d[c] for c in cols])
    return buf.getvalue()


def sweep_to_csv(sweeps: Sequence[SweepReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["measure", "axis", "metric", "value", "repeat", "seed", "raw", "mean", "std"])
    for sw in sweeps:
        for p in sw.points:
            for i, (s, v) in enumerate(zip(sw.seeds, p.raw)):
                w.writerow([sw.measure, sw.axis, sw.metric, fmt_num(p.value), i, s, v, p.mean, p.std])
    return buf.getvalue()
