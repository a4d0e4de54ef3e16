"""Command-line entry point: ``measure``, ``sweep``, ``synth`` and ``export-wdimacs``.

Exit codes: 0 success, 2 usage, 3 data error, 4 solver budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Sequence

from .data_model import INTEGER, Database, DataError, load_criteria, load_csv, parse_rule, preprocess, write_csv
from .harness import (
    MEASURES,
    MeasureParams,
    cmd_measure,
    dumps_json_lines,
    reports_to_csv,
    sweep_epsilon,
    sweep_gap,
    sweep_k,
    sweep_scale,
    sweep_to_csv,
)
from .maxsat import DEFAULT_BUDGET, SolverBudgetExceeded, export_wdimacs
from .repair import STORED, SORTED, _ordered_keys, _self_join_from_keys, build_cnf, chunk_bounds
from .synth import INTERLEAVED, SHUFFLED, GapSpec, synth_polarized
from .topk import DEFAULT_K

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_BUDGET = 4


class UsageError(Exception):
    pass


def _float_or_inf(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(v):
        raise argparse.ArgumentTypeError("nan is not allowed")
    return v


def _chunk_size(text: str) -> float:
    if text.strip().lower() == "inf":
        return math.inf
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"chunk size must be a positive integer or 'inf', got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("chunk size must be >= 1")
    return v


def _grid(text: str) -> list[float]:
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise argparse.ArgumentTypeError("grid must be non-empty")
    return [_float_or_inf(s) for s in items]


def _add_data_args(p: argparse.ArgumentParser, *, criteria: bool = True) -> None:
    p.add_argument("--input", required=True, help="headered CSV file")
    if criteria:
        p.add_argument("--criteria", required=True, help="JSON array of criteria")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--integer", action="append", default=[], metavar="COL",
                   help="treat COL as an integer attribute (repeatable)")
    p.add_argument("--rule", action="append", default=[], metavar="RULE",
                   help="preprocessing rule, e.g. discretize:age:10 (repeatable, applied in order)")


def _add_measure_args(p: argparse.ArgumentParser, *, multi: bool = False) -> None:
    choices = MEASURES + (("all",) if multi else ())
    p.add_argument("--measure", required=True, choices=choices)
    p.add_argument("--epsilon", type=_float_or_inf, default=1.0, help="privacy budget, 'inf' for no noise")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--chunk-size", type=_chunk_size, default=100)
    p.add_argument("--chunk-mode", choices=(STORED, SORTED), default=STORED)
    p.add_argument("--tight-unconditional", action="store_true",
                   help="use the 12|F|/n TVD sensitivity when every criterion is unconditional")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="repair solver node budget per chunk")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--output", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpunfair", description="Private unfairness measures for tabular data.")
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", help="compute a measure, optionally under DP")
    _add_data_args(m)
    _add_measure_args(m)
    m.add_argument("--timings", action="store_true",
                   help="include wall-clock seconds per phase (makes output non-reproducible)")

    s = sub.add_parser("sweep", help="sweep one parameter and report mean/std per point")
    s.add_argument("--kind", required=True, choices=("epsilon", "k", "scale", "gap"))
    s.add_argument("--grid", required=True, type=_grid, help="comma-separated axis values")
    s.add_argument("--input", help="CSV file (not used by gap sweeps)")
    s.add_argument("--criteria", help="criteria JSON (not used by gap sweeps)")
    s.add_argument("--delimiter", default=",")
    s.add_argument("--integer", action="append", default=[], metavar="COL")
    s.add_argument("--rule", action="append", default=[], metavar="RULE")
    s.add_argument("--n", type=int, default=100_000, help="synthetic table size for gap sweeps")
    s.add_argument("--scale-axis", choices=("n", "criteria"), default="n")
    _add_measure_args(s, multi=True)

    y = sub.add_parser("synth", help="write the synthetic polarized table")
    y.add_argument("--n", type=int, required=True)
    y.add_argument("--gap", type=float, required=True)
    y.add_argument("--seed", type=int, default=0)
    y.add_argument("--layout", choices=(INTERLEAVED, SHUFFLED), default=INTERLEAVED)
    y.add_argument("--output", required=True)

    w = sub.add_parser("export-wdimacs", help="write one chunk's repair CNF in WDIMACS")
    _add_data_args(w)
    w.add_argument("--criterion-index", type=int, default=0)
    w.add_argument("--chunk-size", type=_chunk_size, default=100)
    w.add_argument("--chunk-mode", choices=(STORED, SORTED), default=STORED)
    w.add_argument("--chunk", type=int, default=0, help="chunk index")
    w.add_argument("--output", required=True, help="WDIMACS path; the variable map goes to PATH.vars.json")
    return parser


def _load(args) -> tuple[Database, float]:
    t0 = time.perf_counter()
    kinds = {c: INTEGER for c in args.integer}
    db = load_csv(args.input, delimiter=args.delimiter, kinds=kinds)
    db = preprocess(db, [parse_rule(r) for r in args.rule])
    return db, time.perf_counter() - t0


def _params(args, measure: str) -> MeasureParams:
    return MeasureParams(
        measure,
        epsilon=args.epsilon,
        k=args.k,
        chunk_size=args.chunk_size,
        chunk_mode=args.chunk_mode,
        tight_unconditional=args.tight_unconditional,
        budget=args.budget,
    )


def _emit(text: str, output: str) -> None:
    if output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def run_measure(args) -> None:
    db, ingest = _load(args)
    criteria = load_criteria(args.criteria)
    reports, agg = cmd_measure(
        db, criteria, _params(args, args.measure), seed=args.seed, repeats=args.repeats,
        timings=args.timings, ingest_seconds=ingest,
    )
    if args.format == "json":
        text = dumps_json_lines([r.to_dict() for r in reports] + [agg.to_dict()])
    else:
        text = reports_to_csv(reports)
    _emit(text, args.output)


def run_sweep(args) -> None:
    measures = MEASURES if args.measure == "all" else (args.measure,)
    if args.kind == "k":
        measures = ("topk",)
    db = criteria = None
    if args.kind != "gap":
        if not args.input or not args.criteria:
            raise UsageError(f"{args.kind} sweep needs --input and --criteria")
        db, _ = _load(args)
        criteria = load_criteria(args.criteria)
    sweeps = []
    for m in measures:
        p = _params(args, m)
        kw = dict(seed=args.seed, repeats=args.repeats)
        if args.kind == "epsilon":
            sweeps.append(sweep_epsilon(db, criteria, p, args.grid, **kw))
        elif args.kind == "k":
            sweeps.append(sweep_k(db, criteria, p, [int(k) for k in args.grid], **kw))
        elif args.kind == "gap":
            sweeps.append(sweep_gap(p, args.grid, n=args.n, **kw))
        else:
            sweeps.append(sweep_scale(db, criteria, p, args.grid, axis=args.scale_axis, **kw))
    text = dumps_json_lines([s.to_dict() for s in sweeps]) if args.format == "json" else sweep_to_csv(sweeps)
    _emit(text, args.output)


def run_synth(args) -> None:
    write_csv(synth_polarized(GapSpec(args.n, args.gap, seed=args.seed, layout=args.layout)), args.output)


def export_chunk(db: Database, f, chunk_size: float, chunk: int, mode: str = STORED) -> tuple[str, list[dict]]:
    """WDIMACS text of one chunk's repair CNF and its variable-to-cell map."""
    bounds = chunk_bounds(db.n, chunk_size)
    if not 0 <= chunk < len(bounds):
        raise DataError(f"chunk index {chunk} out of range [0, {len(bounds)})")
    s, e = bounds[chunk]
    cnf = build_cnf(_self_join_from_keys(_ordered_keys(db, f, mode)[s:e], f))
    labels_p = db.schema[f.protected]
    labels_y = db.schema[f.outcome]
    labels_a = db.schema[f.admissible] if f.conditional else None
    mapping = []
    for i, (p, y, a) in enumerate(cnf.labels, start=1):
        mapping.append({
            "var": i,
            "p": labels_p.decode(p),
            "y": labels_y.decode(y),
            "a": None if a is None else labels_a.decode(a),
            "codes": [p, y, a],
        })
    return export_wdimacs(cnf), mapping


def run_export(args) -> None:
    db, _ = _load(args)
    criteria = load_criteria(args.criteria)
    if not 0 <= args.criterion_index < len(criteria):
        raise DataError(f"criterion index {args.criterion_index} out of range [0, {len(criteria)})")
    f = criteria[args.criterion_index]
    f.check(db.schema)
    text, mapping = export_chunk(db, f, args.chunk_size, args.chunk, args.chunk_mode)
    Path(args.output).write_text(text, encoding="utf-8")
    Path(args.output + ".vars.json").write_text(json.dumps(mapping, indent=1) + "\n", encoding="utf-8")


COMMANDS = {"measure": run_measure, "sweep": run_sweep, "synth": run_synth, "export-wdimacs": run_export}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "repeats", 1) < 1:
            raise UsageError("--repeats must be >= 1")
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"dpunfair {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverBudgetExceeded as exc:
        print(f"dpunfair {args.command}: repair solver: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DataError, ValueError, OSError) as exc:
        module = type(exc).__module__.rsplit(".", 1)[-1]
        print(f"dpunfair {args.command}: {module}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
