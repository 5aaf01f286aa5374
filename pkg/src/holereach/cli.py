"""Command-line entry point.

Exit codes: 0 language nonempty (or replay accepted), 1 empty up to the
bound (or replay rejected), 2 usage, parse or validation error, 3 node
budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from . import benchmarks
from .closure import compute_wr, compute_wrt
from .errors import BudgetExceeded, HoleReachError, ModelSyntaxError, ModelValidationError
from .holesearch import check_reachable
from .model import Model, load_model, serialize_model
from .semantics import format_witness, oracle_reachable, parse_witness, replay
from .witness import assemble_witness

EXIT_NONEMPTY, EXIT_EMPTY, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2, 3
MAX_HOLES_LIMIT = 16


@dataclass
class CheckRequest:
    model_path: str
    max_holes: int = 2
    timed: Optional[bool] = None  # None: follow the file header
    emit_witness: Optional[str] = None  # path, or "-" for stdout
    stats_path: Optional[str] = None
    node_cap: Optional[int] = None
    allow_many_holes: bool = False


def _load(path: str) -> Model:
    return load_model(path)


def _apply_mode(m: Model, timed: Optional[bool]) -> Model:
    if timed is None or timed == m.timed:
        return m
    if timed:
        return replace(m, kind="tmpda")
    return m.untimed()


def cmd_check(req: CheckRequest, out=None) -> int:
    out = out or sys.stdout
    if req.max_holes < 0:
        print("error: --max-holes must be non-negative", file=sys.stderr)
        return EXIT_ERROR
    if req.max_holes > MAX_HOLES_LIMIT and not req.allow_many_holes:
        print(
            f"error: --max-holes above {MAX_HOLES_LIMIT} needs --allow-many-holes",
            file=sys.stderr,
        )
        return EXIT_ERROR
    m = _apply_mode(_load(req.model_path), req.timed)
    stats_handle = open(req.stats_path, "w", encoding="utf-8") if req.stats_path else None

    def on_stage(stage) -> None:
        if stats_handle is not None:
            stats_handle.write(json.dumps(stage.as_json()) + "\n")

    try:
        outcome = check_reachable(m, req.max_holes, node_cap=req.node_cap, on_stage=on_stage)
    finally:
        if stats_handle is not None:
            stats_handle.close()
    if not outcome:
        print(f"RESULT: EMPTY up_to_holes={req.max_holes}", file=out)
        return EXIT_EMPTY
    print(f"RESULT: NONEMPTY holes={outcome.hole_bound}", file=out)
    if req.emit_witness:
        text = format_witness(assemble_witness(outcome, m), m)
        if req.emit_witness == "-":
            out.write(text)
        else:
            with open(req.emit_witness, "w", encoding="utf-8") as handle:
                handle.write(text)
    return EXIT_NONEMPTY


def cmd_generate(name: str, out_path: Optional[str], *, m: int = 3, n: int = 2, min_n: int = 1, out=None) -> int:
    model = benchmarks.generate(name, m=m, n=n, min_n=min_n)
    text = serialize_model(model)
    if out_path is None or out_path == "-":
        (out or sys.stdout).write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    return 0


def wr_lines(m: Model, project: bool = False) -> list[str]:
    if not m.timed:
        return sorted(f"{a} -> {b}" for a, b in compute_wr(m).pairs())
    wrt = compute_wrt(m)
    if project:
        return sorted(f"{a} -> {b}" for a, b in wrt.projection())
    return sorted(f"{e.src} -> {e.dst} t={e.t}" for e in wrt.entries())


def cmd_wr(model_path: str, project: bool = False, out=None) -> int:
    out = out or sys.stdout
    for line in wr_lines(_load(model_path), project):
        print(line, file=out)
    return 0


def cmd_oracle(
    model_path: str,
    depth: int,
    max_elapse: int = 0,
    max_total_elapse: Optional[int] = None,
    node_cap: int = 2_000_000,
    out=None,
) -> int:
    out = out or sys.stdout
    m = _load(model_path)
    result = oracle_reachable(
        m, depth, max_elapse, max_total_elapse=max_total_elapse, node_cap=node_cap
    )
    if not result:
        print(f"ORACLE: NOT_FOUND depth={depth} explored={result.explored}", file=out)
        return EXIT_EMPTY
    w = result.witness
    print(f"ORACLE: REACHABLE holes={w.hole_bound} steps={len(w.steps)} elapse={w.total_elapse}", file=out)
    out.write(format_witness(w, m))
    return EXIT_NONEMPTY


def cmd_replay(model_path: str, witness_path: str, out=None) -> int:
    out = out or sys.stdout
    m = _load(model_path)
    with open(witness_path, encoding="utf-8") as handle:
        w = parse_witness(handle.read())
    result = replay(m, w)
    if result:
        print(f"REPLAY: ACCEPTING elapse={w.total_elapse}", file=out)
        return 0
    print(f"REPLAY: REJECTED at step {result.index}: {result.reason}", file=out)
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holereach",
        description="Hole-bounded reachability for multi-stack pushdown automata.",
        epilog="exit codes: 0 nonempty/accepted, 1 empty/rejected, 2 error, 3 node budget exceeded",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide K-hole-bounded emptiness")
    p.add_argument("model")
    p.add_argument("--max-holes", type=int, default=2)
    p.add_argument("--allow-many-holes", action="store_true", help=f"permit --max-holes above {MAX_HOLES_LIMIT}")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--timed", dest="timed", action="store_true", default=None)
    mode.add_argument("--untimed", dest="timed", action="store_false")
    p.add_argument("--witness", metavar="PATH", help="write a witness run ('-' for stdout)")
    p.add_argument("--stats", metavar="PATH", help="write per-stage JSON lines")
    p.add_argument("--node-cap", type=int)

    p = sub.add_parser("generate", help="write a benchmark model")
    p.add_argument("name", choices=benchmarks.BENCHMARKS)
    p.add_argument("-o", "--out", default="-")
    p.add_argument("--m", type=int, default=3, help="prodcons A batch size")
    p.add_argument("--n", type=int, default=2, help="prodcons B batch size")
    p.add_argument("--min-n", type=int, default=1, help="lprime-phase minimum n")

    p = sub.add_parser("wr", help="dump the well-nested reachability relation")
    p.add_argument("model")
    p.add_argument("--project", action="store_true", help="timed models: location pairs only")

    p = sub.add_parser("oracle", help="bounded brute-force search")
    p.add_argument("model")
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--max-elapse", type=int, default=0)
    p.add_argument("--max-total-elapse", type=int)
    p.add_argument("--node-cap", type=int, default=2_000_000)

    p = sub.add_parser("replay", help="replay a witness file")
    p.add_argument("model")
    p.add_argument("witness")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            req = CheckRequest(
                args.model, args.max_holes, args.timed, args.witness, args.stats,
                args.node_cap, args.allow_many_holes,
            )
            return cmd_check(req)
        if args.command == "generate":
            return cmd_generate(args.name, args.out, m=args.m, n=args.n, min_n=args.min_n)
        if args.command == "wr":
            return cmd_wr(args.model, args.project)
        if args.command == "oracle":
            return cmd_oracle(args.model, args.depth, args.max_elapse, args.max_total_elapse, args.node_cap)
        return cmd_replay(args.model, args.witness)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ModelValidationError as exc:
        for diag in exc.diagnostics:
            print(f"error: {diag}", file=sys.stderr)
        return EXIT_ERROR
    except (ModelSyntaxError, HoleReachError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
