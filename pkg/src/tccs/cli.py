"""Command line front end: ``tccs parse|lts|check|sat|translate|repro``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import experiments, library
from .bisim import BISIM_KINDS, Bisimilar, NotBisimilar, check_bisim
from .history import initial_ext, initial_std
from .logic import (
    LOGICS, Var, fragment_violations, parse_formula, render_formula, sat,
    translate_canco_to_hasco, translate_eq_to_canco, translate_hasco_to_eq,
)
from .lts import KINDS, SearchBounds, explore
from .syntax import (
    ParseError, TransName, check_well_formed, free_transaction_names, parse_process, render,
)

EXIT_OK, EXIT_NO, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_source(arg: Optional[str]) -> str:
    """A library name, ``-`` or a missing argument for stdin, ``@path`` for a
    file, otherwise the literal text."""
    if arg is None or arg == "-":
        text = sys.stdin.read()
    elif arg.startswith("@"):
        with open(arg[1:], encoding="utf-8") as fh:
            text = fh.read()
    elif arg in library.SOURCES:
        text = library.SOURCES[arg]
    else:
        text = arg
    if not text.strip():
        raise UsageError("empty input")
    return text


def _process(arg: Optional[str]):
    p = parse_process(_read_source(arg), closed=False)
    problems = check_well_formed(p)
    if problems:
        raise UsageError("ill-formed process: " + "; ".join(str(v) for v in problems))
    return p


def _bounds(args) -> SearchBounds:
    return SearchBounds(max_states=args.max_states, tau_bound=args.tau_bound, depth=args.depth)


def _emit(args, record: dict, text: str) -> None:
    if args.format == "json-lines":
        print(json.dumps(record, sort_keys=True))
    else:
        print(text)


# ---------------------------------------------------------------------------
# Commands

def cmd_parse(args) -> int:
    p = parse_process(_read_source(args.source), closed=False)
    problems = check_well_formed(p)
    names = sorted(str(k) for k in free_transaction_names(p))
    record = {"process": render(p), "ftn": names, "well_formed": not problems,
              "violations": [{"condition": v.condition, "subterm": render(v.subterm),
                              "message": v.message} for v in problems]}
    lines = [render(p), "ftn = {" + ", ".join(names) + "}"]
    lines += ["ok"] if not problems else [f"violation: {v}" for v in problems]
    _emit(args, record, "\n".join(lines))
    return EXIT_OK if not problems else EXIT_NO


def cmd_lts(args) -> int:
    p = _process(args.process)
    c = initial_std(p) if args.lts == "std" else initial_ext(p)
    lts = explore(args.lts, c, _bounds(args))
    for rec in lts.records():
        text = f"{rec['id']}: {rec['state']}  {rec['history']}"
        for t in rec["transitions"]:
            text += f"\n    --{t['label']}--> {t['target']}  [{t['rule']}]"
        _emit(args, rec, text)
    _emit(args, {"states": len(lts.states), "exhaustive": lts.exhaustive},
          f"{len(lts.states)} states, exhaustive={lts.exhaustive}")
    return EXIT_OK if lts.exhaustive else EXIT_UNKNOWN


def cmd_check(args) -> int:
    p, q = _process(args.left), _process(args.right)
    mk = initial_std if args.kind == "standard" else initial_ext
    verdict = check_bisim(args.kind, mk(p), mk(q), _bounds(args),
                          formula=not args.no_formula)
    record = {"kind": args.kind, "verdict": type(verdict).__name__}
    lines = [type(verdict).__name__]
    if isinstance(verdict, Bisimilar):
        record["relation_size"] = len(verdict.relation)
        lines.append(f"relation of {len(verdict.relation)} pairs")
    elif isinstance(verdict, NotBisimilar):
        record["reason"] = verdict.reason
        record["trace"] = verdict.trace
        lines.append(verdict.reason)
        lines += ["  " + step for step in verdict.trace]
        if verdict.formula is not None:
            record["formula"] = render_formula(verdict.formula)
            lines.append("distinguishing formula: " + record["formula"])
    else:
        record["reason"] = verdict.reason
        lines.append(verdict.reason)
    _emit(args, record, "\n".join(lines))
    return verdict.exit_code


def cmd_sat(args) -> int:
    p = _process(args.process)
    f = parse_formula(args.formula, closed=True)
    result = sat(args.logic, initial_ext(p), f, _bounds(args),
                 strong_tau=args.strong_diamond_tau)
    label = {True: "true", False: "false", None: "unknown"}[result]
    _emit(args, {"logic": args.logic, "formula": render_formula(f), "result": label}, label)
    return {True: EXIT_OK, False: EXIT_NO, None: EXIT_UNKNOWN}[result]


def _values(text: str) -> list:
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        out.append(TransName(item[1:], True) if item.startswith("#") else Var(item))
    return out


def _relation(text: str) -> list:
    pairs = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        left, _, right = item.partition("=")
        if not right:
            raise UsageError(f"relation entries look like x=y, got {item!r}")
        a, b = _values(left)[0], _values(right)[0]
        pairs += [(a, b), (b, a), (a, a), (b, b)]
    return pairs


SOURCE_LOGIC = {"ch": "canco", "ec": "eq", "he": "hasco"}
TARGET_LOGIC = {"ch": "hasco", "ec": "canco", "he": "eq"}


def cmd_translate(args) -> int:
    f = parse_formula(args.formula)
    problems = fragment_violations(f, SOURCE_LOGIC[args.direction])
    if problems:
        raise UsageError("; ".join(problems))
    running = _values(args.running)
    if args.direction == "ch":
        g = translate_canco_to_hasco(f, running)
    elif args.direction == "ec":
        g = translate_eq_to_canco(f, running, _relation(args.relation))
    else:
        g = translate_hasco_to_eq(f)
    record = {"direction": args.direction, "input": render_formula(f),
              "output": render_formula(g)}
    text = render_formula(g)
    code = EXIT_OK
    if args.verify:
        c = initial_ext(_process(args.verify))
        before = sat(SOURCE_LOGIC[args.direction], c, f, _bounds(args))
        after = sat(TARGET_LOGIC[args.direction], c, g, _bounds(args))
        record.update(before=before, after=after)
        text += f"\nverify: {before} -> {after}"
        if before is None or after is None:
            code = EXIT_UNKNOWN
        elif before != after:
            code = EXIT_NO
    _emit(args, record, text)
    return code


def cmd_repro(args) -> int:
    try:
        results = experiments.run(args.example, args.seed)
    except KeyError:
        raise UsageError(f"unknown example {args.example!r}; choose from "
                         + ", ".join(["all", *experiments.EXPERIMENTS]))
    failed = 0
    for ident, checks in results.items():
        for check in checks:
            failed += not check.ok
            status = "PASS" if check.ok else "FAIL"
            _emit(args, {"example": ident, "check": check.name, "ok": check.ok,
                         "detail": check.detail},
                  f"{status} {ident}: {check.name}" + (f" ({check.detail})" if check.detail else ""))
    return EXIT_OK if not failed else EXIT_NO


# ---------------------------------------------------------------------------
# Argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--max-states", type=int, default=10_000)
    common.add_argument("--tau-bound", type=int, default=2_000)
    common.add_argument("--depth", type=int, default=64)
    common.add_argument("--format", choices=("text", "json-lines"), default="text")
    common.add_argument("--seed", type=int, default=0,
                        help="shift for the seeds of the randomised repro suites")

    parser = _Parser(prog="tccs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", parents=[common], help="parse and check well-formedness")
    p.add_argument("source", nargs="?", help="process text, library name, @file or - for stdin")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("lts", parents=[common], help="dump the reachable transition system")
    p.add_argument("process")
    p.add_argument("--lts", choices=KINDS, default="ext")
    p.set_defaults(func=cmd_lts)

    p = sub.add_parser("check", parents=[common], help="decide a bisimilarity")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--kind", choices=BISIM_KINDS, default="hasco")
    p.add_argument("--no-formula", action="store_true",
                   help="skip distinguishing formula extraction")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sat", parents=[common], help="model check a closed formula")
    p.add_argument("process")
    p.add_argument("formula")
    p.add_argument("--logic", choices=LOGICS, default="hasco")
    p.add_argument("--strong-diamond-tau", action="store_true",
                   help="read <tau> as a single step instead of a weak one")
    p.set_defaults(func=cmd_sat)

    p = sub.add_parser("translate", parents=[common], help="translate between the logics")
    p.add_argument("formula")
    p.add_argument("--direction", choices=("ch", "ec", "he"), required=True)
    p.add_argument("--running", default="", help="comma separated R, e.g. x,#m1")
    p.add_argument("--relation", default="", help="comma separated pairs, e.g. x=y")
    p.add_argument("--verify", metavar="PROCESS",
                   help="check the formula and its translation agree on PROCESS")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("repro", parents=[common], help="run the built-in experiments")
    p.add_argument("example", nargs="?", default="all")
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None) -> int:
    # deep recursive terms are hashed and rendered recursively
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 10_000))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tccs: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"tccs: parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"tccs: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
