"""Command-line front end.

Exit codes: 0 success, 1 parse or validation error, 2 verification FAIL,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import re
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .barrington import barrington_compile
from .bp import PERMUTATION, bp_truth_table, eval_bp
from .compiler import compile_with_plan
from .encodings import ENCODINGS, TWO_CARD
from .errors import CardforgeError, DecodeFailure, InvalidPair, MalformedHalfCell, ParseError, TooLarge
from .executor import branch_estimate, build_step_chain, enumerate_traces_oracle, oracle_cap, prefix_probability, run_sampled
from .formula import formula_truth_table, parse_formula
from .model import ALICE, BOB
from .textio import format_bp, format_protocol, format_truth_table, parse_bp, parse_protocol, parse_truth_table, read_text, write_text
from .verifier import MODES, COMMITTED_MODE, bits_str, check_correctness, check_read_only, check_security, decode_output, view_of

EXIT_OK, EXIT_INVALID, EXIT_FAIL, EXIT_CAP = 0, 1, 2, 3
_PLAYER_KEYS = {"a": ALICE, "b": BOB}


def parse_inputs(text: str) -> tuple[tuple, tuple]:
    """``a=0110,b=1010`` -> ((0,1,1,0), (1,0,1,0))."""
    found: dict = {}
    for part in text.split(","):
        key, sep, bits = part.strip().partition("=")
        if not sep or key not in _PLAYER_KEYS or key in found or set(bits) - {"0", "1"}:
            raise ParseError(f"bad input {part!r}, expected a=<bits>,b=<bits>")
        found[key] = tuple(int(c) for c in bits)
    if set(found) != {"a", "b"}:
        raise ParseError("inputs need both a=<bits> and b=<bits>")
    return found["a"], found["b"]


def parse_omit(text: Optional[str]) -> Optional[dict]:
    """``a=1,3,b=2,4`` -> {"A": {1, 3}, "B": {2, 4}}; indices are one-based."""
    if not text:
        return None
    out: dict = {}
    key = None
    for part in text.split(","):
        part = part.strip()
        if "=" in part:
            key, _, part = part.partition("=")
            if key not in _PLAYER_KEYS or _PLAYER_KEYS[key] in out:
                raise ParseError(f"bad omission owner {key!r}")
            out[_PLAYER_KEYS[key]] = set()
        if key is None or not part.isdigit():
            raise ParseError(f"bad omission entry {part!r}, expected a=<i>,<j>,b=<k>")
        out[_PLAYER_KEYS[key]].add(int(part))
    return out


def _formula_text(arg: str) -> str:
    return read_text(arg[1:]) if arg.startswith("@") else arg


def _truth(args, n: int) -> Optional[dict]:
    if getattr(args, "truth", None):
        return parse_truth_table(read_text(args.truth))
    if getattr(args, "formula", None):
        return formula_truth_table(parse_formula(_formula_text(args.formula)), n)
    return None


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


# -- subcommands ----------------------------------------------------------------------


def cmd_bp_from_formula(args) -> int:
    bp = barrington_compile(parse_formula(_formula_text(args.formula)))
    _emit(format_bp(bp), args.output)
    return EXIT_OK


def cmd_bp_eval(args) -> int:
    bp = parse_bp(read_text(args.bp))
    restricted = bp.kind == PERMUTATION
    if args.table:
        sys.stdout.write(format_truth_table(bp_truth_table(bp, args.n)))
        return EXIT_OK
    if not args.input:
        raise ParseError("bp-eval needs --input or --table")
    x, y = parse_inputs(args.input)
    print(eval_bp(bp, x, y, restricted=restricted))
    return EXIT_OK


def cmd_compile(args) -> int:
    if bool(args.formula) == bool(args.bp):
        raise ParseError("compile needs exactly one of --formula and --bp")
    if args.formula:
        bp = barrington_compile(parse_formula(_formula_text(args.formula)))
    else:
        bp = parse_bp(read_text(args.bp))
    protocol, plan = compile_with_plan(bp, args.encoding, open_output=args.open, n=args.n, name=args.name)
    text = format_protocol(protocol)
    if args.emit_plan:
        text = "".join(line + "\n" for line in plan.lines()) + text
    _emit(text, args.output)
    return EXIT_OK


def cmd_run(args) -> int:
    p = parse_protocol(read_text(args.protocol))
    x, y = parse_inputs(args.input)
    run = run_sampled(p, x, y, args.seed, parse_omit(args.omit))
    if args.trace:
        for t, vis in enumerate(run.trace):
            print(f"step {t} {vis}")
    try:
        value = bits_str(decode_output(p, run.final))
    except (DecodeFailure, InvalidPair, MalformedHalfCell):
        value = "?"
    print(f"output {value}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    p = parse_protocol(read_text(args.protocol))
    x, y = parse_inputs(args.input)
    cap = args.cap if args.cap is not None else oracle_cap()
    try:
        dist = enumerate_traces_oracle(p, x, y, view=view_of(args.mode), omit=parse_omit(args.omit), cap=cap)
    except TooLarge as exc:
        print(f"TOO_LARGE estimate={exc.context.get('estimate', branch_estimate(p))} cap={cap}")
        return EXIT_CAP
    for word, prob in dist.items():
        print(f"p={prob.numerator}/{prob.denominator} {'/'.join(word)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    p = parse_protocol(read_text(args.protocol))
    f = _truth(args, p.n)
    omit = parse_omit(args.omit)
    ok = True
    report = check_security(p, f, args.mode, omit)
    print(f"security[{args.mode}]: {report}")
    ok &= report.passed
    for extra in args.also or []:
        if extra == "read-only":
            report = check_read_only(p)
        else:
            if f is None:
                raise ParseError("correctness needs --truth or --formula")
            report = check_correctness(p, f)
        print(f"{extra}: {report}")
        ok &= report.passed
    return EXIT_OK if ok else EXIT_FAIL


_FAIL_LINE = re.compile(
    r"FAIL pair=\(([01]*),([01]*)\)\|\(([01]*),([01]*)\) prefix=(\S*) p1=(\d+)/(\d+) p2=(\d+)/(\d+)")


def parse_fail_line(line: str):
    """((x, y), (x', y'), prefix, p1, p2) from a security FAIL report."""
    m = _FAIL_LINE.search(line)
    if not m:
        raise ParseError(f"not a security FAIL report: {line.strip()!r}")
    g = m.groups()
    bits = [tuple(int(c) for c in s) for s in g[:4]]
    prefix = tuple(g[4].split("/")) if g[4] else ()
    return ((bits[0], bits[1]), (bits[2], bits[3]), prefix,
            Fraction(int(g[5]), int(g[6])), Fraction(int(g[7]), int(g[8])))


def cmd_inspect(args) -> int:
    p = parse_protocol(read_text(args.protocol))
    first, second, prefix, p1, p2 = parse_fail_line(args.report)
    view = view_of(args.mode)
    omit = parse_omit(args.omit)
    got = []
    for (x, y), claimed in ((first, p1), (second, p2)):
        q = prefix_probability(build_step_chain(p, x, y, view=view, omit=omit), prefix)
        got.append(q)
        print(f"input ({bits_str(x)},{bits_str(y)}) prefix probability {q.numerator}/{q.denominator} "
              f"(report says {claimed.numerator}/{claimed.denominator})")
    confirmed = got == [p1, p2] and p1 != p2
    print(f"witness of length {len(prefix)} {'confirmed' if confirmed else 'NOT reproduced'}")
    return EXIT_OK if confirmed else EXIT_FAIL


# -- wiring ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cardforge", description="Card-based two-party protocol compiler and verifier.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="formula or width-5 program -> card protocol")
    c.add_argument("--formula", help="formula text, or @file")
    c.add_argument("--bp", help="branching program file")
    c.add_argument("--encoding", choices=ENCODINGS, default=TWO_CARD)
    c.add_argument("--open", action="store_true", help="turn the output pair face up at the end")
    c.add_argument("--n", type=int, help="bits per player (default: highest variable index)")
    c.add_argument("--name", default="compiled")
    c.add_argument("--emit-plan", action="store_true", help="prefix the protocol with the compilation plan")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_compile)

    e = sub.add_parser("bp-eval", help="evaluate a branching program")
    e.add_argument("--bp", required=True)
    e.add_argument("--input")
    e.add_argument("--table", action="store_true", help="print the whole truth table")
    e.add_argument("--n", type=int)
    e.set_defaults(func=cmd_bp_eval)

    f = sub.add_parser("bp-from-formula", help="formula -> width-5 permutation program")
    f.add_argument("--formula", required=True, help="formula text, or @file")
    f.add_argument("-o", "--output")
    f.set_defaults(func=cmd_bp_from_formula)

    r = sub.add_parser("run", help="one sampled execution")
    r.add_argument("--protocol", required=True)
    r.add_argument("--input", required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--omit")
    r.add_argument("--trace", action="store_true")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="security, read-only and correctness checks")
    v.add_argument("--protocol", required=True)
    v.add_argument("--truth", help="truth table file, one 'xy -> bit' line per input")
    v.add_argument("--formula", help="derive the truth table from this formula (text or @file)")
    v.add_argument("--mode", choices=MODES, default=COMMITTED_MODE)
    v.add_argument("--also", action="append", choices=("read-only", "correctness"))
    v.add_argument("--omit")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="exhaustive trace distribution")
    o.add_argument("--protocol", required=True)
    o.add_argument("--input", required=True)
    o.add_argument("--mode", choices=MODES, default=COMMITTED_MODE)
    o.add_argument("--omit")
    o.add_argument("--cap", type=int, help="branch cap (default from the environment or 10^6)")
    o.set_defaults(func=cmd_oracle)

    i = sub.add_parser("inspect", help="replay a security FAIL report")
    i.add_argument("--protocol", required=True)
    i.add_argument("--report", required=True, help="the FAIL line")
    i.add_argument("--mode", choices=MODES, default=COMMITTED_MODE)
    i.add_argument("--omit")
    i.set_defaults(func=cmd_inspect)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TooLarge as exc:
        print(f"TOO_LARGE {exc}", file=sys.stderr)
        return EXIT_CAP
    except (CardforgeError, ValueError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"IO_ERROR: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
