"""Correctness, read-only and security checks with exact rational arithmetic.

Security is distribution equality over full emission sequences.  Two chains
are compared by maintaining, level by level, a basis of the span of joint
prefix vectors over the disjoint union of both chains' nodes; a prefix
vector whose two halves carry different mass is a distinguishing witness.
Basis vectors are genuine prefix vectors, so the first violation found is a
shortest distinguishing prefix.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Optional

from .cards import format_state, visible_of
from .encodings import decode_1card, decode_2card
from .errors import CardforgeError, InvalidPair
from .executor import StepChain, build_step_chain
from .model import ALICE, BOB, OPEN, Protocol, all_inputs, apply_action, initial_states

COMMITTED_MODE = "committed"
OUTPUT_AWARE = "output-aware"
PLAYER_ALICE = "player:alice"
PLAYER_BOB = "player:bob"
MODES = (COMMITTED_MODE, OUTPUT_AWARE, PLAYER_ALICE, PLAYER_BOB)

TruthTable = Mapping  # (x bits, y bits) -> 0/1


def bits_str(bits) -> str:
    return "".join(str(b) for b in bits)


@dataclass
class VerdictReport:
    passed: bool
    pair: Optional[tuple] = None  # ((x, y), (x', y'))
    prefix: tuple = ()
    p1: Optional[Fraction] = None
    p2: Optional[Fraction] = None
    code: Optional[str] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        if self.passed:
            return "PASS"
        if self.p1 is None:
            head = f"FAIL {self.code}" if self.code else "FAIL"
            if self.pair:
                head += " pair=" + "|".join(f"({bits_str(x)},{bits_str(y)})" for x, y in self.pair)
            return f"{head} {self.detail}".rstrip()
        pair = ""
        if self.pair:
            pair = "pair=" + "|".join(f"({bits_str(x)},{bits_str(y)})" for x, y in self.pair) + " "
        return (f"FAIL {pair}prefix={'/'.join(self.prefix)} p1={_frac(self.p1)} p2={_frac(self.p2)}")


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


# -- correctness and read-only ------------------------------------------------------


def decode_output(p: Protocol, state) -> list[int]:
    """Decode the output cells; consecutive pairs for 2-card style, one cell otherwise."""
    pos = p.output.positions
    cells = [state[q - 1] for q in pos]
    if len(cells) % 2 == 0:
        return [decode_2card(cells[i:i + 2]) for i in range(0, len(cells), 2)]
    return [decode_1card(c) for c in cells]


def check_correctness(p: Protocol, f: TruthTable) -> VerdictReport:
    for x, y in all_inputs(p.n):
        want = f[(x, y)]
        chain = build_step_chain(p, x, y)
        for st, _w in chain.final_states():
            if p.output.kind == OPEN and any(st[q - 1] is not None and not st[q - 1].face_up
                                             for q in p.output.positions):
                return VerdictReport(False, ((x, y),), code="DECODE_FAILURE",
                                     detail=f"open output not face-up in {format_state(st)}")
            try:
                got = decode_output(p, st)
            except InvalidPair as exc:
                return VerdictReport(False, ((x, y),), code="DECODE_FAILURE", detail=f"{exc} in {format_state(st)}")
            expected = list(want) if isinstance(want, tuple) else [want] * len(got)
            if got != expected:
                return VerdictReport(False, ((x, y),), code="WRONG_OUTPUT",
                                     detail=f"decoded {got}, expected {want} in {format_state(st)}")
    return VerdictReport(True)


def check_read_only(p: Protocol) -> VerdictReport:
    """Occupied input positions must always hold their initially committed suit."""
    inputs = range(1, p.layout.input_count + 1)
    for x, y in all_inputs(p.n):
        for start, _w in initial_states(p, x, y):
            committed = [start[q - 1] for q in inputs]
            frontier = {start}
            for t in range(p.length + 1):
                for st in frontier:
                    for q, orig in zip(inputs, committed):
                        cell = st[q - 1]
                        if cell is not None and (orig is None or cell.suit is not orig.suit):
                            return VerdictReport(False, ((x, y),), code="NOT_READ_ONLY",
                                                 detail=f"step {t} position {q} in {format_state(st)}")
                if t == p.length:
                    break
                nxt = set()
                for st in frontier:
                    act = p.program[t][visible_of(st)]
                    nxt.update(s for s, _pr in apply_action(st, act, p.layout))
                frontier = nxt
    return VerdictReport(True)


# -- distribution equality ------------------------------------------------------------


class _Span:
    """Incremental row-echelon basis over the rationals (sparse dict vectors)."""

    def __init__(self):
        self.rows: dict = {}  # pivot -> normalised row with that pivot as its smallest key

    def add(self, vec: dict) -> bool:
        v = {k: c for k, c in vec.items() if c}
        while v:
            hits = [k for k in v if k in self.rows]
            if not hits:
                break
            k = min(hits)
            c = v[k]
            for j, r in self.rows[k].items():
                nv = v.get(j, Fraction(0)) - c * r
                if nv:
                    v[j] = nv
                else:
                    v.pop(j, None)
        if not v:
            return False
        pivot = min(v)
        c = v[pivot]
        self.rows[pivot] = {k: val / c for k, val in v.items()}
        return True


def distributions_equal(a: StepChain, b: StepChain) -> VerdictReport:
    """Exact equality of the emission-sequence distributions of two chains."""
    if a.length != b.length:
        return VerdictReport(False, code="LENGTH_MISMATCH", detail=f"lengths {a.length} and {b.length}")
    na = len(a.levels[0])
    # joint vector: keys ("a", i) encoded as i, ("b", j) encoded as na + j per level
    basis: list = []  # (word, vec)
    words: dict = {}
    for i, w in enumerate(a.init):
        e = a.levels[0][i][1]
        words.setdefault(e, {})[i] = words.get(e, {}).get(i, Fraction(0)) + w
    for j, w in enumerate(b.init):
        e = b.levels[0][j][1]
        words.setdefault(e, {})[na + j] = words.get(e, {}).get(na + j, Fraction(0)) + w
    span = _Span()
    for e in sorted(words):
        vec = words[e]
        if span.add(vec):
            bad = _check(vec, na, (e,))
            if bad is not None:
                return bad
            basis.append(((e,), vec))
    for t in range(a.length):
        na_t, na_next = len(a.levels[t]), len(a.levels[t + 1])
        span = _Span()
        nxt_basis: list = []
        for word, vec in basis:
            split: dict = {}
            for k, w in vec.items():
                if k < na_t:
                    for j, p in a.edges[t][k]:
                        e = a.levels[t + 1][j][1]
                        d = split.setdefault(e, {})
                        d[j] = d.get(j, Fraction(0)) + w * p
                else:
                    for j, p in b.edges[t][k - na_t]:
                        e = b.levels[t + 1][j][1]
                        d = split.setdefault(e, {})
                        d[na_next + j] = d.get(na_next + j, Fraction(0)) + w * p
            for e in sorted(split):
                v = split[e]
                if span.add(v):
                    bad = _check(v, na_next, word + (e,))
                    if bad is not None:
                        return bad
                    nxt_basis.append((word + (e,), v))
        basis = nxt_basis
    return VerdictReport(True)


def _check(vec: dict, split_at: int, word: tuple) -> Optional[VerdictReport]:
    pa = sum((w for k, w in vec.items() if k < split_at), Fraction(0))
    pb = sum((w for k, w in vec.items() if k >= split_at), Fraction(0))
    if pa != pb:
        return VerdictReport(False, prefix=word, p1=pa, p2=pb)
    return None


# -- security ----------------------------------------------------------------------


def _classes(p: Protocol, f: Optional[TruthTable], mode: str) -> list[list]:
    inputs = all_inputs(p.n)
    key: Callable
    if mode == COMMITTED_MODE:
        key = lambda xy: 0  # noqa: E731
    elif mode == OUTPUT_AWARE:
        if f is None:
            raise CardforgeError("output-aware security needs a truth table")
        key = lambda xy: f[xy]  # noqa: E731
    elif mode == PLAYER_ALICE:
        key = lambda xy: xy[0]  # noqa: E731
    elif mode == PLAYER_BOB:
        key = lambda xy: xy[1]  # noqa: E731
    else:
        raise ValueError(f"unknown security mode {mode!r}")
    groups: dict = {}
    for xy in inputs:
        groups.setdefault(key(xy), []).append(xy)
    return [groups[k] for k in sorted(groups)]


def view_of(mode: str) -> Optional[str]:
    return {PLAYER_ALICE: ALICE, PLAYER_BOB: BOB}.get(mode)


def check_security(p: Protocol, f: Optional[TruthTable] = None, mode: str = COMMITTED_MODE,
                   omit: Optional[Mapping] = None) -> VerdictReport:
    """Compare every input with its class representative under ``mode``."""
    view = view_of(mode)
    for group in _classes(p, f, mode):
        ref = group[0]
        ref_chain = build_step_chain(p, *ref, view=view, omit=omit)
        for other in group[1:]:
            verdict = distributions_equal(ref_chain, build_step_chain(p, *other, view=view, omit=omit))
            if not verdict.passed:
                verdict.pair = (ref, other)
                return verdict
    return VerdictReport(True)


def truth_table(fn: Callable, n: int) -> dict:
    """Tabulate ``fn``; a tuple-valued ``fn`` describes a multi-bit output."""
    out = {}
    for x, y in all_inputs(n):
        v = fn(x, y)
        out[(x, y)] = tuple(int(b) for b in v) if isinstance(v, (tuple, list)) else int(v)
    return out

