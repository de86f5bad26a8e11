"""Line-oriented text formats for protocols, fragments, branching programs and formulas.

Every ``format_*`` function produces the canonical text; ``parse_*`` accepts
that text plus blank lines and ``#`` comment lines, so
``format(parse(text)) == text`` for canonical input.
"""

from __future__ import annotations

from typing import Callable, Iterator

from .bp import LAYERED, PERMUTATION, BranchingProgram, Layer
from .encodings import CELLS_PER_BIT, ENCODINGS
from .errors import ParseError, ValidationError
from .formula import format_formula, parse_formula  # noqa: F401  (re-exported)
from .fragments import ProtocolFragment, Rule
from .model import COMMITTED, OPEN, PLAYERS, Extend, Move, OutputSpec, Protocol, Shuffle, ShuffleGroup, TableLayout, Turn

_VISIBLE = set(".?HC")
_PATTERN_TOKENS = set(".?HC*~#")


def _ints(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",")) if text else ()


def _join(values) -> str:
    return ",".join(map(str, values))


def _lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for no, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield no, line.split()


# -- actions ------------------------------------------------------------------------


def format_action(act) -> str:
    if isinstance(act, Move):
        return f"move {act.player} {act.src} {act.dst}"
    if isinstance(act, Turn):
        return f"turn {act.player} {act.pos}"
    if isinstance(act, Shuffle):
        g = act.group
        kind = g.kind if g.kind != "explicit" else "explicit:" + ";".join(_join(p) for p in g.perms)
        return f"shuffle {act.player} {_join(act.positions)} {kind}"
    if isinstance(act, Extend):
        tail = "" if act.honest else " dishonest"
        return f"extend {act.player} {act.src} {act.dst} {_join(act.deck)}{tail}"
    raise TypeError(f"not an action: {act!r}")


def parse_action(words: list[str], line: int):
    if not words:
        raise ParseError("missing action", line)
    kw, args = words[0], words[1:]

    def need(k):
        if len(args) != k:
            raise ParseError(f"{kw} takes {k} arguments, got {len(args)}", line)

    try:
        if args and args[0] not in PLAYERS:
            raise ParseError(f"unknown player {args[0]!r}", line)
        if kw == "move":
            need(3)
            return Move(args[0], int(args[1]), int(args[2]))
        if kw == "turn":
            need(2)
            return Turn(args[0], int(args[1]))
        if kw == "shuffle":
            need(3)
            kind = args[2]
            if kind in ("cyclic", "symmetric"):
                group = ShuffleGroup(kind)
            elif kind.startswith("explicit:"):
                try:
                    group = ShuffleGroup.explicit(_ints(p) for p in kind[len("explicit:"):].split(";"))
                except ValueError as exc:
                    raise ValidationError(f"line {line}: {exc}") from None
            else:
                raise ParseError(f"unknown shuffle kind {kind!r}", line)
            return Shuffle(args[0], _ints(args[1]), group)
        if kw == "extend":
            if len(args) == 5 and args[4] == "dishonest":
                return Extend(args[0], int(args[1]), int(args[2]), _ints(args[3]), honest=False)
            need(4)
            return Extend(args[0], int(args[1]), int(args[2]), _ints(args[3]))
    except ValueError as exc:
        raise ParseError(f"bad number in {kw} action ({exc})", line) from None
    raise ParseError(f"unknown action keyword {kw!r}", line)


# -- protocols ----------------------------------------------------------------------


def format_protocol(p: Protocol) -> str:
    lay = p.layout
    out = [
        f"protocol {p.name}",
        f"n {lay.n}",
        f"deck H:{p.hearts} C:{p.clubs}",
        f"positions {lay.m}",
        f"encoding {p.encoding}",
        f"length {p.length}",
        "output " + " ".join(map(str, p.output.positions)) + f" {p.output.kind}",
    ]
    for t, step in enumerate(p.program, start=1):
        for vis in sorted(step):
            out.append(f"step {t} {vis} {format_action(step[vis])}")
    return "\n".join(out) + "\n"


_HEADERS = ("n", "deck", "positions", "encoding", "length", "output")


def _header(words: list[str], line: int, fields: dict) -> None:
    key = words[0]
    if key in fields:
        raise ParseError(f"duplicate {key} line", line)
    try:
        if key in ("n", "positions", "length"):
            if len(words) != 2:
                raise ParseError(f"{key} takes one integer", line)
            fields[key] = int(words[1])
        elif key == "deck":
            if len(words) != 3 or not words[1].startswith("H:") or not words[2].startswith("C:"):
                raise ParseError("expected deck H:<int> C:<int>", line)
            fields[key] = (int(words[1][2:]), int(words[2][2:]))
        elif key == "encoding":
            if len(words) != 2 or words[1] not in ENCODINGS:
                raise ParseError(f"unknown encoding {' '.join(words[1:])!r}", line)
            fields[key] = words[1]
        elif key == "output":
            if len(words) < 3 or words[-1] not in (COMMITTED, OPEN):
                raise ParseError("expected output <pos>... committed|open", line)
            fields[key] = OutputSpec(tuple(int(w) for w in words[1:-1]), words[-1])
    except ValueError as exc:
        raise ParseError(f"bad number ({exc})", line) from None


def parse_protocol(text: str) -> Protocol:
    fields: dict = {}
    name = None
    entries: list = []
    for no, words in _lines(text):
        key = words[0]
        if name is None:
            if key != "protocol" or len(words) != 2:
                raise ParseError("expected 'protocol <name>' header", no)
            name = words[1]
        elif key in _HEADERS:
            _header(words, no, fields)
        elif key == "step":
            if len(words) < 4:
                raise ParseError("expected step <t> <visible> <action>", no)
            try:
                t = int(words[1])
            except ValueError:
                raise ParseError(f"bad step index {words[1]!r}", no) from None
            if not set(words[2]) <= _VISIBLE:
                raise ParseError(f"bad visible state {words[2]!r}", no)
            entries.append((no, t, words[2], parse_action(words[3:], no)))
        else:
            raise ParseError(f"unknown keyword {key!r}", no)
    if name is None:
        raise ParseError("empty protocol file", 1)
    missing = [k for k in _HEADERS if k not in fields]
    if missing:
        raise ParseError(f"missing header lines: {', '.join(missing)}", 1)
    hearts, clubs = fields["deck"]
    enc = fields["encoding"]
    try:
        layout = TableLayout(fields["n"], hearts + clubs, fields["positions"], CELLS_PER_BIT[enc])
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    program: list[dict] = [{} for _ in range(fields["length"])]
    for no, t, vis, act in entries:
        if not 1 <= t <= len(program):
            raise ParseError(f"step {t} outside 1..{len(program)}", no)
        if len(vis) != layout.m:
            raise ParseError(f"visible state has {len(vis)} cells, expected {layout.m}", no)
        if vis in program[t - 1]:
            raise ParseError(f"duplicate entry for step {t} {vis}", no)
        program[t - 1][vis] = act
    return Protocol(name, layout, enc, hearts, clubs, tuple(program), fields["output"])


# -- fragments ----------------------------------------------------------------------


def _tokens(mapping) -> str:
    return " ".join(f"{p}:{t}" for p, t in sorted(mapping.items())) or "-"


def _parse_tokens(words: list[str], line: int) -> dict:
    if words == ["-"]:
        return {}
    out = {}
    for w in words:
        pos, _, tok = w.partition(":")
        if not pos.isdigit() or tok not in _PATTERN_TOKENS:
            raise ParseError(f"bad position token {w!r}", line)
        out[int(pos)] = tok
    return out


def format_fragment(frag: ProtocolFragment) -> str:
    out = [f"fragment {frag.name}", f"length {frag.length}", "pre " + _tokens(frag.pre),
           "post " + _tokens(frag.post)]
    if frag.effect:
        out.append("effect " + frag.effect)
    for t, rules in enumerate(frag.steps, start=1):
        for rule in rules:
            pattern = ",".join(f"{p}:{tok}" for p, tok in rule.pattern) or "-"
            out.append(f"step {t} {pattern} {format_action(rule.action)}")
    return "\n".join(out) + "\n"


def parse_fragment(text: str) -> ProtocolFragment:
    name = None
    length = None
    pre = post = None
    effect = ""
    steps: list = []
    for no, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        words = line.split()
        key = words[0]
        if name is None:
            if key != "fragment" or len(words) != 2:
                raise ParseError("expected 'fragment <name>' header", no)
            name = words[1]
        elif key == "length":
            length = int(words[1])
            steps = [[] for _ in range(length)]
        elif key == "pre":
            pre = _parse_tokens(words[1:], no)
        elif key == "post":
            post = _parse_tokens(words[1:], no)
        elif key == "effect":
            effect = line[len("effect "):]
        elif key == "step":
            if length is None:
                raise ParseError("step before length line", no)
            t = int(words[1])
            if not 1 <= t <= length:
                raise ParseError(f"step {t} outside 1..{length}", no)
            pattern = () if words[2] == "-" else tuple(_parse_tokens(words[2].split(","), no).items())
            steps[t - 1].append(Rule(pattern, parse_action(words[3:], no)))
        else:
            raise ParseError(f"unknown keyword {key!r}", no)
    if name is None or length is None or pre is None or post is None:
        raise ParseError("fragment needs fragment, length, pre and post lines", 1)
    return ProtocolFragment(name, tuple(tuple(r) for r in steps), pre, post, effect)


# -- branching programs ----------------------------------------------------------------


def format_bp(bp: BranchingProgram) -> str:
    head = f"bp width={bp.width} length={bp.length}"
    if bp.kind != PERMUTATION:
        head += f" kind={bp.kind}"
    out = [head]
    for k, ly in enumerate(bp.layers, start=1):
        out.append(f"layer {k} label={ly.label} perm0={_join(ly.perm0)} perm1={_join(ly.perm1)}")
    out.append(f"start={bp.start} accept={_join(bp.accept)} reject={_join(bp.reject)}")
    return "\n".join(out) + "\n"


def _kv(words: list[str], line: int, keys: tuple) -> dict:
    out = {}
    for w in words:
        k, sep, v = w.partition("=")
        if not sep or k not in keys or k in out:
            raise ParseError(f"unexpected field {w!r}", line)
        out[k] = v
    return out


def parse_bp(text: str) -> BranchingProgram:
    head = None
    layers: list[Layer] = []
    footer = None
    try:
        for no, words in _lines(text):
            if head is None:
                if words[0] != "bp":
                    raise ParseError("expected 'bp width=<w> length=<d>' header", no)
                head = _kv(words[1:], no, ("width", "length", "kind"))
                if "width" not in head or "length" not in head:
                    raise ParseError("header needs width and length", no)
            elif words[0] == "layer":
                if footer is not None:
                    raise ParseError("layer after footer", no)
                if len(words) < 2 or int(words[1]) != len(layers) + 1:
                    raise ParseError(f"expected layer {len(layers) + 1}", no)
                f = _kv(words[2:], no, ("label", "perm0", "perm1"))
                label = f.get("label", "")
                if len(f) != 3 or label[:1] not in ("a", "b") or not label[1:].isdigit():
                    raise ParseError(f"layer needs label=<a|b><idx> perm0= perm1=, got {' '.join(words[2:])}", no)
                layers.append(Layer(label[0], int(label[1:]), _ints(f["perm0"]), _ints(f["perm1"])))
            elif words[0].startswith("start="):
                footer = _kv(words, no, ("start", "accept", "reject"))
                if len(footer) != 3:
                    raise ParseError("footer needs start=, accept= and reject=", no)
            else:
                raise ParseError(f"unknown keyword {words[0]!r}", no)
    except ValueError as exc:
        raise ParseError(f"bad number ({exc})", no) from None
    if head is None or footer is None:
        raise ParseError("bp text needs a header and a start/accept/reject footer", 1)
    kind = head.get("kind", PERMUTATION)
    if kind not in (PERMUTATION, LAYERED):
        raise ParseError(f"unknown program kind {kind!r}", 1)
    bp = BranchingProgram(int(head["width"]), tuple(layers), int(footer["start"]),
                          _ints(footer["accept"]), _ints(footer["reject"]), kind)
    if bp.length != int(head["length"]):
        raise ValidationError(f"header says length {head['length']} but there are {bp.length} vertex layers")
    bp.validate()
    return bp


# -- truth tables -------------------------------------------------------------------


def bits_text(bits) -> str:
    return "".join(map(str, bits))


def format_truth_table(table: dict) -> str:
    return "".join(f"{bits_text(x)}{bits_text(y)} -> {_value_text(v)}\n" for (x, y), v in sorted(table.items()))


def _value_text(v) -> str:
    return bits_text(v) if isinstance(v, (tuple, list)) else str(v)


def parse_truth_table(text: str) -> dict:
    """Lines ``<x bits><y bits> -> <bit>``; both halves have the same length."""
    table: dict = {}
    for no, words in _lines(text):
        if len(words) != 3 or words[1] != "->":
            raise ParseError("expected '<xy> -> <bit>'", no)
        xy, val = words[0], words[2]
        if len(xy) % 2 or set(xy) - {"0", "1"} or set(val) - {"0", "1"} or not val:
            raise ParseError(f"bad truth table entry {' '.join(words)!r}", no)
        n = len(xy) // 2
        key = (tuple(map(int, xy[:n])), tuple(map(int, xy[n:])))
        table[key] = int(val) if len(val) == 1 else tuple(map(int, val))
    if not table:
        raise ParseError("empty truth table", 1)
    return table


def read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


PARSERS: dict[str, Callable[[str], object]] = {
    "protocol": parse_protocol,
    "fragment": parse_fragment,
    "bp": parse_bp,
}
