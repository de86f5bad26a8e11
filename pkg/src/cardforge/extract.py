"""Layered branching program from a read-only protocol with open output.

Vertices at step t are the reachable tables with input positions abstracted to
their public token.  Reading a face-down input card (moving it into the
workspace or turning it over) queries that card's bit; every other action is a
dummy query of a1 with both edges equal.  Shuffles are resolved to one fixed
permutation, the lexicographically smallest by default.
"""

from __future__ import annotations

from typing import Optional

from .bp import LAYERED, BranchingProgram, Layer
from .cards import Card, Suit, token_of
from .encodings import ONE_CARD, TWO_CARD, decode_1card, decode_2card
from .errors import DecodeFailure, InvalidPair, NotOpenOutput, NotReadOnly, ValidationError
from .model import ALICE, OPEN, Extend, Move, Protocol, Shuffle, Turn, deck_layout_cards
from .verifier import check_read_only

DUMMY = ("a", 1)
DEAD = ("dead",)


def _input_suit(p: Protocol, pos: int, bit: int) -> Suit:
    _owner, _idx, offset = p.layout.bit_of_position(pos)
    if p.encoding == ONE_CARD:
        return Suit.HEART if bit else Suit.CLUB
    heart_first = bit == 1
    return Suit.HEART if (offset == 0) == heart_first else Suit.CLUB


def _query(p: Protocol, pos: int) -> tuple[str, int]:
    owner, idx, _off = p.layout.bit_of_position(pos)
    return ("a" if owner == ALICE else "b", idx)


def _step(p: Protocol, node: tuple, act, choice: str):
    """(query label or None, successor for bit 0, successor for bit 1)."""
    lay = p.layout
    cells = list(node)

    def put(pos, val):
        cells[pos - 1] = val

    if isinstance(act, Move):
        src, dst = act.src, act.dst
        val = node[src - 1]
        if lay.is_input(src) and val == "?":
            label = _query(p, src)
            outs = []
            for bit in (0, 1):
                c = list(node)
                card = Card(_input_suit(p, src, bit))
                c[src - 1] = "."
                c[dst - 1] = token_of(card) if lay.is_input(dst) else card
                outs.append(tuple(c))
            return label, outs[0], outs[1]
        if lay.is_input(src):
            card = None if val == "." else Card(Suit(val), True)
        else:
            card = val
        put(src, "." if lay.is_input(src) else None)
        put(dst, token_of(card) if lay.is_input(dst) else card)
        out = tuple(cells)
        return None, out, out
    if isinstance(act, Turn):
        pos = act.pos
        val = node[pos - 1]
        if lay.is_input(pos):
            if val == "?":
                label = _query(p, pos)
                outs = []
                for bit in (0, 1):
                    c = list(node)
                    c[pos - 1] = _input_suit(p, pos, bit).value
                    outs.append(tuple(c))
                return label, outs[0], outs[1]
            put(pos, "?")
        else:
            put(pos, val.turned())
        out = tuple(cells)
        return None, out, out
    if isinstance(act, Shuffle):
        perms = sorted(act.group.permutations(len(act.positions)))
        perm = perms[0] if choice == "min" else perms[-1]
        cards = [node[q - 1] for q in act.positions]
        for i, img in enumerate(perm):
            put(act.positions[img - 1], cards[i])
        out = tuple(cells)
        return None, out, out
    if isinstance(act, Extend):
        raise ValidationError("extraction does not support Extend actions")
    raise TypeError(f"not an action: {act!r}")


def _visible(node: tuple) -> str:
    return "".join(c if isinstance(c, str) else token_of(c) for c in node)


def protocol_to_bp(p: Protocol, f: Optional[dict] = None, *, choice: str = "min") -> BranchingProgram:
    if p.output.kind != OPEN:
        raise NotOpenOutput("extraction needs a protocol with an open output")
    if p.encoding not in (TWO_CARD, ONE_CARD):
        raise ValidationError(f"extraction needs deterministic input commitments, not {p.encoding}")
    if p.n < 1:
        raise ValidationError("extraction needs at least one input bit")
    if not check_read_only(p).passed:
        raise NotReadOnly("protocol writes to its input positions")
    lay = p.layout
    start = tuple(["?"] * lay.input_count + deck_layout_cards(p.hearts, p.clubs, p.encoding)
                  + [None] * (lay.m - lay.input_count - lay.s))
    level = [start]
    layers = []
    first_width = len(level)
    for t in range(p.length):
        moves = []
        for node in level:
            act = None if node == DEAD else p.program[t].get(_visible(node))
            if act is None:
                # only paths that read one bit inconsistently get here; no input follows them
                moves.append((None, DEAD, DEAD))
            else:
                moves.append(_step(p, node, act, choice))
        labels = sorted({m[0] for m in moves if m[0] is not None}) or [DUMMY]
        # one sub-layer per queried variable; other vertices wait with identity edges
        pending = {i: m for i, m in enumerate(moves)}
        cur = [("wait", i) for i in range(len(level))]
        for k, label in enumerate(labels):
            last = k == len(labels) - 1
            nxt_nodes: list = []
            nidx: dict = {}

            def vid(key):
                if key not in nidx:
                    nidx[key] = len(nxt_nodes)
                    nxt_nodes.append(key)
                return nidx[key] + 1

            e0, e1 = [], []
            for key in cur:
                if key[0] == "done":
                    a = b = vid(key)
                else:
                    i = key[1]
                    q, s0, s1 = pending[i]
                    if q == label or (q is None and (last or label == DUMMY)):
                        a, b = vid(("done", s0)), vid(("done", s1))
                    else:
                        a = b = vid(key)
                e0.append(a)
                e1.append(b)
            layers.append((label, e0, e1))
            cur = nxt_nodes
        level = [key[1] for key in cur]
    width = max(len(lv) for lv in _level_sizes(layers, first_width))
    padded = []
    for label, e0, e1 in layers:
        pad = [1] * (width - len(e0))
        padded.append(Layer(label[0], label[1], tuple(e0 + pad), tuple(e1 + pad)))
    accept, reject = [], []
    for v, node in enumerate(level, start=1):
        if node == DEAD:
            reject.append(v)
            continue
        cells = [Card(Suit(c), True) if isinstance(c, str) and c in "HC" else c
                 for c in (node[q - 1] for q in p.output.positions)]
        if any(not isinstance(c, Card) or not c.face_up for c in cells):
            raise DecodeFailure(f"output cells are not open in final table {_visible(node)}")
        try:
            value = decode_2card(cells) if len(cells) == 2 else decode_1card(cells[0])
            (accept if value else reject).append(v)
        except InvalidPair:
            pass  # reached only by reading one bit both ways
    bp = BranchingProgram(width, tuple(padded), 1, tuple(accept), tuple(reject), LAYERED)
    bp.validate()
    return bp


def _level_sizes(layers, first: int):
    sizes = [range(first)]
    for _label, e0, e1 in layers:
        sizes.append(range(max(e0 + e1)))
    return sizes


def width_bound(p: Protocol, c: int = 2) -> int:
    return (2 * c + 1) ** (2 * p.layout.s)
