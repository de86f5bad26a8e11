"""Width-5 permutation branching program to oblivious read-only card protocol.

Five program cards (one heart marking the active vertex, four clubs) sit in
the lowest free cells.  Every transposition of every layer's one-edge
permutation is applied to them by a conditional swap driven by a fresh copy
of the layer's input bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .bp import BranchingProgram, decompose_transpositions, identity, is_normalized
from .cards import CLUB, HEART
from .encodings import CELLS_PER_BIT, HALF_CARD, ONE_CARD, TWO_CARD
from .errors import NotNormalized, NotRestricted, WidthNot5
from .extension import emit_extend_1card, emit_extend_half
from .fragments import Deck, FragmentBuilder, known_tokens, to_protocol
from .model import ALICE, BOB, COMMITTED, OPEN, OutputSpec, Protocol, TableLayout
from .primitives import emit_copy, emit_swap

PROGRAM_SUITS = (HEART, CLUB, CLUB, CLUB, CLUB)


@dataclass
class CompilationPlan:
    encoding: str
    program_cells: tuple
    schedule: list = field(default_factory=list)  # (layer, label, swaps as (i, j, cell_i, cell_j))
    deck: dict = field(default_factory=dict)
    output: tuple = ()
    free_cells: int = 0

    @property
    def transpositions(self) -> int:
        return sum(len(swaps) for _k, _label, swaps in self.schedule)

    def lines(self) -> list[str]:
        out = [f"# plan encoding={self.encoding} deck=H:{self.deck['H']},C:{self.deck['C']} "
               f"free={self.free_cells}",
               "# program cells " + " ".join(map(str, self.program_cells))]
        for k, label, swaps in self.schedule:
            pairs = " ".join(f"({i},{j})@{ci},{cj}" for i, j, ci, cj in swaps)
            out.append(f"# layer {k} {label} swaps {pairs}".rstrip())
        out.append(f"# output accept={self.output[0]} reject={self.output[1]}")
        return out


def deck_budget(bp: Optional[BranchingProgram] = None, encoding: str = TWO_CARD) -> dict:
    """Suit counts: program cards (1H 4C) plus the copy's 3H 3C.

    The swap's two clubs come back from the copy before the swap starts;
    extension encodings add the designated H,C pair, half-card inputs one
    marker club.
    """
    hearts, clubs = 1 + 3, 4 + 3
    if encoding in (ONE_CARD, HALF_CARD):
        hearts, clubs = hearts + 1, clubs + 1
    if encoding == HALF_CARD:
        clubs += 1
    return {"H": hearts, "C": clubs}


def _check(bp: BranchingProgram) -> None:
    if bp.width != 5:
        raise WidthNot5(f"program width is {bp.width}")
    if bp.kind != "permutation" or not bp.restricted:
        raise NotRestricted("need a restricted permutation program")
    if not is_normalized(bp):
        raise NotNormalized("apply normalize_zero_identity first")


def plan_compilation(bp: BranchingProgram, encoding: str = TWO_CARD, n: Optional[int] = None):
    _check(bp)
    n = max(bp.n, n or 0, 1)
    if encoding == HALF_CARD and n % 2:
        n += 1
    budget = deck_budget(bp, encoding)
    s = budget["H"] + budget["C"]
    cpb = CELLS_PER_BIT[encoding]
    first = 2 * n * cpb + s + 1
    free = 13 + (1 if encoding == HALF_CARD else 0)
    layout = TableLayout(n, s, first - 1 + free, cpb)
    P = tuple(range(first, first + 5))
    plan = CompilationPlan(encoding, P, deck=budget, free_cells=free,
                           output=(P[bp.accept[0] - 1], P[bp.reject[0] - 1]))
    for k, ly in enumerate(bp.layers, start=1):
        if ly.perm1 == identity(5):
            continue
        # functional order: the last transposition acts first
        swaps = [(i, j, P[i - 1], P[j - 1]) for i, j in reversed(decompose_transpositions(ly.perm1))]
        plan.schedule.append((k, ly.label, swaps))
    return layout, plan


def compile_bp_to_protocol(bp: BranchingProgram, encoding: str = TWO_CARD, *, open_output: bool = False,
                           n: Optional[int] = None, name: str = "compiled",
                           deck: Optional[dict] = None) -> Protocol:
    protocol, _plan = compile_with_plan(bp, encoding, open_output=open_output, n=n, name=name, deck=deck)
    return protocol


def compile_with_plan(bp: BranchingProgram, encoding: str = TWO_CARD, *, open_output: bool = False,
                      n: Optional[int] = None, name: str = "compiled", deck: Optional[dict] = None):
    layout, plan = plan_compilation(bp, encoding, n)
    hearts, clubs = (deck or plan.deck)["H"], (deck or plan.deck)["C"]
    if deck is not None:
        layout = TableLayout(layout.n, hearts + clubs, layout.m - layout.s + hearts + clubs, layout.cells_per_bit)
        shift = hearts + clubs - plan.deck["H"] - plan.deck["C"]
        plan.program_cells = tuple(p + shift for p in plan.program_cells)
        plan.output = tuple(p + shift for p in plan.output)
        plan.schedule = [(k, lab, [(i, j, ci + shift, cj + shift) for i, j, ci, cj in sw])
                         for k, lab, sw in plan.schedule]
        plan.deck = dict(deck)
    extension = encoding in (ONE_CARD, HALF_CARD)
    b = FragmentBuilder(name, known_tokens(layout, encoding, hearts, clubs),
                        Deck.for_layout(layout, hearts, clubs, extension))
    P = plan.program_cells
    f = P[-1] + 1
    temp, scratch, dst1, work = (f, f + 1), (f + 2, f + 3), (f + 4, f + 5), (f + 6, f + 7)
    marker = f + 8

    for pos, suit in zip(P, PROGRAM_SUITS):
        b.take(suit, pos)
    for pos in P:
        b.turn(pos)

    for k, label, swaps in plan.schedule:
        player = ALICE if label[0] == "a" else BOB
        cells = layout.bit_cells(player, int(label[1:]))
        for _i, _j, ci, cj in swaps:
            if encoding == TWO_CARD:
                b.move(cells[0], temp[0], player)
                b.move(cells[1], temp[1], player)
                emit_copy(b, temp, dst1, work, scratch, player)
                b.move(dst1[0], cells[0], player)
                b.move(dst1[1], cells[1], player)
            elif encoding == ONE_CARD:
                emit_extend_1card(b, layout, cells[0], temp, scratch, dst1, work, player)
            else:
                emit_extend_half(b, layout, cells, temp, scratch, dst1, work, marker, player)
            region = tuple(range(f, f + 6))  # temp, scratch and dst1 are free again
            emit_swap(b, (ci,), (cj,), work, region, player)

    acc, rej = plan.output
    if open_output:
        b.turn(acc)
        b.turn(rej)
    frag = b.build(f"simulate a {len(bp.layers) + 1}-layer width-5 program")
    protocol = to_protocol(frag, name=name, layout=layout, encoding=encoding, hearts=hearts, clubs=clubs,
                           output=OutputSpec((acc, rej), OPEN if open_output else COMMITTED))
    return protocol, plan
