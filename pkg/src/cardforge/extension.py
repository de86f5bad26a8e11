"""Extension of 1-card and half-card input bits into a working 2-card copy.

The owner peeks at the input card and places a complementary card drawn from
the designated face-down extension deck next to it; the resulting pair is
copied, one copy restores the input cells and the extension deck, the other
is left in the work pair.
"""

from __future__ import annotations

import dataclasses
from typing import Optional

from .cards import CLUB
from .encodings import HALF_CARD, ONE_CARD
from .errors import MalformedHalfCell, NotOwner
from .fragments import Deck, FragmentBuilder, ProtocolFragment, known_tokens, to_protocol
from .model import ALICE, BOB, COMMITTED, Extend, OutputSpec, Protocol, ShuffleGroup, TableLayout
from .primitives import emit_copy

SYMMETRIC = ShuffleGroup.symmetric()


def _owner(layout: TableLayout, pos: int, player: Optional[str]) -> str:
    owner = layout.owner_of(pos)
    if owner is None:
        raise ValueError(f"{pos} is not an input position")
    if player is not None and player != owner:
        raise NotOwner(f"player {player} cannot extend position {pos} owned by {owner}")
    return owner


def _return_to_ext(b: FragmentBuilder, src: int, player: str) -> None:
    """Put a face-down card into whichever extension-deck slot is vacant."""
    e0, e1 = b.deck.ext
    b.branch((e0, e1), {".?": lambda s: s.move(src, e0, player), "?.": lambda s: s.move(src, e1, player)})


def emit_extend_1card(b: FragmentBuilder, layout: TableLayout, input_pos: int, temp, scratch, dst1, work,
                      player: Optional[str] = None) -> None:
    owner = _owner(layout, input_pos, player)
    b.extend(input_pos, temp[1], owner)
    b.move(input_pos, temp[0], owner)
    emit_copy(b, temp, dst1, work, scratch, owner)
    b.move(dst1[0], input_pos, owner)
    _return_to_ext(b, dst1[1], owner)
    b.shuffle(b.deck.ext, SYMMETRIC, owner)


def emit_extend_half(b: FragmentBuilder, layout: TableLayout, cells, temp, scratch, dst1, work, marker: int,
                     player: Optional[str] = None) -> None:
    """Like the 1-card extension; a face-up club at ``marker`` remembers an empty left cell."""
    c1, c2 = cells
    owner = _owner(layout, c1, player)
    _owner(layout, c2, owner)
    t1, t2 = temp

    # the marker goes down first: once the input card leaves, the table no
    # longer shows which cell was empty
    def left_empty(s: FragmentBuilder) -> None:
        s.take(CLUB, marker, player=owner)
        s.extend(c2, t1, owner)
        s.move(c2, t2, owner)

    def right_empty(s: FragmentBuilder) -> None:
        s.pad(b.deck.ext[0], owner)
        s.extend(c1, t2, owner)
        s.move(c1, t1, owner)

    for w in b.worlds:
        toks = (w.tokens[c1], w.tokens[c2])
        if toks in ((".", "."), ("?", "?")):
            raise MalformedHalfCell(f"cells {cells} show {''.join(toks)}")
    b.branch((c1, c2), {".?": left_empty, "?.": right_empty})
    emit_copy(b, temp, dst1, work, scratch, owner)

    def restore_left(s: FragmentBuilder) -> None:
        s.move(dst1[1], c2, owner)
        _return_to_ext(s, dst1[0], owner)
        s.put_back(marker, owner)

    def restore_right(s: FragmentBuilder) -> None:
        s.move(dst1[0], c1, owner)
        _return_to_ext(s, dst1[1], owner)
        s.pad(work[0], owner)

    b.branch((marker,), {"C": restore_left, ".": restore_right})
    b.shuffle(b.deck.ext, SYMMETRIC, owner)


# -- standalone fragments and protocols ------------------------------------------------


def extension_deck_budget(encoding: str, work_pairs: int = 1) -> tuple[int, int]:
    """(hearts, clubs): the copy's six cards, the designated pair, a marker club for half-card
    inputs, and one more heart and club for every work pair kept before the last extension."""
    extra = work_pairs - 1
    return 4 + extra, (4 if encoding == ONE_CARD else 5) + extra


def _table(encoding: str, n: int, work_pairs: int):
    hearts, clubs = extension_deck_budget(encoding, work_pairs)
    cpb = 1 if encoding == ONE_CARD else 2
    s = hearts + clubs
    free = 6 + 2 * work_pairs + (1 if encoding == HALF_CARD else 0)
    layout = TableLayout(n, s, 2 * n * cpb + s + free, cpb)
    f = 2 * n * cpb + s + 1
    cells = {
        "temp": (f, f + 1),
        "scratch": (f + 2, f + 3),
        "dst1": (f + 4, f + 5),
        "work": [(f + 6 + 2 * k, f + 7 + 2 * k) for k in range(work_pairs)],
        "marker": f + 6 + 2 * work_pairs,
    }
    deck = Deck.for_layout(layout, hearts, clubs, True)
    return layout, hearts, clubs, deck, cells


def extend_1card_fragment(input_pos: int, work_pair, *, n: int = 1, player: Optional[str] = None) -> ProtocolFragment:
    layout, hearts, clubs, deck, c = _table(ONE_CARD, n, 1)
    b = FragmentBuilder("extend-1card", known_tokens(layout, ONE_CARD, hearts, clubs), deck)
    emit_extend_1card(b, layout, input_pos, c["temp"], c["scratch"], c["dst1"], tuple(work_pair), player)
    return b.build(f"extend {input_pos} -> {tuple(work_pair)}")


def extend_half_card_fragment(bit_cells, work_pair, *, n: int = 2, player: Optional[str] = None) -> ProtocolFragment:
    layout, hearts, clubs, deck, c = _table(HALF_CARD, n, 1)
    b = FragmentBuilder("extend-half-card", known_tokens(layout, HALF_CARD, hearts, clubs), deck)
    emit_extend_half(b, layout, tuple(bit_cells), c["temp"], c["scratch"], c["dst1"], tuple(work_pair),
                     c["marker"], player)
    return b.build(f"extend {tuple(bit_cells)} -> {tuple(work_pair)}")


def extend_1card_protocol(player: str = ALICE) -> Protocol:
    """One 1-card extension of ``player``'s only bit; the output is the work pair."""
    layout, hearts, clubs, deck, c = _table(ONE_CARD, 1, 1)
    b = FragmentBuilder("extend-1card", known_tokens(layout, ONE_CARD, hearts, clubs), deck)
    work = c["work"][0]
    emit_extend_1card(b, layout, layout.bit_cells(player, 1)[0], c["temp"], c["scratch"], c["dst1"], work, player)
    return to_protocol(b.build(), name=f"extend-1card-{player}", layout=layout, encoding=ONE_CARD,
                       hearts=hearts, clubs=clubs, output=OutputSpec(work, COMMITTED))


def extension_protocol(encoding: str = ONE_CARD, n: Optional[int] = None) -> Protocol:
    """Alice extends her first bit, then Bob extends his; the outputs are both work pairs.

    The output decodes to (x1, y1).
    """
    n = n or (1 if encoding == ONE_CARD else 2)
    layout, hearts, clubs, deck, c = _table(encoding, n, 2)
    b = FragmentBuilder(f"extend-{encoding}", known_tokens(layout, encoding, hearts, clubs), deck)
    for player, work in zip((ALICE, BOB), c["work"]):
        cells = layout.bit_cells(player, 1)
        if encoding == ONE_CARD:
            emit_extend_1card(b, layout, cells[0], c["temp"], c["scratch"], c["dst1"], work, player)
        else:
            emit_extend_half(b, layout, cells, c["temp"], c["scratch"], c["dst1"], work, c["marker"], player)
    out = (*c["work"][0], *c["work"][1])
    return to_protocol(b.build(), name=f"extend-{encoding}", layout=layout, encoding=encoding,
                       hearts=hearts, clubs=clubs, output=OutputSpec(out, COMMITTED))


def with_dishonest_extension(p: Protocol, player: str) -> Protocol:
    """The same protocol with ``player`` placing a same-suit card at every extension."""
    program = tuple(
        {vis: (dataclasses.replace(act, honest=False) if isinstance(act, Extend) and act.player == player else act)
         for vis, act in step.items()}
        for step in p.program)
    return dataclasses.replace(p, name=p.name + "-dishonest", program=program)
