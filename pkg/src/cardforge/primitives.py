"""Copy, conditional swap and NOT gadgets.

Each gadget exists in two forms: an ``emit_*`` function that appends the
gadget to a running :class:`FragmentBuilder` (used by the compiler), and a
``*_fragment`` constructor returning a standalone :class:`ProtocolFragment`.
Ready-to-run gadget protocols over a one-bit table are provided for tests and
the CLI.
"""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

from .cards import CLUB, HEART, Suit
from .encodings import TWO_CARD
from .errors import LengthMismatch, NoFreeCell
from .fragments import Deck, FragmentBuilder, ProtocolFragment, known_tokens, to_protocol
from .model import ALICE, COMMITTED, OutputSpec, Protocol, TableLayout

ALTERNATING = ("HCHC", "CHCH")
NON_ALTERNATING = ("HCCH", "CCHH", "CHHC", "HHCC")
COPY_LENGTH = 28


def swap_length(payload: int) -> int:
    return 4 * payload + 11


def spare_deck_slot(b: FragmentBuilder) -> int:
    """Lowest main-deck slot that is empty in every world."""
    for pos in sorted(b.deck.slots):
        if b.token(pos) == ".":
            return pos
    raise NoFreeCell(f"{b.name}: no empty deck slot to use as a spare cell")


# -- emitters -------------------------------------------------------------------


def emit_copy(b: FragmentBuilder, src, dst1, dst2, scratch, player: str = ALICE) -> None:
    """Two committed copies of the pair at ``src`` into ``dst1`` and ``dst2``.

    ``src`` and ``scratch`` are left empty; the four revealed cards go back to
    their deck slots.
    """
    six = (*scratch, *dst1, *dst2)
    four = (*src, *scratch)
    for pos, suit in zip(six, (HEART, CLUB) * 3):
        b.take(suit, pos, player=player)
    for pos in six:
        b.turn(pos, player)
    b.shuffle(six, player=player)
    b.shuffle(four, player=player)
    for pos in four:
        b.turn(pos, player)

    def negate(sub: FragmentBuilder) -> None:
        # the random pair disagreed with b: flip both destination pairs
        for pair in (dst1, dst2):
            spare = spare_deck_slot(sub)
            sub.move(pair[0], spare, player)
            sub.move(pair[1], pair[0], player)
            sub.move(spare, pair[1], player)

    def keep(sub: FragmentBuilder) -> None:
        for _ in range(6):
            sub.pad(dst1[0], player)

    def then_clean(body):
        def run(sub: FragmentBuilder) -> None:
            body(sub)
            for pos in four:
                sub.put_back(pos, player)
        return run

    cases = {pat: then_clean(keep) for pat in ALTERNATING}
    cases.update({pat: then_clean(negate) for pat in NON_ALTERNATING})
    b.branch(four, cases, pad=dst1[0], player=player)


def emit_swap(b: FragmentBuilder, alpha: Sequence[int], beta: Sequence[int], bit, region: Sequence[int],
              player: str = ALICE) -> None:
    """Exchange the cards at ``alpha`` and ``beta`` iff the pair at ``bit`` encodes 1.

    ``region`` holds the arranged sequence club, gamma, alpha, club, delta,
    beta during the cyclic shuffle. The bit pair is consumed.
    """
    L = len(alpha)
    if len(beta) != L:
        raise LengthMismatch(f"payloads of length {L} and {len(beta)}")
    n = 2 * L + 4
    if len(region) != n:
        raise ValueError(f"swap region needs {n} cells, got {len(region)}")
    b.take(CLUB, region[0], player=player)
    b.move(bit[0], region[1], player)
    for i, pos in enumerate(alpha):
        b.move(pos, region[2 + i], player)
    b.take(CLUB, region[L + 2], player=player)
    b.move(bit[1], region[L + 3], player)
    for i, pos in enumerate(beta):
        b.move(pos, region[L + 4 + i], player)
    b.shuffle(region, player=player)

    def reveal(r: int):
        def at(k: int) -> int:
            return region[(r + k) % n]

        def run(sub: FragmentBuilder) -> None:
            x, y = at(1), at(L + 3)
            sub.turn(x, player)
            sub.turn(y, player)
            after_x = [at(2 + i) for i in range(L)]
            after_y = [at(L + 4 + i) for i in range(L)]

            def route(to_alpha, to_beta):
                def go(s: FragmentBuilder) -> None:
                    for src, dst in zip(to_alpha, alpha):
                        s.move(src, dst, player)
                    for src, dst in zip(to_beta, beta):
                        s.move(src, dst, player)
                    for pos in (at(0), x, at(L + 2), y):
                        s.put_back(pos, player)
                return go

            # the block behind a club followed by a revealed club belongs at alpha
            sub.branch((x, y), {"CH": route(after_x, after_y), "HC": route(after_y, after_x)})
        return run

    cases = {}
    for r in range(L + 2):
        marks = {r, r + L + 2}
        cases["".join("C" if i in marks else "?" for i in range(n))] = reveal(r)
    b.branch(tuple(region), cases)


def emit_not(b: FragmentBuilder, bit, spare: int, player: str = ALICE) -> None:
    b.move(bit[0], spare, player)
    b.move(bit[1], bit[0], player)
    b.move(spare, bit[1], player)


# -- standalone fragments ---------------------------------------------------------


def _default_deck(after: int, hearts: int, clubs: int) -> Deck:
    suits = [HEART] * hearts + [CLUB] * clubs
    return Deck({after + 1 + i: s for i, s in enumerate(suits)})


def _known(deck: Deck, cards: Sequence[int], empty: Sequence[int], extra: Optional[Mapping[int, str]]) -> dict:
    known = {p: s.value for p, s in deck.slots.items()}
    known.update({p: "?" for p in cards})
    known.update({p: "." for p in empty})
    if extra:
        known.update(extra)
    return known


def copy_fragment(src, dst1, dst2, *, deck: Optional[Deck] = None, scratch=None,
                  known: Optional[Mapping[int, str]] = None, player: str = ALICE) -> ProtocolFragment:
    top = max(*src, *dst1, *dst2)
    if scratch is None:
        scratch = (top + 1, top + 2)
        top += 2
    deck = deck or _default_deck(max(top, *scratch), 3, 3)
    b = FragmentBuilder("copy", _known(deck, src, (*scratch, *dst1, *dst2), known), deck, player)
    emit_copy(b, tuple(src), tuple(dst1), tuple(dst2), tuple(scratch), player)
    return b.build(f"copy {tuple(src)} -> {tuple(dst1)}, {tuple(dst2)}")


def swap_fragment(alpha, beta, bit, *, deck: Optional[Deck] = None, region=None,
                  known: Optional[Mapping[int, str]] = None, player: str = ALICE) -> ProtocolFragment:
    if len(alpha) != len(beta):
        raise LengthMismatch(f"payloads of length {len(alpha)} and {len(beta)}")
    top = max(*alpha, *beta, *bit)
    if region is None:
        region = tuple(range(top + 1, top + 2 * len(alpha) + 5))
        top = region[-1]
    base = {}
    if deck is None:
        # two clubs to borrow plus empty slots for the revealed bit cards
        deck = _default_deck(max(top, *region), 1, 3)
        slots = sorted(deck.slots)
        base = {slots[0]: ".", slots[-1]: "."}
    base.update(known or {})
    b = FragmentBuilder("swap", _known(deck, (*alpha, *beta, *bit), region, base), deck, player)
    emit_swap(b, tuple(alpha), tuple(beta), tuple(bit), tuple(region), player)
    return b.build(f"swap {tuple(alpha)} <-> {tuple(beta)} if {tuple(bit)}")


def not_fragment(bit, *, spare: Optional[int] = None, known: Optional[Mapping[int, str]] = None,
                 player: str = ALICE) -> ProtocolFragment:
    if spare is None:
        spare = max(bit) + 1
    base = {bit[0]: "?", bit[1]: "?", spare: "."}
    if known:
        base.update(known)
        if base[spare] != ".":
            raise NoFreeCell(f"spare cell {spare} is not empty")
    b = FragmentBuilder("not", base, None, player)
    emit_not(b, tuple(bit), spare, player)
    return b.build(f"not {tuple(bit)}")


def moves_fragment(moves: Sequence[tuple[int, int]], known: Mapping[int, str], player: str = ALICE) -> ProtocolFragment:
    b = FragmentBuilder("moves", known, None, player)
    for src, dst in moves:
        b.move(src, dst, player)
    return b.build("moves " + " ".join(f"{s}->{d}" for s, d in moves))


# -- gadget protocols over a one-bit table -------------------------------------------


def _one_bit_table(hearts: int, clubs: int, free: int) -> tuple[TableLayout, dict]:
    s = hearts + clubs
    layout = TableLayout(1, s, 4 + s + free)
    return layout, known_tokens(layout, TWO_CARD, hearts, clubs)


def copy_gadget_protocol() -> Protocol:
    """Alice's bit is moved into the workspace and copied twice; output is both copies."""
    layout, known = _one_bit_table(3, 3, 8)
    f = 5 + layout.s
    src, scratch, dst1, dst2 = (f, f + 1), (f + 2, f + 3), (f + 4, f + 5), (f + 6, f + 7)
    deck = Deck.for_layout(layout, 3, 3, False)
    b = FragmentBuilder("copy-gadget", known, deck)
    b.move(1, src[0])
    b.move(2, src[1])
    emit_copy(b, src, dst1, dst2, scratch)
    frag = b.build()
    return to_protocol(frag, name="copy-gadget", layout=layout, encoding=TWO_CARD, hearts=3, clubs=3,
                       output=OutputSpec((*dst1, *dst2), COMMITTED))


def swap_gadget_protocol(payload: int = 1) -> Protocol:
    """Conditional swap on Alice's bit of the payloads alpha = HCHC.., beta = CHCH...

    The output is the alpha block read as pairs of cards when the payload
    is even, else the single pair (alpha, beta); either way it decodes to the
    negation of Alice's bit.
    """
    a_suits, b_suits = payload_suits(payload)
    hearts = sum(1 for s in a_suits + b_suits if s is HEART)
    clubs = 2 * payload - hearts + 2
    n_region = 2 * payload + 4
    layout, known = _one_bit_table(hearts, clubs, 2 * payload + n_region)
    f = 5 + layout.s
    alpha = tuple(range(f, f + payload))
    beta = tuple(range(f + payload, f + 2 * payload))
    region = tuple(range(f + 2 * payload, f + 2 * payload + n_region))
    deck = Deck.for_layout(layout, hearts, clubs, False)
    b = FragmentBuilder("swap-gadget", known, deck)
    for pos, suit in zip(alpha + beta, a_suits + b_suits):
        b.take(suit, pos, lowest=True)
    for pos in alpha + beta:
        b.turn(pos)
    emit_swap(b, alpha, beta, (1, 2), region)
    frag = b.build()
    out = alpha if payload % 2 == 0 else (alpha[0], beta[0])
    return to_protocol(frag, name=f"swap-gadget-{payload}", layout=layout, encoding=TWO_CARD,
                       hearts=hearts, clubs=clubs, output=OutputSpec(out, COMMITTED))


def not_gadget_protocol() -> Protocol:
    layout, known = _one_bit_table(0, 0, 1)
    b = FragmentBuilder("not-gadget", known)
    emit_not(b, (1, 2), 5)
    return to_protocol(b.build(), name="not-gadget", layout=layout, encoding=TWO_CARD, hearts=0, clubs=0,
                       output=OutputSpec((1, 2), COMMITTED))


def payload_suits(payload: int) -> tuple[list[Suit], list[Suit]]:
    a = [HEART if i % 2 == 0 else CLUB for i in range(payload)]
    return a, [s.complement for s in a]
