"""Protocol model: layout, actions, shuffles and single-step semantics."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .cards import CLUB, HEART, Card, TableState, visible_of
from .encodings import (
    CELLS_PER_BIT,
    ENCODINGS,
    HALF_CARD,
    ONE_CARD,
    TWO_CARD,
    check_choice,
    commit_1card,
    commit_2card,
    commit_half_card,
    complement_pick_distribution,
    omission_choices,
)
from .errors import IllegalAction, NotOwner, ShuffleOnInput, SuitExhausted

ALICE = "A"
BOB = "B"
PLAYERS = (ALICE, BOB)

COMMITTED = "committed"
OPEN = "open"

Bits = tuple  # tuple[int, ...]


# -- layout -------------------------------------------------------------------


@dataclass(frozen=True)
class TableLayout:
    """Positions 1..m: Alice's inputs, Bob's inputs, the deck, then free cells."""

    n: int
    s: int
    m: int
    cells_per_bit: int = 2

    def __post_init__(self):
        if self.n < 0 or self.s < 0 or self.cells_per_bit not in (1, 2):
            raise ValueError(f"bad layout {self}")
        if self.m < self.input_count + self.s:
            raise ValueError(f"m={self.m} leaves no room for inputs and deck")

    @property
    def input_count(self) -> int:
        return 2 * self.n * self.cells_per_bit

    @property
    def q(self) -> int:
        return self.m - self.input_count

    def alice_positions(self) -> range:
        return range(1, self.n * self.cells_per_bit + 1)

    def bob_positions(self) -> range:
        w = self.n * self.cells_per_bit
        return range(w + 1, 2 * w + 1)

    def deck_positions(self) -> range:
        return range(self.input_count + 1, self.input_count + self.s + 1)

    def free_positions(self) -> range:
        return range(self.input_count + self.s + 1, self.m + 1)

    def is_input(self, pos: int) -> bool:
        return 1 <= pos <= self.input_count

    def owner_of(self, pos: int) -> Optional[str]:
        if not self.is_input(pos):
            return None
        return ALICE if pos <= self.n * self.cells_per_bit else BOB

    def bit_cells(self, player: str, index: int) -> tuple[int, ...]:
        """Input positions holding bit ``index`` (one-based) of ``player``."""
        if not 1 <= index <= self.n:
            raise ValueError(f"bit index {index} outside 1..{self.n}")
        base = 0 if player == ALICE else self.n * self.cells_per_bit
        first = base + (index - 1) * self.cells_per_bit + 1
        return tuple(range(first, first + self.cells_per_bit))

    def bit_of_position(self, pos: int) -> tuple[str, int, int]:
        """(owner, bit index, offset within the bit's cells) of an input position."""
        owner = self.owner_of(pos)
        if owner is None:
            raise ValueError(f"{pos} is not an input position")
        rel = pos - 1 - (0 if owner == ALICE else self.n * self.cells_per_bit)
        return owner, rel // self.cells_per_bit + 1, rel % self.cells_per_bit


# -- shuffles and actions ------------------------------------------------------


@dataclass(frozen=True)
class ShuffleGroup:
    """Uniform distribution over a set of permutations (one-based image lists)."""

    kind: str  # cyclic | symmetric | explicit
    perms: tuple = ()

    @classmethod
    def cyclic(cls) -> "ShuffleGroup":
        return cls("cyclic")

    @classmethod
    def symmetric(cls) -> "ShuffleGroup":
        return cls("symmetric")

    @classmethod
    def explicit(cls, perms: Iterable[Sequence[int]]) -> "ShuffleGroup":
        ps = tuple(tuple(p) for p in perms)
        if not ps:
            raise ValueError("explicit shuffle needs at least one permutation")
        if len(set(ps)) != len(ps):
            raise ValueError("explicit shuffle permutations must be distinct")
        k = len(ps[0])
        for p in ps:
            if sorted(p) != list(range(1, k + 1)):
                raise ValueError(f"{p} is not a permutation of 1..{k}")
        return cls("explicit", ps)

    def permutations(self, k: int) -> tuple:
        if self.kind == "cyclic":
            return tuple(tuple((i + r) % k + 1 for i in range(k)) for r in range(k))
        if self.kind == "symmetric":
            return tuple(tuple(p) for p in itertools.permutations(range(1, k + 1)))
        if self.kind == "explicit":
            if any(len(p) != k for p in self.perms):
                raise IllegalAction(f"explicit permutations do not act on {k} positions")
            return self.perms
        raise ValueError(f"unknown shuffle kind {self.kind!r}")

    @property
    def is_group(self) -> bool:
        if self.kind != "explicit":
            return True
        ps = set(self.perms)
        return all(tuple(q[p[i] - 1] for i in range(len(p))) in ps for p in ps for q in ps)


@dataclass(frozen=True)
class Move:
    player: str
    src: int
    dst: int


@dataclass(frozen=True)
class Turn:
    player: str
    pos: int


@dataclass(frozen=True)
class Shuffle:
    player: str
    positions: tuple
    group: ShuffleGroup = field(default_factory=ShuffleGroup.cyclic)


@dataclass(frozen=True)
class Extend:
    """Owner peeks ``src``, shuffles ``deck`` and moves a complementary card to ``dst``.

    ``honest=False`` models the deviation where the owner takes a card of the
    same suit instead.
    """

    player: str
    src: int
    dst: int
    deck: tuple
    honest: bool = True


Action = (Move, Turn, Shuffle, Extend)


def pad_action(player: str, pos: int) -> Shuffle:
    """Effect-free action: shuffling a single card."""
    return Shuffle(player, (pos,), ShuffleGroup.cyclic())


# -- single-step semantics ------------------------------------------------------


def _cell(state: TableState, pos: int):
    if not 1 <= pos <= len(state):
        raise IllegalAction(f"position {pos} outside 1..{len(state)}")
    return state[pos - 1]


def _with(state: TableState, updates: Mapping[int, object]) -> TableState:
    cells = list(state)
    for pos, cell in updates.items():
        cells[pos - 1] = cell
    return tuple(cells)


def raw_outcomes(state: TableState, action, layout: TableLayout | None = None) -> list:
    """All outcomes of ``action`` without merging: (state, private observation, prob).

    The private observation is only set for Extend, where it records the
    peeked suit and the post-shuffle deck arrangement seen by the owner.
    """
    if isinstance(action, Move):
        if _cell(state, action.src) is None:
            raise IllegalAction(f"move from empty position {action.src}")
        if _cell(state, action.dst) is not None:
            raise IllegalAction(f"move onto occupied position {action.dst}")
        card = state[action.src - 1]
        return [(_with(state, {action.src: None, action.dst: card}), None, Fraction(1))]

    if isinstance(action, Turn):
        card = _cell(state, action.pos)
        if card is None:
            raise IllegalAction(f"turn of empty position {action.pos}")
        return [(_with(state, {action.pos: card.turned()}), None, Fraction(1))]

    if isinstance(action, Shuffle):
        positions = action.positions
        if not positions or len(set(positions)) != len(positions):
            raise IllegalAction(f"bad shuffle positions {positions}")
        if layout is not None and any(layout.is_input(p) for p in positions):
            raise ShuffleOnInput(f"shuffle touches input positions {positions}")
        cards = [_cell(state, p) for p in positions]
        if any(c is None for c in cards):
            raise IllegalAction(f"shuffle over an empty position in {positions}")
        perms = action.group.permutations(len(positions))
        weight = Fraction(1, len(perms))
        out = []
        for perm in perms:
            upd = {positions[img - 1]: cards[i] for i, img in enumerate(perm)}
            out.append((_with(state, upd), None, weight))
        return out

    if isinstance(action, Extend):
        src = _cell(state, action.src)
        if src is None or src.face_up:
            raise IllegalAction(f"extend source {action.src} is not a face-down card")
        if layout is not None:
            owner = layout.owner_of(action.src)
            if owner is None:
                raise IllegalAction(f"extend source {action.src} is not an input position")
            if owner != action.player:
                raise NotOwner(f"player {action.player} cannot extend {owner}'s bit")
        if _cell(state, action.dst) is not None:
            raise IllegalAction(f"extend target {action.dst} is occupied")
        deck = [_cell(state, p) for p in action.deck]
        if any(c is None or c.face_up for c in deck):
            raise IllegalAction(f"extension deck {action.deck} must hold face-down cards")
        desired = src.suit.complement if action.honest else src.suit
        if all(c.suit is not desired for c in deck):
            raise SuitExhausted(f"extension deck has no {desired.value}")
        perms = list(itertools.permutations(range(len(deck))))
        out = []
        for perm in perms:
            arranged = [deck[j] for j in perm]
            suits = [c.suit for c in arranged]
            obs = f"{src.suit.value}:{''.join(s.value for s in suits)}"
            for idx, p in complement_pick_distribution(suits, desired).items():
                upd = {pos: arranged[i] for i, pos in enumerate(action.deck)}
                upd[action.deck[idx]] = None
                upd[action.dst] = arranged[idx].down()
                out.append((_with(state, upd), obs, p / len(perms)))
        return out

    raise TypeError(f"not an action: {action!r}")


def apply_action(state: TableState, action, layout: TableLayout | None = None) -> list:
    """Outcome distribution of one action, merged by suit-level state identity."""
    merged: dict = {}
    for nxt, _obs, p in raw_outcomes(state, action, layout):
        merged[nxt] = merged.get(nxt, Fraction(0)) + p
    return list(merged.items())


# -- protocols -----------------------------------------------------------------


@dataclass(frozen=True)
class OutputSpec:
    positions: tuple
    kind: str = COMMITTED  # committed | open


@dataclass(frozen=True, eq=False)
class Protocol:
    """Fixed-length oblivious program: per step, a map visible state -> action."""

    name: str
    layout: TableLayout
    encoding: str
    hearts: int
    clubs: int
    program: tuple  # tuple[dict[str, action], ...]
    output: OutputSpec

    def __post_init__(self):
        if self.encoding not in ENCODINGS:
            raise ValueError(f"unknown encoding {self.encoding!r}")

    @property
    def length(self) -> int:
        return len(self.program)

    @property
    def n(self) -> int:
        return self.layout.n

    @property
    def uses_extension(self) -> bool:
        return self.encoding in (ONE_CARD, HALF_CARD)

    def extension_deck(self) -> tuple:
        """Positions of the designated face-down extension deck (empty for 2-card)."""
        if not self.uses_extension:
            return ()
        d = list(self.layout.deck_positions())
        return tuple(d[-2:])

    def deck_cards(self) -> list[Card]:
        """Canonical initial deck: face-up hearts then clubs, then the face-down H,C pair."""
        h, c = self.hearts, self.clubs
        tail: list[Card] = []
        if self.uses_extension:
            h, c = h - 1, c - 1
            tail = [Card(HEART), Card(CLUB)]
        return [Card(HEART, True)] * h + [Card(CLUB, True)] * c + tail

    def action_at(self, t: int, visible: str):
        return self.program[t].get(visible)


def deck_layout_cards(hearts: int, clubs: int, encoding: str) -> list[Card]:
    tail: list[Card] = []
    if encoding in (ONE_CARD, HALF_CARD):
        hearts, clubs = hearts - 1, clubs - 1
        tail = [Card(HEART), Card(CLUB)]
    return [Card(HEART, True)] * hearts + [Card(CLUB, True)] * clubs + tail


def all_inputs(n: int) -> list[tuple[Bits, Bits]]:
    bits = [tuple(b) for b in itertools.product((0, 1), repeat=n)]
    return [(x, y) for x in bits for y in bits]


def _commit(encoding: str, bits: Bits, choice) -> list:
    if encoding == TWO_CARD:
        return commit_2card(bits)
    if encoding == ONE_CARD:
        return commit_1card(bits)
    return commit_half_card(bits, choice)


def initial_states(p: Protocol, x: Bits, y: Bits, omit: Mapping[str, Iterable[int]] | None = None) -> list:
    """Level-0 distribution: committed inputs plus the canonical deck.

    Only half-card inputs are random: when a player's omission subset is not
    given it is drawn uniformly.
    """
    n = p.layout.n
    if len(x) != n or len(y) != n:
        raise ValueError(f"inputs must have {n} bits each")
    omit = dict(omit or {})

    def choices(player):
        if p.encoding != HALF_CARD:
            return [None]
        if player in omit:
            return [check_choice(n, omit[player])]
        return omission_choices(n)

    deck = p.deck_cards()
    free = [None] * (p.layout.m - p.layout.input_count - p.layout.s)
    out = []
    ca, cb = choices(ALICE), choices(BOB)
    weight = Fraction(1, len(ca) * len(cb))
    for sa in ca:
        for sb in cb:
            cells = _commit(p.encoding, x, sa) + _commit(p.encoding, y, sb) + deck + free
            out.append((tuple(cells), weight))
    return out


# -- validation ----------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    step: Optional[int]
    detail: str

    def __str__(self) -> str:
        where = f" step {self.step}" if self.step is not None else ""
        return f"{self.code}{where}: {self.detail}"


def validate_protocol(p: Protocol, max_states: int = 200_000) -> list[Violation]:
    """Static and reachability checks; an empty list means the protocol is valid."""
    out: list[Violation] = []
    lay = p.layout
    if p.hearts + p.clubs != lay.s:
        out.append(Violation("LAYOUT", None, f"deck H:{p.hearts} C:{p.clubs} does not fill s={lay.s}"))
    if lay.cells_per_bit != CELLS_PER_BIT[p.encoding]:
        out.append(Violation("LAYOUT", None, f"{p.encoding} needs {CELLS_PER_BIT[p.encoding]} cells per bit"))
    if p.uses_extension and (p.hearts < 1 or p.clubs < 1):
        out.append(Violation("LAYOUT", None, "extension encodings need a designated H,C pair in the deck"))
    for pos in p.output.positions:
        if not 1 <= pos <= lay.m:
            out.append(Violation("LAYOUT", None, f"output position {pos} outside 1..{lay.m}"))
    if p.output.kind not in (COMMITTED, OPEN):
        out.append(Violation("LAYOUT", None, f"unknown output kind {p.output.kind!r}"))

    for t, step in enumerate(p.program):
        for vis, act in step.items():
            if len(vis) != lay.m:
                out.append(Violation("LAYOUT", t, f"visible key {vis!r} has wrong length"))
            if isinstance(act, Shuffle) and any(lay.is_input(q) for q in act.positions):
                out.append(Violation("SHUFFLE_ON_INPUT", t, f"{act} touches input positions"))
            if isinstance(act, Extend) and not p.uses_extension:
                out.append(Violation("EXTEND_NOT_ALLOWED", t, f"{act} under {p.encoding} encoding"))
    if out:
        return out

    frontier: set = set()
    for x, y in all_inputs(lay.n):
        for st, _w in initial_states(p, x, y):
            frontier.add(st)
    for t in range(p.length):
        nxt: set = set()
        for st in frontier:
            vis = visible_of(st)
            act = p.program[t].get(vis)
            if act is None:
                out.append(Violation("INCOMPLETE_STEP", t, f"no action for visible {vis}"))
                continue
            try:
                for s2, _pr in apply_action(st, act, lay):
                    nxt.add(s2)
            except IllegalAction as exc:
                out.append(Violation(exc.code, t, f"{exc} in visible {vis}"))
        if out:
            return out
        if len(nxt) > max_states:
            out.append(Violation("TOO_LARGE", t, f"more than {max_states} reachable states"))
            return out
        frontier = nxt
    return out
