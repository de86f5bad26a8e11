"""Cards, table cells and the public view of a table."""

from __future__ import annotations

from enum import Enum
from typing import NamedTuple, Optional, Sequence


class Suit(str, Enum):
    HEART = "H"
    CLUB = "C"

    @property
    def complement(self) -> "Suit":
        return Suit.CLUB if self is Suit.HEART else Suit.HEART


HEART = Suit.HEART
CLUB = Suit.CLUB


class Card(NamedTuple):
    """A card is identified by its suit only; two face-down hearts are interchangeable."""

    suit: Suit
    face_up: bool = False

    def turned(self) -> "Card":
        return Card(self.suit, not self.face_up)

    def down(self) -> "Card":
        return Card(self.suit, False)


Cell = Optional[Card]
# One-based positions are used everywhere in the public API; a TableState is
# stored zero-based, so position p lives at index p - 1.
TableState = tuple

EMPTY = "."
HIDDEN = "?"


def token_of(cell: Cell) -> str:
    if cell is None:
        return EMPTY
    if not cell.face_up:
        return HIDDEN
    return cell.suit.value


def visible_of(state: Sequence[Cell]) -> str:
    """Canonical public view: '.' empty, '?' face-down, 'H'/'C' face-up suit."""
    return "".join(token_of(c) for c in state)


def suit_counts(state: Sequence[Cell]) -> tuple[int, int]:
    hearts = sum(1 for c in state if c is not None and c.suit is HEART)
    clubs = sum(1 for c in state if c is not None and c.suit is CLUB)
    return hearts, clubs


def format_state(state: Sequence[Cell]) -> str:
    """Full hidden configuration, lower case for face-down cards."""
    out = []
    for c in state:
        if c is None:
            out.append(".")
        else:
            out.append(c.suit.value if c.face_up else c.suit.value.lower())
    return "".join(out)


def parse_state(text: str) -> TableState:
    """Inverse of :func:`format_state`."""
    cells: list[Cell] = []
    for ch in text:
        if ch == ".":
            cells.append(None)
        elif ch in "HC":
            cells.append(Card(Suit(ch), True))
        elif ch in "hc":
            cells.append(Card(Suit(ch.upper()), False))
        else:
            raise ValueError(f"bad state character {ch!r}")
    return tuple(cells)
