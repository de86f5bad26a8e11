"""Input encodings: 2-card, 1-card and 1/2-card commitments.

The extension procedures that turn a 1-card or 1/2-card bit into a 2-card
pair live in :mod:`cardforge.extension`; this module only holds the pure
encode/decode rules and the uniform complement pick.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Iterable, Sequence

from .cards import CLUB, HEART, Card, Cell, Suit
from .errors import BadChoice, InvalidPair, MalformedHalfCell, OddLength, SuitExhausted

TWO_CARD = "two_card"
ONE_CARD = "one_card"
HALF_CARD = "half_card"
ENCODINGS = (TWO_CARD, ONE_CARD, HALF_CARD)

CELLS_PER_BIT = {TWO_CARD: 2, ONE_CARD: 1, HALF_CARD: 2}


def _check_bit(b: int) -> int:
    if b not in (0, 1):
        raise ValueError(f"not a bit: {b!r}")
    return b


def pair_suits(bit: int) -> tuple[Suit, Suit]:
    return (HEART, CLUB) if _check_bit(bit) else (CLUB, HEART)


def commit_2card(bits: Iterable[int]) -> list[Card]:
    cells: list[Card] = []
    for b in bits:
        left, right = pair_suits(b)
        cells += [Card(left), Card(right)]
    return cells


def decode_2card(pair: Sequence[Cell]) -> int:
    """Decode a 2-card pair; orientation is ignored (the decoder reads suits)."""
    if len(pair) != 2 or pair[0] is None or pair[1] is None:
        raise InvalidPair(f"pair needs two cards, got {pair!r}")
    left, right = pair[0].suit, pair[1].suit
    if left is right:
        raise InvalidPair(f"equal suits {left.value}{right.value}")
    return 1 if left is HEART else 0


def commit_1card(bits: Iterable[int]) -> list[Card]:
    return [Card(HEART if _check_bit(b) else CLUB) for b in bits]


def decode_1card(cell: Cell) -> int:
    if cell is None:
        raise InvalidPair("empty 1-card cell")
    return 1 if cell.suit is HEART else 0


def omission_choices(n: int) -> list[frozenset[int]]:
    """All valid omission subsets (one-based bit indices) for an n-bit input."""
    if n % 2:
        raise OddLength(f"half-card encoding needs an even bit count, got {n}")
    return [frozenset(c) for c in itertools.combinations(range(1, n + 1), n // 2)]


def check_choice(n: int, choice: Iterable[int]) -> frozenset[int]:
    if n % 2:
        raise OddLength(f"half-card encoding needs an even bit count, got {n}")
    s = frozenset(choice)
    if len(s) != n // 2 or not all(1 <= i <= n for i in s):
        raise BadChoice(f"omission set {sorted(s)} is not an {n // 2}-subset of 1..{n}")
    return s


def commit_half_card(bits: Sequence[int], choice: Iterable[int]) -> list[Cell]:
    """Bits in ``choice`` lose their heart, all others lose their club."""
    s = check_choice(len(bits), choice)
    cells: list[Cell] = []
    for i, b in enumerate(bits, start=1):
        drop = HEART if i in s else CLUB
        cells += [None if suit is drop else Card(suit) for suit in pair_suits(b)]
    return cells


def decode_half_card(cells: Sequence[Cell]) -> int:
    if len(cells) != 2 or (cells[0] is None) == (cells[1] is None):
        raise MalformedHalfCell(f"need exactly one card in {cells!r}")
    if cells[0] is not None:
        return 1 if cells[0].suit is HEART else 0
    return 1 if cells[1].suit is CLUB else 0


def empty_left_marginal(bits: Sequence[int], index: int) -> Fraction:
    """P(bit ``index`` has its left cell empty) under a uniform omission subset."""
    choices = omission_choices(len(bits))
    hits = sum(1 for s in choices if commit_half_card(bits, s)[2 * index - 2] is None)
    return Fraction(hits, len(choices))


def complement_pick_distribution(deck: Sequence[Suit], desired: Suit) -> dict[int, Fraction]:
    """Exact distribution of the left-to-right scan pick.

    Each desired-suit card is taken with probability 1/(k+1), k being the
    number of desired-suit cards not yet seen after it.
    """
    remaining = sum(1 for s in deck if s is desired)
    if remaining == 0:
        raise SuitExhausted(f"no {desired.value} card in deck")
    out: dict[int, Fraction] = {}
    reach = Fraction(1)
    for i, s in enumerate(deck):
        if s is not desired:
            continue
        remaining -= 1
        take = Fraction(1, remaining + 1)
        out[i] = reach * take
        reach *= 1 - take
    return out


def uniform_complement_pick(deck: Sequence[Suit], desired: Suit, rng: random.Random) -> int:
    """Sampled version of :func:`complement_pick_distribution`; returns a zero-based index."""
    remaining = sum(1 for s in deck if s is desired)
    if remaining == 0:
        raise SuitExhausted(f"no {desired.value} card in deck")
    for i, s in enumerate(deck):
        if s is not desired:
            continue
        remaining -= 1
        if rng.randrange(remaining + 1) == 0:
            return i
    raise AssertionError("scan ended without a pick")  # k = 0 at the last card
