import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cardforge.cards import CLUB, HEART, Card, parse_state, visible_of
from cardforge.encodings import (
    check_choice, commit_1card, commit_2card, commit_half_card, complement_pick_distribution,
    decode_1card, decode_2card, decode_half_card, empty_left_marginal, omission_choices, uniform_complement_pick,
)
from cardforge.errors import BadChoice, InvalidPair, MalformedHalfCell, OddLength, SuitExhausted

from oracles import scan_pick_distribution


def test_two_card_commitment():
    assert commit_2card([1]) == [Card(HEART), Card(CLUB)]
    assert decode_2card([Card(CLUB), Card(HEART)]) == 0
    with pytest.raises(InvalidPair):
        decode_2card([Card(HEART), Card(HEART)])


def test_one_card_commitment():
    assert [c.suit for c in commit_1card([1, 0])] == [HEART, CLUB]
    assert decode_1card(Card(HEART)) == 1


def test_half_card_slot_removal():
    # bit 1 (HC) in S loses its heart; bit 0 (CH) outside S loses its club
    assert commit_half_card([1, 0], {1}) == [None, Card(CLUB), None, Card(HEART)]
    assert commit_half_card([1, 0], {2}) == [Card(HEART), None, Card(CLUB), None]


def test_half_card_decode():
    assert decode_half_card([None, Card(CLUB)]) == 1
    assert decode_half_card([Card(CLUB), None]) == 0
    with pytest.raises(MalformedHalfCell):
        decode_half_card([None, None])


def test_half_card_choice_errors():
    with pytest.raises(OddLength):
        omission_choices(3)
    with pytest.raises(BadChoice):
        check_choice(4, {1})
    with pytest.raises(BadChoice):
        check_choice(4, {1, 5})


@pytest.mark.parametrize("n", [2, 4, 6])
def test_half_card_suit_usage_exhaustive(n):
    for code in range(2 ** n):
        bits = [(code >> i) & 1 for i in range(n)]
        for s in omission_choices(n):
            cells = commit_half_card(bits, s)
            suits = [c.suit for c in cells if c is not None]
            assert suits.count(HEART) == n // 2 and suits.count(CLUB) == n // 2
            assert [decode_half_card(cells[2 * i:2 * i + 2]) for i in range(n)] == bits


@pytest.mark.parametrize("n", [2, 4, 6])
def test_empty_left_marginal_is_half(n):
    for code in range(2 ** n):
        bits = [(code >> i) & 1 for i in range(n)]
        for i in range(1, n + 1):
            assert empty_left_marginal(bits, i) == Fraction(1, 2)


def test_pick_examples():
    assert complement_pick_distribution([CLUB, HEART, CLUB], HEART) == {1: 1}
    assert complement_pick_distribution([HEART] * 3, HEART) == {0: Fraction(1, 3), 1: Fraction(1, 3), 2: Fraction(1, 3)}
    assert complement_pick_distribution([HEART, CLUB], CLUB) == {1: 1}
    with pytest.raises(SuitExhausted):
        complement_pick_distribution([CLUB, CLUB], HEART)


decks = st.lists(st.sampled_from([HEART, CLUB]), min_size=1, max_size=8)


@given(decks, st.sampled_from([HEART, CLUB]))
def test_pick_matches_reservoir_oracle(deck, desired):
    if desired not in deck:
        return
    got = complement_pick_distribution(deck, desired)
    assert got == scan_pick_distribution(deck, desired)
    assert set(got.values()) == {Fraction(1, deck.count(desired))}


@given(decks, st.integers(0, 2 ** 32))
def test_sampled_pick_lands_on_desired_suit(deck, seed):
    if HEART not in deck:
        return
    i = uniform_complement_pick(deck, HEART, random.Random(seed))
    assert deck[i] is HEART


def test_state_text_round_trip():
    st_ = parse_state("hC.c")
    assert visible_of(st_) == "?C.?"
    assert visible_of(parse_state("hc")) == visible_of(parse_state("ch")) == "??"
    assert visible_of([Card(HEART, True), None, Card(CLUB, True)]) == "H.C"
