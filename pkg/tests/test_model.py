import dataclasses
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cardforge.cards import CLUB, HEART, Card, parse_state, visible_of
from cardforge.errors import IllegalAction, NotOwner, ShuffleOnInput
from cardforge.model import (
    ALICE, COMMITTED, Extend, Move, OutputSpec, Protocol, Shuffle, ShuffleGroup, TableLayout, Turn,
    apply_action, initial_states, raw_outcomes, validate_protocol,
)
from cardforge.primitives import copy_gadget_protocol

CYCLIC = ShuffleGroup.cyclic()
SYMMETRIC = ShuffleGroup.symmetric()


def test_move_is_deterministic():
    state = parse_state("h" + "." * 8)
    [(nxt, pr)] = apply_action(state, Move(ALICE, 1, 9))
    assert nxt == parse_state("." * 8 + "h") and pr == 1


def test_move_errors():
    state = parse_state("h.c")
    with pytest.raises(IllegalAction):
        apply_action(state, Move(ALICE, 2, 3))
    with pytest.raises(IllegalAction):
        apply_action(state, Move(ALICE, 1, 3))


def test_turn_flips_face():
    [(nxt, _)] = apply_action(parse_state("h"), Turn(ALICE, 1))
    assert visible_of(nxt) == "H"


def test_cyclic_six_shuffle():
    state = parse_state("hchchc")
    out = apply_action(state, Shuffle(ALICE, tuple(range(1, 7)), CYCLIC))
    assert len(out) <= 6 and sum(p for _s, p in out) == 1
    # HCHCHC has period two: only two distinct arrangements, each 1/2
    assert sorted(p for _s, p in out) == [Fraction(1, 2)] * 2
    assert len(raw_outcomes(state, Shuffle(ALICE, tuple(range(1, 7)), CYCLIC))) == 6


def test_cyclic_four_on_hchc_merges_to_two():
    out = dict(apply_action(parse_state("hchc"), Shuffle(ALICE, (1, 2, 3, 4), CYCLIC)))
    assert out == {parse_state("hchc"): Fraction(1, 2), parse_state("chch"): Fraction(1, 2)}


def test_shuffle_on_input_rejected():
    lay = TableLayout(1, 0, 6)
    with pytest.raises(ShuffleOnInput):
        raw_outcomes(parse_state("hchc.."), Shuffle(ALICE, (1, 5), CYCLIC), lay)


def test_explicit_group_validation():
    with pytest.raises(ValueError):
        ShuffleGroup.explicit([(1, 1)])
    assert ShuffleGroup.explicit([(1, 2), (2, 1)]).is_group
    assert not ShuffleGroup.explicit([(2, 3, 1)]).is_group


def test_extend_picks_complement():
    lay = TableLayout(1, 2, 7, cells_per_bit=1)
    state = (Card(HEART), Card(CLUB), Card(HEART), Card(CLUB), None, None, None)
    out = apply_action(state, Extend(ALICE, 1, 5, (3, 4)), lay)
    assert all(s[4] == Card(CLUB) for s, _p in out)
    assert sum(p for _s, p in out) == 1
    # which deck slot vacates is uniform
    vac = {}
    for s, p in out:
        vac[s.index(None)] = vac.get(s.index(None), 0) + p
    assert vac == {2: Fraction(1, 2), 3: Fraction(1, 2)}
    with pytest.raises(NotOwner):
        apply_action(state, Extend("B", 1, 5, (3, 4)), lay)
    dishonest = apply_action(state, Extend(ALICE, 1, 5, (3, 4), honest=False), lay)
    assert all(s[4] == Card(HEART) for s, _p in dishonest)


def test_hidden_suits_do_not_show():
    assert visible_of(parse_state("hc")) == visible_of(parse_state("ch")) == "??"


cards = st.lists(st.sampled_from("hcHC"), min_size=2, max_size=6).map("".join)


@given(cards, st.sampled_from([CYCLIC, SYMMETRIC]))
def test_shuffle_twice_equals_once(text, group):
    state = parse_state(text)
    act = Shuffle(ALICE, tuple(range(1, len(text) + 1)), group)
    once = dict(apply_action(state, act))
    twice: dict = {}
    for s1, p1 in once.items():
        for s2, p2 in apply_action(s1, act):
            twice[s2] = twice.get(s2, 0) + p1 * p2
    assert once == twice


@given(cards, st.sampled_from([CYCLIC, SYMMETRIC]))
def test_outcome_probabilities_sum_to_one(text, group):
    out = apply_action(parse_state(text), Shuffle(ALICE, tuple(range(1, len(text) + 1)), group))
    assert sum(p for _s, p in out) == 1
    assert len({s for s, _p in out}) == len(out)


def test_copy_gadget_validates():
    assert validate_protocol(copy_gadget_protocol()) == []


def _one_step(action, m=5):
    lay = TableLayout(1, 0, m)
    return Protocol("t", lay, "two_card", 0, 0, ({"????.": action},), OutputSpec((1, 2), COMMITTED))


def test_validator_flags_shuffle_on_input():
    codes = {v.code for v in validate_protocol(_one_step(Shuffle(ALICE, (1, 5))))}
    assert "SHUFFLE_ON_INPUT" in codes


def test_validator_flags_incomplete_step():
    p = copy_gadget_protocol()
    program = list(p.program)
    program[2] = {}
    broken = dataclasses.replace(p, program=tuple(program))
    found = validate_protocol(broken)
    assert found and {(v.code, v.step) for v in found} == {("INCOMPLETE_STEP", 2)}


def test_initial_states_half_card_weights():
    lay = TableLayout(2, 0, 8)
    p = Protocol("h", lay, "half_card", 0, 0, (), OutputSpec((1, 2), COMMITTED))
    starts = initial_states(p, (1, 0), (0, 0))
    assert len(starts) == 4 and sum(w for _s, w in starts) == 1
    fixed = initial_states(p, (1, 0), (0, 0), {"A": {1}, "B": {2}})
    assert len(fixed) == 1
