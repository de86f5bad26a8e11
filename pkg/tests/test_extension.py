import pytest

from cardforge.cards import CLUB, HEART, Card
from cardforge.encodings import HALF_CARD, ONE_CARD, decode_2card
from cardforge.errors import MalformedHalfCell, NotOwner
from cardforge.executor import build_step_chain
from cardforge.extension import (
    emit_extend_half, extend_1card_fragment, extend_1card_protocol, extend_half_card_fragment, extension_deck_budget,
    extension_protocol, with_dishonest_extension,
)
from cardforge.fragments import FragmentBuilder
from cardforge.verifier import PLAYER_ALICE, PLAYER_BOB, check_correctness, check_read_only, check_security, truth_table

from oracles import all_paths



def reveal_window(p):
    """The copy's four revealed cells: the first four free positions."""
    f = p.layout.input_count + p.layout.s
    return slice(f, f + 4)


@pytest.mark.parametrize("b", [0, 1])
def test_one_card_extension_every_branch(b):
    p = extend_1card_protocol()
    paths = all_paths(p, (b,), (0,))
    assert len(paths) == 96
    for _trace, final, _prob in paths:
        assert decode_2card([final[q - 1] for q in p.output.positions]) == b
        assert final[0] == Card(HEART if b else CLUB)
        # the designated pair is back, face down, in the extension slots
        assert sorted(c.suit.value for c in final[8:10]) == ["C", "H"]


def test_one_card_extension_checks():
    p = extend_1card_protocol()
    assert check_read_only(p).passed
    assert check_correctness(p, truth_table(lambda x, y: x[0], 1)).passed
    assert check_security(p, mode=PLAYER_BOB).passed
    assert check_security(p, mode=PLAYER_ALICE).passed


def test_both_players_extend():
    p = extension_protocol()
    assert check_correctness(p, truth_table(lambda x, y: (x[0], y[0]), 1)).passed
    assert check_security(p, mode=PLAYER_ALICE).passed
    assert check_security(p, mode=PLAYER_BOB).passed


@pytest.mark.parametrize("player", ["A", "B"])
def test_wrong_complement_is_always_caught(player):
    p = with_dishonest_extension(extension_protocol(), player)
    for x in (0, 1):
        for y in (0, 1):
            chain = build_step_chain(p, (x,), (y,), strict=False)
            window_of = reveal_window(p)
            # no probability mass survives to the end
            assert chain.level_masses()[-1] == 0
            for t, dead in enumerate(chain.stuck):
                for i in dead:
                    window = chain.levels[t][i][1][window_of]
                    up = [c for c in window if c in "HC"]
                    assert max(up.count("H"), up.count("C")) >= 3


def test_honest_protocol_never_stalls():
    chain = build_step_chain(extension_protocol(), (1,), (0,), strict=False)
    assert not any(chain.stuck) and chain.level_masses()[-1] == 1


def test_half_card_extension_fragment():
    frag = extend_half_card_fragment((1, 2), (24, 25))
    assert frag.length > 0
    p = extension_protocol(HALF_CARD)
    assert p.n == 2
    f = truth_table(lambda x, y: (x[0], y[0]), 2)
    assert check_correctness(p, f).passed
    assert check_read_only(p).passed


@pytest.mark.parametrize("bit,omit,cells", [(1, {1}, (None, "C")), (0, {1}, ("C", None)), (0, {2}, (None, "H"))])
def test_half_card_cells_restored(bit, omit, cells):
    p = extension_protocol(HALF_CARD)
    x = (bit, 1 - bit)
    for _trace, final, _prob in all_paths(p, x, (0, 0), {"A": omit, "B": {1}}):
        got = tuple(None if c is None else c.suit.value for c in final[:2])
        assert got == cells
        assert decode_2card([final[q - 1] for q in p.output.positions[:2]]) == bit


def test_half_card_malformed_and_owner_errors():
    b = FragmentBuilder("bad", {1: ".", 2: ".", 3: "~", 4: "~"})
    from cardforge.model import TableLayout
    lay = TableLayout(1, 0, 20)
    with pytest.raises(MalformedHalfCell):
        emit_extend_half(b, lay, (1, 2), (5, 6), (7, 8), (9, 10), (11, 12), 13)
    with pytest.raises(NotOwner):
        extend_1card_fragment(1, (17, 18), player="B")


def test_deck_budget():
    assert extension_deck_budget(ONE_CARD) == (4, 4)
    assert extension_deck_budget(HALF_CARD) == (4, 5)
    assert extension_deck_budget(ONE_CARD, 2) == (5, 5)
