import itertools
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from cardforge.barrington import barrington_compile
from cardforge.bp import BranchingProgram, Layer
from cardforge.compiler import compile_bp_to_protocol
from cardforge.errors import ParseError, ValidationError
from cardforge.extension import extension_protocol, with_dishonest_extension
from cardforge.formula import parse_formula
from cardforge.primitives import copy_fragment, copy_gadget_protocol
from cardforge.textio import (
    format_bp, format_fragment, format_protocol, format_truth_table, parse_bp, parse_fragment, parse_protocol,
    parse_truth_table,
)

from conftest import AND2, x1_program
from oracles import trace_distribution

GOLDEN = Path(__file__).parent / "golden"


def golden(name):
    return (GOLDEN / name).read_text(encoding="utf-8")


def test_bp_golden():
    text = format_bp(barrington_compile(parse_formula(AND2)))
    assert text == golden("and2.bp")
    assert format_bp(parse_bp(text)) == text


def test_protocol_goldens():
    assert format_protocol(compile_bp_to_protocol(x1_program(), name="x1")) == golden("x1_two_card.protocol")
    assert format_protocol(copy_gadget_protocol()) == golden("copy_gadget.protocol")
    for name in ("x1_two_card.protocol", "copy_gadget.protocol"):
        assert format_protocol(parse_protocol(golden(name))) == golden(name)


def test_fragment_golden():
    text = format_fragment(copy_fragment((1, 2), (3, 4), (5, 6)))
    assert text == golden("copy.fragment")
    assert format_fragment(parse_fragment(text)) == text


def test_truth_table_golden():
    table = parse_truth_table(golden("and2.truth"))
    assert table == {((x,), (y,)): x & y for x in (0, 1) for y in (0, 1)}
    assert format_truth_table(table) == golden("and2.truth")


def test_parsed_protocol_behaves_identically():
    p = copy_gadget_protocol()
    q = parse_protocol(format_protocol(p))
    assert trace_distribution(p, (1,), (0,)) == trace_distribution(q, (1,), (0,))


def test_extend_actions_round_trip():
    p = with_dishonest_extension(extension_protocol(), "A")
    text = format_protocol(p)
    assert "dishonest" in text and " extend B " in text
    assert format_protocol(parse_protocol(text)) == text


def test_comments_and_blank_lines_are_ignored():
    text = golden("and2.bp")
    noisy = "# plan\n\n" + text.replace("\nlayer 2", "\n# note\nlayer 2")
    assert format_bp(parse_bp(noisy)) == text


def test_unknown_action_keyword():
    lines = golden("copy_gadget.protocol").split("\n")
    lines[9] = lines[9].replace(" move ", " hop ")
    with pytest.raises(ParseError) as info:
        parse_protocol("\n".join(lines))
    assert info.value.line == 10 and "hop" in str(info.value)


@pytest.mark.parametrize("mutate,error", [
    (lambda t: t.replace("perm1=4,1,5,3,2", "perm1=4,4,5,3,2"), ValidationError),
    (lambda t: t.replace("length=5", "length=6"), ValidationError),
    (lambda t: t.replace("label=b1", "label=c1", 1), ParseError),
    (lambda t: t.replace("layer 2", "layer 3"), ParseError),
    (lambda t: t.replace("start=1 ", ""), ParseError),
])
def test_bad_bp_files(mutate, error):
    with pytest.raises(error):
        parse_bp(mutate(golden("and2.bp")))


@pytest.mark.parametrize("mutate", [
    lambda t: t.replace("encoding two_card", "encoding three_card"),
    lambda t: t.replace("deck H:3 C:3", "deck 3 3"),
    lambda t: t.replace("length 30\n", ""),
    lambda t: t.replace("step 1 ", "step 99 "),
    lambda t: t.replace("step 1 ????", "step 1 ??x?"),
    lambda t: t.replace("protocol copy-gadget", "protocl copy-gadget"),
])
def test_bad_protocol_files(mutate):
    with pytest.raises(ParseError):
        parse_protocol(mutate(golden("copy_gadget.protocol")))


def test_bad_shuffle_permutation():
    text = golden("copy_gadget.protocol").replace("13,14,15,16,17,18 cyclic", "13,14,15,16,17,18 explicit:1,1,2,3,4,5")
    with pytest.raises(ValidationError):
        parse_protocol(text)


perms = st.permutations([1, 2, 3, 4, 5]).map(tuple)
layers = st.builds(Layer, st.sampled_from("ab"), st.integers(1, 12), perms, perms)


@given(st.lists(layers, max_size=8), st.permutations([1, 2, 3, 4, 5]))
def test_bp_round_trip_property(ls, ends):
    bp = BranchingProgram(5, tuple(ls), ends[0], (ends[1],), (ends[2],))
    text = format_bp(bp)
    assert parse_bp(text) == bp
    assert format_bp(parse_bp(text)) == text


@given(st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), st.integers(0, 1), min_size=1))
def test_truth_table_round_trip(entries):
    table = {(tuple(int(b) for b in f"{x:02b}"), tuple(int(b) for b in f"{y:02b}")): v for (x, y), v in entries.items()}
    assert parse_truth_table(format_truth_table(table)) == table
