import pytest

from cardforge.barrington import barrington_compile
from cardforge.bp import BranchingProgram, Layer, cycle, identity, transposition_perm
from cardforge.compiler import compile_bp_to_protocol, compile_with_plan, deck_budget, plan_compilation
from cardforge.errors import NotNormalized, NotRestricted, WidthNot5
from cardforge.formula import parse_formula
from cardforge.model import validate_protocol
from cardforge.primitives import COPY_LENGTH, swap_length
from cardforge.verifier import check_correctness, check_read_only, check_security, truth_table

from conftest import AND2, x1_program
from oracles import all_paths, trace_distribution

ID5 = identity(5)
SETUP = 10  # five program cards taken and turned
PER_SWAP = 2 + COPY_LENGTH + 2 + swap_length(1)  # move in, copy, move back, swap


def test_x1_program_every_branch(x1_protocol):
    p = x1_protocol
    for x in (0, 1):
        for _trace, final, _prob in all_paths(p, (x,), (0,)):
            acc, rej = (final[q - 1].suit.value for q in p.output.positions)
            assert (acc, rej) == (("H", "C") if x else ("C", "H"))


def test_x1_program_checks(x1_protocol):
    assert check_correctness(x1_protocol, truth_table(lambda x, y: x[0], 1)).passed
    assert check_read_only(x1_protocol).passed
    assert check_security(x1_protocol).passed
    assert validate_protocol(x1_protocol) == []


def test_identity_program_is_constant_zero():
    bp = BranchingProgram(5, (Layer("a", 1, ID5, ID5),), 1, (2,), (1,))
    p = compile_bp_to_protocol(bp)
    assert p.length == SETUP
    assert check_correctness(p, truth_table(lambda x, y: 0, 1)).passed
    assert trace_distribution(p, (0,), (0,)) == trace_distribution(p, (1,), (1,))
    assert len(trace_distribution(p, (0,), (0,))) == 1


def test_budget_is_independent_of_program():
    small = deck_budget(barrington_compile(parse_formula(AND2)))
    maj = deck_budget(barrington_compile(parse_formula("(OR (AND (VAR a1) (VAR b1)) (AND (VAR a1) (VAR a2)) "
                                                       "(AND (VAR b1) (VAR a2)))")))
    assert small == maj == deck_budget(x1_program()) == {"H": 4, "C": 7}
    assert deck_budget(None, "one_card") == {"H": 5, "C": 8}
    assert deck_budget(None, "half_card") == {"H": 5, "C": 9}


@pytest.mark.parametrize("text", ["(VAR a1)", "(NOT (VAR a1))", AND2, "(OR (VAR a1) (VAR b1))"])
def test_length_is_linear_in_transpositions(text):
    p, plan = compile_with_plan(barrington_compile(parse_formula(text)))
    assert p.length == SETUP + PER_SWAP * plan.transpositions
    assert compile_bp_to_protocol(barrington_compile(parse_formula(text)), open_output=True).length == p.length + 2


def test_compiled_protocols_validate():
    for text in ["(VAR a1)", "(NOT (VAR b1))", AND2]:
        assert validate_protocol(compile_bp_to_protocol(barrington_compile(parse_formula(text)))) == []


def test_compiled_and2(and2_protocol):
    assert check_correctness(and2_protocol, truth_table(lambda x, y: x[0] & y[0], 1)).passed
    assert check_read_only(and2_protocol).passed


def test_plan_contents():
    layout, plan = plan_compilation(barrington_compile(parse_formula(AND2)))
    assert plan.program_cells == (16, 17, 18, 19, 20)
    assert plan.free_cells == 13 and layout.m == 15 + 13
    assert plan.transpositions == 16
    lines = plan.lines()
    assert all(line.startswith("# ") for line in lines)
    assert lines[0] == "# plan encoding=two_card deck=H:4,C:7 free=13"


def test_swap_order_recomposes_layer():
    bp = BranchingProgram(5, (Layer("a", 1, ID5, cycle(5, 1, 2, 3)),), 1, (2,), (1,))
    _layout, plan = plan_compilation(bp)
    [(_k, _label, swaps)] = plan.schedule
    # applying the swaps in schedule order moves the heart the same way the layer does
    cells = [1, 2, 3, 4, 5]
    for i, j, _ci, _cj in swaps:
        cells[i - 1], cells[j - 1] = cells[j - 1], cells[i - 1]
    # the card that started at vertex v now sits at perm1(v)
    assert all(cells[cycle(5, 1, 2, 3)[v - 1] - 1] == v for v in range(1, 6))


def test_rejections():
    with pytest.raises(WidthNot5):
        compile_bp_to_protocol(BranchingProgram(3, (Layer("a", 1, identity(3), identity(3)),), 1, (2,), (1,)))
    with pytest.raises(NotNormalized):
        compile_bp_to_protocol(BranchingProgram(5, (Layer("a", 1, transposition_perm(5, 1, 2), ID5),), 1, (2,), (1,)))
    with pytest.raises(NotRestricted):
        compile_bp_to_protocol(BranchingProgram(5, (Layer("a", 1, ID5, ID5),), 1, (2, 3), (1,), "layered"))


@pytest.mark.parametrize("encoding,n,length", [("one_card", None, 58), ("half_card", 2, 60)])
def test_extension_encodings(encoding, n, length):
    p = compile_bp_to_protocol(x1_program(), encoding, n=n)
    assert p.length == length
    f = truth_table(lambda x, y: x[0], p.n)
    assert check_correctness(p, f).passed
    assert check_read_only(p).passed
