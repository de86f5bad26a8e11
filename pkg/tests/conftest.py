import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from hypothesis import settings

settings.register_profile("cardforge", deadline=None, max_examples=60)
settings.load_profile("cardforge")

import pytest

from cardforge.barrington import barrington_compile
from cardforge.bp import BranchingProgram, Layer, identity, transposition_perm
from cardforge.compiler import compile_bp_to_protocol
from cardforge.formula import parse_formula

AND2 = "(AND (VAR a1) (VAR b1))"


def x1_program() -> BranchingProgram:
    """Width 5, one conditional transposition: computes Alice's first bit."""
    return BranchingProgram(5, (Layer("a", 1, identity(5), transposition_perm(5, 1, 2)),), 1, (2,), (1,))


@pytest.fixture(scope="session")
def and2_protocol():
    return compile_bp_to_protocol(barrington_compile(parse_formula(AND2)), name="and2")


@pytest.fixture(scope="session")
def x1_protocol():
    return compile_bp_to_protocol(x1_program(), name="x1")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
