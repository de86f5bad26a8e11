"""Card-based two-party protocols: model, compiler and exact verifier."""

from .barrington import barrington_compile
from .bp import BranchingProgram, Layer, eval_bp, normalize_zero_identity
from .cards import CLUB, HEART, Card, Suit
from .compiler import compile_bp_to_protocol, compile_with_plan, deck_budget
from .executor import build_step_chain, enumerate_traces_oracle, run_sampled
from .extract import protocol_to_bp
from .formula import evaluate, parse_formula
from .model import Extend, Move, OutputSpec, Protocol, Shuffle, ShuffleGroup, TableLayout, Turn, apply_action
from .textio import format_bp, format_protocol, parse_bp, parse_protocol
from .verifier import check_correctness, check_read_only, check_security, distributions_equal

__all__ = [
    "barrington_compile", "BranchingProgram", "Layer", "eval_bp", "normalize_zero_identity",
    "CLUB", "HEART", "Card", "Suit", "compile_bp_to_protocol", "compile_with_plan", "deck_budget",
    "build_step_chain", "enumerate_traces_oracle", "run_sampled", "protocol_to_bp", "evaluate",
    "parse_formula", "Extend", "Move", "OutputSpec", "Protocol", "Shuffle", "ShuffleGroup",
    "TableLayout", "Turn", "apply_action", "format_bp", "format_protocol", "parse_bp", "parse_protocol",
    "check_correctness", "check_read_only", "check_security", "distributions_equal",
]
