"""Formula to width-5 permutation branching program.

The program for ``f`` with target 5-cycle ``pi`` multiplies (left to right)
to ``pi`` when f = 1 and to the identity when f = 0.  AND uses a commutator
of two 5-cycles retargeted by conjugation, NOT multiplies the program for
``pi^-1`` by a constant ``pi`` layer, OR goes through De Morgan.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .bp import BranchingProgram, Layer, cycle, identity, inverse, normalize_zero_identity, then
from .formula import And, Formula, Not, Or, Var

WIDTH = 5
SIGMA = cycle(WIDTH, 1, 2, 3, 4, 5)
ID5 = identity(WIDTH)


def is_five_cycle(p) -> bool:
    v, steps = 1, 0
    while True:
        v = p[v - 1]
        steps += 1
        if v == 1:
            return steps == WIDTH


def commutator(a, b) -> tuple:
    return then(a, b, inverse(a), inverse(b))


@lru_cache(maxsize=None)
def _base_pair() -> tuple:
    alpha = SIGMA
    for beta in sorted(itertools.permutations(range(1, WIDTH + 1))):
        if is_five_cycle(beta) and is_five_cycle(commutator(alpha, beta)):
            return alpha, beta, commutator(alpha, beta)
    raise AssertionError("no 5-cycle pair with a 5-cycle commutator")


@lru_cache(maxsize=None)
def _conjugator(target: tuple) -> tuple:
    gamma = _base_pair()[2]
    for theta in sorted(itertools.permutations(range(1, WIDTH + 1))):
        if then(inverse(theta), gamma, theta) == target:
            return theta
    raise ValueError(f"{target} is not a 5-cycle")


def and_factors(target: tuple) -> tuple[tuple, tuple]:
    """5-cycles (alpha, beta) whose commutator is ``target``."""
    alpha, beta, _ = _base_pair()
    theta = _conjugator(target)
    inv = inverse(theta)
    return then(inv, alpha, theta), then(inv, beta, theta)


def _program(f: Formula, pi: tuple) -> list[Layer]:
    if isinstance(f, Var):
        return [Layer(f.owner, f.index, ID5, pi)]
    if isinstance(f, Not):
        return _program(f.arg, inverse(pi)) + [Layer("a", 1, pi, pi)]
    if isinstance(f, Or):
        return _program(Not(And(tuple(Not(g) for g in f.args))), pi)
    if isinstance(f, And):
        left = f.args[0] if len(f.args) == 2 else And(f.args[:-1])
        right = f.args[-1]
        a, b = and_factors(pi)
        return (_program(left, a) + _program(right, b)
                + _program(left, inverse(a)) + _program(right, inverse(b)))
    raise TypeError(f"not a formula: {f!r}")


def barrington_compile(f: Formula) -> BranchingProgram:
    """Restricted width-5 program for ``f`` with every zero-edge the identity."""
    raw = BranchingProgram(WIDTH, tuple(_program(f, SIGMA)), 1, (SIGMA[0],), (1,))
    return normalize_zero_identity(raw)
