"""Exact execution of protocols.

:func:`build_step_chain` produces a levelled Markov chain whose nodes are
(table state, emission) pairs; identical nodes on one level are merged, which
is sound because an oblivious protocol's next action depends only on the
current visible state and the step number.  :func:`enumerate_traces_oracle`
is the exponential, merge-free cross-check.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, lcm
from typing import Mapping, Optional

from .cards import TableState, visible_of
from .errors import IllegalAction, IncompleteStep, TooLarge
from .model import Extend, Protocol, Shuffle, initial_states, raw_outcomes

DEFAULT_ORACLE_CAP = 10**6
CAP_ENV = "CARDFORGE_ORACLE_CAP"


def oracle_cap() -> int:
    value = os.environ.get(CAP_ENV)
    return int(value) if value else DEFAULT_ORACLE_CAP


def emission_of(state: TableState, obs: Optional[str], view: Optional[str], player: Optional[str]) -> str:
    vis = visible_of(state)
    if obs is not None and view is not None and player == view:
        return f"{vis}|{player}:{obs}"
    return vis


@dataclass
class StepChain:
    """Levels of (state, emission) nodes with rational edges between consecutive levels."""

    levels: list  # levels[t] = list of (state, emission)
    init: list  # weights of level-0 nodes
    edges: list  # edges[t][i] = list of (j, weight) into level t+1
    stuck: list = field(default_factory=list)  # stuck[t] = indices without a defined action

    @property
    def length(self) -> int:
        return len(self.levels) - 1

    def emissions(self, t: int) -> list[str]:
        return [e for _s, e in self.levels[t]]

    def level_masses(self) -> list[Fraction]:
        masses = []
        vec = dict(enumerate(self.init))
        for t in range(len(self.levels)):
            masses.append(sum(vec.values(), Fraction(0)))
            if t == self.length:
                break
            nxt: dict = {}
            for i, w in vec.items():
                for j, p in self.edges[t][i]:
                    nxt[j] = nxt.get(j, Fraction(0)) + w * p
            vec = nxt
        return masses

    def node_masses(self, t: int) -> dict[int, Fraction]:
        """Probability of reaching each node of level ``t``."""
        vec = dict(enumerate(self.init))
        for s in range(t):
            nxt: dict = {}
            for i, w in vec.items():
                for j, p in self.edges[s][i]:
                    nxt[j] = nxt.get(j, Fraction(0)) + w * p
            vec = nxt
        return vec

    def final_states(self) -> list[tuple[TableState, Fraction]]:
        """Merged distribution over last-level states."""
        vec = dict(enumerate(self.init))
        for t in range(self.length):
            nxt: dict = {}
            for i, w in vec.items():
                for j, p in self.edges[t][i]:
                    nxt[j] = nxt.get(j, Fraction(0)) + w * p
            vec = nxt
        out: dict = {}
        for i, w in vec.items():
            st = self.levels[self.length][i][0]
            out[st] = out.get(st, Fraction(0)) + w
        return sorted(out.items(), key=lambda kv: visible_of(kv[0]))


def build_step_chain(p: Protocol, x, y, *, view: Optional[str] = None, omit: Optional[Mapping] = None,
                     merge: bool = True, strict: bool = True) -> StepChain:
    """Exact chain for one committed input.

    ``view`` names a player whose private Extend observations are appended
    to emissions.  With ``strict=False`` a node without a defined action is
    recorded in ``stuck`` instead of raising.
    """
    level: list = []
    index: dict = {}
    init: list = []
    for st, w in initial_states(p, tuple(x), tuple(y), omit):
        key = (st, visible_of(st))
        if merge and key in index:
            init[index[key]] += w
            continue
        index[key] = len(level)
        level.append(key)
        init.append(w)
    levels = [level]
    edges: list = []
    stuck: list = []
    for t in range(p.length):
        step = p.program[t]
        nxt: list = []
        nidx: dict = {}
        out_edges: list = []
        dead: set = set()
        for i, (st, emission) in enumerate(levels[-1]):
            vis = emission.split("|", 1)[0]
            act = step.get(vis)
            if act is None:
                if strict:
                    raise IncompleteStep(f"no action at step {t} for visible {vis}", step=t, state=st)
                dead.add(i)
                out_edges.append([])
                continue
            try:
                outcomes = raw_outcomes(st, act, p.layout)
            except IllegalAction as exc:
                exc.context.update(step=t, state=st)
                raise
            acc: dict = {}
            for s2, obs, pr in outcomes:
                key = (s2, emission_of(s2, obs, view, act.player))
                if merge:
                    j = nidx.get(key)
                    if j is None:
                        j = nidx[key] = len(nxt)
                        nxt.append(key)
                else:
                    j = len(nxt)
                    nxt.append(key)
                acc[j] = acc.get(j, Fraction(0)) + pr
            out_edges.append(list(acc.items()))
        levels.append(nxt)
        edges.append(out_edges)
        stuck.append(dead)
    stuck.append(set())
    return StepChain(levels, init, edges, stuck)


def chain_traces(chain: StepChain) -> dict[tuple, Fraction]:
    """Distribution over full emission sequences, by forward propagation of prefix classes."""
    cur: dict = {}
    for i, w in enumerate(chain.init):
        e = chain.levels[0][i][1]
        cur.setdefault((e,), {})
        cur[(e,)][i] = cur[(e,)].get(i, Fraction(0)) + w
    for t in range(chain.length):
        nxt: dict = {}
        for word, vec in cur.items():
            for i, w in vec.items():
                for j, p in chain.edges[t][i]:
                    key = word + (chain.levels[t + 1][j][1],)
                    bucket = nxt.setdefault(key, {})
                    bucket[j] = bucket.get(j, Fraction(0)) + w * p
        cur = nxt
    return {word: sum(vec.values(), Fraction(0)) for word, vec in sorted(cur.items())}


def prefix_probability(chain: StepChain, prefix) -> Fraction:
    """Probability that the emission sequence starts with ``prefix``."""
    prefix = list(prefix)
    if not prefix:
        return Fraction(1)
    if len(prefix) > len(chain.levels):
        return Fraction(0)
    vec = {i: w for i, w in enumerate(chain.init) if chain.levels[0][i][1] == prefix[0]}
    for t in range(len(prefix) - 1):
        nxt: dict = {}
        for i, w in vec.items():
            for j, p in chain.edges[t][i]:
                if chain.levels[t + 1][j][1] == prefix[t + 1]:
                    nxt[j] = nxt.get(j, Fraction(0)) + w * p
        vec = nxt
    return sum(vec.values(), Fraction(0))


def branch_estimate(p: Protocol) -> int:
    """Upper bound on raw execution paths: product of per-step maximum outcome counts."""
    total = 1
    if p.encoding == "half_card":
        from .encodings import omission_choices

        total = len(omission_choices(p.n)) ** 2
    for step in p.program:
        worst = 1
        for act in step.values():
            if isinstance(act, Shuffle):
                k = len(act.positions)
                worst = max(worst, {"cyclic": k, "symmetric": factorial(k)}.get(act.group.kind, len(act.group.perms)))
            elif isinstance(act, Extend):
                k = len(act.deck)
                worst = max(worst, factorial(k) * k)
        total *= worst
    return total


def enumerate_traces_oracle(p: Protocol, x, y, *, view: Optional[str] = None, omit: Optional[Mapping] = None,
                            cap: Optional[int] = None) -> dict[tuple, Fraction]:
    """Exhaustive, merge-free path expansion; refuses with TOO_LARGE above the cap."""
    cap = oracle_cap() if cap is None else cap
    estimate = branch_estimate(p)
    if estimate > cap:
        raise TooLarge(f"estimated {estimate} branches exceed the cap of {cap}", estimate=estimate, cap=cap)
    out: dict = {}

    def walk(t: int, st, word: tuple, prob: Fraction) -> None:
        if t == p.length:
            out[word] = out.get(word, Fraction(0)) + prob
            return
        vis = visible_of(st)
        act = p.program[t].get(vis)
        if act is None:
            raise IncompleteStep(f"no action at step {t} for visible {vis}", step=t, state=st)
        for s2, obs, pr in raw_outcomes(st, act, p.layout):
            walk(t + 1, s2, word + (emission_of(s2, obs, view, act.player),), prob * pr)

    for st, w in initial_states(p, tuple(x), tuple(y), omit):
        walk(0, st, (visible_of(st),), w)
    return dict(sorted(out.items()))


@dataclass
class SampledRun:
    trace: list  # visible state per level
    final: TableState
    actions: list


def run_sampled(p: Protocol, x, y, seed: int, omit: Optional[Mapping] = None) -> SampledRun:
    """One execution with every random choice drawn from ``random.Random(seed)``."""
    rng = random.Random(seed)
    starts = initial_states(p, tuple(x), tuple(y), omit)
    st = starts[rng.randrange(len(starts))][0]  # omission subsets are equally likely
    trace = [visible_of(st)]
    actions = []
    for t in range(p.length):
        vis = trace[-1]
        act = p.program[t].get(vis)
        if act is None:
            raise IncompleteStep(f"no action at step {t} for visible {vis}", step=t, state=st)
        outcomes = raw_outcomes(st, act, p.layout)
        weights = [pr for _s, _o, pr in outcomes]
        st = _pick(outcomes, weights, rng)[0]
        trace.append(visible_of(st))
        actions.append(act)
    return SampledRun(trace, st, actions)


def _pick(items, weights, rng: random.Random):
    # exact inverse-CDF sampling on a common denominator
    den = lcm(*(w.denominator for w in weights))
    ticket = rng.randrange(den)
    for item, w in zip(items, weights):
        ticket -= int(w * den)
        if ticket < 0:
            return item
    return items[-1]



def count_raw_paths(p: Protocol, x, y, omit: Optional[Mapping] = None) -> int:
    """Number of distinct random-choice sequences (no merging of any kind)."""
    def walk(t: int, st) -> int:
        if t == p.length:
            return 1
        act = p.program[t].get(visible_of(st))
        if act is None:
            raise IncompleteStep(f"no action at step {t}", step=t, state=st)
        return sum(walk(t + 1, s2) for s2, _o, _p in raw_outcomes(st, act, p.layout))

    return sum(walk(0, st) for st, _w in initial_states(p, tuple(x), tuple(y), omit))
