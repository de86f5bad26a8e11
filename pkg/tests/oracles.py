"""Brute-force reference implementations used to cross-check the library.

These walk every raw shuffle branch without merging anything, so they share
nothing with the chain construction beyond the single-action semantics.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from cardforge.cards import visible_of
from cardforge.model import initial_states, raw_outcomes


def all_paths(p, x, y, omit=None):
    """Every raw execution: (visible trace, final state, probability)."""
    out = []

    def walk(t, st, trace, prob):
        if t == p.length:
            out.append((tuple(trace), st, prob))
            return
        act = p.program[t][visible_of(st)]
        for s2, _obs, pr in raw_outcomes(st, act, p.layout):
            walk(t + 1, s2, trace + [visible_of(s2)], prob * pr)

    for st, w in initial_states(p, tuple(x), tuple(y), omit):
        walk(0, st, [visible_of(st)], w)
    return out


def trace_distribution(p, x, y, omit=None):
    dist = {}
    for trace, _st, pr in all_paths(p, x, y, omit):
        dist[trace] = dist.get(trace, Fraction(0)) + pr
    return dist


def scan_pick_distribution(deck, desired):
    """Reservoir-style scan expanded over every random draw; keys are zero-based.

    The scan visits positions left to right; at the k-th desired card seen
    so far (k = 0, 1, ...) it switches its choice to that card with
    probability 1/(k+1).
    """
    hits = [i for i, s in enumerate(deck) if s == desired]
    dist = {}
    for flips in itertools.product((True, False), repeat=len(hits)):
        prob = Fraction(1)
        chosen = None
        for k, (pos, take) in enumerate(zip(hits, flips)):
            q = Fraction(1, k + 1)
            prob *= q if take else 1 - q
            if take:
                chosen = pos
        if prob and chosen is not None:
            dist[chosen] = dist.get(chosen, Fraction(0)) + prob
    return dist


def reveal_window(trace, lo, hi):
    """The first face-up view of positions lo..hi (one-based, inclusive)."""
    for vis in trace:
        window = vis[lo - 1:hi]
        if all(c in "HC" for c in window):
            return window
    raise AssertionError("no reveal")


def revealed_bits(trace, region, payload):
    """The (gamma, delta) suits read after the two clubs, for the first level showing them."""
    k = len(region)
    for vis in trace:
        v = [vis[q - 1] for q in region]
        for r in range(payload + 2):
            g, d = v[(r + 1) % k], v[(r + payload + 3) % k]
            if v[r] == "C" and v[(r + payload + 2) % k] == "C" and {g, d} == {"H", "C"}:
                return g + d
    raise AssertionError("bit cards never revealed")
