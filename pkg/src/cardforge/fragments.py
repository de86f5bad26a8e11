"""Position-parameterised protocol fragments and their composition.

A fragment step is a set of rules ``(pattern, action)``; a pattern constrains
the visible tokens of a few watched positions.  Fragments are built by
:class:`FragmentBuilder`, which tracks what is publicly known about each
position ("tokens") along every branch ("world") of the construction, and
turned into a full :class:`~cardforge.model.Protocol` by :func:`to_protocol`,
which materialises the visible-state keyed step maps by forward exploration.

Token alphabet: the visible alphabet ``. ? H C`` plus the wildcards
``*`` (face-up, suit unknown at build time), ``~`` (empty or face-down) and
``#`` (anything).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .cards import Card, Suit, visible_of
from .errors import AmbiguousStep, ContractMismatch, DeckShortage, IncompleteStep
from .model import (
    ALICE,
    Extend,
    Move,
    OutputSpec,
    Protocol,
    Shuffle,
    ShuffleGroup,
    TableLayout,
    Turn,
    all_inputs,
    apply_action,
    initial_states,
    pad_action,
)

WILDCARDS = {"*": "HC", "~": ".?", "#": ".?HC"}
CARD_TOKENS = "?HC*"


def token_matches(token: str, char: str) -> bool:
    """Does pattern ``token`` admit the concrete visible character ``char``?"""
    if token in WILDCARDS:
        return char in WILDCARDS[token]
    return token == char


def _admits(token: str, other: str) -> bool:
    """Is every concrete value of ``other`` admitted by ``token``?"""
    return all(token_matches(token, c) for c in WILDCARDS.get(other, other))


def _overlaps(a: str, b: str) -> bool:
    return any(token_matches(a, c) for c in WILDCARDS.get(b, b))


@dataclass(frozen=True)
class Rule:
    pattern: tuple  # ((pos, token), ...)
    action: object

    def matches(self, visible: str) -> bool:
        return all(token_matches(tok, visible[p - 1]) for p, tok in self.pattern)


@dataclass(frozen=True)
class Deck:
    """Slot designation of the face-up main deck plus the face-down extension pair."""

    slots: Mapping[int, Suit]
    ext: tuple = ()

    @classmethod
    def for_layout(cls, layout: TableLayout, hearts: int, clubs: int, extension: bool) -> "Deck":
        pos = list(layout.deck_positions())
        ext: tuple = ()
        if extension:
            pos, ext = pos[:-2], tuple(pos[-2:])
            hearts, clubs = hearts - 1, clubs - 1
        suits = [Suit.HEART] * hearts + [Suit.CLUB] * clubs
        return cls(dict(zip(pos, suits)), ext)


@dataclass(frozen=True)
class ProtocolFragment:
    name: str
    steps: tuple  # tuple[tuple[Rule, ...], ...]
    pre: Mapping[int, str]
    post: Mapping[int, str]
    effect: str = ""

    @property
    def length(self) -> int:
        return len(self.steps)

    def required_free(self) -> list[int]:
        return sorted(p for p, t in self.pre.items() if t == ".")

    def required_deck(self) -> dict[str, int]:
        out = {"H": 0, "C": 0}
        for t in self.pre.values():
            if t in out:
                out[t] += 1
        return out


@dataclass
class _World:
    tokens: dict
    t: int
    watched: frozenset = frozenset()

    def clone(self) -> "_World":
        return _World(dict(self.tokens), self.t, self.watched)


class FragmentBuilder:
    """Imperative construction of a fragment across all publicly distinguishable branches."""

    def __init__(self, name: str, known: Mapping[int, str], deck: Optional[Deck] = None, player: str = ALICE):
        self.name = name
        self.known = dict(known)
        self.deck = deck
        self.player = player
        self.touched: dict[int, str] = {}
        self.steps: list[list[Rule]] = []
        self.worlds = [_World(dict(known), 0)]
        self.nested = False

    @classmethod
    def _sub(cls, parent: "FragmentBuilder", worlds: list) -> "FragmentBuilder":
        sub = cls.__new__(cls)
        sub.name, sub.known, sub.deck, sub.player = parent.name, parent.known, parent.deck, parent.player
        sub.touched, sub.steps, sub.worlds = parent.touched, parent.steps, worlds
        sub.nested = True
        return sub

    # -- token bookkeeping --------------------------------------------------

    def _tok(self, w: _World, pos: int) -> str:
        if pos not in w.tokens:
            raise ContractMismatch(f"{self.name}: position {pos} is not part of the known table")
        self.touched.setdefault(pos, self.known[pos])
        return w.tokens[pos]

    def token(self, pos: int) -> str:
        """Token of ``pos`` if all worlds agree, else '#'."""
        toks = {self._tok(w, pos) for w in self.worlds}
        return toks.pop() if len(toks) == 1 else "#"

    def _apply(self, w: _World, action) -> None:
        if isinstance(action, Move):
            src, dst = self._tok(w, action.src), self._tok(w, action.dst)
            if src == ".":
                raise ContractMismatch(f"{self.name}: move from empty position {action.src}")
            if dst != ".":
                raise ContractMismatch(f"{self.name}: move onto non-empty position {action.dst} ({dst})")
            w.tokens[action.dst], w.tokens[action.src] = src, "."
        elif isinstance(action, Turn):
            tok = self._tok(w, action.pos)
            if tok not in CARD_TOKENS:
                raise ContractMismatch(f"{self.name}: turn of {tok!r} at {action.pos}")
            w.tokens[action.pos] = "*" if tok == "?" else "?"
        elif isinstance(action, Shuffle):
            toks = [self._tok(w, p) for p in action.positions]
            if any(t not in CARD_TOKENS for t in toks):
                raise ContractMismatch(f"{self.name}: shuffle over {toks} at {action.positions}")
            common = toks[0] if len(set(toks)) == 1 else "#"
            for p in action.positions:
                w.tokens[p] = common
        elif isinstance(action, Extend):
            if self._tok(w, action.src) != "?":
                raise ContractMismatch(f"{self.name}: extend source {action.src} not face-down")
            if self._tok(w, action.dst) != ".":
                raise ContractMismatch(f"{self.name}: extend target {action.dst} not empty")
            for p in action.deck:
                self._tok(w, p)
                w.tokens[p] = "~"
            w.tokens[action.dst] = "?"
        else:
            raise TypeError(f"not an action: {action!r}")

    # -- emission -------------------------------------------------------------

    def emit(self, action) -> None:
        """Append one action; ``action`` may be a callable ``(builder, world) -> action``."""
        self.emit_each(action if callable(action) else (lambda b, w: action))

    def emit_each(self, fn: Callable[["FragmentBuilder", _World], object]) -> None:
        for w in self.worlds:
            act = fn(self, w)
            snapshot = tuple((p, w.tokens[p]) for p in sorted(w.watched))
            self._apply(w, act)
            while len(self.steps) <= w.t:
                self.steps.append([])
            rule = Rule(snapshot, act)
            bucket = self.steps[w.t]
            if any(r.pattern == snapshot and r.action != act for r in bucket):
                raise ContractMismatch(f"{self.name}: step {w.t} has conflicting actions for {snapshot}")
            if rule not in bucket:
                bucket.append(rule)
            w.t += 1

    def move(self, src: int, dst: int, player: Optional[str] = None) -> None:
        self.emit_each(lambda b, w: Move(player or self.player, src, dst))

    def turn(self, pos: int, player: Optional[str] = None) -> None:
        self.emit_each(lambda b, w: Turn(player or self.player, pos))

    def shuffle(self, positions: Sequence[int], group: ShuffleGroup | None = None, player: Optional[str] = None) -> None:
        g = group or ShuffleGroup.cyclic()
        self.emit_each(lambda b, w: Shuffle(player or self.player, tuple(positions), g))

    def extend(self, src: int, dst: int, player: str, honest: bool = True) -> None:
        if self.deck is None or not self.deck.ext:
            raise DeckShortage(f"{self.name}: no designated extension deck")
        self.emit_each(lambda b, w: Extend(player, src, dst, tuple(self.deck.ext), honest))

    def pad(self, pos: int, player: Optional[str] = None) -> None:
        self.emit_each(lambda b, w: pad_action(player or self.player, pos))

    def take(self, suit: Suit, dst: int, lowest: bool = False, player: Optional[str] = None) -> None:
        """Move a face-up card of ``suit`` from the main deck to ``dst``."""

        def pick(b, w):
            slots = [p for p, s in self.deck.slots.items() if s is suit and self._tok(w, p) == suit.value]
            if not slots:
                raise DeckShortage(f"{self.name}: no {suit.value} left in the deck")
            return Move(player or self.player, min(slots) if lowest else max(slots), dst)

        self.emit_each(pick)

    def put_back(self, src: int, player: Optional[str] = None) -> None:
        """Return the face-up card at ``src`` to the lowest empty deck slot of its suit."""

        def pick(b, w):
            tok = self._tok(w, src)
            if tok not in ("H", "C"):
                raise ContractMismatch(f"{self.name}: cannot return {tok!r} at {src} to the deck")
            slots = [p for p, s in self.deck.slots.items() if s.value == tok and self._tok(w, p) == "."]
            if not slots:
                raise DeckShortage(f"{self.name}: no empty {tok} slot to return a card to")
            return Move(player or self.player, src, min(slots))

        self.emit_each(pick)

    # -- branching ------------------------------------------------------------

    def branch(self, watch: Sequence[int], cases: Mapping[str, Callable[["FragmentBuilder"], None]],
               pad: Optional[int] = None, player: Optional[str] = None) -> None:
        """Run ``cases[pattern]`` in every world whose watched tokens admit ``pattern``.

        Branches of unequal length are equalised with single-card shuffles at
        ``pad``, keeping the step count branch-independent.
        """
        watch = tuple(watch)
        produced: list[_World] = []
        for w in self.worlds:
            hit = False
            for pat, body in cases.items():
                if len(pat) != len(watch):
                    raise ValueError(f"pattern {pat!r} does not fit watch {watch}")
                if not all(_overlaps(self._tok(w, p), c) for p, c in zip(watch, pat)):
                    continue
                hit = True
                w2 = w.clone()
                for p, c in zip(watch, pat):
                    if c != "#":
                        w2.tokens[p] = c if c not in WILDCARDS else w2.tokens[p]
                w2.watched = w2.watched | frozenset(watch)
                sub = FragmentBuilder._sub(self, [w2])
                body(sub)
                produced.extend(sub.worlds)
            if not hit:
                raise ContractMismatch(f"{self.name}: no case admits {[w.tokens[p] for p in watch]} at {watch}")
        end = max(w.t for w in produced)
        for w in produced:
            if w.t < end:
                if pad is None:
                    raise ContractMismatch(f"{self.name}: branches differ in length and no pad position given")
                if self._tok(w, pad) not in CARD_TOKENS:
                    raise ContractMismatch(f"{self.name}: pad position {pad} is empty")
                sub = FragmentBuilder._sub(self, [w])
                while w.t < end:
                    sub.pad(pad, player)
        self.worlds = _merge(produced, keep_watch=self.nested)

    # -- result -----------------------------------------------------------------

    def build(self, effect: str = "") -> ProtocolFragment:
        post = {}
        for p in self.touched:
            toks = {w.tokens[p] for w in self.worlds}
            post[p] = toks.pop() if len(toks) == 1 else "#"
        steps = tuple(tuple(rules) for rules in self.steps)
        return ProtocolFragment(self.name, steps, dict(sorted(self.touched.items())), dict(sorted(post.items())), effect)


def _merge(worlds: list, keep_watch: bool = False) -> list:
    # inside a nested branch the enclosing branch's watch must survive: sibling
    # worlds outside this sub-builder are still told apart by it
    groups: dict = {}
    for w in worlds:
        key = frozenset(w.tokens.items())
        if key in groups:
            groups[key].watched |= w.watched
        else:
            groups[key] = w
    out = list(groups.values())
    if len(out) == 1:
        if not keep_watch:
            out[0].watched = frozenset()
    else:
        positions = set().union(*(w.tokens for w in out))
        diff = frozenset(p for p in positions if len({w.tokens.get(p) for w in out}) > 1)
        for w in out:
            w.watched = w.watched | diff
    return out


# -- composition ----------------------------------------------------------------


def compose(fragments: Iterable[ProtocolFragment], name: str | None = None) -> ProtocolFragment:
    """Sequential composition; each fragment's pre-contract must follow from its predecessors."""
    frags = list(fragments)
    state: dict[int, str] = {}
    pre: dict[int, str] = {}
    steps: list = []
    for f in frags:
        for p, need in f.pre.items():
            if p in state:
                if not _admits(need, state[p]):
                    raise ContractMismatch(f"{f.name}: position {p} requires {need!r} but holds {state[p]!r}")
            else:
                pre[p] = need
                state[p] = need
        state.update(f.post)
        steps.extend(f.steps)
    label = name or "+".join(f.name for f in frags)
    effects = "; ".join(f.effect for f in frags if f.effect)
    return ProtocolFragment(label, tuple(steps), dict(sorted(pre.items())), dict(sorted(state.items())), effects)


def known_tokens(layout: TableLayout, encoding: str, hearts: int, clubs: int) -> dict[int, str]:
    """Public tokens of every position before any action."""
    from .model import deck_layout_cards

    toks: dict[int, str] = {}
    inp = "~" if encoding == "half_card" else "?"
    for p in range(1, layout.input_count + 1):
        toks[p] = inp
    for p, card in zip(layout.deck_positions(), deck_layout_cards(hearts, clubs, encoding)):
        toks[p] = card.suit.value if card.face_up else "?"
    for p in layout.free_positions():
        toks[p] = "."
    return toks


def to_protocol(fragment: ProtocolFragment, *, name: str, layout: TableLayout, encoding: str,
                hearts: int, clubs: int, output: OutputSpec) -> Protocol:
    """Materialise visible-keyed step maps by exploring every committed input."""
    shell = Protocol(name, layout, encoding, hearts, clubs, (), output)
    # face-down input cards that no action ever touches only matter through
    # their visible token, so their hidden suit is canonicalised away
    idle = set(range(1, layout.input_count + 1)) - _touched(fragment)
    frontier: set = set()
    for x, y in all_inputs(layout.n):
        for st, _w in initial_states(shell, x, y):
            frontier.add(tuple(Card(Suit.HEART) if q in idle and c is not None else c
                               for q, c in enumerate(st, start=1)))
    for st in frontier:
        vis = visible_of(st)
        for p, tok in fragment.pre.items():
            if not token_matches(tok, vis[p - 1]):
                raise ContractMismatch(f"{fragment.name}: position {p} requires {tok!r}, table shows {vis[p - 1]!r}")
    program = []
    for t, rules in enumerate(fragment.steps):
        table: dict = {}
        nxt: set = set()
        for st in frontier:
            vis = visible_of(st)
            act = table.get(vis)
            if act is None:
                acts = {r.action for r in rules if r.matches(vis)}
                if not acts:
                    raise IncompleteStep(f"{fragment.name}: no rule at step {t} for visible {vis}")
                if len(acts) > 1:
                    raise AmbiguousStep(f"{fragment.name}: {len(acts)} actions at step {t} for visible {vis}")
                act = table[vis] = acts.pop()
            for s2, _p in apply_action(st, act, layout):
                nxt.add(s2)
        program.append(dict(sorted(table.items())))
        frontier = nxt
    return Protocol(name, layout, encoding, hearts, clubs, tuple(program), output)


def _touched(fragment: ProtocolFragment) -> set:
    out: set = set()
    for rules in fragment.steps:
        for rule in rules:
            act = rule.action
            if isinstance(act, (Move, Extend)):
                out.update((act.src, act.dst))
            elif isinstance(act, Turn):
                out.add(act.pos)
            elif isinstance(act, Shuffle):
                out.update(act.positions)
    return out


def free_cells(known: Mapping[int, str], layout_floor: int, count: int, exclude: Iterable[int] = ()) -> list[int]:
    """Lowest ``count`` empty positions above ``layout_floor``; the region grows on demand."""
    ex = set(exclude)
    out = []
    for p in itertools.count(layout_floor + 1):
        if len(out) == count:
            return out
        if p in ex:
            continue
        if known.get(p, ".") == ".":
            out.append(p)
    return out
