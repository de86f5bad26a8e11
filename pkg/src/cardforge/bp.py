"""Branching programs over two players' bits.

Permutations are one-based image lists: ``perm[v - 1]`` is the image of
vertex ``v``.  Function composition ``compose_fn(f, g)`` applies ``g`` first.
Layers are applied in order, so the product of a run is ``then(p1, p2, ...)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .errors import NotRestrictedTerminal, ValidationError

PERMUTATION = "permutation"
LAYERED = "layered"


def identity(w: int) -> tuple:
    return tuple(range(1, w + 1))


def is_permutation(p: Sequence[int], w: int) -> bool:
    return len(p) == w and sorted(p) == list(range(1, w + 1))


def compose_fn(f: Sequence[int], g: Sequence[int]) -> tuple:
    """(f o g)(v) = f(g(v))."""
    return tuple(f[g[v] - 1] for v in range(len(g)))


def then(*perms: Sequence[int]) -> tuple:
    """Left-to-right product: apply the first permutation first."""
    out = tuple(perms[0])
    for q in perms[1:]:
        out = compose_fn(q, out)
    return out


def inverse(p: Sequence[int]) -> tuple:
    inv = [0] * len(p)
    for v, img in enumerate(p, start=1):
        inv[img - 1] = v
    return tuple(inv)


def cycle(w: int, *elems: int) -> tuple:
    """The cycle (e1 e2 ... ek) on [w]."""
    p = list(range(1, w + 1))
    for a, b in zip(elems, elems[1:] + elems[:1]):
        p[a - 1] = b
    return tuple(p)


def transposition_perm(w: int, i: int, j: int) -> tuple:
    return cycle(w, i, j)


def decompose_transpositions(perm: Sequence[int]) -> list[tuple[int, int]]:
    """Transpositions t1..tr with t1 o t2 o ... o tr = perm (tr acts first).

    Cycles are taken in increasing order of their smallest element; the
    cycle (c1 c2 ... ck) contributes (c1,c2), (c2,c3), ..., (c(k-1),ck).
    """
    w = len(perm)
    seen = [False] * (w + 1)
    out = []
    for start in range(1, w + 1):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        v = perm[start - 1]
        while v != start:
            cyc.append(v)
            seen[v] = True
            v = perm[v - 1]
        out += [tuple(sorted(pair)) for pair in zip(cyc, cyc[1:])]
    return out


def recompose_transpositions(ts: Iterable[tuple[int, int]], w: int) -> tuple:
    out = identity(w)
    for i, j in ts:
        out = compose_fn(out, transposition_perm(w, i, j))
    return out


@dataclass(frozen=True)
class Layer:
    owner: str  # "a" or "b"
    index: int
    perm0: tuple
    perm1: tuple

    @property
    def label(self) -> str:
        return f"{self.owner}{self.index}"


@dataclass(frozen=True)
class BranchingProgram:
    """``len(layers) + 1`` vertex layers; ``accept``/``reject`` are vertex sets of the last one."""

    width: int
    layers: tuple
    start: int
    accept: tuple
    reject: tuple
    kind: str = PERMUTATION

    @property
    def length(self) -> int:
        return len(self.layers) + 1

    @property
    def restricted(self) -> bool:
        return len(self.accept) == 1 and len(self.reject) == 1

    @property
    def n(self) -> int:
        return max((ly.index for ly in self.layers), default=0)

    def validate(self) -> None:
        w = self.width
        if w < 1:
            raise ValidationError(f"width {w} must be positive")
        for k, ly in enumerate(self.layers, start=1):
            if ly.owner not in ("a", "b") or ly.index < 1:
                raise ValidationError(f"layer {k}: bad label {ly.label}")
            for name, p in (("perm0", ly.perm0), ("perm1", ly.perm1)):
                if self.kind == PERMUTATION and not is_permutation(p, w):
                    raise ValidationError(f"layer {k}: {name} is not a bijection of [{w}]")
                if self.kind == LAYERED and (len(p) != w or not all(1 <= v <= w for v in p)):
                    raise ValidationError(f"layer {k}: {name} is not a map on [{w}]")
        for v in (self.start, *self.accept, *self.reject):
            if not 1 <= v <= w:
                raise ValidationError(f"vertex {v} outside [{w}]")
        if set(self.accept) & set(self.reject):
            raise ValidationError("accept and reject vertices overlap")
        if self.kind == PERMUTATION and not self.restricted:
            raise ValidationError("permutation programs need one accept and one reject vertex")
        if self.kind not in (PERMUTATION, LAYERED):
            raise ValidationError(f"unknown program kind {self.kind!r}")


def bit_of(label_owner: str, index: int, x: Sequence[int], y: Sequence[int]) -> int:
    bits = x if label_owner == "a" else y
    return bits[index - 1]


def run_bp(bp: BranchingProgram, x: Sequence[int], y: Sequence[int]) -> int:
    """Final vertex of the computation path."""
    v = bp.start
    for ly in bp.layers:
        p = ly.perm1 if bit_of(ly.owner, ly.index, x, y) else ly.perm0
        v = p[v - 1]
    return v


def eval_bp(bp: BranchingProgram, x: Sequence[int], y: Sequence[int], restricted: bool = True) -> int:
    v = run_bp(bp, x, y)
    if v in bp.accept:
        return 1
    if restricted and v not in bp.reject:
        raise NotRestrictedTerminal(f"computation ended in vertex {v}, neither accept nor reject")
    return 0


def normalize_zero_identity(bp: BranchingProgram) -> BranchingProgram:
    """Relabel vertices layer by layer so that every zero-edge permutation is the identity.

    With relabelings phi_1 = id and phi_(j+1) = phi_j o perm0_j^-1, the new
    one-edges are phi_(j+1) o perm1_j o phi_j^-1.
    """
    w = bp.width
    phi = identity(w)
    layers = []
    for ly in bp.layers:
        nxt = compose_fn(phi, inverse(ly.perm0))
        new1 = compose_fn(nxt, compose_fn(ly.perm1, inverse(phi)))
        layers.append(Layer(ly.owner, ly.index, identity(w), new1))
        phi = nxt
    return replace(bp, layers=tuple(layers),
                   accept=tuple(phi[v - 1] for v in bp.accept),
                   reject=tuple(phi[v - 1] for v in bp.reject))


def is_normalized(bp: BranchingProgram) -> bool:
    return all(ly.perm0 == identity(bp.width) for ly in bp.layers)


def bp_truth_table(bp: BranchingProgram, n: int | None = None) -> dict:
    n = bp.n if n is None else n
    bits = list(itertools.product((0, 1), repeat=n))
    return {(x, y): eval_bp(bp, x, y, restricted=bp.kind == PERMUTATION) for x in bits for y in bits}
