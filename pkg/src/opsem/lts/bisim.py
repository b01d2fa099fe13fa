"""Strong and weak bisimulation by partition refinement, and bounded traces."""
from __future__ import annotations

from typing import FrozenSet, Optional, Set, Tuple

import numpy as np

from . import _kernels as K
from .core import TAU, Lts, Partition


def refine(l: Lts, blocks: np.ndarray) -> np.ndarray:
    """One refinement round: split blocks by the set of (action, target block) pairs."""
    width = max(int(blocks.max()) + 1 if len(blocks) else 1, 1)
    codes = l.act * width + blocks[l.dst]
    offsets, vals = K.signatures(l.n, l.src, codes.astype(np.int64))
    sigs = {}
    out = np.empty(l.n, dtype=np.int64)
    for s in range(l.n):
        key = (int(blocks[s]), vals[offsets[s]:offsets[s + 1]].tobytes())
        out[s] = sigs.setdefault(key, len(sigs))
    return out


def strong_bisim(l: Lts, initial: Optional[np.ndarray] = None) -> Partition:
    """Coarsest stable partition: states in one block are strongly bisimilar."""
    blocks = np.zeros(l.n, dtype=np.int64) if initial is None else np.asarray(initial, dtype=np.int64)
    count = len(set(blocks.tolist()))
    while True:
        blocks = refine(l, blocks)
        c = int(blocks.max()) + 1 if l.n else 0
        if c == count:
            return Partition(blocks)
        count = c


def bisimilar(l: Lts, s: int, t: int) -> bool:
    return strong_bisim(l).same(s, t)


def is_bisimulation(l: Lts, p: Partition) -> bool:
    """Check the transfer property pairwise for every same-block pair."""
    b = p.blocks
    moves = [{(a, int(b[t])) for a, t in l.succ(s)} for s in range(l.n)]
    for cls in p.classes():
        for s in cls:
            for t in cls:
                if moves[s] != moves[t]:
                    return False
    return True


# -------------------------------------------------------------------- weak

def tau_closure(l: Lts) -> np.ndarray:
    """Boolean matrix of =tau=> (reflexive-transitive closure of tau steps)."""
    m = l.action_mask(TAU)
    return K.closure(l.n, l.src[m], l.dst[m])


def weak_saturate(l: Lts) -> Lts:
    """The weak LTS: =tau=> is (-tau->)* and =a=> is (-tau->)* -a-> (-tau->)*."""
    c = tau_closure(l)
    labels = list(l.actions)
    if TAU not in labels:
        labels = [TAU] + labels
    rows = []
    for ai, a in enumerate(labels):
        if a == TAU:
            rel = c
        else:
            m = l.action_mask(a)
            am = np.zeros((l.n, l.n), dtype=np.bool_)
            am[l.src[m], l.dst[m]] = True
            rel = K.compose3(c, am)
        s, t = np.nonzero(rel)
        rows.append(np.stack([s, np.full(len(s), ai), t], axis=1))
    arr = np.concatenate(rows) if rows else np.zeros((0, 3), dtype=np.int64)
    order = np.lexsort((arr[:, 2], arr[:, 1], arr[:, 0]))
    arr = arr[order].astype(np.int64)
    return Lts(l.labels, labels, arr[:, 0], arr[:, 1], arr[:, 2], l.root)


def weak_bisim(l: Lts) -> Partition:
    """Weak bisimilarity, computed as strong bisimilarity of the weak LTS."""
    return strong_bisim(weak_saturate(l))


def is_weak_bisimulation(l: Lts, p: Partition) -> bool:
    """One-step check: every strong move is answered by a weak move into the same block."""
    w = weak_saturate(l)
    b = p.blocks
    weak = [{(a, int(b[t])) for a, t in w.succ(s)} for s in range(l.n)]
    strong = [{(a, int(b[t])) for a, t in l.succ(s)} for s in range(l.n)]
    for cls in p.classes():
        for s in cls:
            for t in cls:
                if not strong[s] <= weak[t]:
                    return False
    return True


# ------------------------------------------------------------------ traces

def traces_upto(l: Lts, s: int, maxlen: int, weak: bool = True) -> Set[Tuple[str, ...]]:
    """Traces of length <= maxlen from s.

    Strong traces spell every label, tau included. Weak traces follow
    =a=> moves, so tau never appears in them.
    """
    if weak:
        w = weak_saturate(l)
        step = {x: [(a, t) for a, t in w.succ(x) if a != TAU] for x in range(l.n)}
    else:
        step = {x: l.succ(x) for x in range(l.n)}
    out: Set[Tuple[str, ...]] = {()}
    frontier: Set[Tuple[Tuple[str, ...], int]] = {((), s)}
    for _ in range(maxlen):
        nxt = set()
        for word, x in frontier:
            for a, t in step[x]:
                nxt.add((word + (a,), t))
        out.update(w for w, _ in nxt)
        frontier = nxt
    return out


def show_trace(word) -> str:
    return ".".join(word) if word else "eps"


def trace_equal(l: Lts, s: int, t: int, maxlen: int, weak: bool = True) -> bool:
    return traces_upto(l, s, maxlen, weak) == traces_upto(l, t, maxlen, weak)


def as_sets(p: Partition) -> FrozenSet[FrozenSet[int]]:
    return frozenset(frozenset(c) for c in p.classes())
