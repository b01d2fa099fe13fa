"""Finite labelled transition systems."""
from __future__ import annotations

import json
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

TAU = "tau"


class StateLimitExceeded(RuntimeError):
    def __init__(self, limit: int):
        super().__init__("more than %d states" % limit)
        self.limit = limit


class Lts:
    """States 0..n-1 with display labels, interned actions and a transition table.

    Transitions are stored as three parallel int64 arrays sorted by
    (source, action, target) without duplicates.
    """

    def __init__(self, labels: Sequence, actions: Sequence[str], src, act, dst, root: int = 0):
        self.labels = list(labels)
        self.actions = list(actions)
        self.src = np.asarray(src, dtype=np.int64)
        self.act = np.asarray(act, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.root = int(root)
        n = len(self.labels)
        if len(self.src) and (self.src.max() >= n or self.dst.max() >= n or self.act.max() >= len(self.actions)):
            raise ValueError("transition refers to an unknown state or action")
        if n and not 0 <= self.root < n:
            raise ValueError("root out of range")
        self._succ: Optional[List[List[Tuple[int, int]]]] = None

    @classmethod
    def build(cls, states: Iterable[Hashable], trans: Iterable[Tuple[Hashable, str, Hashable]],
              root: Hashable = None, actions: Iterable[str] = ()) -> "Lts":
        """Build from state labels and (source, action, target) triples over those labels."""
        labels = list(dict.fromkeys(states))
        index = {s: i for i, s in enumerate(labels)}
        trans = list(trans)
        for s, _, t in trans:
            for x in (s, t):
                if x not in index:
                    index[x] = len(labels)
                    labels.append(x)
        acts = list(dict.fromkeys(list(actions) + sorted({a for _, a, _ in trans}, key=_action_key)))
        aidx = {a: i for i, a in enumerate(acts)}
        rows = sorted({(index[s], aidx[a], index[t]) for s, a, t in trans})
        arr = np.array(rows, dtype=np.int64).reshape(-1, 3)
        r = index[root] if root is not None else 0
        return cls(labels, acts, arr[:, 0], arr[:, 1], arr[:, 2], r)

    # ---------------------------------------------------------------- queries

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return self.n

    def transitions(self) -> List[Tuple[int, str, int]]:
        return [(int(s), self.actions[a], int(t)) for s, a, t in zip(self.src, self.act, self.dst)]

    def succ(self, s: int) -> List[Tuple[str, int]]:
        """Outgoing (action, target) pairs of s."""
        if self._succ is None:
            out: List[List[Tuple[int, int]]] = [[] for _ in range(self.n)]
            for a, b, c in zip(self.src.tolist(), self.act.tolist(), self.dst.tolist()):
                out[a].append((b, c))
            self._succ = out
        return [(self.actions[a], t) for a, t in self._succ[s]]

    def post(self, s: int, action: str) -> List[int]:
        return [t for a, t in self.succ(s) if a == action]

    def action_mask(self, action: str) -> np.ndarray:
        if action not in self.actions:
            return np.zeros(len(self.src), dtype=bool)
        return self.act == self.actions.index(action)

    def index_of(self, label) -> int:
        for i, l in enumerate(self.labels):
            if l == label or str(l) == str(label):
                return i
        raise KeyError(label)

    def reachable(self, start: Optional[int] = None) -> List[int]:
        start = self.root if start is None else start
        seen, order = {start}, [start]
        for s in order:
            for _, t in self.succ(s):
                if t not in seen:
                    seen.add(t)
                    order.append(t)
        return order

    def union(self, other: "Lts") -> Tuple["Lts", int]:
        """Disjoint union; returns the union and the offset of other's states."""
        acts = list(dict.fromkeys(self.actions + other.actions))
        amap = np.array([acts.index(a) for a in other.actions] or [0], dtype=np.int64)
        off = self.n
        labels = [("L", l) for l in self.labels] + [("R", l) for l in other.labels]
        src = np.concatenate([self.src, other.src + off])
        act = np.concatenate([self.act, amap[other.act] if len(other.act) else other.act])
        dst = np.concatenate([self.dst, other.dst + off])
        order = np.lexsort((dst, act, src))
        return Lts(labels, acts, src[order], act[order], dst[order], self.root), off

    # ---------------------------------------------------------------- export

    def to_dict(self) -> Dict:
        return {
            "states": [str(l) for l in self.labels],
            "actions": list(self.actions),
            "transitions": [[s, a, t] for s, a, t in self.transitions()],
            "root": self.root,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: Dict) -> "Lts":
        labels = d["states"]
        trans = [(labels[s], a, labels[t]) for s, a, t in d["transitions"]]
        return cls.build(labels, trans, root=labels[d.get("root", 0)] if labels else None,
                         actions=d.get("actions", ()))

    @classmethod
    def from_json(cls, text: str) -> "Lts":
        return cls.from_dict(json.loads(text))

    def to_dot(self) -> str:
        lines = ["digraph lts {", "  node [shape=circle];"]
        for i, l in enumerate(self.labels):
            extra = ", peripheries=2" if i == self.root else ""
            lines.append("  s%d [label=%s%s];" % (i, json.dumps(str(l)), extra))
        for s, a, t in self.transitions():
            lines.append("  s%d -> s%d [label=%s];" % (s, t, json.dumps(a)))
        lines.append("}")
        return "\n".join(lines)

    def __repr__(self) -> str:
        return "Lts(%d states, %d transitions)" % (self.n, len(self.src))


def _action_key(a: str):
    # tau first, then names, co-names next to their names
    return (a != TAU, a.lstrip("'"), a.startswith("'"))


class Partition:
    """A partition of the states 0..n-1, as a block id per state.

    Block ids are numbered in order of first occurrence.
    """

    def __init__(self, blocks):
        b = np.asarray(blocks, dtype=np.int64)
        _, first, inv = np.unique(b, return_index=True, return_inverse=True)
        rank = np.argsort(np.argsort(first))
        self.blocks = rank[inv].astype(np.int64)

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def count(self) -> int:
        return int(self.blocks.max()) + 1 if len(self.blocks) else 0

    def same(self, s: int, t: int) -> bool:
        return bool(self.blocks[s] == self.blocks[t])

    def classes(self) -> List[List[int]]:
        out: List[List[int]] = [[] for _ in range(self.count)]
        for s, b in enumerate(self.blocks.tolist()):
            out[b].append(s)
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and np.array_equal(self.blocks, other.blocks)

    def __repr__(self) -> str:
        return "Partition(%s)" % self.classes()
