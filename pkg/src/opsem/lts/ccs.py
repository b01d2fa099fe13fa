"""Finite-control CCS: syntax, labelled transitions and LTS construction."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from ..syntax import Lexer, ParseError
from .core import TAU, Lts, StateLimitExceeded


def co(a: str) -> str:
    """The complementary action; tau is its own co-action."""
    if a == TAU:
        return a
    return a[1:] if a.startswith("'") else "'" + a


def chan(a: str) -> str:
    return a.lstrip("'")


def _fields():
    return field(default=frozenset(), compare=False, repr=False)


@dataclass(frozen=True)
class Nil:
    fn: FrozenSet[str] = _fields()


@dataclass(frozen=True)
class Prefix:
    action: str  # a, 'a or tau
    proc: object
    fn: FrozenSet[str] = _fields()

    def __post_init__(self):
        own = frozenset() if self.action == TAU else frozenset({chan(self.action)})
        object.__setattr__(self, "fn", own | self.proc.fn)


@dataclass(frozen=True)
class Sum:
    items: Tuple
    fn: FrozenSet[str] = _fields()

    def __post_init__(self):
        object.__setattr__(self, "fn", frozenset().union(*(p.fn for p in self.items)))


@dataclass(frozen=True)
class Par:
    items: Tuple
    fn: FrozenSet[str] = _fields()

    def __post_init__(self):
        object.__setattr__(self, "fn", frozenset().union(*(p.fn for p in self.items)))


@dataclass(frozen=True)
class New:
    name: str
    proc: object
    fn: FrozenSet[str] = _fields()

    def __post_init__(self):
        object.__setattr__(self, "fn", self.proc.fn - {self.name})


@dataclass(frozen=True)
class Call:
    ident: str
    args: Tuple[str, ...]
    fn: FrozenSet[str] = _fields()

    def __post_init__(self):
        object.__setattr__(self, "fn", frozenset(self.args))


NIL = Nil()


@dataclass
class Defs:
    """Definition table A(a1..an) = P."""
    table: Dict[str, Tuple[Tuple[str, ...], object]] = field(default_factory=dict)

    def add(self, ident: str, params: Sequence[str], body) -> None:
        if ident in self.table:
            raise ValueError("%s defined twice" % ident)
        if len(set(params)) != len(params):
            raise ValueError("repeated parameter in %s" % ident)
        extra = body.fn - set(params)
        if extra:
            raise ValueError("free names %s of %s are not parameters" % (sorted(extra), ident))
        self.table[ident] = (tuple(params), body)

    def unfold(self, call: Call):
        if call.ident not in self.table:
            raise KeyError("undefined process %s" % call.ident)
        params, body = self.table[call.ident]
        if len(params) != len(call.args):
            raise ValueError("%s expects %d names" % (call.ident, len(params)))
        return rename(body, dict(zip(params, call.args)))


# ------------------------------------------------------------- substitution

def rename(p, m: Dict[str, str]):
    """Capture-avoiding renaming of free names."""
    m = {k: v for k, v in m.items() if k != v and k in p.fn}
    if not m:
        return p
    if isinstance(p, Prefix):
        a = p.action
        if a != TAU and chan(a) in m:
            a = m[chan(a)] if not a.startswith("'") else "'" + m[chan(a)]
        return Prefix(a, rename(p.proc, m))
    if isinstance(p, Sum):
        return Sum(tuple(rename(q, m) for q in p.items))
    if isinstance(p, Par):
        return Par(tuple(rename(q, m) for q in p.items))
    if isinstance(p, Call):
        return Call(p.ident, tuple(m.get(a, a) for a in p.args))
    if isinstance(p, New):
        inner = {k: v for k, v in m.items() if k != p.name}
        if p.name in inner.values():
            avoid = set(inner.values()) | p.proc.fn
            fresh = _fresh(p.name, avoid)
            body = rename(p.proc, {p.name: fresh})
            return New(fresh, rename(body, inner))
        return New(p.name, rename(p.proc, inner))
    return p


def _fresh(base: str, avoid) -> str:
    i = 0
    while "%s%d" % (base, i) in avoid:
        i += 1
    return "%s%d" % (base, i)


# -------------------------------------------------------------- transitions

def transitions(p, defs: Optional[Defs] = None, _depth: int = 0) -> List[Tuple[str, object]]:
    """All (action, successor) pairs derivable for p."""
    if _depth > 500:
        raise RecursionError("unguarded recursion in process definitions")
    if isinstance(p, Nil):
        return []
    if isinstance(p, Prefix):
        return [(p.action, p.proc)]
    if isinstance(p, Sum):
        return [m for q in p.items for m in transitions(q, defs, _depth + 1)]
    if isinstance(p, Par):
        items = p.items
        per = [transitions(q, defs, _depth + 1) for q in items]
        out = []
        for i, moves in enumerate(per):
            for a, q2 in moves:
                out.append((a, Par(items[:i] + (q2,) + items[i + 1:])))
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                for a, qi in per[i]:
                    if a == TAU:
                        continue
                    for b, qj in per[j]:
                        if b == co(a):
                            new = list(items)
                            new[i], new[j] = qi, qj
                            out.append((TAU, Par(tuple(new))))
        return out
    if isinstance(p, New):
        return [(a, New(p.name, q)) for a, q in transitions(p.proc, defs, _depth + 1)
                if a == TAU or chan(a) != p.name]
    if isinstance(p, Call):
        if defs is None:
            raise KeyError("undefined process %s" % p.ident)
        return transitions(defs.unfold(p), defs, _depth + 1)
    raise TypeError(p)


# --------------------------------------------------------- canonical forms

def canonical(p, depth: int = 0):
    """Normal form modulo associativity and commutativity of + and |, and
    renaming of restricted names. Restricted names become %n0, %n1, ...
    by nesting depth."""
    if isinstance(p, Prefix):
        return Prefix(p.action, canonical(p.proc, depth))
    if isinstance(p, (Sum, Par)):
        kind = type(p)
        flat = []
        for q in p.items:
            c = canonical(q, depth)
            flat.extend(c.items if isinstance(c, kind) else (c,))
        flat.sort(key=show)
        if len(flat) == 1:
            return flat[0]
        return kind(tuple(flat))
    if isinstance(p, New):
        name = "%%n%d" % depth
        body = p.proc if p.name == name else rename(p.proc, {p.name: name})
        return New(name, canonical(body, depth + 1))
    return p


def ccs_to_lts(p, defs: Optional[Defs] = None, limit: int = 10_000, canon: bool = True) -> Lts:
    """Breadth-first construction of the reachable LTS of p."""
    norm = canonical if canon else (lambda q: q)
    start = norm(p)
    index = {start: 0}
    order = [start]
    trans = []
    queue = deque([start])
    while queue:
        q = queue.popleft()
        i = index[q]
        for a, q2 in transitions(q, defs):
            q2 = norm(q2)
            j = index.get(q2)
            if j is None:
                if len(order) >= limit:
                    raise StateLimitExceeded(limit)
                j = index[q2] = len(order)
                order.append(q2)
                queue.append(q2)
            trans.append((i, a, j))
    l = Lts.build(range(len(order)), trans, root=0)
    l.labels = [show(q) for q in order]
    return l


# ------------------------------------------------------------------ printing

def show(p, prec: int = 0) -> str:
    """ASCII rendering; + binds loosest, then |, then prefix."""
    if isinstance(p, Nil):
        return "0"
    if isinstance(p, Prefix):
        s = "%s.%s" % (p.action, show(p.proc, 2))
        return s
    if isinstance(p, Sum):
        s = " + ".join(show(q, 1) for q in p.items)
        return "(%s)" % s if prec > 0 else s
    if isinstance(p, Par):
        s = " | ".join(show(q, 2) for q in p.items)
        return "(%s)" % s if prec > 1 else s
    if isinstance(p, New):
        return "new %s (%s)" % (p.name, show(p.proc))
    if isinstance(p, Call):
        return "%s(%s)" % (p.ident, ",".join(p.args)) if p.args else p.ident
    raise TypeError(p)


def show_defs(defs: Defs) -> str:
    lines = []
    for ident, (params, body) in defs.table.items():
        head = "%s(%s)" % (ident, ",".join(params)) if params else ident
        lines.append("%s = %s" % (head, show(body)))
    return "\n".join(lines)


# ------------------------------------------------------------------ parsing

_SYMS = ["(", ")", ",", ".", "+", "|", "=", ";", "'"]
_RESERVED = ("new", "tau", "nu")


def _normalize_unicode(src: str) -> str:
    return src.replace("ν", " new ").replace("τ", "tau").replace("̄", "")


class _CcsParser:
    def __init__(self, src: str):
        self.lx = Lexer(_normalize_unicode(src), _SYMS, comment="#")

    def program(self):
        defs = Defs()
        main = None
        while not self.lx.at_eof():
            if self.lx.accept(";"):
                continue
            if self._at_def():
                tok = self.lx.peek()
                ident = self.lx.ident(_RESERVED)
                params = self._names() if self.lx.peek_is("(") else []
                self.lx.expect("=")
                body = self.proc()
                try:
                    defs.add(ident, params, body)
                except ValueError as e:
                    raise ParseError(str(e), tok.line, tok.col, ident)
            else:
                if main is not None:
                    raise self.lx.error("more than one main process")
                main = self.proc()
        return defs, main

    def _at_def(self) -> bool:
        lx = self.lx
        if lx.peek().kind != "ident" or lx.peek().text in _RESERVED:
            return False
        if lx.peek_is("=", 1):
            return True
        if not lx.peek_is("(", 1):
            return False
        k = 2
        while lx.peek(k).kind != "eof" and not lx.peek_is(")", k):
            k += 1
        return lx.peek_is("=", k + 1)

    def _names(self) -> List[str]:
        self.lx.expect("(")
        out = []
        if not self.lx.peek_is(")"):
            out.append(self.lx.ident(_RESERVED))
            while self.lx.accept(","):
                out.append(self.lx.ident(_RESERVED))
        self.lx.expect(")")
        return out

    def proc(self):
        items = [self.par()]
        while self.lx.accept("+"):
            items.append(self.par())
        return items[0] if len(items) == 1 else Sum(tuple(items))

    def par(self):
        items = [self.prefix()]
        while self.lx.accept("|"):
            items.append(self.prefix())
        return items[0] if len(items) == 1 else Par(tuple(items))

    def prefix(self):
        lx = self.lx
        t = lx.peek()
        if t.kind == "int" and t.text == "0":
            lx.next()
            return NIL
        if lx.accept("("):
            p = self.proc()
            lx.expect(")")
            return p
        if lx.peek_is("new") or lx.peek_is("nu"):
            lx.next()
            names = [lx.ident(_RESERVED)]
            while lx.accept(","):
                names.append(lx.ident(_RESERVED))
            body = self.prefix()
            for a in reversed(names):
                body = New(a, body)
            return body
        if lx.accept("'"):
            a = "'" + lx.ident(_RESERVED)
            lx.expect(".")
            return Prefix(a, self.prefix())
        if lx.peek_is("tau"):
            lx.next()
            lx.expect(".")
            return Prefix(TAU, self.prefix())
        if t.kind == "ident":
            if lx.peek_is(".", 1):
                a = lx.ident(_RESERVED)
                lx.next()
                return Prefix(a, self.prefix())
            ident = lx.ident(_RESERVED)
            args = self._names() if lx.peek_is("(") else []
            return Call(ident, tuple(args))
        raise lx.error("expected a process")


def parse_program(src: str) -> Tuple[Defs, object]:
    """Definitions `A(a,b) = P` followed by an optional main process."""
    return _CcsParser(src).program()


def parse_proc(src: str):
    p = _CcsParser(src)
    r = p.proc()
    p.lx.expect_eof()
    return r


def check_defined(p, defs: Defs) -> None:
    """Raise KeyError when p or a definition body calls an undefined identifier."""
    todo = [p] + [b for _, b in defs.table.values()]
    while todo:
        q = todo.pop()
        if isinstance(q, Call):
            if q.ident not in defs.table:
                raise KeyError("undefined process %s" % q.ident)
        elif isinstance(q, (Prefix, New)):
            todo.append(q.proc)
        elif isinstance(q, (Sum, Par)):
            todo.extend(q.items)
