"""First-order terms, substitutions and syntactic unification."""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

# Debug mode asserts the termination measure of the unification loop.
DEBUG_UNIFY = os.environ.get("OPSEM_DEBUG_UNIFY", "") not in ("", "0")


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    fn: str
    args: Tuple["Term", ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.fn
        return "%s(%s)" % (self.fn, ", ".join(str(a) for a in self.args))


Term = "Var | App"


def app(fn: str, *args) -> App:
    return App(fn, tuple(args))


class Signature(dict):
    """Map from symbol name to arity."""

    def check(self, t) -> bool:
        if isinstance(t, Var):
            return True
        if self.get(t.fn) != len(t.args):
            return False
        return all(self.check(a) for a in t.args)

    @classmethod
    def of_terms(cls, terms: Iterable) -> "Signature":
        sig = cls()
        for t in terms:
            for s in subterms(t):
                if isinstance(s, App):
                    old = sig.setdefault(s.fn, len(s.args))
                    if old != len(s.args):
                        raise ValueError("symbol %s used with arities %d and %d" % (s.fn, old, len(s.args)))
        return sig


def subterms(t) -> Iterator:
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        if isinstance(s, App):
            stack.extend(reversed(s.args))


def variables(t) -> List[str]:
    """Variables of t in first-occurrence (left to right) order."""
    seen: Dict[str, None] = {}
    for s in subterms(t):
        if isinstance(s, Var):
            seen.setdefault(s.name, None)
    return list(seen)


def occurs(x: str, t) -> bool:
    if isinstance(t, Var):
        return t.name == x
    return any(occurs(x, a) for a in t.args)


def size(t) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(size(a) for a in t.args)


def n_symbols(t) -> int:
    if isinstance(t, Var):
        return 0
    return 1 + sum(n_symbols(a) for a in t.args)


# positions are tuples of 0-based argument indices
def positions(t, prefix=()) -> Iterator[Tuple[int, ...]]:
    yield prefix
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            yield from positions(a, prefix + (i,))


def at(t, pos):
    for i in pos:
        t = t.args[i]
    return t


def replace_at(t, pos, u):
    if not pos:
        return u
    i = pos[0]
    args = list(t.args)
    args[i] = replace_at(args[i], pos[1:], u)
    return App(t.fn, tuple(args))


class Subst:
    """A finite substitution; identity outside its domain."""

    __slots__ = ("_map",)

    def __init__(self, mapping: Optional[Mapping[str, object]] = None):
        m = {}
        for k, v in (mapping or {}).items():
            if isinstance(v, Var) and v.name == k:
                continue
            m[k] = v
        self._map = m

    def __call__(self, t):
        return apply_subst(self, t)

    def __getitem__(self, x: str):
        return self._map.get(x, Var(x))

    def __contains__(self, x: str) -> bool:
        return x in self._map

    def __iter__(self):
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def items(self):
        return self._map.items()

    def domain(self):
        return set(self._map)

    def as_dict(self) -> Dict[str, object]:
        return dict(self._map)

    def __eq__(self, other) -> bool:
        return isinstance(other, Subst) and self._map == other._map

    def __hash__(self):
        return hash(frozenset(self._map.items()))

    def is_idempotent(self) -> bool:
        dom = set(self._map)
        return not any(set(variables(v)) & dom for v in self._map.values())

    def __repr__(self) -> str:
        inner = ", ".join("%s/%s" % (v, k) for k, v in sorted(self._map.items()))
        return "[%s]" % inner


IDENTITY = Subst()


def apply_subst(s: Subst | Mapping, t):
    m = s._map if isinstance(s, Subst) else s
    if not m:
        return t
    return _apply(m, t)


def _apply(m, t):
    if isinstance(t, Var):
        return m.get(t.name, t)
    if not t.args:
        return t
    return App(t.fn, tuple(_apply(m, a) for a in t.args))


def compose_subst(t: Subst, s: Subst) -> Subst:
    """Return t o s, i.e. the substitution x -> t(s(x))."""
    out = {x: apply_subst(t, v) for x, v in s.items()}
    for x, v in t.items():
        if x not in out:
            out[x] = v
    return Subst(out)


def _measure(eqs, solved_vars) -> Tuple[int, int]:
    vs = set()
    syms = 0
    for a, b in eqs:
        vs.update(variables(a))
        vs.update(variables(b))
        syms += n_symbols(a) + n_symbols(b)
    return (len(vs), syms)


def unify(eqs: Iterable[Tuple[object, object]], debug: Optional[bool] = None) -> Optional[Subst]:
    """Most general unifier of a system of equations, or None.

    Equations are processed from a FIFO worklist; the accumulated
    substitution is kept fully applied so that it stays idempotent.
    """
    debug = DEBUG_UNIFY if debug is None else debug
    work = deque(eqs)
    sol: Dict[str, object] = {}
    last = _measure(work, sol) if debug else None
    while work:
        a, b = work.popleft()
        if isinstance(a, Var) and isinstance(b, Var) and a.name == b.name:
            pass  # (v)
        elif isinstance(a, Var) or isinstance(b, Var):
            if not isinstance(a, Var):
                a, b = b, a
            x = a.name
            if occurs(x, b):
                return None  # (vt2)
            one = {x: b}
            work = deque((_apply(one, l), _apply(one, r)) for l, r in work)
            sol = {k: _apply(one, v) for k, v in sol.items()}
            sol[x] = b
        else:
            if a.fn != b.fn or len(a.args) != len(b.args):
                return None  # (f2)
            work.extend(zip(a.args, b.args))  # (f1)
        if debug:
            m = _measure(work, sol)
            assert m < last or (a == b and m <= last), (m, last)
            last = m
    return Subst(sol)


def unify_terms(s, t) -> Optional[Subst]:
    return unify([(s, t)])


def match(pattern, t, s: Optional[Dict[str, object]] = None) -> Optional[Dict[str, object]]:
    """One-sided matching: a dict m with m(pattern) == t, or None."""
    m = {} if s is None else dict(s)
    stack = [(pattern, t)]
    while stack:
        p, u = stack.pop()
        if isinstance(p, Var):
            bound = m.get(p.name)
            if bound is None:
                m[p.name] = u
            elif bound != u:
                return None
        elif isinstance(u, Var) or p.fn != u.fn or len(p.args) != len(u.args):
            return None
        else:
            stack.extend(zip(p.args, u.args))
    return m


def rename(t, mapping: Mapping[str, str]):
    return _apply({k: Var(v) for k, v in mapping.items()}, t)


def canonical(*ts) -> tuple:
    """Rename variables to v0, v1, ... in first-occurrence order across ts."""
    names: Dict[str, str] = {}
    for t in ts:
        for x in variables(t):
            if x not in names:
                names[x] = "v%d" % len(names)
    return tuple(rename(t, names) for t in ts)


def variant(a: Sequence, b: Sequence) -> bool:
    """True when the two term tuples are equal up to variable renaming."""
    return canonical(*a) == canonical(*b)


# ---------------------------------------------------------------- parsing

from .syntax import ParseError  # noqa: E402


def parse_term(src: str, is_var=None):
    """Parse `f(x, g(a))`.

    By default the identifiers x, y, z, u, v, w (optionally
    followed by digits or primes) or an underscore are variables, unless
    `is_var` says otherwise.
    """
    is_var = is_var or default_is_var
    toks = _tokenize(src)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else ("", len(src))

    def term():
        nonlocal pos
        tok, off = peek()
        if not tok or tok in "(),":
            raise ParseError("unexpected token", 1, off + 1, tok or "<eof>")
        pos += 1
        if peek()[0] == "(":
            pos += 1
            args = []
            if peek()[0] != ")":
                args.append(term())
                while peek()[0] == ",":
                    pos += 1
                    args.append(term())
            if peek()[0] != ")":
                t, o = peek()
                raise ParseError("expected ')'", 1, o + 1, t or "<eof>")
            pos += 1
            return App(tok, tuple(args))
        if is_var(tok):
            return Var(tok)
        return App(tok, ())

    t = term()
    if pos != len(toks):
        tok, off = toks[pos]
        raise ParseError("trailing input", 1, off + 1, tok)
    return t


def default_is_var(name: str) -> bool:
    if name.startswith("_"):
        return True
    base = name.rstrip("'0123456789")
    return base in ("x", "y", "z", "u", "v", "w")


def _tokenize(src: str):
    toks = []
    i = 0
    while i < len(src):
        c = src[i]
        if c.isspace():
            i += 1
        elif c in "(),":
            toks.append((c, i))
            i += 1
        else:
            j = i
            while j < len(src) and not src[j].isspace() and src[j] not in "(),":
                j += 1
            toks.append((src[i:j], i))
            i = j
    return toks
