"""Untyped lambda-calculus: substitution, reduction, evaluators and machines."""
from __future__ import annotations

import random
import sys
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, Iterable, List, Optional, Set, Tuple, Union

from .syntax import Lexer, ParseError

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


@dataclass(frozen=True)
class Var:
    name: str
    fv: FrozenSet[str] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "fv", frozenset((self.name,)))


@dataclass(frozen=True)
class Abs:
    param: str
    body: object
    fv: FrozenSet[str] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "fv", self.body.fv - {self.param})


@dataclass(frozen=True)
class App:
    fun: object
    arg: object
    fv: FrozenSet[str] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "fv", self.fun.fv | self.arg.fv)


@dataclass(frozen=True)
class Let:
    """`let x = M in N`; sugar for (\\x.N) M outside the type checkers."""
    name: str
    defn: object
    body: object
    fv: FrozenSet[str] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "fv", self.defn.fv | (self.body.fv - {self.name}))


def lams(params: Iterable[str], body):
    for p in reversed(list(params)):
        body = Abs(p, body)
    return body


def apps(f, *args):
    for a in args:
        f = App(f, a)
    return f


def free_vars(t) -> FrozenSet[str]:
    return t.fv


def all_names(t) -> Set[str]:
    out: Set[str] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            out.add(u.name)
        elif isinstance(u, Abs):
            out.add(u.param)
            stack.append(u.body)
        elif isinstance(u, App):
            stack.extend((u.fun, u.arg))
        else:
            out.add(u.name)
            stack.extend((u.defn, u.body))
    return out


def desugar(t):
    """Replace every let by a redex."""
    if isinstance(t, Var):
        return t
    if isinstance(t, Abs):
        return Abs(t.param, desugar(t.body))
    if isinstance(t, App):
        return App(desugar(t.fun), desugar(t.arg))
    return App(Abs(t.name, desugar(t.body)), desugar(t.defn))


def fresh_name(base: str, avoid) -> str:
    base = base.rstrip("0123456789'") or "z"
    i = 1
    while "%s%d" % (base, i) in avoid:
        i += 1
    return "%s%d" % (base, i)


# ------------------------------------------------------------ de Bruijn

@dataclass(frozen=True)
class DVar:
    index: int


@dataclass(frozen=True)
class DFree:
    name: str


@dataclass(frozen=True)
class DAbs:
    body: object


@dataclass(frozen=True)
class DApp:
    fun: object
    arg: object


def to_db(t, ctx: Tuple[str, ...] = ()):
    """De Bruijn form; free variables stay named (DFree)."""
    if isinstance(t, Let):
        t = desugar(t)
    if isinstance(t, Var):
        for i, x in enumerate(ctx):
            if x == t.name:
                return DVar(i)
        return DFree(t.name)
    if isinstance(t, Abs):
        return DAbs(to_db(t.body, (t.param,) + ctx))
    return DApp(to_db(t.fun, ctx), to_db(t.arg, ctx))


def alpha_eq(a, b) -> bool:
    return to_db(a) == to_db(b)


def from_db(d, ctx: Tuple[str, ...] = (), avoid: Optional[Set[str]] = None):
    avoid = set() if avoid is None else avoid
    if isinstance(d, DVar):
        return Var(ctx[d.index])
    if isinstance(d, DFree):
        return Var(d.name)
    if isinstance(d, DAbs):
        x = fresh_name("x", avoid | set(ctx))
        return Abs(x, from_db(d.body, (x,) + ctx, avoid))
    return App(from_db(d.fun, ctx, avoid), from_db(d.arg, ctx, avoid))


# ---------------------------------------------------------- substitution

def substitute(n, x: str, m):
    """[m/x]n, renaming binders that would capture free variables of m."""
    if x not in n.fv:
        return n
    if isinstance(n, Var):
        return m
    if isinstance(n, App):
        return App(substitute(n.fun, x, m), substitute(n.arg, x, m))
    if isinstance(n, Let):
        return substitute(desugar(n), x, m)
    y = n.param
    # x == y is excluded by x in fv(n)
    if y not in m.fv:
        return Abs(y, substitute(n.body, x, m))
    z = fresh_name(y, m.fv | n.body.fv | {x})
    return Abs(z, substitute(substitute(n.body, y, Var(z)), x, m))


# -------------------------------------------------------------- reduction

def is_redex(t) -> bool:
    return isinstance(t, App) and isinstance(t.fun, Abs)


def is_eta_redex(t) -> bool:
    return (isinstance(t, Abs) and isinstance(t.body, App) and isinstance(t.body.arg, Var)
            and t.body.arg.name == t.param and t.param not in t.body.fun.fv)


def contract(t):
    return substitute(t.fun.body, t.fun.param, t.arg)


def _reducts(t, eta: bool):
    if is_redex(t):
        yield contract(t)
    if eta and is_eta_redex(t):
        yield t.body.fun
    if isinstance(t, Abs):
        for b in _reducts(t.body, eta):
            yield Abs(t.param, b)
    elif isinstance(t, App):
        for f in _reducts(t.fun, eta):
            yield App(f, t.arg)
        for a in _reducts(t.arg, eta):
            yield App(t.fun, a)


def reducts(t, rules: str = "beta") -> List[object]:
    """One-step reducts, deduplicated up to alpha."""
    out, seen = [], set()
    for u in _reducts(t, rules in ("betaeta", "beta-eta", "BetaEta")):
        k = to_db(u)
        if k not in seen:
            seen.add(k)
            out.append(u)
    return out


def step_no(t):
    """Leftmost-outermost beta step, or None on a normal form."""
    if is_redex(t):
        return contract(t)
    if isinstance(t, Abs):
        b = step_no(t.body)
        return None if b is None else Abs(t.param, b)
    if isinstance(t, App):
        f = step_no(t.fun)
        if f is not None:
            return App(f, t.arg)
        a = step_no(t.arg)
        return None if a is None else App(t.fun, a)
    return None


@dataclass(frozen=True)
class NormalForm:
    term: object
    steps: int = 0


@dataclass(frozen=True)
class Value:
    term: object
    steps: int = 0


@dataclass(frozen=True)
class FuelExhausted:
    steps: int = 0


def normalize_no(t, fuel: int = 10_000):
    t = desugar(t) if isinstance(t, Let) or _has_let(t) else t
    steps = 0
    while True:
        u = step_no(t)
        if u is None:
            return NormalForm(t, steps)
        if steps >= fuel:
            return FuelExhausted(steps)
        t = u
        steps += 1


def _has_let(t) -> bool:
    if isinstance(t, Let):
        return True
    if isinstance(t, Abs):
        return _has_let(t.body)
    if isinstance(t, App):
        return _has_let(t.fun) or _has_let(t.arg)
    return False


def is_normal(t) -> bool:
    """Membership in the grammar \\x1..xn. y M1..Mk with each Mi normal."""
    while isinstance(t, Abs):
        t = t.body
    while isinstance(t, App):
        if not is_normal(t.arg):
            return False
        t = t.fun
    return isinstance(t, Var)


# ------------------------------------------------------ parallel reduction

def develop(t):
    """Complete development: contract every redex of t at once."""
    if isinstance(t, Var):
        return t
    if isinstance(t, Abs):
        return Abs(t.param, develop(t.body))
    if isinstance(t, Let):
        return develop(desugar(t))
    if isinstance(t.fun, Abs):
        return substitute(develop(t.fun.body), t.fun.param, develop(t.arg))
    return App(develop(t.fun), develop(t.arg))


def parallel_step(t, choose: Callable[[], bool]):
    """A parallel step contracting the redexes for which choose() is true."""
    if isinstance(t, Var):
        return t
    if isinstance(t, Abs):
        return Abs(t.param, parallel_step(t.body, choose))
    if isinstance(t.fun, Abs) and choose():
        return substitute(parallel_step(t.fun.body, choose), t.fun.param, parallel_step(t.arg, choose))
    return App(parallel_step(t.fun, choose), parallel_step(t.arg, choose))


# ----------------------------------------------------------- evaluators

class _OutOfFuel(Exception):
    pass


def _closed(t):
    if t.fv:
        raise ValueError("evaluation requires a closed term; free: %s" % ", ".join(sorted(t.fv)))


def eval_big(t, strategy: str = "cbn", fuel: int = 10_000):
    """Big-step call-by-name or call-by-value evaluation of a closed term."""
    t = desugar(t) if _has_let(t) else t
    _closed(t)
    cbv = strategy.lower() == "cbv"
    budget = [fuel]

    def ev(m):
        if budget[0] <= 0:
            raise _OutOfFuel
        budget[0] -= 1
        while True:
            if isinstance(m, Abs):
                return m
            f = ev(m.fun)
            arg = ev(m.arg) if cbv else m.arg
            m = substitute(f.body, f.param, arg)
            if budget[0] <= 0:
                raise _OutOfFuel
            budget[0] -= 1

    try:
        v = ev(t)
    except _OutOfFuel:
        return FuelExhausted(fuel)
    except RecursionError:
        return FuelExhausted(fuel - budget[0])
    return Value(v, fuel - budget[0])


# -------------------------------------------------------------- machines

@dataclass(frozen=True)
class Closure:
    term: object  # DbTerm
    env: Tuple["Closure", ...]


def _lookup(env, i):
    return env[i]


def machine_run(t, strategy: str = "cbn", fuel: int = 10_000, trace: Optional[list] = None):
    """Run the call-by-name or call-by-value environment machine.

    Stacks are Python lists with the top at the end. The call-by-value
    stack holds ("r", closure) and ("l", value) markers.
    """
    t = desugar(t) if _has_let(t) else t
    _closed(t)
    cur = Closure(to_db(t), ())
    stack: list = []
    steps = 0
    cbv = strategy.lower() == "cbv"
    while True:
        if trace is not None:
            trace.append((cur, tuple(stack)))
        term = cur.term
        if isinstance(term, DAbs) and not stack:
            return Value(readback(cur), steps)
        if steps >= fuel:
            return FuelExhausted(steps)
        steps += 1
        if isinstance(term, DVar):
            cur = cur.env[term.index]
        elif isinstance(term, DApp):
            if cbv:
                stack.append(("r", Closure(term.arg, cur.env)))
            else:
                stack.append(Closure(term.arg, cur.env))
            cur = Closure(term.fun, cur.env)
        elif not cbv:
            c = stack.pop()
            cur = Closure(term.body, (c,) + cur.env)
        else:
            tag, c = stack.pop()
            if tag == "r":
                stack.append(("l", cur))
                cur = c
            else:
                cur = Closure(c.term.body, (cur,) + c.env)


def readback(c: Closure, avoid: Optional[Set[str]] = None):
    """Named term of a closure, substituting its environment recursively."""
    avoid = set() if avoid is None else avoid

    def go(d, ctx, env, above=frozenset()):
        if isinstance(d, DVar):
            if d.index < len(ctx):
                return Var(ctx[d.index])
            e = env[d.index - len(ctx)]
            return go(e.term, (), e.env, above | set(ctx))
        if isinstance(d, DFree):
            return Var(d.name)
        if isinstance(d, DAbs):
            x = fresh_name("x", avoid | set(ctx) | above)
            return Abs(x, go(d.body, (x,) + ctx, env, above))
        return App(go(d.fun, ctx, env, above), go(d.arg, ctx, env, above))

    return go(c.term, (), c.env)


# -------------------------------------------------------- church numerals

def church(n: int):
    body = Var("x")
    for _ in range(n):
        body = App(Var("f"), body)
    return Abs("f", Abs("x", body))


def church_decode(t, fuel: int = 10_000) -> Optional[int]:
    names = all_names(t)
    f = fresh_name("f", names)
    x = fresh_name("x", names | {f})
    res = normalize_no(App(App(t, Var(f)), Var(x)), fuel)
    if not isinstance(res, NormalForm):
        return None
    u, k = res.term, 0
    while isinstance(u, App) and u.fun == Var(f):
        u = u.arg
        k += 1
    return k if u == Var(x) else None


# ------------------------------------------------------------ printing

def show(t) -> str:
    """ASCII rendering with minimal parentheses."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Abs):
        ps = [t.param]
        b = t.body
        while isinstance(b, Abs):
            ps.append(b.param)
            b = b.body
        return "\\%s. %s" % (" ".join(ps), show(b))
    if isinstance(t, Let):
        return "let %s = %s in %s" % (t.name, show(t.defn), show(t.body))
    f = show(t.fun) if not isinstance(t.fun, (Abs, Let)) else "(%s)" % show(t.fun)
    a = show(t.arg) if isinstance(t.arg, Var) else "(%s)" % show(t.arg)
    return "%s %s" % (f, a)


# ------------------------------------------------------------- parsing

_SYMS = ["\\", "λ", ".", "(", ")", "="]
_RESERVED = {"let", "in"}


class _Parser:
    def __init__(self, src: str):
        self.lx = Lexer(src, _SYMS)

    def term(self):
        lx = self.lx
        if lx.accept("\\") or lx.accept("λ"):
            params = [lx.ident(_RESERVED)]
            while lx.peek().kind == "ident" and not lx.peek_is("let"):
                params.append(lx.ident(_RESERVED))
            lx.expect(".")
            return lams(params, self.term())
        if lx.accept("let"):
            x = lx.ident(_RESERVED)
            lx.expect("=")
            m = self.term()
            lx.expect("in")
            return Let(x, m, self.term())
        t = self.atom()
        while True:
            if lx.peek_is("(") or (lx.peek().kind == "ident" and lx.peek().text not in _RESERVED):
                t = App(t, self.atom())
            elif lx.peek_is("\\") or lx.peek_is("λ") or lx.peek_is("let"):
                t = App(t, self.term())
                return t
            else:
                return t

    def atom(self):
        lx = self.lx
        if lx.accept("("):
            t = self.term()
            lx.expect(")")
            return t
        return Var(lx.ident(_RESERVED))


def parse(src: str):
    p = _Parser(src)
    t = p.term()
    p.lx.expect_eof()
    return t


# ----------------------------------------------------------- named terms

I = parse("\\x.x")
K = parse("\\x y.x")
S = parse("\\x y z. x z (y z)")
DELTA = parse("\\x. x x")
OMEGA = App(DELTA, DELTA)
PLUS = parse("\\n m f x. (n f) (m f x)")
PRED = parse("\\n f x. n (\\g h. h (g f)) (\\y. x) (\\z. z)")
