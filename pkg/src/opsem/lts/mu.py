"""Modal mu-calculus with tagged fixed points: parser, local model checker,
fixpoint-iteration oracle and characteristic formulae."""
from __future__ import annotations

import sys
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from ..syntax import Lexer
from . import _kernels as K
from .core import TAU, Lts


class Formula:
    __slots__ = ("_hash",)
    _key: Tuple

    def __eq__(self, other) -> bool:
        return self is other or (type(self) is type(other) and hash(self) == hash(other)
                                 and self._key == other._key)

    def __hash__(self) -> int:
        try:
            return self._hash
        except AttributeError:
            self._hash = hash((type(self).__name__,) + self._key)
            return self._hash

    def __repr__(self) -> str:
        return "Formula(%s)" % show(self)

    def __str__(self) -> str:
        return show(self)


class And(Formula):
    __slots__ = ("items",)

    def __init__(self, items: Iterable[Formula]):
        self.items = tuple(items)

    @property
    def _key(self):
        return self.items


class Or(Formula):
    __slots__ = ("items",)

    def __init__(self, items: Iterable[Formula]):
        self.items = tuple(items)

    @property
    def _key(self):
        return self.items


class Dia(Formula):
    __slots__ = ("action", "body")

    def __init__(self, action: str, body: Formula):
        self.action, self.body = action, body

    @property
    def _key(self):
        return (self.action, self.body)


class Box(Formula):
    __slots__ = ("action", "body")

    def __init__(self, action: str, body: Formula):
        self.action, self.body = action, body

    @property
    def _key(self):
        return (self.action, self.body)


class FVar(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    @property
    def _key(self):
        return (self.name,)


class Mu(Formula):
    __slots__ = ("var", "tag", "body")

    def __init__(self, var: str, body: Formula, tag: Iterable[int] = ()):
        self.var, self.body, self.tag = var, body, frozenset(tag)

    @property
    def _key(self):
        return (self.var, self.tag, self.body)


class Nu(Formula):
    __slots__ = ("var", "tag", "body")

    def __init__(self, var: str, body: Formula, tag: Iterable[int] = ()):
        self.var, self.body, self.tag = var, body, frozenset(tag)

    @property
    def _key(self):
        return (self.var, self.tag, self.body)


class Not(Formula):
    """Input-only negation, removed by `positive`."""
    __slots__ = ("body",)

    def __init__(self, body: Formula):
        self.body = body

    @property
    def _key(self):
        return (self.body,)


TRUE = And(())
FALSE = Or(())


def conj(items) -> Formula:
    items = list(items)
    return items[0] if len(items) == 1 else And(items)


def disj(items) -> Formula:
    items = list(items)
    return items[0] if len(items) == 1 else Or(items)


class UnboundVariable(ValueError):
    pass


# -------------------------------------------------------------- utilities

def free_vars(f: Formula) -> FrozenSet[str]:
    if isinstance(f, FVar):
        return frozenset({f.name})
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_vars(g) for g in f.items))
    if isinstance(f, (Dia, Box, Not)):
        return free_vars(f.body)
    if isinstance(f, (Mu, Nu)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f)


def depth(f: Formula) -> int:
    if isinstance(f, FVar):
        return 0
    if isinstance(f, (And, Or)):
        return 1 + max((depth(g) for g in f.items), default=0) if f.items else 0
    return 1 + depth(f.body)


def subst(f: Formula, x: str, g: Formula) -> Formula:
    """[g/x]f for closed g (no capture can occur)."""
    if isinstance(f, FVar):
        return g if f.name == x else f
    if isinstance(f, And):
        return And(subst(h, x, g) for h in f.items)
    if isinstance(f, Or):
        return Or(subst(h, x, g) for h in f.items)
    if isinstance(f, Dia):
        return Dia(f.action, subst(f.body, x, g))
    if isinstance(f, Box):
        return Box(f.action, subst(f.body, x, g))
    if isinstance(f, Not):
        return Not(subst(f.body, x, g))
    if isinstance(f, (Mu, Nu)):
        if f.var == x:
            return f
        return type(f)(f.var, subst(f.body, x, g), f.tag)
    raise TypeError(f)


def positive(f: Formula) -> Formula:
    """Push negations inward using the De Morgan and fixpoint dualities
    (~mu x.A = nu x.~A[~x/x]). Raises ValueError on a non-monotone formula."""
    def go(f, neg: bool, flipped: FrozenSet[str]):
        if isinstance(f, Not):
            return go(f.body, not neg, flipped)
        if isinstance(f, FVar):
            if neg != (f.name in flipped):
                raise ValueError("variable %s occurs negatively" % f.name)
            return f
        if isinstance(f, (And, Or)):
            kind = type(f) if not neg else (Or if isinstance(f, And) else And)
            return kind(go(g, neg, flipped) for g in f.items)
        if isinstance(f, (Dia, Box)):
            kind = type(f) if not neg else (Box if isinstance(f, Dia) else Dia)
            return kind(f.action, go(f.body, neg, flipped))
        if isinstance(f, (Mu, Nu)):
            kind = type(f) if not neg else (Nu if isinstance(f, Mu) else Mu)
            fl = flipped | {f.var} if neg else flipped - {f.var}
            return kind(f.var, go(f.body, neg, fl), f.tag)
        raise TypeError(f)
    return go(f, False, frozenset())


# ------------------------------------------------------------ local checker

class _Checker:
    """Proof search for the tagged rules.

    Substitution [sigma x:T.A/x]A is kept explicit: a goal is a state, a
    subformula node of the input and an environment mapping each free
    variable of the node to a closure (fixpoint node, its environment,
    tag). Goals are memoised on that triple.
    """

    def __init__(self, l: Lts):
        self.l = l
        self.memo: Dict[Tuple, bool] = {}
        self.closures: Dict[Tuple, int] = {}
        self.table: List[Tuple[Formula, Dict[str, int], FrozenSet[int]]] = []
        self.fv: Dict[int, Tuple[str, ...]] = {}
        self.order: Dict[Tuple[int, int], bool] = {}
        self.order_cache: Dict[int, List[Formula]] = {}
        self.shapes: Dict[Tuple[int, int], List] = {}
        self.calls = 0

    def free(self, f: Formula) -> Tuple[str, ...]:
        r = self.fv.get(id(f))
        if r is None:
            r = self.fv[id(f)] = tuple(sorted(free_vars(f)))
        return r

    def closure(self, node: Formula, env: Dict[str, int], tag: FrozenSet[int]) -> int:
        key = (id(node), tuple(env[v] for v in self.free(node)), tag)
        c = self.closures.get(key)
        if c is None:
            c = self.closures[key] = len(self.table)
            self.table.append((node, env, tag))
        return c

    def ordered(self, f: Formula) -> List[Formula]:
        # smaller operands first: cheap refutations and cheap proofs end the scan early
        r = self.order_cache.get(id(f))
        if r is None:
            r = self.order_cache[id(f)] = sorted(f.items, key=size)
        return r

    def leq(self, c1: int, c2: int) -> bool:
        """Closure order: same node, nu tags grow, mu tags shrink, envs pointwise.

        The denotation of a closure is monotone in this order, which lets
        a proved goal answer every goal above it (and a refuted one every
        goal below it).
        """
        if c1 == c2:
            return True
        key = (c1, c2)
        r = self.order.get(key)
        if r is None:
            n1, e1, t1 = self.table[c1]
            n2, e2, t2 = self.table[c2]
            r = n1 is n2 and (t1 <= t2 if isinstance(n1, Nu) else t2 <= t1)
            r = r and all(self.leq(e1[v], e2[v]) for v in self.free(n1))
            self.order[key] = r
        return r

    def prove(self, s: int, f: Formula, env: Dict[str, int]) -> bool:
        envkey = tuple(env[v] for v in self.free(f))
        key = (s, id(f), envkey)
        r = self.memo.get(key)
        if r is not None:
            return r
        seen = self.shapes.setdefault((s, id(f)), [])
        for k2, r2 in seen:
            if r2 and all(self.leq(a, b) for a, b in zip(k2, envkey)):
                return True
            if not r2 and all(self.leq(b, a) for a, b in zip(k2, envkey)):
                return False
        r = self._prove(s, f, env)
        self.memo[key] = r
        seen.append((envkey, r))
        return r

    def fix(self, s: int, node: Formula, env: Dict[str, int], tag: FrozenSet[int]) -> bool:
        if s in tag:
            return isinstance(node, Nu)
        e2 = dict(env)
        e2[node.var] = self.closure(node, env, tag | {s})
        return self.prove(s, node.body, e2)

    def _prove(self, s: int, f: Formula, env: Dict[str, int]) -> bool:
        self.calls += 1
        if isinstance(f, And):
            return all(self.prove(s, g, env) for g in self.ordered(f))
        if isinstance(f, Or):
            return any(self.prove(s, g, env) for g in self.ordered(f))
        if isinstance(f, Dia):
            return any(self.prove(t, f.body, env) for t in self.l.post(s, f.action))
        if isinstance(f, Box):
            return all(self.prove(t, f.body, env) for t in self.l.post(s, f.action))
        if isinstance(f, (Mu, Nu)):
            return self.fix(s, f, env, f.tag)
        if isinstance(f, FVar):
            if f.name not in env:
                raise UnboundVariable("unbound formula variable %s" % f.name)
            node, fenv, tag = self.table[env[f.name]]
            return self.fix(s, node, fenv, tag)
        raise TypeError(f)


def mc_check(l: Lts, s: int, f: Formula, stats: Optional[Dict] = None) -> bool:
    """Goal-directed proof search for s : f with tagged fixed points."""
    fv = free_vars(f)
    if fv:
        raise UnboundVariable("unbound formula variable %s" % sorted(fv)[0])
    f = positive(f)
    c = _Checker(l)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20_000))
    try:
        r = c.prove(s, f, {})
    finally:
        sys.setrecursionlimit(old)
    if stats is not None:
        stats["calls"] = c.calls
    return r


# ------------------------------------------------------------ naive oracle

def denote(l: Lts, f: Formula, env: Optional[Dict[str, np.ndarray]] = None) -> np.ndarray:
    """Denotation of f as a boolean vector over states, by Kleene iteration."""
    env = env or {}
    n = l.n
    if isinstance(f, And):
        out = np.ones(n, dtype=bool)
        for g in f.items:
            out &= denote(l, g, env)
        return out
    if isinstance(f, Or):
        out = np.zeros(n, dtype=bool)
        for g in f.items:
            out |= denote(l, g, env)
        return out
    if isinstance(f, (Dia, Box)):
        x = denote(l, f.body, env)
        sel = l.action_mask(f.action)
        kern = K.pre_dia if isinstance(f, Dia) else K.pre_box
        return kern(n, l.src, l.dst, sel, x)
    if isinstance(f, FVar):
        if f.name not in env:
            raise UnboundVariable("unbound formula variable %s" % f.name)
        return env[f.name]
    if isinstance(f, Not):
        return ~denote(l, f.body, env)
    if isinstance(f, (Mu, Nu)):
        tag = np.zeros(n, dtype=bool)
        tag[list(f.tag)] = True
        least = isinstance(f, Mu)
        x = np.zeros(n, dtype=bool) if least else np.ones(n, dtype=bool)
        while True:
            e2 = dict(env)
            e2[f.var] = x
            y = denote(l, f.body, e2)
            y = y & ~tag if least else y | tag
            if np.array_equal(x, y):
                return x
            x = y
    raise TypeError(f)


def mc_naive(l: Lts, f: Formula) -> FrozenSet[int]:
    """The set of states satisfying the closed formula f."""
    return frozenset(np.nonzero(denote(l, positive(f)))[0].tolist())


# ------------------------------------------------- characteristic formulae

def _state_var(l: Lts, i: int) -> str:
    lab = l.labels[i]
    if isinstance(lab, (int, np.integer)) and not isinstance(lab, bool):
        return "x%d" % lab
    return "x%d" % i


def _equation(l: Lts, s: int, var) -> Formula:
    moves = sorted(set(l.succ(s)), key=lambda m: (l.actions.index(m[0]), m[1]))
    parts: List[Formula] = [Dia(a, var(t)) for a, t in moves]
    for a in l.actions:
        targets = sorted({t for b, t in moves if b == a})
        parts.append(Box(a, disj(var(t) for t in targets)))
    return conj(parts)


def char_equation(l: Lts, s: int) -> Formula:
    """Right-hand side of x_s: a diamond per move, a box per action."""
    return _equation(l, s, lambda t: FVar(_state_var(l, t)))


def char_formula(l: Lts, s: int) -> Formula:
    """Closed nu-formula satisfied exactly by the states bisimilar to s.

    The equation system x_t = char_equation(t) is solved by nested
    substitution: x_t is bound by nu at its first occurrence on each path
    and later occurrences stay variables. Shared subformulas are built once.
    """
    memo: Dict[Tuple[int, FrozenSet[int]], Formula] = {}

    def solve(t: int, bound: FrozenSet[int]) -> Formula:
        if t in bound:
            return FVar(_state_var(l, t))
        key = (t, bound)
        if key not in memo:
            inner = bound | {t}
            memo[key] = Nu(_state_var(l, t), _equation(l, t, lambda u: solve(u, inner)))
        return memo[key]

    return solve(s, frozenset())


def size(f: Formula) -> int:
    """Tree size (shared subformulas counted once per occurrence)."""
    memo: Dict[int, int] = {}

    def go(g):
        r = memo.get(id(g))
        if r is None:
            if isinstance(g, (And, Or)):
                r = 1 + sum(go(h) for h in g.items)
            elif isinstance(g, FVar):
                r = 1
            else:
                r = 1 + go(g.body)
            memo[id(g)] = r
        return r
    return go(f)


# ------------------------------------------------------------------ syntax

def _show_action(a: str) -> str:
    return a


def show(f: Formula, prec: int = 0) -> str:
    """ASCII rendering; /\\ binds tighter than \\/, fixpoints extend right."""
    if isinstance(f, And):
        if not f.items:
            return "true"
        s = " /\\ ".join(show(g, 2) for g in f.items)
        return "(%s)" % s if prec > 1 else s
    if isinstance(f, Or):
        if not f.items:
            return "false"
        s = " \\/ ".join(show(g, 1) for g in f.items)
        return "(%s)" % s if prec > 0 else s
    if isinstance(f, Dia):
        return "<%s>%s" % (_show_action(f.action), show(f.body, 3))
    if isinstance(f, Box):
        return "[%s]%s" % (_show_action(f.action), show(f.body, 3))
    if isinstance(f, Not):
        return "~%s" % show(f.body, 3)
    if isinstance(f, FVar):
        return f.name
    if isinstance(f, (Mu, Nu)):
        kw = "mu" if isinstance(f, Mu) else "nu"
        tag = ":{%s}" % ",".join(str(t) for t in sorted(f.tag)) if f.tag else ""
        s = "%s %s%s. %s" % (kw, f.var, tag, show(f.body, 0))
        return "(%s)" % s if prec > 0 else s
    raise TypeError(f)


_SYMS = ["/\\", "\\/", "<", ">", "[", "]", "(", ")", "~", ".", ":", "{", "}", ",", "'"]
_UNICODE = {"⟨": "<", "⟩": ">", "∧": "/\\", "∨": "\\/", "¬": "~", "μ": " mu ", "ν": " nu ",
            "τ": "tau", "⊤": "true", "⊥": "false"}


class _MuParser:
    def __init__(self, src: str):
        for k, v in _UNICODE.items():
            src = src.replace(k, v)
        self.lx = Lexer(src, _SYMS, comment="#")

    def formula(self) -> Formula:
        lx = self.lx
        if lx.peek_is("mu") or lx.peek_is("nu"):
            kind = Mu if lx.next().text == "mu" else Nu
            x = lx.ident(("mu", "nu", "true", "false"))
            tag: List[int] = []
            if lx.accept(":"):
                lx.expect("{")
                if not lx.peek_is("}"):
                    tag.append(int(lx.expect_kind("int").text))
                    while lx.accept(","):
                        tag.append(int(lx.expect_kind("int").text))
                lx.expect("}")
            lx.expect(".")
            return kind(x, self.formula(), tag)
        return self.disj()

    def disj(self) -> Formula:
        items = [self.conj()]
        while self.lx.accept("\\/"):
            items.append(self.conj_or_binder())
        return items[0] if len(items) == 1 else Or(items)

    def conj_or_binder(self) -> Formula:
        if self.lx.peek_is("mu") or self.lx.peek_is("nu"):
            return self.formula()
        return self.conj()

    def conj(self) -> Formula:
        items = [self.unary()]
        while self.lx.accept("/\\"):
            if self.lx.peek_is("mu") or self.lx.peek_is("nu"):
                items.append(self.formula())
                break
            items.append(self.unary())
        return items[0] if len(items) == 1 else And(items)

    def action(self, close: str) -> str:
        lx = self.lx
        co = "'" if lx.accept("'") else ""
        a = co + lx.ident()
        lx.expect(close)
        return a

    def unary(self) -> Formula:
        lx = self.lx
        if lx.accept("~"):
            return Not(self.unary_or_binder())
        if lx.accept("<"):
            return Dia(self.action(">"), self.unary_or_binder())
        if lx.accept("["):
            return Box(self.action("]"), self.unary_or_binder())
        if lx.accept("("):
            f = self.formula()
            lx.expect(")")
            return f
        if lx.accept("true"):
            return TRUE
        if lx.accept("false"):
            return FALSE
        if lx.peek().kind == "ident" and lx.peek().text not in ("mu", "nu"):
            return FVar(lx.next().text)
        raise lx.error("expected a formula")

    def unary_or_binder(self) -> Formula:
        if self.lx.peek_is("mu") or self.lx.peek_is("nu"):
            return self.formula()
        return self.unary()


def parse_formula(src: str) -> Formula:
    p = _MuParser(src)
    f = p.formula()
    p.lx.expect_eof()
    return f
