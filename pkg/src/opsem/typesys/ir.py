"""Types for the CPS, value-named and closure-converted intermediate languages.

Types are  t | (A1, ..., An) -> R | *(A1, ..., An) | exists t. A
where R is the fixed answer type and ~A abbreviates (A) -> R.

`check_ir` decides derivability of  Gamma |- M  for an untyped term:
function parameters receive unknowns, equalities are solved by
unification, and projections, pack and unpack are kept as deferred
constraints until the type they inspect is known.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

from .. import transform as T
from ..syntax import Lexer
from . import simple

# ------------------------------------------------------------------ types


@dataclass(frozen=True)
class TV:
    name: str


@dataclass(frozen=True)
class Fn:
    args: Tuple[object, ...]


@dataclass(frozen=True)
class Prod:
    items: Tuple[object, ...]


@dataclass(frozen=True)
class Ex:
    var: str
    body: object


@dataclass(frozen=True)
class Meta:
    id: int


def neg(a) -> Fn:
    return Fn((a,))


def ftv(a) -> Set[str]:
    if isinstance(a, TV):
        return {a.name}
    if isinstance(a, Fn):
        return set().union(*(ftv(x) for x in a.args))
    if isinstance(a, Prod):
        return set().union(*(ftv(x) for x in a.items))
    if isinstance(a, Ex):
        return ftv(a.body) - {a.var}
    return set()


def subst_tv(a, m: Dict[str, object]):
    """Substitution of types for type variables; bound names are assumed fresh."""
    if not m:
        return a
    if isinstance(a, TV):
        return m.get(a.name, a)
    if isinstance(a, Fn):
        return Fn(tuple(subst_tv(x, m) for x in a.args))
    if isinstance(a, Prod):
        return Prod(tuple(subst_tv(x, m) for x in a.items))
    if isinstance(a, Ex):
        inner = {k: v for k, v in m.items() if k != a.var}
        return Ex(a.var, subst_tv(a.body, inner))
    return a


def type_key(a, env=()):
    if isinstance(a, TV):
        return ("b", env.index(a.name)) if a.name in env else ("f", a.name)
    if isinstance(a, Fn):
        return ("fn",) + tuple(type_key(x, env) for x in a.args)
    if isinstance(a, Prod):
        return ("x",) + tuple(type_key(x, env) for x in a.items)
    if isinstance(a, Ex):
        return ("ex", type_key(a.body, (a.var,) + env))
    return ("m", a.id)


def type_eq(a, b) -> bool:
    return type_key(a) == type_key(b)


def show_irtype(a) -> str:
    if isinstance(a, TV):
        return a.name
    if isinstance(a, Fn):
        return "(%s) -> R" % ", ".join(show_irtype(x) for x in a.args)
    if isinstance(a, Prod):
        return "*(%s)" % ", ".join(show_irtype(x) for x in a.items)
    if isinstance(a, Ex):
        return "exists %s. %s" % (a.var, show_irtype(a.body))
    return "?%d" % a.id


def parse_irtype(src: str):
    """Inverse of `show_irtype`; `~A` is accepted for (A) -> R."""
    lx = Lexer(src, ["(", ")", ",", "->", "→", "*", "×", "~", "¬", ".", "∃"])

    def typ():
        if lx.accept("exists") or lx.accept("∃"):
            t = lx.ident()
            lx.expect(".")
            return Ex(t, typ())
        if lx.accept("~") or lx.accept("¬"):
            return neg(typ())
        if lx.accept("*") or lx.accept("×"):
            return Prod(tuple(seq()))
        if lx.peek_is("("):
            items = seq()
            if lx.accept("->") or lx.accept("→"):
                if lx.ident() != "R":
                    raise lx.error("functions return R")
                return Fn(tuple(items))
            if len(items) != 1:
                raise lx.error("expected '->'")
            return items[0]
        x = lx.ident()
        if x == "R":
            raise lx.error("R only appears as a result")
        return TV(x)

    def seq():
        lx.expect("(")
        items = []
        while not lx.peek_is(")"):
            items.append(typ())
            if not lx.accept(","):
                break
        lx.expect(")")
        return items

    a = typ()
    lx.expect_eof()
    return a


# ------------------------------------------------------ type translations

@dataclass(frozen=True)
class SFun:
    """Source function type A1, ..., An -> B (polyadic)."""
    args: Tuple[object, ...]
    res: object


@dataclass(frozen=True)
class SProd:
    items: Tuple[object, ...]


def cps_type(a):
    """cps(t) = t, cps(*(A)) = *(cps A), cps(A+ -> B) = (cps A+, ~cps B) -> R."""
    if isinstance(a, (simple.TVar, simple.Base)):
        return TV(a.name)
    if isinstance(a, simple.Arrow):
        return Fn((cps_type(a.dom), neg(cps_type(a.cod))))
    if isinstance(a, SFun):
        return Fn(tuple(cps_type(x) for x in a.args) + (neg(cps_type(a.res)),))
    if isinstance(a, SProd):
        return Prod(tuple(cps_type(x) for x in a.items))
    if isinstance(a, TV):
        return a
    raise TypeError("not a source type: %r" % (a,))


_ex_names = itertools.count()


def _fresh_tv(avoid: Set[str]) -> str:
    while True:
        x = "e%d" % next(_ex_names)
        if x not in avoid:
            return x


def cc_type(a, _avoid: Optional[Set[str]] = None):
    """cc(t) = t, cc(*(A)) = *(cc A), cc(A+ -> R) = exists t. *((t, cc A+) -> R, t)."""
    avoid = ftv(a) if _avoid is None else _avoid
    if isinstance(a, TV):
        return a
    if isinstance(a, Prod):
        return Prod(tuple(cc_type(x, avoid) for x in a.items))
    if isinstance(a, Ex):
        return Ex(a.var, cc_type(a.body, avoid | {a.var}))
    if isinstance(a, Fn):
        args = tuple(cc_type(x, avoid) for x in a.args)
        t = "t"
        used = avoid | set().union(set(), *(ftv(x) for x in args))
        if t in used:
            t = _fresh_tv(used)
        return Ex(t, Prod((Fn((TV(t),) + args), TV(t))))
    raise TypeError("not an IR type: %r" % (a,))


def cmp_type(a):
    return cc_type(cps_type(a))


# ------------------------------------------------------------- the checker

class _Fail(Exception):
    pass


class _Solver:
    def __init__(self):
        self.binding: Dict[int, object] = {}
        self.ids = itertools.count()
        self.deferred: List[tuple] = []
        self.binder_skolems: Set[str] = set()
        self.unpack_skolems: List[Tuple[str, List[object]]] = []
        self.names = itertools.count()

    def meta(self):
        return Meta(next(self.ids))

    def fresh_name(self, prefix):
        return "%%%s%d" % (prefix, next(self.names))

    def resolve(self, a):
        while isinstance(a, Meta) and a.id in self.binding:
            a = self.binding[a.id]
        return a

    def zonk(self, a):
        a = self.resolve(a)
        if isinstance(a, Fn):
            return Fn(tuple(self.zonk(x) for x in a.args))
        if isinstance(a, Prod):
            return Prod(tuple(self.zonk(x) for x in a.items))
        if isinstance(a, Ex):
            return Ex(a.var, self.zonk(a.body))
        return a

    def _occurs(self, m: Meta, a) -> bool:
        a = self.resolve(a)
        if isinstance(a, Meta):
            return a.id == m.id
        if isinstance(a, Fn):
            return any(self._occurs(m, x) for x in a.args)
        if isinstance(a, Prod):
            return any(self._occurs(m, x) for x in a.items)
        if isinstance(a, Ex):
            return self._occurs(m, a.body)
        return False

    def instantiate(self, ex: Ex, b):
        return subst_tv(self.zonk(ex.body), {ex.var: b})

    def unify(self, a, b):
        a, b = self.resolve(a), self.resolve(b)
        if isinstance(a, Meta) and isinstance(b, Meta) and a.id == b.id:
            return
        if isinstance(b, Meta):
            a, b = b, a
        if isinstance(a, Meta):
            if self._occurs(a, b) or ftv(self.zonk(b)) & self.binder_skolems:
                raise _Fail()
            self.binding[a.id] = b
            return
        if isinstance(a, TV) and isinstance(b, TV) and a.name == b.name:
            return
        if isinstance(a, Fn) and isinstance(b, Fn) and len(a.args) == len(b.args):
            for x, y in zip(a.args, b.args):
                self.unify(x, y)
            return
        if isinstance(a, Prod) and isinstance(b, Prod) and len(a.items) == len(b.items):
            for x, y in zip(a.items, b.items):
                self.unify(x, y)
            return
        if isinstance(a, Ex) and isinstance(b, Ex):
            c = self.fresh_name("b")
            self.binder_skolems.add(c)
            self.unify(self.instantiate(a, TV(c)), self.instantiate(b, TV(c)))
            return
        raise _Fail()

    # deferred constraints -------------------------------------------

    def _fire(self, c, fallback: bool) -> bool:
        kind = c[0]
        if kind == "proj":
            _, a, i, b = c
            a = self.resolve(a)
            if isinstance(a, Meta):
                if not fallback:
                    return False
                n = max(d[2] for d in self.deferred if d[0] == "proj" and self.resolve(d[1]) == a)
                self.unify(a, Prod(tuple(self.meta() for _ in range(n))))
                a = self.resolve(a)
            if not isinstance(a, Prod) or not 1 <= i <= len(a.items):
                raise _Fail()
            self.unify(b, a.items[i - 1])
            return True
        if kind == "unpack":
            _, a, b, scope = c
            a = self.resolve(a)
            if isinstance(a, Meta):
                if not fallback:
                    return False
                self.unify(a, Ex(self.fresh_name("u"), self.meta()))
                a = self.resolve(a)
            if not isinstance(a, Ex):
                raise _Fail()
            s = self.fresh_name("s")
            self.unpack_skolems.append((s, scope))
            self.unify(b, self.instantiate(a, TV(s)))
            return True
        _, a, x = c  # pack
        xr = self.resolve(x)
        if isinstance(xr, Ex):
            self.unify(a, self.instantiate(xr, self.meta()))
            return True
        if not fallback:
            return False
        ar = self.resolve(a)
        if isinstance(ar, Prod) and len(ar.items) == 2:
            code = self.resolve(ar.items[0])
            if isinstance(code, Fn) and code.args:
                self.unify(code.args[0], ar.items[1])
                t = self.fresh_name("p")
                rest = tuple(self.zonk(y) for y in code.args[1:])
                self.unify(x, Ex(t, Prod((Fn((TV(t),) + rest), TV(t)))))
                return True
        return False

    def solve(self):
        while self.deferred:
            progress = False
            for c in list(self.deferred):
                if self._fire(c, False):
                    self.deferred.remove(c)
                    progress = True
            if progress:
                continue
            # guesses, least committing first
            order = {"pack": 0, "proj": 1, "unpack": 2}
            for c in sorted(self.deferred, key=lambda c: order[c[0]]):
                if self._fire(c, True):
                    self.deferred.remove(c)
                    progress = True
                    break
            if not progress:
                raise _Fail()  # pack of a value that is not a closure pair
        for s, scope in self.unpack_skolems:
            for a in scope:
                if s in ftv(self.zonk(a)):
                    raise _Fail()


def _walk(sol: _Solver, t, env: Dict[str, object]):
    def val(v, env):
        if isinstance(v, T.Name):
            if v.name not in env:
                raise _Fail()
            return env[v.name]
        if isinstance(v, T.Lam):
            ps = [sol.meta() for _ in v.params]
            term(v.body, {**env, **dict(zip(v.params, ps))})
            return Fn(tuple(ps))
        if isinstance(v, T.Tup):
            return Prod(tuple(val(i, env) for i in v.items))
        if isinstance(v, T.Pack):
            x = sol.meta()
            sol.deferred.append(("pack", val(v.arg, env), x))
            return x
        raise _Fail()

    def term(u, env):
        if isinstance(u, T.App):
            f = val(u.fun, env)
            sol.unify(f, Fn(tuple(val(a, env) for a in u.args)))
            return
        if isinstance(u, T.Let):
            b = u.bound
            if isinstance(b, T.Proj):
                x = sol.meta()
                sol.deferred.append(("proj", val(b.arg, env), b.index, x))
            elif isinstance(b, T.Unpack):
                x = sol.meta()
                sol.deferred.append(("unpack", val(b.arg, env), x, list(env.values())))
            else:
                x = val(b, env)
            term(u.body, {**env, u.name: x})
            return
        raise _Fail()

    term(t, env)


def _fresh_binders(a, sol: _Solver):
    if isinstance(a, Fn):
        return Fn(tuple(_fresh_binders(x, sol) for x in a.args))
    if isinstance(a, Prod):
        return Prod(tuple(_fresh_binders(x, sol) for x in a.items))
    if isinstance(a, Ex):
        t = sol.fresh_name("q")
        return Ex(t, _fresh_binders(subst_tv(a.body, {a.var: TV(t)}), sol))
    return a


STAGES = ("cps", "vn", "cc", "hoist")


def well_formed(stage: str, t) -> bool:
    stage = stage.lower()
    if stage == "cps":
        return T.is_cps(t)
    has_pack = _mentions_pack(t)
    if stage == "vn":
        return T.is_vn(t) and not has_pack
    if stage == "cc":
        return T.is_vn(t) and T.functions_closed(t)
    if stage in ("hoist", "hoisted"):
        return T.is_vn(t) and T.is_hoisted(t) and _top_level_closed(t)
    raise ValueError("unknown stage %r" % stage)


def _top_level_closed(t) -> bool:
    """Each hoisted function only mentions earlier top-level functions."""
    defined: Set[str] = set()
    while isinstance(t, T.Let) and isinstance(t.bound, T.Lam):
        if not t.bound.fv <= defined:
            return False
        defined.add(t.name)
        t = t.body
    return True


def _mentions_pack(t) -> bool:
    if isinstance(t, (T.Pack, T.Unpack)):
        return True
    if isinstance(t, T.Lam):
        return _mentions_pack(t.body)
    if isinstance(t, T.Tup):
        return any(_mentions_pack(i) for i in t.items)
    if isinstance(t, T.App):
        return _mentions_pack(t.fun) or any(_mentions_pack(a) for a in t.args)
    if isinstance(t, T.Let):
        return _mentions_pack(t.bound) or _mentions_pack(t.body)
    if isinstance(t, T.Proj):
        return _mentions_pack(t.arg)
    return False


def check_ir(stage: str, ctx: Dict[str, object], t) -> bool:
    """Is  ctx |- t  derivable (t well formed for the stage)?"""
    if not well_formed(stage, t):
        return False
    sol = _Solver()
    env = {k: _fresh_binders(v, sol) for k, v in ctx.items()}
    try:
        _walk(sol, t, env)
        sol.solve()
    except _Fail:
        return False
    return True


def check_value(ctx: Dict[str, object], v, a) -> bool:
    """Does ctx |- v : a hold for a value v (lambda, tuple, name or pack)?"""
    sol = _Solver()
    env = {k: _fresh_binders(x, sol) for k, x in ctx.items()}
    x = "%v"
    probe = T.Let(x, v, T.App(T.Name("%k"), (T.Name(x),)))
    env["%k"] = neg(_fresh_binders(a, sol))
    try:
        _walk(sol, probe, env)
        sol.solve()
    except _Fail:
        return False
    return True
