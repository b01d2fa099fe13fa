"""Compilation pipeline for the polyadic call-by-value lambda-calculus.

Passes: CPS, value naming (with readback), closure conversion and
hoisting. All stages share one term representation:

    Name(x) | Lam(params, body) | Tup(items) | App(fun, args)
    | Let(name, bound, body) | Proj(i, arg) | Pack(arg) | Unpack(arg)

Pack and Unpack only appear after closure conversion; they are the
existential introduction and elimination lets.
"""
from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .syntax import Lexer, ParseError

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

HALT = "halt"


def _fv_field():
    return field(init=False, repr=False, compare=False, hash=False)


@dataclass(frozen=True)
class Name:
    name: str
    fv: FrozenSet[str] = _fv_field()

    def __post_init__(self):
        object.__setattr__(self, "fv", frozenset((self.name,)))


@dataclass(frozen=True)
class Lam:
    params: Tuple[str, ...]
    body: object
    fv: FrozenSet[str] = _fv_field()

    def __post_init__(self):
        object.__setattr__(self, "fv", self.body.fv - set(self.params))


@dataclass(frozen=True)
class Tup:
    items: Tuple[object, ...]
    fv: FrozenSet[str] = _fv_field()

    def __post_init__(self):
        object.__setattr__(self, "fv", frozenset().union(*(i.fv for i in self.items)))


@dataclass(frozen=True)
class App:
    fun: object
    args: Tuple[object, ...]
    fv: FrozenSet[str] = _fv_field()

    def __post_init__(self):
        object.__setattr__(self, "fv", self.fun.fv.union(*(a.fv for a in self.args)))


@dataclass(frozen=True)
class Let:
    name: str
    bound: object
    body: object
    fv: FrozenSet[str] = _fv_field()

    def __post_init__(self):
        object.__setattr__(self, "fv", self.bound.fv | (self.body.fv - {self.name}))


@dataclass(frozen=True)
class Proj:
    index: int  # 1-based
    arg: object
    fv: FrozenSet[str] = _fv_field()

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("projection index must be >= 1")
        object.__setattr__(self, "fv", self.arg.fv)


@dataclass(frozen=True)
class Pack:
    arg: object
    fv: FrozenSet[str] = _fv_field()

    def __post_init__(self):
        object.__setattr__(self, "fv", self.arg.fv)


@dataclass(frozen=True)
class Unpack:
    arg: object
    fv: FrozenSet[str] = _fv_field()

    def __post_init__(self):
        object.__setattr__(self, "fv", self.arg.fv)


def app(f, *args) -> App:
    return App(f, tuple(args))


def lam(params, body) -> Lam:
    if isinstance(params, str):
        params = tuple(params.replace(",", " ").split())
    return Lam(tuple(params), body)


def lets(bindings: Sequence[Tuple[str, object]], body):
    for x, c in reversed(list(bindings)):
        body = Let(x, c, body)
    return body


def is_value(t) -> bool:
    if isinstance(t, (Name, Lam)):
        return True
    if isinstance(t, Tup):
        return all(is_value(i) for i in t.items)
    if isinstance(t, Pack):
        return isinstance(t.arg, Name)
    return False


def is_name(t) -> bool:
    return isinstance(t, Name)


# --------------------------------------------------------------- names

class Supply:
    """Deterministic fresh names `<prefix><N>` avoiding a set of used names."""

    def __init__(self, prefix: str, avoid: Iterable[str] = ()):
        self.prefix = prefix
        self.avoid = set(avoid)
        self.n = 0

    def __call__(self) -> str:
        while True:
            self.n += 1
            x = "%s%d" % (self.prefix, self.n)
            if x not in self.avoid:
                self.avoid.add(x)
                return x


def names(t) -> Set[str]:
    out: Set[str] = set()

    def go(u):
        if isinstance(u, Name):
            out.add(u.name)
        elif isinstance(u, Lam):
            out.update(u.params)
            go(u.body)
        elif isinstance(u, Tup):
            for i in u.items:
                go(i)
        elif isinstance(u, App):
            go(u.fun)
            for a in u.args:
                go(a)
        elif isinstance(u, Let):
            out.add(u.name)
            go(u.bound)
            go(u.body)
        else:
            go(u.arg)
    go(t)
    return out


def subst(t, m: Dict[str, object], supply: Optional[Supply] = None):
    """Capture-avoiding simultaneous substitution of terms for names."""
    m = {k: v for k, v in m.items() if k in t.fv}
    if not m:
        return t
    if isinstance(t, Name):
        return m[t.name]
    if isinstance(t, Tup):
        return Tup(tuple(subst(i, m, supply) for i in t.items))
    if isinstance(t, App):
        return App(subst(t.fun, m, supply), tuple(subst(a, m, supply) for a in t.args))
    if isinstance(t, Proj):
        return Proj(t.index, subst(t.arg, m, supply))
    if isinstance(t, Pack):
        return Pack(subst(t.arg, m, supply))
    if isinstance(t, Unpack):
        return Unpack(subst(t.arg, m, supply))
    incoming: Set[str] = set().union(*(v.fv for v in m.values()))
    if supply is None:
        supply = Supply("%r", names(t) | incoming | set(m))
    if isinstance(t, Lam):
        params, ren = _rebind(t.params, incoming, supply)
        inner = {k: v for k, v in m.items() if k not in t.params}
        inner.update(ren)
        return Lam(params, subst(t.body, inner, supply))
    bound = subst(t.bound, m, supply)
    (x,), ren = _rebind((t.name,), incoming, supply)
    inner = {k: v for k, v in m.items() if k != t.name}
    inner.update(ren)
    return Let(x, bound, subst(t.body, inner, supply))


def _rebind(params, incoming, supply):
    out, ren = [], {}
    for p in params:
        if p in incoming:
            q = supply()
            out.append(q)
            ren[p] = Name(q)
        else:
            out.append(p)
    return tuple(out), ren


def rename(t, m: Dict[str, str]):
    return subst(t, {k: Name(v) for k, v in m.items()})


def alpha_key(t, env: Tuple[str, ...] = ()):
    """A hashable key equal for alpha-equivalent terms."""
    if isinstance(t, Name):
        for i, x in enumerate(env):
            if x == t.name:
                return ("b", i)
        return ("f", t.name)
    if isinstance(t, Lam):
        return ("lam", len(t.params), alpha_key(t.body, tuple(reversed(t.params)) + env))
    if isinstance(t, Tup):
        return ("tup",) + tuple(alpha_key(i, env) for i in t.items)
    if isinstance(t, App):
        return ("app", alpha_key(t.fun, env)) + tuple(alpha_key(a, env) for a in t.args)
    if isinstance(t, Let):
        return ("let", alpha_key(t.bound, env), alpha_key(t.body, (t.name,) + env))
    if isinstance(t, Proj):
        return ("proj", t.index, alpha_key(t.arg, env))
    if isinstance(t, Pack):
        return ("pack", alpha_key(t.arg, env))
    return ("unpack", alpha_key(t.arg, env))


def alpha_eq(a, b) -> bool:
    return alpha_key(a) == alpha_key(b)


def uniquify(t, avoid: Iterable[str] = ()):
    """Rename binders that shadow an enclosing binder or a free name."""
    supply = Supply("%u", names(t) | set(avoid))

    def fresh(x, scope):
        return supply() if x in scope else x

    def go(u, ren, scope):
        if isinstance(u, Name):
            return Name(ren.get(u.name, u.name))
        if isinstance(u, Lam):
            ps = []
            for p in u.params:
                q = fresh(p, scope | set(ps))
                ps.append(q)
            r2 = dict(ren)
            r2.update(zip(u.params, ps))
            return Lam(tuple(ps), go(u.body, r2, scope | set(ps)))
        if isinstance(u, Tup):
            return Tup(tuple(go(i, ren, scope) for i in u.items))
        if isinstance(u, App):
            return App(go(u.fun, ren, scope), tuple(go(a, ren, scope) for a in u.args))
        if isinstance(u, Let):
            b = go(u.bound, ren, scope)
            x = fresh(u.name, scope)
            r2 = dict(ren)
            r2[u.name] = x
            return Let(x, b, go(u.body, r2, scope | {x}))
        return type(u)(*((u.index,) if isinstance(u, Proj) else ()), go(u.arg, ren, scope))

    return go(t, {}, frozenset(t.fv) | set(avoid))


# ------------------------------------------------------- source semantics

def step_src(t):
    """One call-by-value step under the left-to-right evaluation contexts.

    Used for the source and the CPS stages. Returns None when t is a
    value or stuck.
    """
    if isinstance(t, App):
        parts = (t.fun,) + t.args
        for i, p in enumerate(parts):
            if not is_value(p):
                q = step_src(p)
                if q is None:
                    return None
                parts = parts[:i] + (q,) + parts[i + 1:]
                return App(parts[0], parts[1:])
        f = t.fun
        if isinstance(f, Lam) and len(f.params) == len(t.args):
            return subst(f.body, dict(zip(f.params, t.args)))
        return None
    if isinstance(t, Let):
        if is_value(t.bound):
            return subst(t.body, {t.name: t.bound})
        b = step_src(t.bound)
        return None if b is None else Let(t.name, b, t.body)
    if isinstance(t, Tup):
        for i, p in enumerate(t.items):
            if not is_value(p):
                q = step_src(p)
                if q is None:
                    return None
                return Tup(t.items[:i] + (q,) + t.items[i + 1:])
        return None
    if isinstance(t, Proj):
        if is_value(t.arg):
            if isinstance(t.arg, Tup) and t.index <= len(t.arg.items):
                return t.arg.items[t.index - 1]
            return None
        a = step_src(t.arg)
        return None if a is None else Proj(t.index, a)
    return None


def run_src(t, fuel: int = 10_000):
    steps = 0
    while steps < fuel:
        u = step_src(t)
        if u is None:
            return t, steps
        t, steps = u, steps + 1
    return t, steps


# ------------------------------------------------------------------- CPS

class _Cps:
    def __init__(self, avoid):
        self.fresh = Supply("%cps", avoid)

    def psi(self, v):
        if isinstance(v, Name):
            return v
        if isinstance(v, Lam):
            k = self.fresh()
            return Lam(v.params + (k,), self.colon(v.body, Name(k)))
        if isinstance(v, Tup):
            return Tup(tuple(self.psi(i) for i in v.items))
        raise ValueError("not a value: %s" % show(v))

    def colon(self, m, k):
        """M : K."""
        if is_value(m):
            if isinstance(k, Name):
                return App(k, (self.psi(m),))
            (x,) = k.params
            return subst(k.body, {x: self.psi(m)}, self.fresh)
        if isinstance(m, App):
            parts = (m.fun,) + m.args
            xs = [self.fresh() for _ in parts]
            body = App(Name(xs[0]), tuple(Name(x) for x in xs[1:]) + (k,))
            for p, x in zip(reversed(parts), reversed(xs)):
                body = self.colon(p, Lam((x,), body))
            return body
        if isinstance(m, Let):
            return self.colon(m.bound, Lam((m.name,), self.colon(m.body, k)))
        if isinstance(m, Tup):
            xs = [self.fresh() for _ in m.items]
            body = self.colon(Tup(tuple(Name(x) for x in xs)), k)
            for p, x in zip(reversed(m.items), reversed(xs)):
                body = self.colon(p, Lam((x,), body))
            return body
        if isinstance(m, Proj):
            x, y = self.fresh(), self.fresh()
            return self.colon(m.arg, Lam((x,), Let(y, Proj(m.index, Name(x)), self.colon(Name(y), k))))
        raise ValueError("not a source term: %r" % (m,))


def cps(m, halt: str = HALT):
    """cps(M) = M : \\x.@(halt, x)."""
    m = uniquify(m, {halt})
    c = _Cps(names(m) | {halt})
    x = c.fresh()
    return c.colon(m, Lam((x,), App(Name(halt), (Name(x),))))


def is_cps(t) -> bool:
    def val(v):
        if isinstance(v, Name):
            return True
        if isinstance(v, Lam):
            return term(v.body)
        if isinstance(v, Tup):
            return all(val(i) for i in v.items)
        return False

    def term(u):
        if isinstance(u, App):
            return val(u.fun) and bool(u.args) and all(val(a) for a in u.args)
        if isinstance(u, Let):
            return isinstance(u.bound, Proj) and val(u.bound.arg) and term(u.body)
        return False

    return term(t)


# ----------------------------------------------------------- value naming

class _Vn:
    def __init__(self, avoid):
        self.fresh = Supply("%vn", avoid)

    def vn(self, m):
        if isinstance(m, App):
            parts = (m.fun,) + m.args
            for i, p in enumerate(parts):
                if not isinstance(p, Name):
                    y = self.fresh()
                    binds = self.evn(p, y)
                    rest = parts[:i] + (Name(y),) + parts[i + 1:]
                    return lets(binds, self.vn(App(rest[0], rest[1:])))
            return m
        if isinstance(m, Let) and isinstance(m.bound, Proj):
            v = m.bound.arg
            if isinstance(v, Name):
                return Let(m.name, m.bound, self.vn(m.body))
            y = self.fresh()
            return lets(self.evn(v, y), Let(m.name, Proj(m.bound.index, Name(y)), self.vn(m.body)))
        raise ValueError("not a CPS term: %s" % show(m))

    def evn(self, v, y) -> List[Tuple[str, object]]:
        if isinstance(v, Lam):
            return [(y, Lam(v.params, self.vn(v.body)))]
        if isinstance(v, Tup):
            items = list(v.items)
            for i, p in enumerate(items):
                if not isinstance(p, Name):
                    z = self.fresh()
                    items[i] = Name(z)
                    return self.evn(p, z) + self.evn(Tup(tuple(items)), y)
            return [(y, v)]
        raise ValueError("cannot name %s" % show(v))


def value_name(m):
    return _Vn(names(m) | {HALT}).vn(m)


def readback(m):
    if isinstance(m, Lam):
        return Lam(m.params, readback(m.body))
    if isinstance(m, (Name, Tup, App)):
        return m
    if isinstance(m, Let):
        if isinstance(m.bound, (Proj, Unpack)):
            return Let(m.name, m.bound, readback(m.body))
        return subst(readback(m.body), {m.name: readback(m.bound)})
    raise ValueError("not a value-named term: %s" % show(m))


def is_vn(t) -> bool:
    def val(v):
        if isinstance(v, Lam):
            return term(v.body)
        if isinstance(v, Tup):
            return all(isinstance(i, Name) for i in v.items)
        return False

    def term(u):
        if isinstance(u, App):
            return isinstance(u.fun, Name) and bool(u.args) and all(isinstance(a, Name) for a in u.args)
        if isinstance(u, Let):
            b = u.bound
            ok = val(b) or (isinstance(b, (Proj, Pack, Unpack)) and isinstance(b.arg, Name))
            return ok and term(u.body)
        return False

    return term(t)


# ----------------------------------------------- value-named semantics

def _split_context(t):
    """Split t into its evaluation context (value lets) and the redex part."""
    ctx = []
    while isinstance(t, Let) and (isinstance(t.bound, (Lam, Tup)) or
                                  (isinstance(t.bound, Pack) and isinstance(t.bound.arg, Name))):
        ctx.append((t.name, t.bound))
        t = t.body
    return ctx, t


def lookup(ctx, x: str):
    """E(x): the value bound to x, provided no inner let captures its free names."""
    for j in range(len(ctx) - 1, -1, -1):
        y, v = ctx[j]
        if y == x:
            inner = {n for n, _ in ctx[j + 1:]}
            return None if inner & v.fv else v
    return None


def step_vn(t):
    """One step of the value-named calculus (also used after closure conversion)."""
    ctx, r = _split_context(t)
    if isinstance(r, App) and isinstance(r.fun, Name):
        f = lookup(ctx, r.fun.name)
        if isinstance(f, Lam) and len(f.params) == len(r.args):
            body = subst(f.body, dict(zip(f.params, r.args)))
            return lets(ctx, body)
        return None
    if isinstance(r, Let) and isinstance(r.bound, (Proj, Unpack)) and isinstance(r.bound.arg, Name):
        v = lookup(ctx, r.bound.arg.name)
        if isinstance(r.bound, Proj):
            if isinstance(v, Tup) and r.bound.index <= len(v.items):
                return lets(ctx, subst(r.body, {r.name: v.items[r.bound.index - 1]}))
            return None
        if isinstance(v, Pack):
            return lets(ctx, subst(r.body, {r.name: v.arg}))
    return None


def step(stage: str, t) -> List[object]:
    """Successors of t under the reduction rules of the given stage."""
    stage = stage.lower()
    u = step_src(t) if stage in ("src", "cps") else step_vn(t)
    return [] if u is None else [u]


# ------------------------------------------------------ closure conversion

class _Cc:
    def __init__(self, avoid, halt: str):
        self.fresh = Supply("%cc", avoid)
        self.halt = halt

    def cc(self, m):
        if isinstance(m, App):
            x = m.fun
            if isinstance(x, Name) and x.name == self.halt:
                return m
            u, c, e = self.fresh(), self.fresh(), self.fresh()
            return lets([(u, Unpack(x)), (c, Proj(1, Name(u))), (e, Proj(2, Name(u)))],
                        App(Name(c), (Name(e),) + m.args))
        if isinstance(m, Let):
            if isinstance(m.bound, Lam):
                fn = m.bound
                zs = sorted(fn.fv)
                c, e, ep, p = self.fresh(), self.fresh(), self.fresh(), self.fresh()
                unpack_env = [(z, Proj(i + 1, Name(ep))) for i, z in enumerate(zs)]
                code = Lam((ep,) + fn.params, lets(unpack_env, self.cc(fn.body)))
                return lets([(c, code),
                             (e, Tup(tuple(Name(z) for z in zs))),
                             (p, Tup((Name(c), Name(e)))),
                             (m.name, Pack(Name(p)))],
                            self.cc(m.body))
            return Let(m.name, m.bound, self.cc(m.body))
        raise ValueError("not a value-named term: %s" % show(m))


def closure_convert(m, halt: str = HALT):
    """Closure conversion with existential pack/unpack and direct halt calls."""
    return _Cc(names(m) | {halt}, halt).cc(m)


def _env_lets(body, ep: str):
    """Strip `let z1 = pi1(ep) ... zk = pik(ep)`; returns ({zi: i}, rest)."""
    pos = {}
    while (isinstance(body, Let) and isinstance(body.bound, Proj)
           and body.bound.arg == Name(ep)):
        pos[body.name] = body.bound.index
        body = body.body
    return pos, body


def uncc(t):
    """Left inverse of closure conversion.

    Recognises the closure and call-site patterns emitted by
    closure_convert and rebuilds the open function, substituting the
    environment tuple for the unpacked names. Any layout of the
    environment tuple is accepted, so the result identifies closure
    converted terms that differ only in how environments are laid out.
    Raises ValueError on terms not of that shape.
    """
    if isinstance(t, App):
        return t
    if not isinstance(t, Let):
        raise ValueError("not a closure-converted term: %s" % show(t))
    b = t.bound
    if (isinstance(b, Unpack) and isinstance(t.body, Let) and isinstance(t.body.body, Let)):
        l1, l2 = t.body, t.body.body
        call = l2.body
        if (l1.bound == Proj(1, Name(t.name)) and l2.bound == Proj(2, Name(t.name))
                and isinstance(call, App) and call.fun == Name(l1.name)
                and call.args[:1] == (Name(l2.name),)):
            return App(b.arg, call.args[1:])
    if isinstance(b, Lam) and b.params and isinstance(t.body, Let):
        le = t.body
        lp = le.body if isinstance(le.body, Let) else None
        lx = lp.body if lp is not None and isinstance(lp.body, Let) else None
        if (isinstance(le.bound, Tup) and lp is not None
                and lp.bound == Tup((Name(t.name), Name(le.name)))
                and lx is not None and lx.bound == Pack(Name(lp.name))):
            ep = b.params[0]
            pos, inner = _env_lets(b.body, ep)
            env = le.bound.items
            if all(i <= len(env) for i in pos.values()) and ep not in uncc(inner).fv:
                m = {z: env[i - 1] for z, i in pos.items()}
                fn = Lam(b.params[1:], subst(uncc(inner), m))
                return Let(lx.name, fn, uncc(lx.body))
    return Let(t.name, b, uncc(t.body))


def functions_closed(t) -> bool:
    ok = True

    def go(u):
        nonlocal ok
        if isinstance(u, Lam):
            if u.fv:
                ok = False
            go(u.body)
        elif isinstance(u, Tup):
            for i in u.items:
                go(i)
        elif isinstance(u, App):
            go(u.fun)
            for a in u.args:
                go(a)
        elif isinstance(u, Let):
            go(u.bound)
            go(u.body)
        elif isinstance(u, (Proj, Pack, Unpack)):
            go(u.arg)
    go(t)
    return ok


# ---------------------------------------------------------------- hoisting

def _h(m):
    if isinstance(m, App):
        return m, []
    if isinstance(m, Let):
        if isinstance(m.bound, Lam):
            t, f = _h(m.bound.body)
            t2, f2 = _h(m.body)
            return t2, f + [(m.name, Lam(m.bound.params, t))] + f2
        t, f = _h(m.body)
        return Let(m.name, m.bound, t), f
    raise ValueError("not a value-named term: %s" % show(m))


def hoist(m):
    """Move every function definition to the top level."""
    assert functions_closed(m), "hoisting expects closure-converted input"
    t, f = _h(m)
    return lets(f, t)


def is_hoisted(t) -> bool:
    """Program shape: top-level function lets over a lambda-free body."""
    while isinstance(t, Let) and isinstance(t.bound, Lam):
        if _has_lam(t.bound.body):
            return False
        t = t.body
    return not _has_lam(t)


def _has_lam(t) -> bool:
    if isinstance(t, Lam):
        return True
    if isinstance(t, Tup):
        return any(_has_lam(i) for i in t.items)
    if isinstance(t, App):
        return _has_lam(t.fun) or any(_has_lam(a) for a in t.args)
    if isinstance(t, Let):
        return _has_lam(t.bound) or _has_lam(t.body)
    if isinstance(t, (Proj, Pack, Unpack)):
        return _has_lam(t.arg)
    return False


def pipeline(m, halt: str = HALT) -> Dict[str, object]:
    c = cps(m, halt)
    v = value_name(c)
    k = closure_convert(v, halt)
    return {"cps": c, "vn": v, "cc": k, "hoist": hoist(k)}


# ---------------------------------------------------------------- printing

def show(t) -> str:
    """Readable ASCII notation."""
    if isinstance(t, Name):
        return t.name
    if isinstance(t, Lam):
        return "\\%s. %s" % (",".join(t.params), show(t.body))
    if isinstance(t, Tup):
        if len(t.items) == 1:
            return "(%s,)" % show(t.items[0])
        return "(%s)" % ", ".join(show(i) for i in t.items)
    if isinstance(t, App):
        return "@(%s)" % ", ".join(show(a) for a in (t.fun,) + t.args)
    if isinstance(t, Let):
        return "let %s = %s in %s" % (t.name, show(t.bound), show(t.body))
    if isinstance(t, Proj):
        return "pi%d(%s)" % (t.index, show(t.arg))
    if isinstance(t, Pack):
        return "pack(%s)" % show(t.arg)
    return "unpack(%s)" % show(t.arg)


def show_lines(t, indent: str = "") -> str:
    """Multi-line layout with one let per line."""
    if isinstance(t, Let):
        b = t.bound
        if isinstance(b, Lam):
            head = "%slet %s = \\%s." % (indent, t.name, ",".join(b.params))
            return "%s\n%s\n%sin\n%s" % (head, show_lines(b.body, indent + "    "), indent,
                                        show_lines(t.body, indent))
        return "%slet %s = %s in\n%s" % (indent, t.name, show(b), show_lines(t.body, indent))
    return indent + show(t)


def to_sexpr(t) -> str:
    if isinstance(t, Name):
        return t.name
    if isinstance(t, Lam):
        return "(lam (%s) %s)" % (" ".join(t.params), to_sexpr(t.body))
    if isinstance(t, Tup):
        return "(tuple%s)" % "".join(" " + to_sexpr(i) for i in t.items)
    if isinstance(t, App):
        return "(app %s)" % " ".join(to_sexpr(a) for a in (t.fun,) + t.args)
    if isinstance(t, Let):
        return "(let %s %s %s)" % (t.name, to_sexpr(t.bound), to_sexpr(t.body))
    if isinstance(t, Proj):
        return "(proj %d %s)" % (t.index, to_sexpr(t.arg))
    if isinstance(t, Pack):
        return "(pack %s)" % to_sexpr(t.arg)
    return "(unpack %s)" % to_sexpr(t.arg)


def from_sexpr(src: str):
    lx = Lexer(src, ["(", ")"], comment=";")

    def go():
        if lx.accept("("):
            head = lx.ident()
            if head == "lam":
                lx.expect("(")
                ps = []
                while not lx.accept(")"):
                    ps.append(lx.ident())
                out = Lam(tuple(ps), go())
            elif head == "tuple":
                items = []
                while not lx.peek_is(")"):
                    items.append(go())
                out = Tup(tuple(items))
            elif head == "app":
                f = go()
                args = []
                while not lx.peek_is(")"):
                    args.append(go())
                out = App(f, tuple(args))
            elif head == "let":
                x = lx.ident()
                b = go()
                out = Let(x, b, go())
            elif head == "proj":
                i = int(lx.expect_kind("int").text)
                out = Proj(i, go())
            elif head in ("pack", "unpack"):
                out = (Pack if head == "pack" else Unpack)(go())
            else:
                raise lx.error("unknown form")
            lx.expect(")")
            return out
        return Name(lx.ident())

    t = go()
    lx.expect_eof()
    return t


_SYMS = ["\\", "λ", ".", "(", ")", ",", "@", "="]
_RESERVED = {"let", "in", "pack", "unpack"}


def parse(src: str):
    """Parse the readable notation printed by `show`.

    `\\x,k. M`, `@(M, N, ...)`, `let x = M in N`, tuples `(M, N)`,
    `()` and `(M,)`, projections `pi1(M)`, `pack(x)`, `unpack(x)`.
    """
    lx = Lexer(src, _SYMS)

    def term():
        if lx.accept("\\") or lx.accept("λ"):
            ps = [lx.ident(_RESERVED)]
            while lx.accept(",") or lx.peek().kind == "ident":
                ps.append(lx.ident(_RESERVED))
            lx.expect(".")
            return Lam(tuple(ps), term())
        if lx.accept("let"):
            x = lx.ident(_RESERVED)
            lx.expect("=")
            b = term()
            lx.expect("in")
            return Let(x, b, term())
        if lx.accept("@"):
            lx.expect("(")
            parts = [term()]
            while lx.accept(","):
                parts.append(term())
            lx.expect(")")
            if len(parts) < 2:
                raise lx.error("application needs an argument")
            return App(parts[0], tuple(parts[1:]))
        if lx.accept("("):
            items = []
            trailing = False
            while not lx.peek_is(")"):
                items.append(term())
                trailing = False
                if not lx.accept(","):
                    break
                trailing = True
            lx.expect(")")
            if len(items) == 1 and not trailing:
                return items[0]
            return Tup(tuple(items))
        tok = lx.peek()
        if tok.kind == "ident" and tok.text in ("pack", "unpack"):
            lx.next()
            lx.expect("(")
            a = term()
            lx.expect(")")
            return Pack(a) if tok.text == "pack" else Unpack(a)
        if tok.kind == "ident" and tok.text.startswith("pi") and tok.text[2:].isdigit() and lx.peek_is("(", 1):
            lx.next()
            lx.expect("(")
            a = term()
            lx.expect(")")
            return Proj(int(tok.text[2:]), a)
        return Name(lx.ident(_RESERVED))

    t = term()
    lx.expect_eof()
    return t
