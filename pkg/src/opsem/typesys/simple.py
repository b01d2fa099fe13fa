"""Simple types: principal type inference and ML let-polymorphism."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from .. import lam
from .. import terms as fo
from ..syntax import Lexer


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class Base:
    name: str


@dataclass(frozen=True)
class Arrow:
    dom: object
    cod: object


def arrows(*ts):
    """arrows(A, B, C) = A -> B -> C."""
    out = ts[-1]
    for t in reversed(ts[:-1]):
        out = Arrow(t, out)
    return out


def tvars(a) -> List[str]:
    """Type variables in first-occurrence order."""
    out: Dict[str, None] = {}

    def go(t):
        if isinstance(t, TVar):
            out.setdefault(t.name, None)
        elif isinstance(t, Arrow):
            go(t.dom)
            go(t.cod)
    go(a)
    return list(out)


def show_type(a) -> str:
    if isinstance(a, TVar) or isinstance(a, Base):
        return a.name
    dom = show_type(a.dom)
    if isinstance(a.dom, Arrow):
        dom = "(%s)" % dom
    return "%s -> %s" % (dom, show_type(a.cod))


def subst_type(a, m: Dict[str, object]):
    if isinstance(a, TVar):
        return m.get(a.name, a)
    if isinstance(a, Arrow):
        return Arrow(subst_type(a.dom, m), subst_type(a.cod, m))
    return a


def canonical(*types) -> tuple:
    """Rename type variables to t0, t1, ... in first-occurrence order."""
    ren: Dict[str, object] = {}
    for a in types:
        for x in tvars(a):
            if x not in ren:
                ren[x] = TVar("t%d" % len(ren))
    return tuple(subst_type(a, ren) for a in types)


def canonical_typing(ctx: Dict[str, object], a) -> Tuple[Dict[str, object], object]:
    """Canonical names for a typing: the type first, then the context by name."""
    keys = sorted(ctx)
    out = canonical(a, *(ctx[k] for k in keys))
    return dict(zip(keys, out[1:])), out[0]


def same_typing(j1, j2) -> bool:
    """Equality of two typings (or of two absent results) up to renaming."""
    if j1 is None or j2 is None:
        return j1 is None and j2 is None
    return canonical_typing(*j1) == canonical_typing(*j2)


# ---------------------------------------------------- first-order encoding

ARROW = "->"


def to_term(a):
    if isinstance(a, TVar):
        return fo.Var(a.name)
    if isinstance(a, Base):
        return fo.App(a.name)
    return fo.App(ARROW, (to_term(a.dom), to_term(a.cod)))


def from_term(t):
    if isinstance(t, fo.Var):
        return TVar(t.name)
    if t.fn == ARROW:
        return Arrow(from_term(t.args[0]), from_term(t.args[1]))
    return Base(t.fn)


def is_instance(general, specific) -> bool:
    """True when `specific` = S(general) for some substitution S."""
    return fo.match(to_term(general), to_term(specific)) is not None


def typing_instance(general, specific) -> bool:
    """Instance check for typings (ctx, type), sharing one substitution."""
    gctx, ga = general
    sctx, sa = specific
    keys = sorted(gctx)
    if any(k not in sctx for k in keys):
        return False
    g = fo.App("j", tuple(to_term(x) for x in [ga] + [gctx[k] for k in keys]))
    s = fo.App("j", tuple(to_term(x) for x in [sa] + [sctx[k] for k in keys]))
    return fo.match(g, s) is not None


# ------------------------------------------------------------ lambda terms

def distinct_binders(m):
    """Rename bound variables apart from each other and from the free ones."""
    used = set(lam.all_names(m))
    seen = set(m.fv)

    def fresh(x):
        if x not in seen:
            seen.add(x)
            return x
        y = lam.fresh_name(x, used | seen)
        used.add(y)
        seen.add(y)
        return y

    def go(t, ren):
        if isinstance(t, lam.Var):
            return lam.Var(ren.get(t.name, t.name))
        if isinstance(t, lam.Abs):
            y = fresh(t.param)
            return lam.Abs(y, go(t.body, {**ren, t.param: y}))
        if isinstance(t, lam.App):
            return lam.App(go(t.fun, ren), go(t.arg, ren))
        d = go(t.defn, ren)
        y = fresh(t.name)
        return lam.Let(y, d, go(t.body, {**ren, t.name: y}))

    return go(m, {})


class _Fresh:
    def __init__(self, prefix="%t"):
        self.c = itertools.count()
        self.prefix = prefix

    def __call__(self):
        return fo.Var("%s%d" % (self.prefix, next(self.c)))


def _tx(x: str):
    return fo.Var("%%x_%s" % x)


def infer_simple(m) -> Optional[Tuple[Dict[str, object], object]]:
    """Most general typing Gamma |- m : A by reduction to unification.

    Lets are read as redexes. Returns None when m is not typable.
    """
    m = distinct_binders(lam.desugar(m))
    fresh = _Fresh()
    t0 = fresh()
    goals = [(m, t0)]
    eqs = []
    while goals:
        t, a = goals.pop()
        if isinstance(t, lam.Var):
            eqs.append((_tx(t.name), a))
        elif isinstance(t, lam.App):
            t1 = fresh()
            goals.append((t.arg, t1))
            goals.append((t.fun, fo.App(ARROW, (t1, a))))
        else:
            t1 = fresh()
            eqs.append((a, fo.App(ARROW, (_tx(t.param), t1))))
            goals.append((t.body, t1))
    s = fo.unify(eqs)
    if s is None:
        return None
    ctx = {x: from_term(s(_tx(x))) for x in sorted(m.fv)}
    return ctx, from_term(s(t0))


# ------------------------------------------------------- ML inference (PT)

def _rename_apart(j, fresh):
    ctx, a = j
    vs: Dict[str, object] = {}
    for t in [a] + list(ctx.values()):
        for x in fo.variables(t):
            if x not in vs:
                vs[x] = fresh()
    return {k: fo.apply_subst(vs, v) for k, v in ctx.items()}, fo.apply_subst(vs, a)


def _merge(s, c1, c2):
    out = {k: s(v) for k, v in c1.items()}
    for k, v in c2.items():
        out.setdefault(k, s(v))
    return out


def infer_ml(m) -> Optional[Tuple[Dict[str, object], object]]:
    """Principal typing with let-polymorphism, via the function PT.

    Theta maps let-bound names to the typing of their definiens; each
    use is renamed apart when it appears as the argument of an
    application. When a let-bound name is unused, the definiens must
    still be typable and its context is merged with the body's.
    """
    m = distinct_binders(m)
    fresh = _Fresh()

    def pt(t, theta):
        if isinstance(t, lam.Var):
            if t.name in theta:
                return theta[t.name]
            v = _tx(t.name)
            return {t.name: v}, v
        if isinstance(t, lam.Abs):
            j = pt(t.body, theta)
            if j is None:
                return None
            ctx, a = j
            if t.param in ctx:
                ctx = dict(ctx)
                a1 = ctx.pop(t.param)
                return ctx, fo.App(ARROW, (a1, a))
            return ctx, fo.App(ARROW, (fresh(), a))
        if isinstance(t, lam.App):
            j1 = pt(t.fun, theta)
            j2 = pt(t.arg, theta)
            if j1 is None or j2 is None:
                return None
            return _unify_apl(j1, j2)
        j1 = pt(t.defn, theta)
        if j1 is None:
            return None
        j2 = pt(t.body, {**theta, t.name: j1})
        if j2 is None:
            return None
        if t.name in t.body.fv:
            return j2
        c1, _ = _rename_apart(j1, fresh)
        c2, a2 = j2
        s = fo.unify([(c1[k], c2[k]) for k in c1 if k in c2])
        if s is None:
            return None
        return _merge(s, c2, c1), s(a2)

    def _unify_apl(j1, j2):
        c1, a1 = j1
        c2, a2 = _rename_apart(j2, fresh)
        t = fresh()
        eqs = [(a1, fo.App(ARROW, (a2, t)))]
        eqs += [(c1[k], c2[k]) for k in c1 if k in c2]
        s = fo.unify(eqs)
        if s is None:
            return None
        return _merge(s, c1, c2), s(t)

    j = pt(m, {})
    if j is None:
        return None
    ctx, a = j
    return {k: from_term(v) for k, v in sorted(ctx.items())}, from_term(a)


def let_expand(m, fresh=None):
    """Replace `let x = M in N` by `(\\d. [M/x]N) M`, d fresh.

    The extra argument keeps the definiens typable in the same context
    even when x does not occur in N.
    """
    avoid = set(lam.all_names(m))
    counter = itertools.count()

    def new():
        while True:
            d = "%%d%d" % next(counter)
            if d not in avoid:
                return d

    def go(t):
        if isinstance(t, lam.Var):
            return t
        if isinstance(t, lam.Abs):
            return lam.Abs(t.param, go(t.body))
        if isinstance(t, lam.App):
            return lam.App(go(t.fun), go(t.arg))
        d1 = go(t.defn)
        b = lam.substitute(go(t.body), t.name, d1)
        return lam.App(lam.Abs(new(), b), d1)

    return go(m)


def ml_oracle(m) -> Optional[Tuple[Dict[str, object], object]]:
    """Propositional typing after let-expansion (exponential; test oracle)."""
    return infer_simple(let_expand(m))


# ------------------------------------------------------- Church checking

def type_of(ctx: Dict[str, object], m, ann: Dict[str, object]):
    """Type of m where each binder's type is read from `ann`, or None."""
    if isinstance(m, lam.Var):
        return ctx.get(m.name)
    if isinstance(m, lam.Abs):
        if m.param not in ann:
            return None
        b = type_of({**ctx, m.param: ann[m.param]}, m.body, ann)
        return None if b is None else Arrow(ann[m.param], b)
    if isinstance(m, lam.App):
        f = type_of(ctx, m.fun, ann)
        a = type_of(ctx, m.arg, ann)
        if isinstance(f, Arrow) and f.dom == a:
            return f.cod
        return None
    d = type_of(ctx, m.defn, ann)
    if d is None:
        return None
    return type_of({**ctx, m.name: d}, m.body, ann)


# ---------------------------------------------------------------- parsing

_TV = re.compile(r"^[a-z][0-9']*$")


def parse_type(src: str):
    """`(t0 -> t0) -> t0 -> t0`; one-letter names (with digits) are variables."""
    lx = Lexer(src, ["->", "→", "(", ")"])

    def typ():
        a = atom()
        if lx.accept("->") or lx.accept("→"):
            return Arrow(a, typ())
        return a

    def atom():
        if lx.accept("("):
            a = typ()
            lx.expect(")")
            return a
        x = lx.ident()
        return TVar(x) if _TV.match(x) else Base(x)

    a = typ()
    lx.expect_eof()
    return a
