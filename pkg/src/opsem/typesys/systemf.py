"""System F (Church style) with products, sums and existential types."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Set

from ..syntax import Lexer

# ------------------------------------------------------------------ types


@dataclass(frozen=True)
class FVar:
    name: str


@dataclass(frozen=True)
class Forall:
    var: str
    body: object


@dataclass(frozen=True)
class Exists:
    var: str
    body: object


@dataclass(frozen=True)
class FArrow:
    dom: object
    cod: object


@dataclass(frozen=True)
class FProd:
    left: object
    right: object


@dataclass(frozen=True)
class FSum:
    left: object
    right: object


_BINARY = (FArrow, FProd, FSum)
_QUANT = (Forall, Exists)


def ftv(a) -> Set[str]:
    if isinstance(a, FVar):
        return {a.name}
    if isinstance(a, _QUANT):
        return ftv(a.body) - {a.var}
    return ftv(a.__dict__[_fields(a)[0]]) | ftv(a.__dict__[_fields(a)[1]])


def _fields(a):
    return ("dom", "cod") if isinstance(a, FArrow) else ("left", "right")


def _parts(a):
    f1, f2 = _fields(a)
    return getattr(a, f1), getattr(a, f2)


def type_names(a) -> Set[str]:
    if isinstance(a, FVar):
        return {a.name}
    if isinstance(a, _QUANT):
        return {a.var} | type_names(a.body)
    l, r = _parts(a)
    return type_names(l) | type_names(r)


def _fresh(base: str, avoid: Set[str]) -> str:
    base = base.rstrip("0123456789'") or "t"
    for i in itertools.count(1):
        x = "%s%d" % (base, i)
        if x not in avoid:
            return x


def subst_type(a, m: Dict[str, object]):
    """Capture-avoiding simultaneous substitution on types."""
    m = {k: v for k, v in m.items() if k in ftv(a)}
    if not m:
        return a
    if isinstance(a, FVar):
        return m[a.name]
    if isinstance(a, _QUANT):
        incoming = set().union(*(ftv(v) for v in m.values()))
        t = a.var
        inner = {k: v for k, v in m.items() if k != t}
        if t in incoming:
            u = _fresh(t, incoming | type_names(a.body) | set(m))
            inner[t] = FVar(u)
            t = u
        return type(a)(t, subst_type(a.body, inner))
    l, r = _parts(a)
    return type(a)(subst_type(l, m), subst_type(r, m))


def type_key(a, env=()):
    if isinstance(a, FVar):
        return ("b", env.index(a.name)) if a.name in env else ("f", a.name)
    if isinstance(a, _QUANT):
        return (type(a).__name__, type_key(a.body, (a.var,) + env))
    l, r = _parts(a)
    return (type(a).__name__, type_key(l, env), type_key(r, env))


def type_eq(a, b) -> bool:
    """Equality up to renaming of bound type variables."""
    return type_key(a) == type_key(b)


def show_ftype(a, prec: int = 0) -> str:
    # precedence: 0 quantifier/arrow, 1 sum, 2 product, 3 atom
    if isinstance(a, FVar):
        return a.name
    if isinstance(a, _QUANT):
        s = "%s %s. %s" % ("forall" if isinstance(a, Forall) else "exists", a.var, show_ftype(a.body, 0))
        return "(%s)" % s if prec > 0 else s
    if isinstance(a, FArrow):
        s = "%s -> %s" % (show_ftype(a.dom, 1), show_ftype(a.cod, 0))
        return "(%s)" % s if prec > 0 else s
    level = 1 if isinstance(a, FSum) else 2
    op = " + " if level == 1 else " * "
    s = "%s%s%s" % (show_ftype(a.left, level), op, show_ftype(a.right, level + 1))
    return "(%s)" % s if prec > level else s


# ------------------------------------------------------------------ terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lam:
    param: str
    ty: object
    body: object


@dataclass(frozen=True)
class App:
    fun: object
    arg: object


@dataclass(frozen=True)
class TLam:
    var: str
    body: object


@dataclass(frozen=True)
class TApp:
    fun: object
    ty: object


@dataclass(frozen=True)
class Pair:
    left: object
    right: object


@dataclass(frozen=True)
class Proj:
    index: int
    arg: object


@dataclass(frozen=True)
class Inj:
    index: int
    ty: object  # the sum type A1 + A2
    arg: object


@dataclass(frozen=True)
class Case:
    arg: object
    left: object
    right: object


@dataclass(frozen=True)
class Pack:
    ty: object  # the existential type
    witness: object
    arg: object


@dataclass(frozen=True)
class Unpack:
    arg: object
    body: object


def check_f(ctx: Dict[str, object], m) -> Optional[object]:
    """The type of m under ctx, or None when no derivation exists."""
    if isinstance(m, Var):
        return ctx.get(m.name)
    if isinstance(m, Lam):
        b = check_f({**ctx, m.param: m.ty}, m.body)
        return None if b is None else FArrow(m.ty, b)
    if isinstance(m, App):
        f = check_f(ctx, m.fun)
        a = check_f(ctx, m.arg)
        if isinstance(f, FArrow) and a is not None and type_eq(f.dom, a):
            return f.cod
        return None
    if isinstance(m, TLam):
        if any(m.var in ftv(a) for a in ctx.values()):
            return None
        b = check_f(ctx, m.body)
        return None if b is None else Forall(m.var, b)
    if isinstance(m, TApp):
        f = check_f(ctx, m.fun)
        if isinstance(f, Forall):
            return subst_type(f.body, {f.var: m.ty})
        return None
    if isinstance(m, Pair):
        l, r = check_f(ctx, m.left), check_f(ctx, m.right)
        return None if l is None or r is None else FProd(l, r)
    if isinstance(m, Proj):
        a = check_f(ctx, m.arg)
        if isinstance(a, FProd) and m.index in (1, 2):
            return a.left if m.index == 1 else a.right
        return None
    if isinstance(m, Inj):
        a = check_f(ctx, m.arg)
        if isinstance(m.ty, FSum) and m.index in (1, 2) and a is not None:
            want = m.ty.left if m.index == 1 else m.ty.right
            return m.ty if type_eq(a, want) else None
        return None
    if isinstance(m, Case):
        a = check_f(ctx, m.arg)
        n1, n2 = check_f(ctx, m.left), check_f(ctx, m.right)
        if (isinstance(a, FSum) and isinstance(n1, FArrow) and isinstance(n2, FArrow)
                and type_eq(n1.dom, a.left) and type_eq(n2.dom, a.right) and type_eq(n1.cod, n2.cod)):
            return n1.cod
        return None
    if isinstance(m, Pack):
        a = check_f(ctx, m.arg)
        if isinstance(m.ty, Exists) and a is not None:
            want = subst_type(m.ty.body, {m.ty.var: m.witness})
            return m.ty if type_eq(a, want) else None
        return None
    if isinstance(m, Unpack):
        a = check_f(ctx, m.arg)
        n = check_f(ctx, m.body)
        if not (isinstance(a, Exists) and isinstance(n, Forall) and isinstance(n.body, FArrow)):
            return None
        c = n.body.cod
        if n.var in ftv(c):
            return None
        if not type_eq(Exists(n.var, n.body.dom), a):
            return None
        return c
    raise TypeError("not a System F term: %r" % (m,))


# -------------------------------------------------------------- reduction

def term_fv(m) -> Set[str]:
    if isinstance(m, Var):
        return {m.name}
    if isinstance(m, Lam):
        return term_fv(m.body) - {m.param}
    return set().union(*(term_fv(c) for c in _children(m)))


def term_ftv(m) -> Set[str]:
    """Type variables occurring free in the annotations of m."""
    if isinstance(m, Var):
        return set()
    if isinstance(m, TLam):
        return term_ftv(m.body) - {m.var}
    out = set().union(*(term_ftv(c) for c in _children(m)))
    for a in _types(m):
        out |= ftv(a)
    return out


def _children(m):
    if isinstance(m, (Lam, TLam)):
        return (m.body,)
    if isinstance(m, (App, Pair)):
        return (m.fun, m.arg) if isinstance(m, App) else (m.left, m.right)
    if isinstance(m, (TApp,)):
        return (m.fun,)
    if isinstance(m, (Proj, Inj, Pack)):
        return (m.arg,)
    if isinstance(m, Case):
        return (m.arg, m.left, m.right)
    if isinstance(m, Unpack):
        return (m.arg, m.body)
    return ()


def _types(m):
    if isinstance(m, Lam):
        return (m.ty,)
    if isinstance(m, (TApp, Inj)):
        return (m.ty,)
    if isinstance(m, Pack):
        return (m.ty, m.witness)
    return ()


def _all_names(m) -> Set[str]:
    out = set()
    if isinstance(m, (Var,)):
        out.add(m.name)
    if isinstance(m, Lam):
        out.add(m.param)
    if isinstance(m, TLam):
        out.add(m.var)
    for a in _types(m):
        out |= type_names(a)
    for c in _children(m):
        out |= _all_names(c)
    return out


def subst_term(m, x: str, n):
    """[n/x]m, capture-avoiding for term and type binders."""
    if x not in term_fv(m):
        return m
    if isinstance(m, Var):
        return n
    if isinstance(m, Lam):
        if m.param in term_fv(n):
            y = _fresh(m.param, term_fv(n) | _all_names(m) | {x})
            m = Lam(y, m.ty, subst_term(m.body, m.param, Var(y)))
        return Lam(m.param, m.ty, subst_term(m.body, x, n))
    if isinstance(m, TLam):
        if m.var in term_ftv(n):
            u = _fresh(m.var, term_ftv(n) | _all_names(m) | _all_names(n))
            m = TLam(u, subst_tterm(m.body, m.var, FVar(u)))
        return TLam(m.var, subst_term(m.body, x, n))
    return _rebuild(m, [subst_term(c, x, n) for c in _children(m)], list(_types(m)))


def subst_tterm(m, t: str, a):
    """[a/t]m on the type annotations of m."""
    if t not in term_ftv(m):
        return m
    if isinstance(m, TLam):
        if m.var in ftv(a):
            u = _fresh(m.var, ftv(a) | _all_names(m) | {t})
            m = TLam(u, subst_tterm(m.body, m.var, FVar(u)))
        return TLam(m.var, subst_tterm(m.body, t, a))
    return _rebuild(m, [subst_tterm(c, t, a) for c in _children(m)],
                    [subst_type(b, {t: a}) for b in _types(m)])


def _rebuild(m, cs, ts):
    if isinstance(m, Lam):
        return Lam(m.param, ts[0], cs[0])
    if isinstance(m, App):
        return App(cs[0], cs[1])
    if isinstance(m, TApp):
        return TApp(cs[0], ts[0])
    if isinstance(m, Pair):
        return Pair(cs[0], cs[1])
    if isinstance(m, Proj):
        return Proj(m.index, cs[0])
    if isinstance(m, Inj):
        return Inj(m.index, ts[0], cs[0])
    if isinstance(m, Case):
        return Case(cs[0], cs[1], cs[2])
    if isinstance(m, Pack):
        return Pack(ts[0], ts[1], cs[0])
    if isinstance(m, Unpack):
        return Unpack(cs[0], cs[1])
    if isinstance(m, TLam):
        return TLam(m.var, cs[0])
    return m


def _root(m):
    if isinstance(m, App) and isinstance(m.fun, Lam):
        return subst_term(m.fun.body, m.fun.param, m.arg)
    if isinstance(m, TApp) and isinstance(m.fun, TLam):
        return subst_tterm(m.fun.body, m.fun.var, m.ty)
    if isinstance(m, Proj) and isinstance(m.arg, Pair):
        return m.arg.left if m.index == 1 else m.arg.right
    if isinstance(m, Case) and isinstance(m.arg, Inj):
        return App(m.left if m.arg.index == 1 else m.right, m.arg.arg)
    if isinstance(m, Unpack) and isinstance(m.arg, Pack):
        return App(TApp(m.body, m.arg.witness), m.arg.arg)
    return None


def f_reducts(m) -> List[object]:
    """All one-step reducts (the rules apply in any context)."""
    out = []
    r = _root(m)
    if r is not None:
        out.append(r)
    cs = list(_children(m))
    for i, c in enumerate(cs):
        for c2 in f_reducts(c):
            out.append(_rebuild(m, cs[:i] + [c2] + cs[i + 1:], list(_types(m))))
    return out


# ------------------------------------------------------- printing/parsing

def show_fterm(m) -> str:
    if isinstance(m, Var):
        return m.name
    if isinstance(m, Lam):
        return "\\%s:%s. %s" % (m.param, _tyatom(m.ty), show_fterm(m.body))
    if isinstance(m, TLam):
        return "/\\%s. %s" % (m.var, show_fterm(m.body))
    if isinstance(m, App):
        f = show_fterm(m.fun)
        if isinstance(m.fun, (Lam, TLam)):
            f = "(%s)" % f
        a = show_fterm(m.arg)
        if isinstance(m.arg, (Lam, TLam, App, TApp)):
            a = "(%s)" % a
        return "%s %s" % (f, a)
    if isinstance(m, TApp):
        f = show_fterm(m.fun)
        if isinstance(m.fun, (Lam, TLam)):
            f = "(%s)" % f
        return "%s [%s]" % (f, show_ftype(m.ty))
    if isinstance(m, Pair):
        return "<%s, %s>" % (show_fterm(m.left), show_fterm(m.right))
    if isinstance(m, Proj):
        return "pi%d(%s)" % (m.index, show_fterm(m.arg))
    if isinstance(m, Inj):
        return "in%d[%s](%s)" % (m.index, show_ftype(m.ty), show_fterm(m.arg))
    if isinstance(m, Case):
        return "case(%s, %s, %s)" % tuple(show_fterm(c) for c in (m.arg, m.left, m.right))
    if isinstance(m, Pack):
        return "pack[%s](%s, %s)" % (show_ftype(m.ty), show_ftype(m.witness), show_fterm(m.arg))
    return "unpack(%s, %s)" % (show_fterm(m.arg), show_fterm(m.body))


def _tyatom(a) -> str:
    s = show_ftype(a)
    return s if isinstance(a, FVar) else "(%s)" % s


_SYMS = ["/\\", "\\", "λ", "Λ", "∀", "∃", "->", "→", "×", ".", ":", "(", ")", "[", "]", "<", ">", ",", "*", "+"]
_KW = {"forall", "exists", "case", "pack", "unpack"}


class _P:
    def __init__(self, src):
        self.lx = Lexer(src, _SYMS)

    # types: arrow < sum < product < atom
    def ty(self):
        lx = self.lx
        for kw, sym, cls in (("forall", "∀", Forall), ("exists", "∃", Exists)):
            if lx.accept(kw) or lx.accept(sym):
                t = lx.ident(_KW)
                lx.expect(".")
                return cls(t, self.ty())
        a = self.sum()
        if lx.accept("->") or lx.accept("→"):
            return FArrow(a, self.ty())
        return a

    def sum(self):
        a = self.prod()
        while self.lx.accept("+"):
            a = FSum(a, self.prod())
        return a

    def prod(self):
        a = self.tatom()
        while self.lx.accept("*") or self.lx.accept("×"):
            a = FProd(a, self.tatom())
        return a

    def tatom(self):
        lx = self.lx
        if lx.accept("("):
            a = self.ty()
            lx.expect(")")
            return a
        if lx.peek_is("forall") or lx.peek_is("exists") or lx.peek_is("∀") or lx.peek_is("∃"):
            return self.ty()
        return FVar(lx.ident(_KW))

    def term(self):
        lx = self.lx
        if lx.accept("\\") or lx.accept("λ"):
            x = lx.ident(_KW)
            lx.expect(":")
            a = self.tatom()
            lx.expect(".")
            return Lam(x, a, self.term())
        if lx.accept("/\\") or lx.accept("Λ"):
            t = lx.ident(_KW)
            lx.expect(".")
            return TLam(t, self.term())
        m = self.atom()
        while True:
            if lx.accept("["):
                m = TApp(m, self.ty())
                lx.expect("]")
            elif lx.peek_is("\\") or lx.peek_is("λ") or lx.peek_is("/\\") or lx.peek_is("Λ"):
                return App(m, self.term())
            elif self._starts_atom():
                m = App(m, self.atom())
            else:
                return m

    def _starts_atom(self):
        t = self.lx.peek()
        return t.text in ("(", "<") or (t.kind == "ident" and t.text not in ("forall", "exists"))

    def atom(self):
        lx = self.lx
        if lx.accept("("):
            m = self.term()
            lx.expect(")")
            return m
        if lx.accept("<"):
            a = self.term()
            lx.expect(",")
            b = self.term()
            lx.expect(">")
            return Pair(a, b)
        tok = lx.peek()
        name = tok.text if tok.kind == "ident" else ""
        if name in ("pi1", "pi2") and lx.peek_is("(", 1):
            lx.next()
            lx.expect("(")
            m = self.term()
            lx.expect(")")
            return Proj(int(name[2]), m)
        if name in ("in1", "in2") and lx.peek_is("[", 1):
            lx.next()
            lx.expect("[")
            a = self.ty()
            lx.expect("]")
            lx.expect("(")
            m = self.term()
            lx.expect(")")
            return Inj(int(name[2]), a, m)
        if name == "case":
            lx.next()
            lx.expect("(")
            a = self.term()
            lx.expect(",")
            b = self.term()
            lx.expect(",")
            c = self.term()
            lx.expect(")")
            return Case(a, b, c)
        if name == "pack":
            lx.next()
            lx.expect("[")
            a = self.ty()
            lx.expect("]")
            lx.expect("(")
            w = self.ty()
            lx.expect(",")
            m = self.term()
            lx.expect(")")
            return Pack(a, w, m)
        if name == "unpack":
            lx.next()
            lx.expect("(")
            a = self.term()
            lx.expect(",")
            b = self.term()
            lx.expect(")")
            return Unpack(a, b)
        return Var(lx.ident(_KW))


def parse_ftype(src: str):
    p = _P(src)
    a = p.ty()
    p.lx.expect_eof()
    return a


def parse_fterm(src: str):
    p = _P(src)
    m = p.term()
    p.lx.expect_eof()
    return m
