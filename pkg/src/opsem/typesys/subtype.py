"""Records and variants with width/depth subtyping."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..syntax import Lexer

# ------------------------------------------------------------------ types


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class Arrow:
    dom: object
    cod: object


@dataclass(frozen=True)
class Record:
    fields: Tuple[Tuple[str, object], ...]

    def __post_init__(self):
        _check_labels(self.fields)

    def get(self, label):
        return dict(self.fields).get(label)

    def labels(self):
        return [l for l, _ in self.fields]


@dataclass(frozen=True)
class Variant:
    fields: Tuple[Tuple[str, object], ...]

    def __post_init__(self):
        _check_labels(self.fields)

    def get(self, label):
        return dict(self.fields).get(label)

    def labels(self):
        return [l for l, _ in self.fields]


def _check_labels(fields):
    ls = [l for l, _ in fields]
    if ls != sorted(set(ls)):
        raise ValueError("labels must be distinct and sorted: %s" % ls)


def record(fields: Dict[str, object]) -> Record:
    return Record(tuple(sorted(fields.items())))


def variant(fields: Dict[str, object]) -> Variant:
    return Variant(tuple(sorted(fields.items())))


def subtype_leq(a, b) -> bool:
    """Syntax-directed subtyping: A <= B."""
    if isinstance(a, TVar):
        return a == b
    if isinstance(a, Arrow):
        return isinstance(b, Arrow) and subtype_leq(b.dom, a.dom) and subtype_leq(a.cod, b.cod)
    if isinstance(a, Record):
        if not isinstance(b, Record):
            return False
        fa = dict(a.fields)
        return all(l in fa and subtype_leq(fa[l], t) for l, t in b.fields)
    if not isinstance(b, Variant):
        return False
    fb = dict(b.fields)
    return all(l in fb and subtype_leq(t, fb[l]) for l, t in a.fields)


def join(a, b):
    """Least upper bound, or None when the two types have none."""
    if isinstance(a, TVar) or isinstance(b, TVar):
        return a if a == b else None
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        d, c = meet(a.dom, b.dom), join(a.cod, b.cod)
        return None if d is None or c is None else Arrow(d, c)
    if isinstance(a, Record) and isinstance(b, Record):
        fb = dict(b.fields)
        out = {}
        for l, t in a.fields:
            if l in fb:
                j = join(t, fb[l])
                if j is not None:
                    out[l] = j
        return record(out)
    if isinstance(a, Variant) and isinstance(b, Variant):
        out = dict(a.fields)
        for l, t in b.fields:
            if l in out:
                j = join(out[l], t)
                if j is None:
                    return None
                out[l] = j
            else:
                out[l] = t
        return variant(out)
    return None


def meet(a, b):
    """Greatest lower bound, or None."""
    if isinstance(a, TVar) or isinstance(b, TVar):
        return a if a == b else None
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        d, c = join(a.dom, b.dom), meet(a.cod, b.cod)
        return None if d is None or c is None else Arrow(d, c)
    if isinstance(a, Record) and isinstance(b, Record):
        out = dict(a.fields)
        for l, t in b.fields:
            if l in out:
                m = meet(out[l], t)
                if m is None:
                    return None
                out[l] = m
            else:
                out[l] = t
        return record(out)
    if isinstance(a, Variant) and isinstance(b, Variant):
        fb = dict(b.fields)
        out = {}
        for l, t in a.fields:
            if l in fb:
                m = meet(t, fb[l])
                if m is not None:
                    out[l] = m
        return variant(out)
    return None


def show_rtype(a) -> str:
    if isinstance(a, TVar):
        return a.name
    if isinstance(a, Arrow):
        d = show_rtype(a.dom)
        if isinstance(a.dom, Arrow):
            d = "(%s)" % d
        return "%s -> %s" % (d, show_rtype(a.cod))
    inner = ", ".join("%s:%s" % (l, show_rtype(t)) for l, t in a.fields)
    return ("{%s}" if isinstance(a, Record) else "[%s]") % inner


def type_size(a) -> int:
    if isinstance(a, TVar):
        return 1
    if isinstance(a, Arrow):
        return 1 + type_size(a.dom) + type_size(a.cod)
    return 1 + sum(type_size(t) for _, t in a.fields)


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
class Rec:
    fields: Tuple[Tuple[str, object], ...]


@dataclass(frozen=True)
class Sel:
    arg: object
    label: str


@dataclass(frozen=True)
class Inj:
    label: str
    arg: object
    ty: Variant


@dataclass(frozen=True)
class Case:
    arg: object
    branches: Tuple[Tuple[str, object], ...]


def check_sub(ctx: Dict[str, object], m):
    """The least type of m, with subsumption at applications and injections."""
    if isinstance(m, Var):
        return ctx.get(m.name)
    if isinstance(m, Lam):
        b = check_sub({**ctx, m.param: m.ty}, m.body)
        return None if b is None else Arrow(m.ty, b)
    if isinstance(m, App):
        f, a = check_sub(ctx, m.fun), check_sub(ctx, m.arg)
        if isinstance(f, Arrow) and a is not None and subtype_leq(a, f.dom):
            return f.cod
        return None
    if isinstance(m, Rec):
        ls = [l for l, _ in m.fields]
        if len(set(ls)) != len(ls):
            return None
        out = {}
        for l, n in m.fields:
            t = check_sub(ctx, n)
            if t is None:
                return None
            out[l] = t
        return record(out)
    if isinstance(m, Sel):
        a = check_sub(ctx, m.arg)
        if isinstance(a, Record) and a.get(m.label) is not None:
            return a.get(m.label)
        return None
    if isinstance(m, Inj):
        a = check_sub(ctx, m.arg)
        want = m.ty.get(m.label) if isinstance(m.ty, Variant) else None
        if a is not None and want is not None and subtype_leq(a, want):
            return m.ty
        return None
    if isinstance(m, Case):
        a = check_sub(ctx, m.arg)
        bs = dict(m.branches)
        if not isinstance(a, Variant) or not a.fields or len(bs) != len(m.branches):
            return None
        types = {}
        for l, n in m.branches:
            t = check_sub(ctx, n)
            if not isinstance(t, Arrow):
                return None
            types[l] = t
        result = None
        for l, t in a.fields:
            if l not in types or not subtype_leq(t, types[l].dom):
                return None
            result = types[l].cod if result is None else join(result, types[l].cod)
            if result is None:
                return None
        return result
    raise TypeError("not a record/variant term: %r" % (m,))


# -------------------------------------------------------------- reduction

def fv(m):
    if isinstance(m, Var):
        return {m.name}
    if isinstance(m, Lam):
        return fv(m.body) - {m.param}
    return set().union(*(fv(c) for c in _children(m)))


def _children(m):
    if isinstance(m, Lam):
        return [m.body]
    if isinstance(m, App):
        return [m.fun, m.arg]
    if isinstance(m, Rec):
        return [n for _, n in m.fields]
    if isinstance(m, (Sel, Inj)):
        return [m.arg]
    if isinstance(m, Case):
        return [m.arg] + [n for _, n in m.branches]
    return []


def _rebuild(m, cs):
    if isinstance(m, Lam):
        return Lam(m.param, m.ty, cs[0])
    if isinstance(m, App):
        return App(cs[0], cs[1])
    if isinstance(m, Rec):
        return Rec(tuple((l, c) for (l, _), c in zip(m.fields, cs)))
    if isinstance(m, Sel):
        return Sel(cs[0], m.label)
    if isinstance(m, Inj):
        return Inj(m.label, cs[0], m.ty)
    if isinstance(m, Case):
        return Case(cs[0], tuple((l, c) for (l, _), c in zip(m.branches, cs[1:])))
    return m


def _names(m):
    out = set(fv(m))
    if isinstance(m, Lam):
        out.add(m.param)
    for c in _children(m):
        out |= _names(c)
    return out


def subst(m, x: str, n):
    if x not in fv(m):
        return m
    if isinstance(m, Var):
        return n
    if isinstance(m, Lam):
        if m.param in fv(n):
            avoid = fv(n) | _names(m) | {x}
            i = 1
            while "%s%d" % (m.param, i) in avoid:
                i += 1
            y = "%s%d" % (m.param, i)
            m = Lam(y, m.ty, subst(m.body, m.param, Var(y)))
        return Lam(m.param, m.ty, subst(m.body, x, n))
    return _rebuild(m, [subst(c, x, n) for c in _children(m)])


def _root(m):
    if isinstance(m, App) and isinstance(m.fun, Lam):
        return subst(m.fun.body, m.fun.param, m.arg)
    if isinstance(m, Sel) and isinstance(m.arg, Rec):
        return dict(m.arg.fields).get(m.label)
    if isinstance(m, Case) and isinstance(m.arg, Inj):
        b = dict(m.branches).get(m.arg.label)
        return None if b is None else App(b, m.arg.arg)
    return None


def reducts(m) -> List[object]:
    out = []
    r = _root(m)
    if r is not None:
        out.append(r)
    cs = _children(m)
    for i, c in enumerate(cs):
        for c2 in reducts(c):
            out.append(_rebuild(m, cs[:i] + [c2] + cs[i + 1:]))
    return out


def normalize(m, fuel: int = 10_000):
    """Leftmost-outermost normal form (typed terms terminate)."""
    for _ in range(fuel):
        rs = reducts(m)
        if not rs:
            return m
        m = rs[0]
    raise RuntimeError("fuel exhausted")


def coerce(a, b):
    """A closed term of type a -> b, built by induction on a <= b.

    Total on the record fragment. Variants are handled by a case that
    re-injects each branch; an empty source variant has no branchless
    case to type, so the result is None there.
    """
    if not subtype_leq(a, b):
        return None
    try:
        return _coerce(a, b, 0)
    except _Uncoercible:
        return None


class _Uncoercible(Exception):
    pass


def _coerce(a, b, d):
    x = "x%d" % d
    if isinstance(a, TVar):
        return Lam(x, a, Var(x))
    if isinstance(a, Arrow):
        f = "f%d" % d
        inner = App(Var(f), App(_coerce(b.dom, a.dom, d + 1), Var(x)))
        return Lam(f, a, Lam(x, b.dom, App(_coerce(a.cod, b.cod, d + 1), inner)))
    if isinstance(a, Record):
        fa = dict(a.fields)
        return Lam(x, a, Rec(tuple((l, App(_coerce(fa[l], t, d + 1), Sel(Var(x), l)))
                                   for l, t in b.fields)))
    if not a.fields:
        raise _Uncoercible
    fb = dict(b.fields)
    y = "y%d" % d
    return Lam(x, a, Case(Var(x), tuple(
        (l, Lam(y, t, Inj(l, App(_coerce(t, fb[l], d + 1), Var(y)), b))) for l, t in a.fields)))


# ------------------------------------------------------- printing/parsing

def show_rterm(m) -> str:
    if isinstance(m, Var):
        return m.name
    if isinstance(m, Lam):
        t = show_rtype(m.ty)
        if isinstance(m.ty, Arrow):
            t = "(%s)" % t
        return "\\%s:%s. %s" % (m.param, t, show_rterm(m.body))
    if isinstance(m, App):
        f = show_rterm(m.fun)
        if isinstance(m.fun, (Lam, Case)):
            f = "(%s)" % f
        a = show_rterm(m.arg)
        if isinstance(m.arg, (Lam, App, Case)):
            a = "(%s)" % a
        return "%s %s" % (f, a)
    if isinstance(m, Rec):
        return "{%s}" % ", ".join("%s = %s" % (l, show_rterm(n)) for l, n in m.fields)
    if isinstance(m, Sel):
        a = show_rterm(m.arg)
        if isinstance(m.arg, (Lam, App, Case)):
            a = "(%s)" % a
        return "%s.%s" % (a, m.label)
    if isinstance(m, Inj):
        return "[%s = %s]@%s" % (m.label, show_rterm(m.arg), show_rtype(m.ty))
    bs = " | ".join("%s => %s" % (l, show_rterm(n)) for l, n in m.branches)
    return "case %s of %s" % (_atomic(m.arg), bs)


def _atomic(m):
    s = show_rterm(m)
    return s if isinstance(m, (Var, Rec, Inj, Sel)) else "(%s)" % s


_SYMS = ["\\", "λ", "->", "→", "=>", ".", ":", "(", ")", "{", "}", "[", "]", ",", "=", "|", "@"]
_KW = {"case", "of"}


class _P:
    def __init__(self, src):
        self.lx = Lexer(src, _SYMS)

    def ty(self):
        a = self.tatom()
        if self.lx.accept("->") or self.lx.accept("→"):
            return Arrow(a, self.ty())
        return a

    def tatom(self):
        lx = self.lx
        if lx.accept("("):
            a = self.ty()
            lx.expect(")")
            return a
        for open_, close, build in (("{", "}", record), ("[", "]", variant)):
            if lx.accept(open_):
                fs = {}
                while not lx.peek_is(close):
                    tok = lx.peek()
                    l = lx.ident()
                    if l in fs:
                        raise lx.error("duplicate label", tok)
                    lx.expect(":")
                    fs[l] = self.ty()
                    if not lx.accept(","):
                        break
                lx.expect(close)
                return build(fs)
        return TVar(lx.ident())

    def term(self):
        lx = self.lx
        if lx.accept("\\") or lx.accept("λ"):
            x = lx.ident(_KW)
            lx.expect(":")
            a = self.tatom()
            lx.expect(".")
            return Lam(x, a, self.term())
        if lx.accept("case"):
            m = self.postfix()
            lx.expect("of")
            bs = []
            while True:
                l = lx.ident(_KW)
                lx.expect("=>")
                bs.append((l, self.term()))
                if not lx.accept("|"):
                    break
            return Case(m, tuple(bs))
        m = self.postfix()
        while True:
            t = lx.peek()
            if t.text in ("(", "{", "[") or (t.kind == "ident" and t.text not in _KW):
                m = App(m, self.postfix())
            elif t.text in ("\\", "λ", "case"):
                return App(m, self.term())
            else:
                return m

    def postfix(self):
        m = self.atom()
        while self.lx.accept("."):
            m = Sel(m, self.lx.ident())
        return m

    def atom(self):
        lx = self.lx
        if lx.accept("("):
            m = self.term()
            lx.expect(")")
            return m
        if lx.accept("{"):
            fs = []
            while not lx.peek_is("}"):
                l = lx.ident()
                lx.expect("=")
                fs.append((l, self.term()))
                if not lx.accept(","):
                    break
            lx.expect("}")
            return Rec(tuple(fs))
        if lx.accept("["):
            l = lx.ident()
            lx.expect("=")
            n = self.term()
            lx.expect("]")
            lx.expect("@")
            t = self.tatom()
            if not isinstance(t, Variant):
                raise lx.error("injection needs a variant type")
            return Inj(l, n, t)
        return Var(lx.ident(_KW))


def parse_rtype(src: str):
    p = _P(src)
    a = p.ty()
    p.lx.expect_eof()
    return a


def parse_rterm(src: str):
    p = _P(src)
    m = p.term()
    p.lx.expect_eof()
    return m
