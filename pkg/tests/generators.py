"""Random generators shared by the property tests."""
from __future__ import annotations

import random
from typing import List, Optional, Tuple

from opsem import imp, lam
from opsem import transform as T
from opsem.typesys import ir, simple


# ------------------------------------------------------------ IMP programs

def imp_program(rng: random.Random, size: int = 6, names=("x", "y", "z")):
    """Random IMP program; every loop runs a fresh counter down to zero.

    A loop `while (0 < c) do (body; c := c + -1)` is preceded by an
    assignment of a small constant to c, and c is not assigned in body.
    """
    counter = [0]

    def expr(depth):
        r = rng.random()
        if depth <= 0 or r < 0.35:
            return imp.Num(rng.randint(-3, 5))
        if r < 0.7:
            return imp.Id(rng.choice(names))
        return imp.Add(expr(depth - 1), expr(depth - 1))

    def cond():
        return imp.Less(expr(2), expr(2))

    def stmt(depth):
        r = rng.random()
        if depth <= 0 or r < 0.35:
            return imp.Assign(rng.choice(names), expr(2))
        if r < 0.45:
            return imp.Skip()
        if r < 0.65:
            return imp.Seq(stmt(depth - 1), stmt(depth - 1))
        if r < 0.82:
            return imp.If(cond(), stmt(depth - 1), stmt(depth - 1))
        counter[0] += 1
        c = "c%d" % counter[0]
        body = imp.Seq(stmt(depth - 1), imp.Assign(c, imp.Add(imp.Id(c), imp.Num(-1))))
        loop = imp.While(imp.Less(imp.Num(0), imp.Id(c)), body)
        return imp.Seq(imp.Assign(c, imp.Num(rng.randint(0, 4))), loop)

    return imp.Prog(stmt(size))


# ---------------------------------------------------------- lambda terms

def lam_term(rng: random.Random, depth: int = 5, free=(), closed: bool = False):
    """Random pure lambda-term over a few variable names."""
    pool = list(free)

    def go(d, scope):
        r = rng.random()
        if scope and (d <= 0 or r < 0.3):
            return lam.Var(rng.choice(scope))
        if d <= 0 or r < 0.6 or not scope:
            x = rng.choice("xyzuvw")
            return lam.Abs(x, go(d - 1, scope + [x]))
        return lam.App(go(d - 1, scope), go(d - 1, scope))

    return go(depth, pool if not closed else [])


def let_term(rng: random.Random, depth: int = 5, max_lets: int = 3):
    """Random lambda-term with at most `max_lets` nested lets."""

    def go(d, scope, lets):
        r = rng.random()
        if scope and (d <= 0 or r < 0.3):
            return lam.Var(rng.choice(scope))
        if lets < max_lets and r < 0.5:
            x = rng.choice("fgh")
            return lam.Let(x, go(d - 1, scope, lets + 1), go(d - 1, scope + [x], lets + 1))
        if d <= 0 or r < 0.7 or not scope:
            x = rng.choice("xyz")
            return lam.Abs(x, go(d - 1, scope + [x], lets))
        return lam.App(go(d - 1, scope, lets), go(d - 1, scope, lets))

    return go(depth, [], 0)


def typed_lam(rng: random.Random, depth: int = 4):
    """A Church-annotated simply typed term: (term, binder types, type)."""
    tvs = [simple.TVar("a"), simple.TVar("b")]

    def rtype(d):
        if d <= 0 or rng.random() < 0.5:
            return rng.choice(tvs)
        return simple.Arrow(rtype(d - 1), rtype(d - 1))

    ann = {}
    counter = [0]

    def fresh():
        counter[0] += 1
        return "x%d" % counter[0]

    def gen(a, env, d):
        cands = [x for x, t in env if t == a]
        if cands and (d <= 0 or rng.random() < 0.4):
            return lam.Var(rng.choice(cands))
        if isinstance(a, simple.Arrow) and (d <= 0 or rng.random() < 0.6):
            x = fresh()
            ann[x] = a.dom
            body = gen(a.cod, env + [(x, a.dom)], d - 1)
            return None if body is None else lam.Abs(x, body)
        if d <= 0:
            return None
        b = rtype(1)
        f = gen(simple.Arrow(b, a), env, d - 1)
        arg = gen(b, env, d - 1)
        if f is None or arg is None:
            return None
        return lam.App(f, arg)

    while True:
        a = simple.Arrow(rtype(2), rtype(2))
        m = gen(a, [], depth)
        if m is not None:
            return m, dict(ann), a
        ann.clear()


# ---------------------------------------------- polyadic source terms

def src_term(rng: random.Random, depth: int = 4):
    """Random closed source term of the polyadic calculus (maybe stuck)."""
    counter = [0]

    def fresh():
        counter[0] += 1
        return "x%d" % counter[0]

    def go(d, scope):
        r = rng.random()
        if scope and (d <= 0 or r < 0.25):
            return T.Name(rng.choice(scope))
        if d <= 0 or r < 0.45 or not scope:
            ps = [fresh() for _ in range(rng.randint(1, 2))]
            return T.Lam(tuple(ps), go(d - 1, scope + ps))
        if r < 0.7:
            n = rng.randint(1, 2)
            return T.App(go(d - 1, scope), tuple(go(d - 1, scope) for _ in range(n)))
        if r < 0.8:
            x = fresh()
            return T.Let(x, go(d - 1, scope), go(d - 1, scope + [x]))
        if r < 0.9:
            return T.Tup(tuple(go(d - 1, scope) for _ in range(rng.randint(0, 2))))
        return T.Proj(rng.randint(1, 2), go(d - 1, scope))

    return go(depth, [])


def typed_src(rng: random.Random, depth: int = 4, redex: bool = False):
    """Closed, simply typed source term with tuples: (term, source type).

    With `redex`, the term is an application, let or projection, so it
    has at least one reduction step.
    """
    tvs = [simple.TVar("a"), simple.TVar("b")]

    def rtype(d):
        r = rng.random()
        if d <= 0 or r < 0.45:
            return rng.choice(tvs)
        if r < 0.8:
            return ir.SFun(tuple(rtype(d - 1) for _ in range(rng.randint(1, 2))), rtype(d - 1))
        return ir.SProd(tuple(rtype(d - 1) for _ in range(rng.randint(0, 2))))

    counter = [0]

    def fresh():
        counter[0] += 1
        return "x%d" % counter[0]

    def gen(a, env, d, top=False):
        cands = [x for x, t in env if t == a]
        if cands and not top and (d <= 0 or rng.random() < 0.35):
            return T.Name(rng.choice(cands))
        if isinstance(a, ir.SFun) and not top and (d <= 0 or rng.random() < 0.5):
            ps = [fresh() for _ in a.args]
            body = gen(a.res, env + list(zip(ps, a.args)), d - 1)
            return None if body is None else T.Lam(tuple(ps), body)
        if isinstance(a, ir.SProd) and not top and (d <= 0 or rng.random() < 0.5):
            items = [gen(b, env, d - 1) for b in a.items]
            return None if any(i is None for i in items) else T.Tup(tuple(items))
        if d <= 0:
            return None
        r = rng.random()
        if r < 0.5:
            bs = tuple(rtype(1) for _ in range(rng.randint(1, 2)))
            f = gen(ir.SFun(bs, a), env, d - 1)
            args = [gen(b, env, d - 1) for b in bs]
            if f is None or any(x is None for x in args):
                return None
            return T.App(f, tuple(args))
        if r < 0.75:
            b = rtype(1)
            x = fresh()
            m = gen(b, env, d - 1)
            n = gen(a, env + [(x, b)], d - 1)
            return None if m is None or n is None else T.Let(x, m, n)
        other = rtype(1)
        i = rng.randint(1, 2)
        items = (a, other) if i == 1 else (other, a)
        m = gen(ir.SProd(items), env, d - 1)
        return None if m is None else T.Proj(i, m)

    while True:
        a = rtype(2)
        m = gen(a, [], depth, redex)
        if m is not None:
            return m, a


# ------------------------------------------------------------------ LTS

def random_lts(rng: random.Random, n: int, actions=("a", "b"), density: float = 0.3, tau: bool = False):
    from opsem.lts import Lts
    acts = list(actions) + (["tau"] if tau else [])
    trans = []
    for s in range(n):
        for a in acts:
            for t in range(n):
                if rng.random() < density / len(acts) * 2:
                    trans.append((s, a, t))
    return Lts.build(range(n), trans, root=0)


def mu_formula(rng: random.Random, depth: int = 4, actions=("a", "b"), max_fix: int = 2):
    """Random closed positive formula with at most max_fix nested fixpoints."""
    from opsem.lts import mu

    def go(d, bound, fixes):
        r = rng.random()
        if d <= 0 or r < 0.1:
            if bound and rng.random() < 0.7:
                return mu.FVar(rng.choice(bound))
            return rng.choice([mu.TRUE, mu.FALSE])
        if r < 0.35 and fixes < max_fix:
            x = "x%d" % len(bound)
            kind = rng.choice((mu.Mu, mu.Nu))
            return kind(x, go(d - 1, bound + [x], fixes + 1))
        if r < 0.5:
            return mu.Dia(rng.choice(actions), go(d - 1, bound, fixes))
        if r < 0.7:
            return mu.Box(rng.choice(actions), go(d - 1, bound, fixes))
        if r < 0.85:
            return mu.And([go(d - 1, bound, fixes) for _ in range(2)])
        return mu.Or([go(d - 1, bound, fixes) for _ in range(2)])

    return go(depth, [], 0)


def ccs_proc(rng: random.Random, depth: int = 3, names=("a", "b")):
    """Random finite CCS process (no recursion)."""
    from opsem.lts import ccs

    def go(d):
        r = rng.random()
        if d <= 0 or r < 0.15:
            return ccs.NIL
        if r < 0.5:
            a = rng.choice(list(names) + ["'" + n for n in names] + ["tau"])
            return ccs.Prefix(a, go(d - 1))
        if r < 0.7:
            return ccs.Sum((go(d - 1), go(d - 1)))
        if r < 0.9:
            return ccs.Par((go(d - 1), go(d - 1)))
        return ccs.New(rng.choice(names), go(d - 1))

    return go(depth)


def sparse_lts(rng: random.Random, n: int, actions=("a", "b"), max_out: int = 2):
    """Random LTS where each state has at most max_out outgoing transitions."""
    from opsem.lts import Lts
    trans = []
    for s in range(n):
        for _ in range(rng.randint(0, max_out)):
            trans.append((s, rng.choice(actions), rng.randrange(n)))
    return Lts.build(range(n), trans, root=0)
