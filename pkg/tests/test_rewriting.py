import random

import pytest
from hypothesis import given, settings, strategies as st

from opsem import rewriting as rw
from opsem.syntax import ParseError
from opsem.terms import App, Var, at, parse_term, positions, variant

ADD_MUL = """
sig: z/0, s/1, a/2, m/2
a(z, y) -> y
a(x, z) -> x
a(s(x), s(y)) -> s(s(a(x, y)))
m(z, x) -> z
m(s(x), y) -> a(y, m(x, y))
"""


def num(n):
    t = App("z", ())
    for _ in range(n):
        t = App("s", (t,))
    return t


def test_parse_trs_and_signature():
    f = rw.parse_trs(ADD_MUL)
    assert len(f.rules) == 5 and not f.equations
    assert f.signature == {"z": 0, "s": 1, "a": 2, "m": 2}
    assert str(f.rules[2]) == "a(s(x), s(y)) -> s(s(a(x, y)))"


def test_parse_trs_errors():
    with pytest.raises(ParseError):
        rw.parse_trs("f(x) -> x")  # no sig header
    with pytest.raises(ParseError) as e:
        rw.parse_trs("sig: f/1\nf(x, y) -> x")
    assert e.value.line == 2
    with pytest.raises(ParseError):
        rw.parse_trs("sig: f/1\nf(x) -> y")  # rhs variable not in lhs


@pytest.mark.parametrize("strategy", ["innermost", "outermost"])
def test_normalize_add_mul(strategy):
    r = rw.parse_trs(ADD_MUL).trs
    out = rw.normalize(r, App("m", (num(2), num(3))), strategy)
    assert isinstance(out, rw.NormalForm)
    assert out.term == num(6)
    assert not rw.rewrite_all(r, out.term)


def test_fuel_exhaustion():
    r = rw.parse_trs("sig: f/1\nf(x) -> f(f(x))").trs
    out = rw.normalize(r, parse_term("f(x)"), fuel=20)
    assert isinstance(out, rw.FuelExhausted) and out.steps == 20


def test_rewrite_all_positions():
    r = rw.parse_trs("sig: f/1, a/0, b/0\nf(x) -> x").trs
    assert rw.rewrite_all(r, parse_term("f(f(a))")) == {parse_term("f(a)")}


def test_poly_unknown_and_malformed():
    r = rw.parse_trs(ADD_MUL).trs
    weak = rw.PolyInterp({"z": (0, "1"), "s": (1, "x+1"), "a": (2, "x+y"), "m": (2, "x*y")})
    assert isinstance(rw.poly_certifies(weak, r), rw.Unknown)
    with pytest.raises(ValueError):
        rw.PolyInterp({"s": (1, "x-1")})
    with pytest.raises(ValueError):
        rw.PolyInterp({"f": (2, "x")})  # not strictly monotone in y


def test_critical_pairs_and_local_confluence():
    r = rw.parse_trs("sig: f/1, g/1\nf(f(x)) -> g(x)").trs
    cps = rw.critical_pairs(r)
    assert len(cps) == 1
    cp = cps[0]
    assert variant((cp.peak, cp.left, cp.right),
                   (parse_term("f(f(f(x)))"), parse_term("g(f(x))"), parse_term("f(g(x))")))
    assert isinstance(rw.check_local_confluence(r), rw.NotJoinable)
    r2 = rw.parse_trs("sig: f/1, a/0\nf(x) -> a").trs
    assert isinstance(rw.check_local_confluence(r2), rw.LocallyConfluent)


def test_rpo_basics():
    p = rw.RpoParams.ranked(["f", "g"])
    f = lambda s: parse_term(s)
    assert rw.rpo_greater(p, f("f(x)"), f("g(x)"))
    assert not rw.rpo_greater(p, f("g(x)"), f("f(x)"))
    assert not rw.rpo_greater(p, f("f(x)"), f("f(x)"))
    with pytest.raises(ValueError):
        rw.RpoParams([("a", "b"), ("b", "a")])


def _rand_term(rng, d):
    if d <= 0 or rng.random() < 0.3:
        return Var(rng.choice("xyz")) if rng.random() < 0.5 else App("c", ())
    f, n = rng.choice([("f", 1), ("g", 2), ("h", 2)])
    return App(f, tuple(_rand_term(rng, d - 1) for _ in range(n)))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_rpo_is_irreflexive_and_has_subterm_property(seed):
    rng = random.Random(seed)
    t = _rand_term(rng, 4)
    p = rw.RpoParams.ranked(["h", "g", "f", "c"], {"g": "mul"})
    assert not rw.rpo_greater(p, t, t)
    for pos in positions(t):
        if pos:
            assert rw.rpo_greater(p, t, at(t, pos))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_rpo_is_asymmetric(seed):
    rng = random.Random(seed)
    s, t = _rand_term(rng, 3), _rand_term(rng, 3)
    p = rw.RpoParams.ranked(["h", "g", "f", "c"], {"h": "lexrl"})
    assert not (rw.rpo_greater(p, s, t) and rw.rpo_greater(p, t, s))


def test_completion_fails_on_commutativity():
    f = rw.parse_trs("sig: f/2\nf(x, y) = f(y, x)")
    out = rw.complete(f.trs, rw.RpoParams(), rw.Budget(), f.equations)
    assert isinstance(out, rw.FailedToOrient)


def test_completion_budget():
    f = rw.parse_trs("sig: e/0, i/1, */2\n*(e,x) -> x\n*(i(x),x) -> e\n*(*(x,y),z) -> *(x,*(y,z))")
    p = rw.RpoParams(rw.parse_precedence("i>*>e"))
    assert isinstance(rw.complete(f.trs, p, rw.Budget(max_rules=4)), rw.BudgetExceeded)


def test_completion_rejects_unoriented_input_rule():
    f = rw.parse_trs("sig: f/1, g/1\nf(x) -> g(x)")
    with pytest.raises(ValueError):
        rw.complete(f.trs, rw.RpoParams.ranked(["g", "f"]))


def test_precedence_and_status_syntax():
    assert rw.parse_precedence("i>*>e") == [("i", "*"), ("*", "e")]
    assert rw.parse_status("ack=rl, *=mul") == {"ack": rw.Status.LEX_RL, "*": rw.Status.MULTISET}
    with pytest.raises(ParseError):
        rw.parse_status("f=zig")
