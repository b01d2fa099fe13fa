import random

import pytest
from hypothesis import given, settings, strategies as st

from generators import src_term, typed_src
from opsem import transform as T
from opsem.syntax import ParseError


def _sample(seed):
    rng = random.Random(seed)
    return typed_src(rng, 4)[0] if seed % 2 else src_term(rng, 4)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_notation_and_sexpr_roundtrip(seed):
    m = _sample(seed)
    assert T.parse(T.show(m)) == m
    for stage, t in T.pipeline(m).items():
        assert T.from_sexpr(T.to_sexpr(t)) == t, stage
        assert T.parse(T.show(t)) == t, stage


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_stage_shapes(seed):
    p = T.pipeline(_sample(seed))
    assert T.is_cps(p["cps"])
    assert T.is_vn(p["vn"])
    assert T.functions_closed(p["cc"])
    assert T.is_hoisted(p["hoist"])


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_uncc_inverts_closure_conversion(seed):
    v = T.value_name(T.cps(_sample(seed)))
    assert T.alpha_eq(T.uncc(T.closure_convert(v)), v)


def _final(stage, t, fuel=2000):
    for _ in range(fuel):
        n = T.step(stage, t)
        if not n:
            return t
        t = n[0]
    return None


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_hoisting_preserves_the_run(seed):
    # both programs stop in a call to the same name, or neither stops
    p = T.pipeline(_sample(seed))
    a, b = _final("cc", p["cc"]), _final("hoist", p["hoist"])
    assert (a is None) == (b is None)
    if a is not None:
        ta, tb = _tail(a), _tail(b)
        assert isinstance(ta, T.App) and isinstance(tb, T.App)
        assert ta.fun == tb.fun


def _tail(t):
    while isinstance(t, T.Let):
        t = t.body
    return t


def test_cc_example_is_already_hoisted():
    k = T.closure_convert(T.value_name(T.cps(T.parse("\\x. y"))))
    assert T.alpha_eq(T.hoist(k), k)


def test_alpha_equivalence():
    assert T.alpha_eq(T.parse("\\x,k. @(k, x)"), T.parse("\\y,c. @(c, y)"))
    assert not T.alpha_eq(T.parse("\\x,k. @(k, x)"), T.parse("\\x,k. @(x, k)"))


def test_parse_errors():
    with pytest.raises(ParseError):
        T.parse("@(x,")
    with pytest.raises(ParseError):
        T.from_sexpr("(frob x)")


def test_source_reduction():
    m = T.parse("let p = (\\x. x, ()) in @(pi1(p), pi2(p))")
    out, steps = T.run_src(m)
    assert T.alpha_eq(out, T.parse("()")) and steps > 0
