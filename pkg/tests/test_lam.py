import random

from hypothesis import given, settings, strategies as st

from generators import lam_term, let_term
from opsem import lam
from opsem.lam import App, Var, apps, parse, show


def test_substitution_avoids_capture():
    t = lam.substitute(parse("\\y. x y"), "x", Var("y"))
    assert isinstance(t, lam.Abs) and t.param != "y"
    assert lam.alpha_eq(t, parse("\\z. y z"))


def test_normal_order_and_church_arithmetic():
    assert lam.alpha_eq(lam.normalize_no(apps(lam.S, lam.K, lam.K)).term, lam.I)
    assert isinstance(lam.normalize_no(lam.OMEGA, 50), lam.FuelExhausted)
    five = lam.normalize_no(apps(lam.PLUS, lam.church(2), lam.church(3))).term
    assert lam.church_decode(five) == 5
    assert lam.church_decode(apps(lam.PRED, lam.church(5))) == 4
    assert lam.church_decode(lam.K) is None


def test_strategies_differ_on_discarded_divergence():
    kio = apps(lam.K, lam.I, lam.OMEGA)
    assert lam.alpha_eq(lam.eval_big(kio, "cbn").term, lam.I)
    assert isinstance(lam.eval_big(kio, "cbv", 100), lam.FuelExhausted)
    assert lam.alpha_eq(lam.machine_run(kio, "cbn").term, lam.I)
    assert isinstance(lam.machine_run(kio, "cbv", 100), lam.FuelExhausted)


def test_let_is_sugar():
    t = parse("let x = \\z.z in x x")
    assert lam.alpha_eq(lam.desugar(t), parse("(\\x. x x) (\\z.z)"))


def test_unicode_lambda_accepted():
    assert lam.alpha_eq(parse("λx. x"), lam.I)
    assert "λ" not in show(parse("λx. λy. x"))


def test_develop_contracts_all_redexes():
    t = parse("(\\x. (\\y.y) x) ((\\y.y) (\\y.y))")
    assert lam.alpha_eq(lam.develop(t), parse("\\y.y"))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_print_parse_roundtrip(seed):
    rng = random.Random(seed)
    t = lam_term(rng, 5, free=["a", "b"])
    assert parse(show(t)) == t
    u = let_term(rng, 4)
    assert parse(show(u)) == u


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_de_bruijn_roundtrip(seed):
    t = lam_term(random.Random(seed), 5, free=["a"])
    assert lam.alpha_eq(lam.from_db(lam.to_db(t)), t)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_beta_preserves_free_variables(seed):
    t = lam_term(random.Random(seed), 5, free=["a", "b"])
    for u in lam.reducts(t):
        assert u.fv <= t.fv
