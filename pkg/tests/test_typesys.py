import random

import pytest
from hypothesis import given, settings, strategies as st

from generators import let_term, typed_lam
from opsem import lam
from opsem import transform as T
from opsem.typesys import ir, simple
from opsem.typesys import subtype as S
from opsem.typesys import systemf as F


def _typ(src, system="simple"):
    r = (simple.infer_simple if system == "simple" else simple.infer_ml)(lam.parse(src))
    return None if r is None else simple.show_type(simple.canonical_typing(*r)[1])


# ---------------------------------------------------------------- simple / ML

def test_simple_inference():
    assert _typ("\\f x. f (f x)") == "(t0 -> t0) -> t0 -> t0"
    assert _typ("\\x. x x") is None
    assert _typ("\\x y. x") == "t0 -> t1 -> t0"


def test_let_polymorphism():
    assert _typ("let i = \\x.x in i i") is None  # simple typing reads lets as redexes
    assert _typ("(\\i. i i) (\\x.x)") is None
    assert _typ("let i = \\x.x in i i", "ml") == "t0 -> t0"
    assert _typ("\\y. let x = \\z.z in y (x x)", "ml") == "((t0 -> t0) -> t1) -> t1"


def test_free_variables_enter_the_context():
    ctx, a = simple.canonical_typing(*simple.infer_simple(lam.parse("f x")))
    assert simple.show_type(a) == "t0"
    assert {k: simple.show_type(v) for k, v in ctx.items()} == {"f": "t1 -> t0", "x": "t1"}


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_type_roundtrip_and_annotated_terms_are_instances(seed):
    m, ann, a = typed_lam(random.Random(seed))
    assert simple.parse_type(simple.show_type(a)) == a
    r = simple.infer_simple(m)
    assert r is not None
    assert simple.is_instance(r[1], a)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_ml_agrees_with_let_expansion(seed):
    m = let_term(random.Random(seed), 4)
    j1, j2 = simple.infer_ml(m), simple.ml_oracle(m)
    assert (j1 is None) == (j2 is None)
    if j1 is not None:
        assert simple.same_typing(j1, j2)


# -------------------------------------------------------------------- System F

def _f(src, ctx=None):
    ty = F.check_f(ctx or {}, F.parse_fterm(src))
    return None if ty is None else F.show_ftype(ty)


def test_system_f_goldens():
    assert _f("/\\a. \\x:a. x") == "forall a. a -> a"
    assert _f("(/\\a. \\x:a. x) [b]") == "b -> b"
    assert _f("\\x:a. x x") is None
    assert _f("\\p:(a * b). <pi2(p), pi1(p)>") == "a * b -> b * a"
    assert _f("\\x:a. in1[a + b](x)") == "a -> a + b"
    pk = "pack[exists t. t * (t -> b)](a, <x, f>)"
    assert _f(pk, {"x": F.parse_ftype("a"), "f": F.parse_ftype("a -> b")}) == "exists t. t * (t -> b)"


def test_existential_witness_must_not_escape():
    ctx = {"p": F.parse_ftype("exists t. t * (t -> b)")}
    assert _f("unpack(p, /\\t. \\q:(t * (t -> b)). pi2(q) pi1(q))", ctx) == "b"
    assert _f("unpack(p, /\\t. \\q:(t * (t -> b)). pi1(q))", ctx) is None


def test_system_f_subject_reduction_on_examples():
    ctx = {"y": F.parse_ftype("b")}
    for src in ["(/\\a. \\x:a. x) [b] y",
                "pi1(<y, y>)",
                "case(in1[b + b](y), \\u:b. u, \\v:b. v)",
                "unpack(pack[exists t. t](b, y), /\\t. \\q:t. y)"]:
        m = F.parse_fterm(src)
        a = F.check_f(ctx, m)
        assert a is not None, src
        assert F.parse_fterm(F.show_fterm(m)) == m
        for n in F.f_reducts(m):
            assert F.type_eq(F.check_f(ctx, n), a), src


def test_ftype_roundtrip():
    for src in ["forall a. a -> a", "exists t. t * (t -> b)", "(a + b) * c -> a", "a -> b -> c"]:
        a = F.parse_ftype(src)
        assert F.parse_ftype(F.show_ftype(a)) == a
        assert F.show_ftype(a) == src


# ------------------------------------------------------------------ subtyping

R = S.parse_rtype


def test_record_and_variant_rules():
    assert S.subtype_leq(R("{a:A, b:B}"), R("{a:A}"))
    assert not S.subtype_leq(R("{a:A}"), R("{a:A, b:B}"))
    assert S.subtype_leq(R("[a:A]"), R("[a:A, b:B]"))
    assert not S.subtype_leq(R("[a:A, b:B]"), R("[a:A]"))
    assert S.subtype_leq(R("{a:A} -> B"), R("{a:A, c:C} -> B"))
    assert S.join(R("{a:A, b:B}"), R("{a:A, c:C}")) == R("{a:A}")
    assert S.meet(R("[a:A, b:B]"), R("[a:A, c:C]")) == R("[a:A]")


def test_check_sub_uses_subsumption():
    ctx = {"f": R("{a:A} -> A"), "r": R("{a:A, b:B}")}
    assert S.check_sub(ctx, S.parse_rterm("f r")) == R("A")
    assert S.check_sub({"f": R("{a:A, b:B} -> A"), "r": R("{a:A}")}, S.parse_rterm("f r")) is None
    m = S.parse_rterm("\\x:[a:A, b:A]. case x of a => \\u:A. u | b => \\v:A. v")
    assert S.check_sub({}, m) == R("[a:A, b:A] -> A")


def test_rterm_roundtrip():
    for src in ["\\r:{a:A, b:B}. r.a", "[a = x]@[a:A, b:B]", "case x of a => f | b => g"]:
        m = S.parse_rterm(src)
        assert S.parse_rterm(S.show_rterm(m)) == m


# ------------------------------------------------------------------ IR typing

def test_type_translations():
    a = simple.Arrow(simple.TVar("t2"), simple.TVar("t1"))
    assert ir.show_irtype(ir.cps_type(a)) == "(t2, (t1) -> R) -> R"
    cc = ir.cmp_type(a)
    assert isinstance(cc, ir.Ex)
    assert ir.parse_irtype(ir.show_irtype(cc)) == cc


def test_check_ir_rejects_mistyped_halt():
    t = T.pipeline(T.parse("\\x. y"))
    good = {"y": ir.TV("t1"), "halt": ir.neg(ir.cps_type(simple.Arrow(simple.TVar("t2"), simple.TVar("t1"))))}
    bad = {"y": ir.TV("t1"), "halt": ir.neg(ir.TV("t1"))}
    assert ir.check_ir("cps", good, t["cps"])
    assert not ir.check_ir("cps", bad, t["cps"])
    assert not ir.check_ir("cps", good, t["cc"])  # wrong stage shape
