import random

from arrayad import (
    REAL,
    App, Arrow, BinOp, CReal, Lam, Var,
    count_free, free_vars, fresh_name, fresh_term, subst, typecheck,
)
from capture_cases import CASES
from debruijn import alpha_eq, db_subst, to_db
from termgen import TermGen


class TestFreshName:
    def test_zero(self):
        assert fresh_name(0) == ("x0", 1)

    def test_seven(self):
        assert fresh_name(7) == ("x7", 8)

    def test_consecutive_distinct(self):
        n1, c = fresh_name(3)
        n2, _ = fresh_name(c)
        assert n1 != n2


class TestFreshTerm:
    def test_lam_renamed(self):
        t = Lam("y", REAL, Var("y", REAL))
        assert fresh_term(t, 0) == (Lam("x0", REAL, Var("x0", REAL)), 1)

    def test_var_unchanged(self):
        t = Var("z", REAL)
        assert fresh_term(t, 0) == (t, 0)

    def test_nested_lams_distinct(self):
        t = Lam("a", REAL, Lam("b", REAL, BinOp("add", Var("a", REAL),
                                                Var("b", REAL))))
        out, counter = fresh_term(t, 0)
        assert counter == 2
        assert isinstance(out, Lam) and isinstance(out.body, Lam)
        assert out.name != out.body.name
        assert alpha_eq(out, t)

    def test_free_vars_untouched(self):
        t = Lam("y", REAL, BinOp("add", Var("y", REAL), Var("w", REAL)))
        out, _ = fresh_term(t, 0)
        assert ("w", REAL) in free_vars(out)

    def test_skips_colliding_free_name(self):
        # body has a free x0, so the binder cannot take that name
        t = Lam("y", REAL, BinOp("add", Var("y", REAL), Var("x0", REAL)))
        out, _ = fresh_term(t, 0)
        assert out.name != "x0"
        assert alpha_eq(out, t)

    def test_random_alpha_equivalent(self):
        gen = TermGen(random.Random(23))
        for _ in range(100):
            t = gen.closed_term(depth=4)
            out, _ = fresh_term(t, 0)
            assert alpha_eq(out, t)
            assert typecheck(out) == typecheck(t)


class TestSubst:
    def test_simple(self):
        body = BinOp("add", Var("x", REAL), CReal(1.0))
        out, _ = subst("x", REAL, CReal(2.0), body, 0)
        assert out == BinOp("add", CReal(2.0), CReal(1.0))

    def test_replacement_binders_freshened(self):
        rep = Lam("y", REAL, Var("z", REAL))
        body = App(Var("x", Arrow(REAL, REAL)), Var("z", REAL))
        out, counter = subst("x", Arrow(REAL, REAL), rep, body, 0)
        assert counter == 1
        fn = out.fn
        assert isinstance(fn, Lam) and fn.name == "x0"
        assert fn.body == Var("z", REAL)  # free z still the outer z
        assert out.arg == Var("z", REAL)

    def test_shadowed_context_untouched(self):
        body = Lam("x", REAL, Var("x", REAL))
        out, _ = subst("x", REAL, CReal(5.0), body, 0)
        assert out == body

    def test_absent_variable_is_noop(self):
        gen = TermGen(random.Random(29))
        for _ in range(50):
            t = gen.closed_term(depth=3)
            out, counter = subst("zz", REAL, CReal(1.0), t, 0)
            assert out == t and counter == 0

    def test_type_preserved(self):
        gen = TermGen(random.Random(31))
        for _ in range(80):
            ty = gen.ground_type(1)
            rep = gen.term(ty, depth=2)
            body = gen.term(gen.ground_type(1), depth=3, scope=(("h", ty),))
            out, _ = subst("h", ty, rep, body, 0)
            assert typecheck(out) == typecheck(body)


class TestCaptureAvoidance:
    def test_hand_built_cases_match_oracle(self):
        assert len(CASES) >= 10
        for label, name, ty, rep, body in CASES:
            out, _ = subst(name, ty, rep, body, 0)
            expected = db_subst((name, ty), to_db(rep), to_db(body))
            assert to_db(out) == expected, label

    def test_random_agreement_with_oracle(self):
        gen = TermGen(random.Random(37))
        checked = 0
        for _ in range(300):
            ty = gen.ground_type(1)
            rep = gen.term(ty, depth=2)
            body_ty = gen.ground_type(1)
            body = gen.term(body_ty, depth=4, scope=(("h", ty),))
            if not count_free(body, "h", ty):
                continue
            out, _ = subst("h", ty, rep, body, 0)
            assert to_db(out) == db_subst(("h", ty), to_db(rep), to_db(body))
            checked += 1
        assert checked >= 100
