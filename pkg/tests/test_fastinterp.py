import random

import pytest

from arrayad import (
    REAL,
    Array, ArrayV, Arrow, BinOp, Build, CReal, ClosureV, CompileError,
    EvalError, Fin, Get, IFold, Lam, RealV, Var,
    compile_term, eval_compiled, eval_term, values_equal,
)
from termgen import TermGen


class TestAgreementWithReference:
    """The compiled engine must reproduce the oracle exactly: same values,
    same operation counters."""

    def test_random_closed_corpus(self):
        gen = TermGen(random.Random(47))
        for _ in range(250):
            t = gen.term(gen.ground_type(2), depth=5)
            v_ref, c_ref = eval_term(t)
            v_fast, c_fast = eval_compiled(t)
            assert values_equal(v_ref, v_fast), t
            assert c_ref == c_fast, t

    def test_env_arrays(self):
        n = 5
        arr = Var("p", Array(n, REAL))
        step = Lam("acc", REAL, Lam("j", Fin(n),
                                    BinOp("add", Var("acc", REAL),
                                          Get(n, arr, Var("j", Fin(n))))))
        t = IFold(n, step, CReal(0.0))
        env = {("p", Array(n, REAL)): ArrayV(tuple(RealV(float(i)) for i in range(n)))}
        v_ref, c_ref = eval_term(t, env)
        v_fast, c_fast = eval_compiled(t, env)
        assert v_ref == v_fast == RealV(10.0)
        assert c_ref == c_fast

    def test_division_by_zero_maps_to_eval_error(self):
        t = BinOp("div", CReal(1.0), CReal(0.0))
        with pytest.raises(EvalError):
            eval_compiled(t)

    def test_branch_counts_differ_per_branch(self):
        # taken branch determines the counters, exactly as in the reference
        from arrayad import CInt, If
        costly = BinOp("add", CReal(1.0), BinOp("add", CReal(2.0), CReal(3.0)))
        cheap = CReal(0.0)
        for cond, expect in ((CInt(1), 2), (CInt(0), 0)):
            t = If(cond, costly, cheap)
            _, c_fast = eval_compiled(t)
            _, c_ref = eval_term(t)
            assert c_fast.real_arith == c_ref.real_arith == expect


class TestClosureSnapshots:
    """Closures created inside compiled loops must capture the bindings of
    their own iteration, not whatever the loop variables hold later."""

    def test_function_accumulator_sees_per_iteration_index(self):
        from arrayad import App, FinToInt, IntToReal
        n = 4
        fty = Arrow(REAL, REAL)
        acc = Var("acc", fty)
        j = Var("j", Fin(n))
        # acc' = \v. acc(v) + j   -- each layer must remember its own j
        step = Lam("acc", fty, Lam("j", Fin(n),
                   Lam("v", REAL,
                       BinOp("add", App(acc, Var("v", REAL)),
                             IntToReal(FinToInt(j))))))
        fold = IFold(n, step, Lam("v", REAL, Var("v", REAL)))
        t = App(fold, CReal(100.0))  # 100 + 0 + 1 + 2 + 3
        v_ref, c_ref = eval_term(t)
        v_fast, c_fast = eval_compiled(t)
        assert v_ref == v_fast == RealV(106.0)
        assert c_ref == c_fast

    def test_closures_built_per_element(self):
        from arrayad import App, FinToInt, IntToReal
        n = 3
        j = Var("j", Fin(n))
        # build an offset function per element, apply it immediately
        mk = Lam("v", REAL, BinOp("mul", Var("v", REAL),
                                  IntToReal(FinToInt(j))))
        t = Build(n, Lam("j", Fin(n), App(mk, CReal(2.0))))
        v_ref, c_ref = eval_term(t)
        v_fast, c_fast = eval_compiled(t)
        assert v_ref == v_fast == ArrayV((RealV(0.0), RealV(2.0), RealV(4.0)))
        assert c_ref == c_fast


class TestRestrictions:
    def test_arrow_result_rejected(self):
        t = Lam("x", REAL, Var("x", REAL))
        with pytest.raises(CompileError):
            eval_compiled(t)

    def test_closure_env_value_rejected(self):
        t = Var("f", Arrow(REAL, REAL))
        with pytest.raises(CompileError):
            eval_compiled(t, {("f", Arrow(REAL, REAL)):
                              ClosureV("x", REAL, Var("x", REAL), {})})

    def test_unbound_variable(self):
        with pytest.raises(EvalError):
            eval_compiled(Var("x", REAL), {})


class TestCompiledProgram:
    def test_reusable_and_deterministic(self):
        n = 4
        t = Build(n, Lam("i", Fin(n), CReal(1.5)))
        prog = compile_term(t)
        v1, c1 = prog.run()
        v2, c2 = prog.run()
        assert values_equal(v1, v2)
        assert c1 == c2
        assert c1.array_alloc_elems == n

    def test_source_is_python(self):
        t = BinOp("add", CReal(1.0), CReal(2.0))
        prog = compile_term(t)
        assert "def _program" in prog.source
        compile(prog.source, "<emitted>", "exec")

    def test_functions_inside_program(self):
        # higher-order code is fine as long as it stays internal
        from arrayad import App
        f = Var("f", Arrow(REAL, REAL))
        apply_twice = Lam("f", Arrow(REAL, REAL),
                          Lam("v", REAL, App(f, App(f, Var("v", REAL)))))
        double = Lam("x", REAL, BinOp("add", Var("x", REAL), Var("x", REAL)))
        t = App(App(apply_twice, double), CReal(3.0))
        v_fast, c_fast = eval_compiled(t)
        v_ref, c_ref = eval_term(t)
        assert v_fast == v_ref == RealV(12.0)
        assert c_fast == c_ref
