import math
import random

import pytest

from arrayad import (
    INT, REAL,
    Array, ArrayV, Arrow, BinOp, Build, CFin, CReal, Fin, Fst, Get, If,
    IFold, Lam, MkPair, Pair, PairV, RealV, Var,
    add_zeroes, apply_value, dual_term, dual_type, eval_closed, eval_term,
    loss_diff, loss_grad, one_hot, subterms, typecheck, zip_arrays,
)
from termgen import SmoothGen, TermGen

DR = Pair(REAL, REAL)


def deriv_ad(f_term, x):
    """snd of the dual function applied to (x, 1)."""
    d = dual_term(f_term)
    dv, _ = eval_closed(d)
    out, _ = apply_value(dv, PairV(RealV(x), RealV(1.0)))
    return out.b.x


def primal_ad(f_term, x, tangent=0.0):
    d = dual_term(f_term)
    dv, _ = eval_closed(d)
    out, _ = apply_value(dv, PairV(RealV(x), RealV(tangent)))
    return out.a.x


def deriv_fd(f_term, x, h=1e-6):
    fv, _ = eval_closed(f_term)
    hi, _ = apply_value(fv, RealV(x + h))
    lo, _ = apply_value(fv, RealV(x - h))
    return (hi.x - lo.x) / (2 * h)


def assert_deriv_close(ad, fd, rel=1e-5, abs_tol=1e-8):
    if abs(fd) > 1e-3:
        assert abs(ad - fd) <= rel * abs(fd), (ad, fd)
    else:
        assert abs(ad - fd) <= abs_tol, (ad, fd)


class TestDualType:
    def test_real(self):
        assert dual_type(REAL) == DR

    def test_array(self):
        assert dual_type(Array(5, REAL)) == Array(5, DR)

    def test_fin_and_int_fixed(self):
        assert dual_type(Fin(7)) == Fin(7)
        assert dual_type(INT) == INT

    def test_arrow_and_pair(self):
        assert dual_type(Arrow(REAL, INT)) == Arrow(DR, INT)
        assert dual_type(Pair(REAL, Fin(3))) == Pair(DR, Fin(3))

    def test_not_idempotent_on_real(self):
        assert dual_type(dual_type(REAL)) == Pair(DR, DR)
        assert dual_type(dual_type(REAL)) != dual_type(REAL)

    def test_idempotent_on_discrete(self):
        assert dual_type(dual_type(INT)) == INT
        assert dual_type(dual_type(Fin(4))) == Fin(4)


class TestDualTerm:
    def test_const(self):
        assert dual_term(CReal(2.5)) == MkPair(CReal(2.5), CReal(0.0))

    def test_lt_compares_primals(self):
        t = BinOp("lt", Var("a", REAL), Var("b", REAL))
        d = dual_term(t)
        assert d == BinOp("lt", Fst(Var("a", DR)), Fst(Var("b", DR)))

    def test_square_derivative(self):
        f = Lam("x", REAL, BinOp("mul", Var("x", REAL), Var("x", REAL)))
        assert math.isclose(deriv_ad(f, 3.0), 6.0, rel_tol=1e-12)
        assert_deriv_close(deriv_ad(f, 3.0), deriv_fd(f, 3.0))

    def test_type_commutation_random(self):
        gen = TermGen(random.Random(53))
        for _ in range(120):
            ty = gen.ground_type(2)
            t = gen.term(ty, depth=4)
            assert typecheck(dual_term(t)) == dual_type(ty)

    def test_primal_preservation(self):
        gen = SmoothGen(random.Random(59))
        for _ in range(60):
            f = gen.scalar_fn(depth=4)
            x = random.Random(61).uniform(0.5, 1.5)
            fv, _ = eval_closed(f)
            direct = apply_value(fv, RealV(x))[0].x
            for tangent in (0.0, 1.0, -2.5):
                primal = primal_ad(f, x, tangent)
                assert math.isclose(primal, direct, rel_tol=1e-12, abs_tol=1e-12)

    def test_structure_preservation(self):
        gen = TermGen(random.Random(67))
        for _ in range(150):
            t = gen.term(gen.ground_type(2), depth=5)
            d = dual_term(t)
            for node_type in (Build, IFold, If):
                before = sum(isinstance(s, node_type) for s in subterms(t))
                after = sum(isinstance(s, node_type) for s in subterms(d))
                assert before == after, (node_type, t)

    def test_branch_consistency(self):
        # derivative equals that of the branch actually taken
        x = Var("x", REAL)
        f = Lam("x", REAL,
                If(BinOp("lt", x, CReal(1.0)),
                   BinOp("mul", x, x),
                   BinOp("mul", CReal(3.0), x)))
        assert math.isclose(deriv_ad(f, 0.5), 1.0, rel_tol=1e-12)  # 2x at 0.5
        assert math.isclose(deriv_ad(f, 2.0), 3.0, rel_tol=1e-12)

    def test_quotient_rule(self):
        # f(x) = x / (1 + x*x); f'(x) = (1 - x^2) / (1 + x^2)^2
        x = Var("x", REAL)
        f = Lam("x", REAL,
                BinOp("div", x, BinOp("add", CReal(1.0), BinOp("mul", x, x))))
        for point in (0.0, 0.5, 2.0):
            expect = (1 - point * point) / (1 + point * point) ** 2
            assert math.isclose(deriv_ad(f, point), expect, rel_tol=1e-12)
            assert_deriv_close(deriv_ad(f, point), deriv_fd(f, point))

    def test_subtraction_rule(self):
        x = Var("x", REAL)
        f = Lam("x", REAL, BinOp("sub", BinOp("mul", x, x), x))
        assert math.isclose(deriv_ad(f, 3.0), 5.0, rel_tol=1e-12)

    def test_second_order_smoke(self):
        # the transform composes mechanically: d/dx of x*x twice gives 2
        f = Lam("x", REAL, BinOp("mul", Var("x", REAL), Var("x", REAL)))
        dd = dual_term(dual_term(f))
        ddv, _ = eval_closed(dd)
        arg = PairV(PairV(RealV(3.0), RealV(1.0)), PairV(RealV(1.0), RealV(0.0)))
        out, _ = apply_value(ddv, arg)
        assert math.isclose(out.b.b.x, 2.0, rel_tol=1e-12)


def _array_value(values):
    return ArrayV(tuple(RealV(float(v)) for v in values))


class TestBuilders:
    def test_add_zeroes_value(self):
        arr = Var("v", Array(2, REAL))
        t = add_zeroes(arr)
        assert typecheck(t) == Array(2, DR)
        v, _ = eval_term(t, {("v", Array(2, REAL)): _array_value([2, 3])})
        assert v == ArrayV((PairV(RealV(2.0), RealV(0.0)),
                            PairV(RealV(3.0), RealV(0.0))))

    def test_add_zeroes_type(self):
        arr = Var("v", Array(4, REAL))
        assert typecheck(add_zeroes(arr)) == Array(4, DR)

    def test_add_zeroes_requires_real_array(self):
        with pytest.raises(ValueError):
            add_zeroes(Var("v", Array(3, INT)))
        with pytest.raises(ValueError):
            add_zeroes(CReal(1.0))

    def test_zip_values(self):
        env = {("a", Array(2, REAL)): _array_value([1, 2]),
               ("b", Array(2, REAL)): _array_value([3, 4])}
        t = zip_arrays(Var("a", Array(2, REAL)), Var("b", Array(2, REAL)))
        v, _ = eval_term(t, env)
        assert v == ArrayV((PairV(RealV(1.0), RealV(3.0)),
                            PairV(RealV(2.0), RealV(4.0))))

    def test_zip_type_signature(self):
        a = Var("a", Array(3, INT))
        b = Var("b", Array(3, REAL))
        assert typecheck(zip_arrays(a, b)) == Array(3, Pair(INT, REAL))
        with pytest.raises(ValueError):
            zip_arrays(Var("a", Array(3, REAL)), Var("b", Array(4, REAL)))

    def test_zip_with_itself(self):
        a = Var("a", Array(2, REAL))
        t = zip_arrays(a, a)
        v, _ = eval_term(t, {("a", Array(2, REAL)): _array_value([5, 6])})
        assert v == ArrayV((PairV(RealV(5.0), RealV(5.0)),
                            PairV(RealV(6.0), RealV(6.0))))

    def test_zip_composes_with_add_zeroes(self):
        arr = Var("v", Array(4, REAL))
        assert typecheck(add_zeroes(arr)) == Array(4, dual_type(REAL))

    def test_one_hot_basis(self):
        t = one_hot(4, CFin(2, 4))
        v, _ = eval_closed(t)
        assert v == _array_value([0, 0, 1, 0])

    def test_one_hot_singleton(self):
        v, _ = eval_closed(one_hot(1, CFin(0, 1)))
        assert v == _array_value([1])

    def test_one_hot_sums_to_one(self):
        for n in range(1, 9):
            for i in range(n):
                v, _ = eval_closed(one_hot(n, CFin(i, n)))
                total = sum(item.x for item in v.items)
                assert total == 1.0

    def test_one_hot_type_check(self):
        with pytest.raises(ValueError):
            one_hot(4, CFin(2, 5))


def _vector_sum_loss(n, a=1, b=1):
    p = Var("p", Array(n, REAL))
    step = Lam("acc", REAL, Lam("j", Fin(n),
                                BinOp("add", Var("acc", REAL),
                                      Get(n, p, Var("j", Fin(n))))))
    return Lam("x", Array(a, REAL), Lam("y", Array(b, REAL),
               Lam("p", Array(n, REAL), IFold(n, step, CReal(0.0)))))


def _grad_env(a, b, n, params):
    return {("x", Array(a, REAL)): _array_value([0.0] * a),
            ("y", Array(b, REAL)): _array_value([0.0] * b),
            ("p", Array(n, REAL)): _array_value(params)}


def _diff_env(a, b, n, params, direction):
    env = _grad_env(a, b, n, params)
    env[("pbar", Array(n, REAL))] = _array_value(direction)
    return env


def _loss_args(a, b, n):
    return (Var("x", Array(a, REAL)), Var("y", Array(b, REAL)),
            Var("p", Array(n, REAL)))


class TestLossDiff:
    def test_vector_sum_direction(self):
        loss = _vector_sum_loss(2)
        x, y, p = _loss_args(1, 1, 2)
        t = loss_diff(loss, x, y, p, Var("pbar", Array(2, REAL)))
        v, _ = eval_term(t, _diff_env(1, 1, 2, [2, 3], [1, 0]))
        assert v == RealV(1.0)

    def test_zero_direction(self):
        loss = _vector_sum_loss(3)
        x, y, p = _loss_args(1, 1, 3)
        t = loss_diff(loss, x, y, p, Var("pbar", Array(3, REAL)))
        v, _ = eval_term(t, _diff_env(1, 1, 3, [2, 3, 4], [0, 0, 0]))
        assert v == RealV(0.0)

    def test_linearity_in_direction(self):
        rng = random.Random(71)
        gen = SmoothGen(rng)
        n = 3
        loss = gen.loss_fn(1, 1, n, depth=2)
        x, y, p = _loss_args(1, 1, n)
        t = loss_diff(loss, x, y, p, Var("pbar", Array(n, REAL)))
        params = [rng.uniform(0.5, 1.5) for _ in range(n)]
        u = [rng.uniform(-1, 1) for _ in range(n)]
        v = [rng.uniform(-1, 1) for _ in range(n)]
        uv = [ui + vi for ui, vi in zip(u, v)]

        def d_along(direction):
            out, _ = eval_term(t, _diff_env(1, 1, n, params, direction))
            return out.x

        assert math.isclose(d_along(uv), d_along(u) + d_along(v),
                            rel_tol=1e-9, abs_tol=1e-9)

    def test_loss_shape_validated(self):
        with pytest.raises(ValueError):
            loss_diff(CReal(1.0), *_loss_args(1, 1, 2), Var("pbar", Array(2, REAL)))


class TestLossGrad:
    def test_vector_sum_all_ones(self):
        loss = _vector_sum_loss(3)
        t = loss_grad(loss, *_loss_args(1, 1, 3))
        assert typecheck(t) == Array(3, REAL)
        v, _ = eval_term(t, _grad_env(1, 1, 3, [2, 3, 4]))
        assert v == _array_value([1, 1, 1])

    def test_sum_of_squares(self):
        n = 3
        p = Var("p", Array(n, REAL))
        j = Var("j", Fin(n))
        term = BinOp("mul", Get(n, p, j), Get(n, p, j))
        step = Lam("acc", REAL, Lam("j", Fin(n),
                                    BinOp("add", Var("acc", REAL), term)))
        loss = Lam("x", Array(1, REAL), Lam("y", Array(1, REAL),
                   Lam("p", Array(n, REAL), IFold(n, step, CReal(0.0)))))
        t = loss_grad(loss, *_loss_args(1, 1, n))
        v, _ = eval_term(t, _grad_env(1, 1, n, [1, 2, 3]))
        assert v == _array_value([2, 4, 6])

    def test_degenerate_single_parameter(self):
        loss = _vector_sum_loss(1)
        x, y, p = _loss_args(1, 1, 1)
        g = loss_grad(loss, x, y, p)
        d = loss_diff(loss, x, y, p, Var("pbar", Array(1, REAL)))
        gv, _ = eval_term(g, _grad_env(1, 1, 1, [7.0]))
        dv, _ = eval_term(d, _diff_env(1, 1, 1, [7.0], [1.0]))
        assert gv.items[0] == dv
