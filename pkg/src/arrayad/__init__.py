"""A small functional array language with sized types, forward-mode
dual-number differentiation, a strategy-driven rewrite optimizer, an
operation-counting interpreter, and a Futhark-syntax emitter."""

from .lang import (
    INT, REAL,
    App, Array, Arrow, BinOp, Build, CFin, CInt, CReal, Fin, FinToInt, Fst,
    Get, If, IFold, Int, IntToReal, Lam, Let, MkPair, Pair, Real, Snd, Term,
    Type, TypeCheckError, Var,
    all_names, children, count_free, free_vars, rebuild, replace_var,
    subterms, typecheck,
)
from .syntax import ParseError, parse_term, parse_type, print_term, print_type
from .subst import fresh_name, fresh_term, subst
from .interp import (
    ArrayV, ClosureV, EvalError, FinV, IntV, OpCounter, PairV, RealV, Value,
    apply_value, eval_closed, eval_term, values_close, values_equal,
)
from .fastinterp import CompileError, compile_term, eval_compiled
from .dual import (
    add_zeroes, dual_term, dual_type, loss_diff, loss_grad, one_hot,
    zip_arrays,
)
from .strategy import (
    Fail, FuelExhausted, Id, LChoice, Normalize, One, Repeat, Rule, Seq,
    StrategyEngineError, StrategyExpr, TopDown, UnknownRuleError,
    apply_strategy, lchoice_all, parse_strategy, print_strategy, run, seq_all,
)
from .rules import PIPELINE_RULES, RuleRegistry, default_pipeline, default_registry
from .futhark import EmitOptions, emit
from .bench import (
    BenchReport, BenchRow, bench_vector_sum, fit_loglog_slope,
    gradient_env, gradient_program, plot_report, vector_sum_loss, write_csv,
)

__version__ = "0.1.0"
