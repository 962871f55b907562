"""The vector-sum gradient micro-benchmark, measured in operation counts.

The benchmark builds the gradient of an array sum over a constant-filled
parameter vector, evaluates it once naively and once through the default
rewrite pipeline, and records the interpreter's operation counters for each
size.  Fitted log-log slopes of total operations against size expose the
asymptotics: the naive gradient re-runs the differentiated sum once per
parameter (slope about 2), the rewritten one is a single pass (slope about
1).  Reports render as a table, as machine-readable ``n,variant,totalOps``
lines, as CSV, and optionally as a log-log figure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dual import loss_grad
from .fastinterp import eval_compiled
from .interp import ArrayV, OpCounter, RealV, Value
from .lang import (
    REAL, Arrow, Array, BinOp, CReal, Fin, Get, IFold, Lam, Term, Var,
    typecheck,
)
from .rules import default_pipeline, default_registry
from .strategy import run

FILL_VALUE = 1.5  # any constant works; the gradient of a sum ignores it


def vector_sum_loss(n: int, a: int = 1, b: int = 1) -> Term:
    """A loss that sums its parameter vector and ignores the data arrays."""
    p = Var("p", Array(n, REAL))
    acc = Var("acc", REAL)
    j = Var("j", Fin(n))
    body = BinOp("add", acc, Get(n, p, j))
    summed = IFold(n, Lam("acc", REAL, Lam("j", Fin(n), body)), CReal(0.0))
    return Lam("x", Array(a, REAL),
               Lam("y", Array(b, REAL),
                   Lam("p", Array(n, REAL), summed)))


def gradient_program(loss: Term) -> Term:
    """The gradient term of a loss, with x, y, p left as free inputs."""
    ty = typecheck(loss)
    assert isinstance(ty, Arrow)
    a = ty.dom.n
    b = ty.cod.dom.n
    n = ty.cod.cod.dom.n
    return loss_grad(loss,
                     Var("x", Array(a, REAL)),
                     Var("y", Array(b, REAL)),
                     Var("p", Array(n, REAL)))


def gradient_env(a: int, b: int, n: int, params: list[float],
                 x: list[float] | None = None,
                 y: list[float] | None = None) -> dict:
    def arr(values):
        return ArrayV(tuple(RealV(float(v)) for v in values))
    return {
        ("x", Array(a, REAL)): arr(x if x is not None else [0.0] * a),
        ("y", Array(b, REAL)): arr(y if y is not None else [0.0] * b),
        ("p", Array(n, REAL)): arr(params),
    }


@dataclass(frozen=True)
class BenchRow:
    n: int
    variant: str  # "unoptimized" | "optimized"
    counts: OpCounter

    @property
    def total_ops(self) -> int:
        return self.counts.total()


@dataclass(frozen=True)
class BenchReport:
    rows: tuple[BenchRow, ...]
    slopes: dict

    def machine_lines(self) -> list[str]:
        return [f"{r.n},{r.variant},{r.total_ops}" for r in self.rows]

    def table(self) -> str:
        header = (f"{'n':>8}  {'variant':<12} {'realArith':>10} {'cmp':>8} "
                  f"{'reads':>10} {'alloc':>10} {'loops':>10} {'totalOps':>12}")
        lines = [header, "-" * len(header)]
        for r in self.rows:
            c = r.counts
            lines.append(
                f"{r.n:>8}  {r.variant:<12} {c.real_arith:>10} "
                f"{c.comparisons:>8} {c.array_reads:>10} "
                f"{c.array_alloc_elems:>10} {c.loop_iterations:>10} "
                f"{r.total_ops:>12}")
        for variant, slope in sorted(self.slopes.items()):
            lines.append(f"log-log slope [{variant}]: {slope:.3f}")
        return "\n".join(lines)


def fit_loglog_slope(points: list[tuple[int, int]]) -> float:
    """Least-squares slope of log(total) against log(n)."""
    xs = [math.log(n) for n, _ in points]
    ys = [math.log(total) for _, total in points]
    k = len(xs)
    mx = sum(xs) / k
    my = sum(ys) / k
    var = sum((x - mx) ** 2 for x in xs)
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return cov / var


def _all_ones(v: Value, n: int) -> bool:
    return (isinstance(v, ArrayV) and len(v.items) == n
            and all(item == RealV(1.0) for item in v.items))


def bench_vector_sum(sizes: list[int], fill: float = FILL_VALUE) -> BenchReport:
    """Evaluate unoptimized and optimized gradients over the given sizes."""
    if not sizes:
        raise ValueError("need at least one size")
    if any(n < 2 for n in sizes):
        raise ValueError("benchmark sizes must be >= 2")
    registry = default_registry()
    pipeline = default_pipeline()
    rows: list[BenchRow] = []
    for n in sorted(set(sizes)):  # rows are strictly increasing in n
        loss = vector_sum_loss(n)
        naive = gradient_program(loss)
        rewritten = run(pipeline, naive, registry)
        if rewritten is None:  # normalize cannot fail
            raise RuntimeError("optimization pipeline failed unexpectedly")
        env = gradient_env(1, 1, n, [fill] * n)
        for variant, term in (("unoptimized", naive), ("optimized", rewritten)):
            value, counts = eval_compiled(term, env)
            if not _all_ones(value, n):
                raise RuntimeError(
                    f"{variant} gradient at n={n} is not all ones: {value!r}")
            rows.append(BenchRow(n, variant, counts))
    slopes = {
        variant: fit_loglog_slope(
            [(r.n, r.total_ops) for r in rows if r.variant == variant])
        for variant in ("unoptimized", "optimized")
    }
    return BenchReport(tuple(rows), slopes)


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------


def write_csv(report: BenchReport, path) -> None:
    lines = ["n,variant,realArith,comparisons,arrayReads,arrayAllocElems,"
             "loopIterations,totalOps"]
    for r in report.rows:
        c = r.counts
        lines.append(f"{r.n},{r.variant},{c.real_arith},{c.comparisons},"
                     f"{c.array_reads},{c.array_alloc_elems},"
                     f"{c.loop_iterations},{r.total_ops}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def plot_report(report: BenchReport, path) -> None:
    """Render total operations against size on log-log axes to a file."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    styles = {"unoptimized": ("tab:orange", "o"), "optimized": ("tab:blue", "s")}
    for variant, (color, marker) in styles.items():
        pts = [(r.n, r.total_ops) for r in report.rows if r.variant == variant]
        if not pts:
            continue
        ns, totals = zip(*pts)
        slope = report.slopes.get(variant)
        label = f"{variant} (slope {slope:.2f})" if slope is not None else variant
        ax.loglog(ns, totals, color=color, marker=marker, label=label)
    ax.set_xlabel("vector size n")
    ax.set_ylabel("total interpreter operations")
    ax.set_title("gradient of vector sum: operation counts")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
