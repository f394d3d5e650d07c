"""Random workloads, percent-error metrics, and seeded experiment runs.

An experiment evaluates every workload query exactly once against the base
tables, then, per sample size, against one sample database with each
requested method, aggregating percent errors per (method, size). Queries
whose exact selectivity is zero but whose prediction is not are excluded from
the percent aggregates (the metric is undefined there) and reported in the
summary's excluded count; their estimates stay in the per-query records.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .execution import estimate_all_nodes, exact_cardinality, exact_selectivity
from .queries import (
    And,
    BoolExpr,
    ColumnRef,
    ComparisonOp,
    JoinCondition,
    JoinNode,
    Or,
    QueryPlan,
    SelectLeaf,
    SelectionClause,
    subplans,
)
from .sampling import create_sample
from .stats import StatsCatalog, build_stats, estimate_join
from .tables import Table

__all__ = [
    "WorkloadSpec",
    "ErrorSummary",
    "QueryNodeRecord",
    "ExperimentResult",
    "METHODS",
    "generate_workload",
    "percent_error",
    "run_experiment",
    "summary_csv",
    "per_query_csv",
    "write_experiment_csv",
    "SUMMARY_HEADER",
    "PER_QUERY_HEADER",
]

METHODS = ("indexed", "practitioner", "histogram")
WORKLOAD_KINDS = ("select-only", "join-pair")

_OPS = (
    ComparisonOp.LT,
    ComparisonOp.GT,
    ComparisonOp.LE,
    ComparisonOp.GE,
    ComparisonOp.EQ,
    ComparisonOp.NE,
)

SUMMARY_HEADER = "method,sample_size,mean_pct_error,stddev_pct_error,frac_within_eps,excluded"
PER_QUERY_HEADER = "query_id,node_id,node_kind,exact,est_indexed,est_practitioner,s,seed"


@dataclass(frozen=True)
class WorkloadSpec:
    """Shape of a random workload: m columns and b clauses per predicate."""

    m: int
    b: int
    count: int = 100
    kind: str = "select-only"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.b < self.m:
            raise ValueError("b must be at least m so every chosen column is used")
        if self.kind not in WORKLOAD_KINDS:
            raise ValueError(f"kind must be one of {WORKLOAD_KINDS}")


@dataclass(frozen=True)
class ErrorSummary:
    method: str
    sample_size: int | None
    mean_pct_error: float
    stddev_pct_error: float
    frac_within_eps: float
    excluded_zero_exact: int


@dataclass(frozen=True)
class QueryNodeRecord:
    query_id: int
    node_id: int
    node_kind: str
    exact: float | None
    est_indexed: float
    est_practitioner: float
    s: int
    seed: int


@dataclass
class ExperimentResult:
    summaries: list[ErrorSummary]
    per_query: list[QueryNodeRecord]


def _random_predicate(rng: np.random.Generator, table: Table, m: int, b: int) -> BoolExpr:
    """b clauses over m distinct columns (assigned round-robin), random ops,
    constants uniform over each column's domain, random AND/OR connectors,
    combined left-associatively."""
    chosen = [table.columns[int(i)] for i in rng.choice(len(table.columns), size=m, replace=False)]
    expr: BoolExpr | None = None
    for i in range(b):
        col = chosen[i % m]
        op = _OPS[int(rng.integers(0, len(_OPS)))]
        constant = int(rng.integers(col.domain.lo, col.domain.hi + 1))
        clause = SelectionClause(col.name, op, constant)
        if expr is None:
            expr = clause
        elif int(rng.integers(0, 2)) == 0:
            expr = And(expr, clause)
        else:
            expr = Or(expr, clause)
    assert expr is not None
    return expr


def generate_workload(spec: WorkloadSpec, tables: Sequence[Table]) -> list[QueryPlan]:
    """Generate `count` random plans over the given tables, deterministic per seed.

    select-only plans run over the first table; join-pair plans equi-join the
    first two tables on their first shared column name, with the random
    predicate on the first table and a TRUE leaf on the second.
    """
    tables = list(tables)
    if not tables:
        raise ValueError("workload generation needs at least one table")
    rng = np.random.default_rng(spec.seed)
    first = tables[0]
    if len(first.columns) < spec.m:
        raise ValueError(
            f"table {first.name!r} has {len(first.columns)} columns, workload needs {spec.m}"
        )
    if spec.kind == "select-only":
        return [
            SelectLeaf(first.name, _random_predicate(rng, first, spec.m, spec.b))
            for _ in range(spec.count)
        ]
    if len(tables) < 2:
        raise ValueError("join-pair workload needs two tables")
    second = tables[1]
    shared = [c for c in first.column_names if c in set(second.column_names)]
    if not shared:
        raise ValueError(
            f"tables {first.name!r} and {second.name!r} share no column name to join on"
        )
    join_col = shared[0]
    plans: list[QueryPlan] = []
    for _ in range(spec.count):
        pred = _random_predicate(rng, first, spec.m, spec.b)
        cond = JoinCondition(
            ColumnRef(first.name, join_col), ColumnRef(second.name, join_col), ComparisonOp.EQ
        )
        plans.append(JoinNode(SelectLeaf(first.name, pred), SelectLeaf(second.name, None), cond))
    return plans


def percent_error(predicted: float, exact: float) -> float | None:
    """Percent error 100*|predicted - exact| / exact.

    For exact = 0 the metric is undefined: returns 0.0 when the prediction is
    also zero, None (excluded) otherwise.
    """
    if predicted < 0 or exact < 0:
        raise ValueError("selectivities must be non-negative")
    if exact > 0:
        return 100.0 * abs(predicted - exact) / exact
    return 0.0 if predicted == 0 else None


def _summarize(
    method: str,
    sample_size: int | None,
    pairs: list[tuple[float, float]],
    epsilon: float,
) -> ErrorSummary:
    pct = []
    excluded = 0
    within = 0
    for predicted, exact in pairs:
        if abs(predicted - exact) <= epsilon:
            within += 1
        e = percent_error(predicted, exact)
        if e is None:
            excluded += 1
        else:
            pct.append(e)
    mean = float(np.mean(pct)) if pct else 0.0
    std = float(np.std(pct)) if pct else 0.0
    return ErrorSummary(
        method=method,
        sample_size=sample_size,
        mean_pct_error=mean,
        stddev_pct_error=std,
        frac_within_eps=within / len(pairs) if pairs else 0.0,
        excluded_zero_exact=excluded,
    )


def run_experiment(
    tables: Sequence[Table],
    workload: Sequence[QueryPlan],
    sample_sizes: Sequence[int],
    epsilon: float,
    methods: Sequence[str],
    seed: int,
    *,
    stats_buckets: int = 100,
    stats_mcv: int = 100,
) -> ExperimentResult:
    """Evaluate a workload with the requested methods over a sample-size sweep.

    One sample database is built per size (seeds derived deterministically
    from the master seed); exact selectivities are computed once per query.
    The 'histogram' method ignores sample sizes and yields a single summary.
    """
    tables = list(tables)
    workload = list(workload)
    methods = list(methods)
    if not workload:
        raise ValueError("empty workload")
    if not methods:
        raise ValueError("no methods requested")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
    sampling_methods = [m for m in methods if m != "histogram"]
    sample_sizes = [int(s) for s in sample_sizes]
    if sampling_methods and not sample_sizes:
        raise ValueError("sampling methods need at least one sample size")

    # Exact selectivity and cardinality per (query, node), computed once.
    exact_nodes: list[list[tuple[float, int]]] = []
    for plan in workload:
        exact_nodes.append(
            [(exact_selectivity(tables, node), exact_cardinality(tables, node)) for node in subplans(plan)]
        )

    seed_state = np.random.SeedSequence(seed).generate_state(max(1, len(sample_sizes)))
    sample_seeds = [int(v) for v in seed_state]

    per_query: list[QueryNodeRecord] = []
    root_estimates: dict[tuple[str, int], list[tuple[float, float]]] = {}
    for si, size in enumerate(sample_sizes):
        if not sampling_methods:
            break
        sdb = create_sample(size, tables, sample_seeds[si])
        for qid, plan in enumerate(workload):
            records = estimate_all_nodes(sdb, plan)
            for rec, (node_exact, _) in zip(records, exact_nodes[qid]):
                per_query.append(
                    QueryNodeRecord(
                        query_id=qid,
                        node_id=rec.node,
                        node_kind=rec.kind,
                        exact=node_exact,
                        est_indexed=rec.est_indexed,
                        est_practitioner=rec.est_practitioner,
                        s=size,
                        seed=sample_seeds[si],
                    )
                )
            root = records[-1]
            root_exact = exact_nodes[qid][-1][0]
            root_estimates.setdefault(("indexed", size), []).append((root.est_indexed, root_exact))
            root_estimates.setdefault(("practitioner", size), []).append(
                (root.est_practitioner, root_exact)
            )

    histogram_pairs: list[tuple[float, float]] = []
    if "histogram" in methods:
        catalog = StatsCatalog(stats_buckets, stats_mcv)
        for t in tables:
            catalog.update(build_stats(t, stats_buckets, stats_mcv))
        for qid, plan in enumerate(workload):
            histogram_pairs.append((estimate_join(catalog, plan), exact_nodes[qid][-1][0]))

    summaries: list[ErrorSummary] = []
    for method in methods:
        if method == "histogram":
            summaries.append(_summarize("histogram", None, histogram_pairs, epsilon))
        else:
            for size in sample_sizes:
                summaries.append(
                    _summarize(method, size, root_estimates[(method, size)], epsilon)
                )
    return ExperimentResult(summaries=summaries, per_query=per_query)


def _fmt(value: float | int | None) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def summary_csv(summaries: Sequence[ErrorSummary]) -> str:
    lines = [SUMMARY_HEADER]
    for s in summaries:
        lines.append(
            ",".join(
                [
                    s.method,
                    _fmt(s.sample_size),
                    _fmt(s.mean_pct_error),
                    _fmt(s.stddev_pct_error),
                    _fmt(s.frac_within_eps),
                    str(s.excluded_zero_exact),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def per_query_csv(records: Sequence[QueryNodeRecord]) -> str:
    lines = [PER_QUERY_HEADER]
    for r in records:
        lines.append(
            ",".join(
                [
                    str(r.query_id),
                    str(r.node_id),
                    r.node_kind,
                    _fmt(r.exact),
                    _fmt(r.est_indexed),
                    _fmt(r.est_practitioner),
                    str(r.s),
                    str(r.seed),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_experiment_csv(result: ExperimentResult, out_dir: str | Path) -> tuple[Path, Path]:
    """Write summary.csv and per_query.csv into out_dir; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary_path = out / "summary.csv"
    per_query_path = out / "per_query.csv"
    summary_path.write_text(summary_csv(result.summaries), newline="\n")
    per_query_path.write_text(per_query_csv(result.per_query), newline="\n")
    return summary_path, per_query_path
