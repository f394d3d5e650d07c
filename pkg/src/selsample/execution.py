"""Plan execution on base tables and on aligned samples, with selectivity estimators.

Joins have nested-loop semantics: every pair of child rows satisfying the
condition, ordered lexicographically by source ordinals. Large inputs take
vectorized fast paths (blocked comparisons, and a hash join for equality
conditions) that produce the identical ordered output.

The index-aligned estimator runs the plan on the sample tables and counts
only result rows whose sampleindex values all agree, then divides by the
sample size; the practitioner estimator counts the whole result and divides
by s^l for l leaf tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .queries import (
    And,
    BoolExpr,
    ComparisonOp,
    JoinCondition,
    QueryPlan,
    SelectLeaf,
    SelectionClause,
    leaf_tables,
)
from .sampling import SampleDatabase
from .tables import Table, TupleRef

__all__ = [
    "ResultSet",
    "EstimateRecord",
    "execute_plan",
    "exact_selectivity",
    "exact_cardinality",
    "estimate_indexed",
    "estimate_practitioner",
    "estimate_all_nodes",
]

Database = Union[Sequence[Table], SampleDatabase]

_NP_OPS = {
    ComparisonOp.LT: np.less,
    ComparisonOp.GT: np.greater,
    ComparisonOp.LE: np.less_equal,
    ComparisonOp.GE: np.greater_equal,
    ComparisonOp.EQ: np.equal,
    ComparisonOp.NE: np.not_equal,
}

# Max boolean cells materialized per join comparison block.
_MATRIX_CELLS = 4_000_000


@dataclass
class ResultSet:
    """Rows produced by a plan: per-row source ordinals, one per leaf table."""

    tables: tuple[str, ...]
    rows: list[tuple[int, ...]]

    @property
    def arity(self) -> int:
        return len(self.tables)

    def tuple_refs(self) -> list[tuple[TupleRef, ...]]:
        return [
            tuple(TupleRef(t, o) for t, o in zip(self.tables, row)) for row in self.rows
        ]


@dataclass
class EstimateRecord:
    """Per-subplan selectivity estimates; `node` is the post-order index."""

    node: int
    kind: str
    est_indexed: float
    est_practitioner: float
    s: int
    exact: float | None = None
    cardinality_exact: int | None = None


class _Frame:
    """Uniform execution view over a base table or a sample table."""

    __slots__ = ("name", "col_index", "matrix", "sampleindex", "n")

    def __init__(self, name, columns, matrix, sampleindex=None):
        self.name = name
        self.col_index = {c: i for i, c in enumerate(columns)}
        self.matrix = matrix
        self.sampleindex = sampleindex
        self.n = matrix.shape[0]

    def col(self, name: str) -> np.ndarray:
        try:
            return self.matrix[:, self.col_index[name]]
        except KeyError:
            raise LookupError(f"table {self.name!r} has no column {name!r}") from None


def _frames(db: Database) -> dict[str, _Frame]:
    if isinstance(db, SampleDatabase):
        return {
            st.base: _Frame(st.base, st.columns, st.matrix(), st.index_array())
            for st in db.tables
        }
    frames = {}
    for t in db:
        frames[t.name] = _Frame(t.name, t.column_names, t.matrix())
    return frames


def _check_tables(plan: QueryPlan, frames: dict[str, _Frame]) -> None:
    for t in leaf_tables(plan):
        if t not in frames:
            raise LookupError(f"table {t!r} is not present in the database")


def _mask(expr: BoolExpr | None, frame: _Frame) -> np.ndarray:
    if expr is None:
        return np.ones(frame.n, dtype=bool)
    if isinstance(expr, SelectionClause):
        return _NP_OPS[expr.op](frame.col(expr.column), expr.constant)
    if isinstance(expr, And):
        return _mask(expr.left, frame) & _mask(expr.right, frame)
    return _mask(expr.left, frame) | _mask(expr.right, frame)


def _match_pairs(
    lv: np.ndarray, rv: np.ndarray, op: ComparisonOp
) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i, j) with lv[i] op rv[j], in lexicographic (i, j) order."""
    nl, nr = lv.size, rv.size
    if nl == 0 or nr == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    if nl * nr <= _MATRIX_CELLS:
        li, rj = np.nonzero(_NP_OPS[op](lv[:, None], rv[None, :]))
        return li, rj
    if op is ComparisonOp.EQ:
        positions: dict[int, list[int]] = {}
        for j, v in enumerate(rv.tolist()):
            positions.setdefault(v, []).append(j)
        li_list: list[int] = []
        rj_list: list[int] = []
        for i, v in enumerate(lv.tolist()):
            js = positions.get(v)
            if js:
                li_list.extend([i] * len(js))
                rj_list.extend(js)
        return np.asarray(li_list, dtype=np.int64), np.asarray(rj_list, dtype=np.int64)
    chunk = max(1, _MATRIX_CELLS // nr)
    parts_i = []
    parts_j = []
    for start in range(0, nl, chunk):
        li, rj = np.nonzero(_NP_OPS[op](lv[start : start + chunk, None], rv[None, :]))
        parts_i.append(li + start)
        parts_j.append(rj)
    return np.concatenate(parts_i), np.concatenate(parts_j)


def _oriented(
    cond: JoinCondition, left_tables: Sequence[str], right_tables: Sequence[str]
) -> tuple[str, str, str, str, ComparisonOp]:
    """Resolve which side of the condition lives in which subtree."""
    lt, rt = cond.left.table, cond.right.table
    if lt in left_tables and rt in right_tables:
        return lt, cond.left.column, rt, cond.right.column, cond.op
    if lt in right_tables and rt in left_tables:
        return rt, cond.right.column, lt, cond.left.column, cond.op.flipped()
    raise LookupError(
        f"join condition {lt}.{cond.left.column} {cond.op.value} "
        f"{rt}.{cond.right.column} does not connect the two subplans"
    )


def _component_values(rs: ResultSet, table: str, column: str, frames) -> np.ndarray:
    if not rs.rows:
        return np.empty(0, dtype=np.int64)
    k = rs.tables.index(table)
    ordinals = np.fromiter((row[k] for row in rs.rows), dtype=np.int64, count=len(rs.rows))
    return frames[table].col(column)[ordinals]


def _exec_leaf(leaf: SelectLeaf, frames) -> ResultSet:
    ordinals = np.flatnonzero(_mask(leaf.predicate, frames[leaf.table]))
    return ResultSet((leaf.table,), [(o,) for o in ordinals.tolist()])


def _exec_join(left: ResultSet, right: ResultSet, cond: JoinCondition, frames) -> ResultSet:
    lt, lc, rt, rc, op = _oriented(cond, left.tables, right.tables)
    lv = _component_values(left, lt, lc, frames)
    rv = _component_values(right, rt, rc, frames)
    li, rj = _match_pairs(lv, rv, op)
    rows = [left.rows[i] + right.rows[j] for i, j in zip(li.tolist(), rj.tolist())]
    return ResultSet(left.tables + right.tables, rows)


def _exec(plan: QueryPlan, frames) -> ResultSet:
    if isinstance(plan, SelectLeaf):
        return _exec_leaf(plan, frames)
    return _exec_join(_exec(plan.left, frames), _exec(plan.right, frames), plan.condition, frames)


def execute_plan(db: Database, plan: QueryPlan) -> ResultSet:
    """Run a plan: filter at the leaves, join at internal nodes, deterministic order."""
    frames = _frames(db)
    _check_tables(plan, frames)
    return _exec(plan, frames)


def _count_pairs(a: np.ndarray, b: np.ndarray, op: ComparisonOp) -> int:
    """Number of pairs (x, y) in a x b with x op y, without materializing them."""
    if a.size == 0 or b.size == 0:
        return 0
    sa = np.sort(a)
    if op is ComparisonOp.EQ or op is ComparisonOp.NE:
        lo = np.searchsorted(sa, b, side="left")
        hi = np.searchsorted(sa, b, side="right")
        eq = int((hi - lo).sum())
        return eq if op is ComparisonOp.EQ else a.size * b.size - eq
    if op is ComparisonOp.LT:
        return int(np.searchsorted(sa, b, side="left").sum())
    if op is ComparisonOp.LE:
        return int(np.searchsorted(sa, b, side="right").sum())
    if op is ComparisonOp.GT:
        return int((a.size - np.searchsorted(sa, b, side="right")).sum())
    return int((a.size - np.searchsorted(sa, b, side="left")).sum())


def _exact_count(plan: QueryPlan, frames) -> int:
    if isinstance(plan, SelectLeaf):
        return int(np.count_nonzero(_mask(plan.predicate, frames[plan.table])))
    if isinstance(plan.left, SelectLeaf) and isinstance(plan.right, SelectLeaf):
        # Two-leaf joins are counted without materializing the pair set.
        # _oriented pins lt/rt to the left/right subtree respectively.
        lt, lc, rt, rc, op = _oriented(plan.condition, (plan.left.table,), (plan.right.table,))
        lv = frames[lt].col(lc)[_mask(plan.left.predicate, frames[lt])]
        rv = frames[rt].col(rc)[_mask(plan.right.predicate, frames[rt])]
        return _count_pairs(lv, rv, op)
    return len(_exec(plan, frames).rows)


def _denominator(plan: QueryPlan, frames) -> int:
    denom = 1
    for t in leaf_tables(plan):
        n = frames[t].n
        if n == 0:
            raise ValueError(f"selectivity undefined: table {t!r} is empty")
        denom *= n
    return denom


def exact_cardinality(db: Database, plan: QueryPlan) -> int:
    """Exact output cardinality of a plan."""
    frames = _frames(db)
    _check_tables(plan, frames)
    return _exact_count(plan, frames)


def exact_selectivity(db: Database, plan: QueryPlan) -> float:
    """Output cardinality divided by the product of the leaf tables' sizes."""
    frames = _frames(db)
    _check_tables(plan, frames)
    return _exact_count(plan, frames) / _denominator(plan, frames)


def _aligned_count(rs: ResultSet, sampledb: SampleDatabase) -> int:
    """Result rows whose per-table sampleindex values all agree."""
    if not rs.rows:
        return 0
    if rs.arity == 1:
        return len(rs.rows)
    ordinals = np.asarray(rs.rows, dtype=np.int64)
    first = sampledb.table(rs.tables[0]).index_array()[ordinals[:, 0]]
    ok = np.ones(len(rs.rows), dtype=bool)
    for k in range(1, rs.arity):
        ok &= sampledb.table(rs.tables[k]).index_array()[ordinals[:, k]] == first
    return int(ok.sum())


def estimate_indexed(sampledb: SampleDatabase, plan: QueryPlan) -> float:
    """Index-aligned estimate: aligned result rows divided by the sample size."""
    rs = execute_plan(sampledb, plan)
    return _aligned_count(rs, sampledb) / sampledb.size


def estimate_practitioner(sampledb: SampleDatabase, plan: QueryPlan) -> float:
    """Plain sample estimate: all result rows divided by s^l, ignoring sampleindex."""
    rs = execute_plan(sampledb, plan)
    return len(rs.rows) / sampledb.size**rs.arity


def estimate_all_nodes(
    sampledb: SampleDatabase, plan: QueryPlan, db: Database | None = None
) -> list[EstimateRecord]:
    """Estimates for every subplan, in post-order.

    Child result sets are computed once and reused by their parents. When `db`
    is given, each record also carries the exact selectivity and cardinality
    computed against it.
    """
    frames = _frames(sampledb)
    _check_tables(plan, frames)
    per_node: list[tuple[QueryPlan, ResultSet]] = []

    def walk(node: QueryPlan) -> ResultSet:
        if isinstance(node, SelectLeaf):
            rs = _exec_leaf(node, frames)
        else:
            rs = _exec_join(walk(node.left), walk(node.right), node.condition, frames)
        per_node.append((node, rs))
        return rs

    walk(plan)
    exact_frames = None
    if db is not None:
        exact_frames = _frames(db)
        _check_tables(plan, exact_frames)
    s = sampledb.size
    records = []
    for i, (node, rs) in enumerate(per_node):
        rec = EstimateRecord(
            node=i,
            kind="select" if isinstance(node, SelectLeaf) else "join",
            est_indexed=_aligned_count(rs, sampledb) / s,
            est_practitioner=len(rs.rows) / s**rs.arity,
            s=s,
        )
        if exact_frames is not None:
            count = _exact_count(node, exact_frames)
            rec.cardinality_exact = count
            rec.exact = count / _denominator(node, exact_frames)
        records.append(rec)
    return records
