"""Query model: predicate ASTs, join conditions, query-plan trees, and a mini-SQL parser.

Plans are binary trees with select operations at the leaves and join
operations at internal nodes. The parser accepts the grammar

    query    := "SELECT" "*" "FROM" table ("," table)* ["WHERE" expr]
    expr     := term ("OR" term)*
    term     := factor ("AND" factor)*
    factor   := "(" expr ")" | clause
    clause   := qualcol op (integer | qualcol)
    qualcol  := table "." column
    op       := ">=" | "<=" | ">" | "<" | "=" | "<>"

with case-insensitive keywords. A clause comparing qualified columns of two
different tables is a join condition; join conditions must appear as
top-level AND terms and are chained, in WHERE order, into a left-deep plan.
"""

from __future__ import annotations

import operator
import re
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping, Sequence, Union

from .tables import Table

__all__ = [
    "ComparisonOp",
    "SelectionClause",
    "And",
    "Or",
    "BoolExpr",
    "ColumnRef",
    "JoinCondition",
    "SelectLeaf",
    "JoinNode",
    "QueryPlan",
    "ClassParams",
    "ParseError",
    "SchemaWarning",
    "parse_query",
    "eval_predicate",
    "clause_count",
    "predicate_columns",
    "class_params",
    "subplans",
    "leaf_tables",
    "to_sql",
]


class ParseError(ValueError):
    """Lexical, syntactic, or name-resolution error, with character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class SchemaWarning(UserWarning):
    """Non-fatal schema oddity, e.g. a predicate constant outside the column domain."""


class ComparisonOp(Enum):
    LT = "<"
    GT = ">"
    LE = "<="
    GE = ">="
    EQ = "="
    NE = "<>"

    def apply(self, a: int, b: int) -> bool:
        return _OP_FUNCS[self](a, b)

    def flipped(self) -> "ComparisonOp":
        """Operator with operands swapped: a op b  iff  b op.flipped() a."""
        return _FLIPPED[self]


_OP_FUNCS = {
    ComparisonOp.LT: operator.lt,
    ComparisonOp.GT: operator.gt,
    ComparisonOp.LE: operator.le,
    ComparisonOp.GE: operator.ge,
    ComparisonOp.EQ: operator.eq,
    ComparisonOp.NE: operator.ne,
}

_FLIPPED = {
    ComparisonOp.LT: ComparisonOp.GT,
    ComparisonOp.GT: ComparisonOp.LT,
    ComparisonOp.LE: ComparisonOp.GE,
    ComparisonOp.GE: ComparisonOp.LE,
    ComparisonOp.EQ: ComparisonOp.EQ,
    ComparisonOp.NE: ComparisonOp.NE,
}


@dataclass(frozen=True)
class SelectionClause:
    """One comparison of a column against a constant."""

    column: str
    op: ComparisonOp
    constant: int


@dataclass(frozen=True)
class And:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Or:
    left: "BoolExpr"
    right: "BoolExpr"


BoolExpr = Union[SelectionClause, And, Or]


@dataclass(frozen=True)
class ColumnRef:
    table: str
    column: str


@dataclass(frozen=True)
class JoinCondition:
    """Single-clause theta-join condition between columns of two distinct tables."""

    left: ColumnRef
    right: ColumnRef
    op: ComparisonOp

    def __post_init__(self) -> None:
        if self.left.table == self.right.table:
            raise ValueError(f"self-join on table {self.left.table!r} is not supported")


@dataclass(frozen=True)
class SelectLeaf:
    """Select operation on one base table; predicate None means TRUE (keep all rows)."""

    table: str
    predicate: BoolExpr | None = None


@dataclass(frozen=True)
class JoinNode:
    left: "QueryPlan"
    right: "QueryPlan"
    condition: JoinCondition


QueryPlan = Union[SelectLeaf, JoinNode]


@dataclass(frozen=True)
class ClassParams:
    """Parameters of the query class a plan belongs to.

    u: number of select leaves; m: max distinct columns referenced by any one
    leaf predicate; b: max clause count of any one leaf predicate.
    """

    u: int
    m: int
    b: int

    def __post_init__(self) -> None:
        if self.u < 1:
            raise ValueError("u must be at least 1")
        if self.m < 0 or self.b < 0:
            raise ValueError("m and b must be non-negative")
        if self.b == 0 and self.m != 0:
            raise ValueError("a predicate with no clauses references no columns")
        if self.b >= 1 and not 1 <= self.m <= self.b:
            raise ValueError("each clause references one column, so 1 <= m <= b")


# ---------------------------------------------------------------------------
# Predicate and plan utilities
# ---------------------------------------------------------------------------


def iter_clauses(expr: BoolExpr) -> Iterator[SelectionClause]:
    if isinstance(expr, SelectionClause):
        yield expr
    else:
        yield from iter_clauses(expr.left)
        yield from iter_clauses(expr.right)


def clause_count(expr: BoolExpr, *, effective: bool = False) -> int:
    """Number of clauses in a predicate.

    With effective=True, EQ and NE clauses count twice: each is semantically a
    conjunction/disjunction of two inequality clauses, which is the
    conservative count to feed to the bound formulas.
    """
    total = 0
    for c in iter_clauses(expr):
        total += 2 if effective and c.op in (ComparisonOp.EQ, ComparisonOp.NE) else 1
    return total


def predicate_columns(expr: BoolExpr) -> set[str]:
    return {c.column for c in iter_clauses(expr)}


def eval_predicate(expr: BoolExpr, row: Sequence[int], columns: Sequence[str]) -> bool:
    """Evaluate a predicate on one row; `columns` gives the row's column order."""
    index = {name: i for i, name in enumerate(columns)}
    return _eval(expr, row, index)


def _eval(expr: BoolExpr, row: Sequence[int], index: Mapping[str, int]) -> bool:
    if isinstance(expr, SelectionClause):
        return expr.op.apply(row[index[expr.column]], expr.constant)
    if isinstance(expr, And):
        return _eval(expr.left, row, index) and _eval(expr.right, row, index)
    return _eval(expr.left, row, index) or _eval(expr.right, row, index)


def subplans(plan: QueryPlan) -> list[QueryPlan]:
    """Every subtree of the plan, in post-order (leaves first, root last)."""
    out: list[QueryPlan] = []

    def walk(node: QueryPlan) -> None:
        if isinstance(node, JoinNode):
            walk(node.left)
            walk(node.right)
        out.append(node)

    walk(plan)
    return out


def leaf_tables(plan: QueryPlan) -> tuple[str, ...]:
    """Base tables at the leaves, left to right."""
    if isinstance(plan, SelectLeaf):
        return (plan.table,)
    return leaf_tables(plan.left) + leaf_tables(plan.right)


def class_params(plan: QueryPlan, *, effective_b: bool = False) -> ClassParams:
    """Extract (u, m, b) for a plan; a TRUE leaf contributes m=0, b=0."""
    u = 0
    m = 0
    b = 0
    for node in subplans(plan):
        if not isinstance(node, SelectLeaf):
            continue
        u += 1
        if node.predicate is not None:
            m = max(m, len(predicate_columns(node.predicate)))
            b = max(b, clause_count(node.predicate, effective=effective_b))
    return ClassParams(u=u, m=m, b=b)


# ---------------------------------------------------------------------------
# Canonical rendering
# ---------------------------------------------------------------------------


def _expr_sql(expr: BoolExpr, table: str) -> str:
    if isinstance(expr, SelectionClause):
        return f"{table}.{expr.column} {expr.op.value} {expr.constant}"
    if isinstance(expr, And):
        ls = _expr_sql(expr.left, table)
        rs = _expr_sql(expr.right, table)
        if isinstance(expr.left, Or):
            ls = f"({ls})"
        if isinstance(expr.right, (And, Or)):
            rs = f"({rs})"
        return f"{ls} AND {rs}"
    ls = _expr_sql(expr.left, table)
    rs = _expr_sql(expr.right, table)
    if isinstance(expr.right, Or):
        rs = f"({rs})"
    return f"{ls} OR {rs}"


def _join_conditions(plan: QueryPlan) -> list[JoinCondition]:
    return [n.condition for n in subplans(plan) if isinstance(n, JoinNode)]


def to_sql(plan: QueryPlan) -> str:
    """Render a plan in the canonical surface syntax.

    Join conditions are emitted bottom-up so that re-parsing rebuilds the same
    left-deep chain; re-parsing the output of a parsed query yields a
    structurally identical plan.
    """
    tables = leaf_tables(plan)
    leaves = [n for n in subplans(plan) if isinstance(n, SelectLeaf)]
    conjuncts = [
        f"{c.left.table}.{c.left.column} {c.op.value} {c.right.table}.{c.right.column}"
        for c in _join_conditions(plan)
    ]
    predicates = [
        (leaf, _expr_sql(leaf.predicate, leaf.table))
        for leaf in leaves
        if leaf.predicate is not None
    ]
    multi = len(conjuncts) + len(predicates) > 1
    for leaf, text in predicates:
        if multi and isinstance(leaf.predicate, Or):
            text = f"({text})"
        conjuncts.append(text)
    sql = "SELECT * FROM " + ", ".join(tables)
    if conjuncts:
        sql += " WHERE " + " AND ".join(conjuncts)
    return sql


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_KEYWORDS = {"SELECT", "FROM", "WHERE", "AND", "OR"}

_TOKEN_RE = re.compile(
    r"\s+"
    r"|(?P<int>-?\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><=|>=|<>|=|<|>)"
    r"|(?P<punct>[(),.*])"
)

_OP_BY_SYMBOL = {op.value: op for op in ComparisonOp}


@dataclass(frozen=True)
class _Token:
    kind: str  # 'int' | 'ident' | lowercase keyword | operator symbol | punct char | 'end'
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", i)
        if m.lastgroup == "ident":
            word = m.group()
            kind = word.lower() if word.upper() in _KEYWORDS else "ident"
            tokens.append(_Token(kind, word, m.start()))
        elif m.lastgroup == "int":
            tokens.append(_Token("int", m.group(), m.start()))
        elif m.lastgroup in ("op", "punct"):
            tokens.append(_Token(m.group(), m.group(), m.start()))
        i = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


# Internal WHERE tree: atoms are per-table selection clauses or join conditions.
@dataclass(frozen=True)
class _SelAtom:
    table: str
    clause: SelectionClause
    pos: int


@dataclass(frozen=True)
class _JoinAtom:
    condition: JoinCondition
    pos: int


@dataclass(frozen=True)
class _Combo:
    kind: str  # 'and' | 'or'
    left: object
    right: object
    pos: int


class _Parser:
    def __init__(self, text: str, catalog: Mapping[str, Table]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.catalog = catalog
        self.from_tables: list[str] = []

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            got = tok.text or "end of input"
            raise ParseError(f"expected {what}, got {got!r}", tok.pos)
        return self.advance()

    def parse(self) -> QueryPlan:
        self.expect("select", "SELECT")
        self.expect("*", "'*'")
        self.expect("from", "FROM")
        self.from_tables.append(self._from_table())
        while self.peek().kind == ",":
            self.advance()
            self.from_tables.append(self._from_table())
        where = None
        if self.peek().kind == "where":
            self.advance()
            where = self._expr()
        end = self.expect("end", "end of query")
        return self._build_plan(where, end.pos)

    def _from_table(self) -> str:
        tok = self.expect("ident", "table name")
        if tok.text not in self.catalog:
            raise ParseError(f"unknown table {tok.text!r}", tok.pos)
        if tok.text in self.from_tables:
            raise ParseError(
                f"table {tok.text!r} listed twice; self-joins are not supported", tok.pos
            )
        return tok.text

    # expr := term ("OR" term)* ; term := factor ("AND" factor)*
    def _expr(self):
        node = self._term()
        while self.peek().kind == "or":
            pos = self.advance().pos
            node = _Combo("or", node, self._term(), pos)
        return node

    def _term(self):
        node = self._factor()
        while self.peek().kind == "and":
            pos = self.advance().pos
            node = _Combo("and", node, self._factor(), pos)
        return node

    def _factor(self):
        if self.peek().kind == "(":
            self.advance()
            node = self._expr()
            self.expect(")", "')'")
            return node
        return self._clause()

    def _qualcol(self) -> tuple[str, str, int]:
        tok = self.expect("ident", "qualified column (table.column)")
        if tok.text not in self.catalog:
            raise ParseError(f"unknown table {tok.text!r}", tok.pos)
        if tok.text not in self.from_tables:
            raise ParseError(f"table {tok.text!r} is not listed in FROM", tok.pos)
        self.expect(".", "'.'")
        col = self.expect("ident", "column name")
        if col.text not in self.catalog[tok.text].column_names:
            raise ParseError(f"unknown column {tok.text}.{col.text}", col.pos)
        return tok.text, col.text, tok.pos

    def _clause(self):
        t1, c1, pos = self._qualcol()
        op_tok = self.peek()
        if op_tok.kind not in _OP_BY_SYMBOL:
            got = op_tok.text or "end of input"
            raise ParseError(f"expected comparison operator, got {got!r}", op_tok.pos)
        self.advance()
        op = _OP_BY_SYMBOL[op_tok.kind]
        rhs = self.peek()
        if rhs.kind == "int":
            self.advance()
            value = int(rhs.text)
            domain = self.catalog[t1].column(c1).domain
            if value not in domain:
                warnings.warn(
                    f"constant {value} outside domain [{domain.lo}, {domain.hi}] "
                    f"of column {t1}.{c1}",
                    SchemaWarning,
                    stacklevel=4,
                )
            return _SelAtom(t1, SelectionClause(c1, op, value), pos)
        if rhs.kind == "ident":
            t2, c2, pos2 = self._qualcol()
            if t1 == t2:
                raise ParseError(
                    f"comparison between two columns of table {t1!r} is not supported", pos2
                )
            return _JoinAtom(JoinCondition(ColumnRef(t1, c1), ColumnRef(t2, c2), op), pos)
        got = rhs.text or "end of input"
        raise ParseError(f"expected integer or qualified column, got {got!r}", rhs.pos)

    # -- plan construction ---------------------------------------------------

    def _build_plan(self, where, end_pos: int) -> QueryPlan:
        predicates: dict[str, BoolExpr] = {}
        join_conds: list[tuple[JoinCondition, int]] = []
        if where is not None:
            join_conds, predicates = _collect_conjuncts(where)

        if len(self.from_tables) == 1:
            t = self.from_tables[0]
            return SelectLeaf(t, predicates.get(t))

        need = len(self.from_tables) - 1
        if len(join_conds) != need:
            raise ParseError(
                f"expected {need} join condition(s) for {len(self.from_tables)} tables, "
                f"found {len(join_conds)}",
                end_pos if not join_conds else join_conds[-1][1],
            )
        first, _ = join_conds[0]
        lt, rt = first.left.table, first.right.table
        plan: QueryPlan = JoinNode(
            SelectLeaf(lt, predicates.get(lt)),
            SelectLeaf(rt, predicates.get(rt)),
            first,
        )
        in_tree = {lt, rt}
        for cond, pos in join_conds[1:]:
            lt, rt = cond.left.table, cond.right.table
            if (lt in in_tree) == (rt in in_tree):
                raise ParseError(
                    "join conditions must chain one new table at a time "
                    "(left-deep plans only)",
                    pos,
                )
            new = rt if lt in in_tree else lt
            plan = JoinNode(plan, SelectLeaf(new, predicates.get(new)), cond)
            in_tree.add(new)
        return plan


def _collect_conjuncts(node) -> tuple[list[tuple[JoinCondition, int]], dict[str, BoolExpr]]:
    """Split a WHERE tree into join conditions and per-table predicates.

    AND nodes are descended on both sides and the per-table pieces are merged
    as And(left, right), which preserves the written grouping (parenthesized
    conjunct groups survive a print/parse round trip).
    """
    if isinstance(node, _Combo) and node.kind == "and":
        ljoins, lpreds = _collect_conjuncts(node.left)
        rjoins, rpreds = _collect_conjuncts(node.right)
        preds = dict(lpreds)
        for table, expr in rpreds.items():
            preds[table] = expr if table not in preds else And(preds[table], expr)
        return ljoins + rjoins, preds
    if isinstance(node, _JoinAtom):
        return [(node.condition, node.pos)], {}
    expr, tabs, pos = _to_boolexpr(node)
    if len(tabs) > 1:
        raise ParseError(
            "predicate references multiple tables and cannot be pushed to a "
            "single select leaf",
            pos,
        )
    return [], {tabs.pop(): expr}


def _to_boolexpr(node) -> tuple[BoolExpr, set[str], int]:
    if isinstance(node, _SelAtom):
        return node.clause, {node.table}, node.pos
    if isinstance(node, _JoinAtom):
        raise ParseError("join condition may only appear as a top-level AND term", node.pos)
    left, lt, lpos = _to_boolexpr(node.left)
    right, rt, _ = _to_boolexpr(node.right)
    expr = And(left, right) if node.kind == "and" else Or(left, right)
    return expr, lt | rt, lpos


def parse_query(text: str, schema: Mapping[str, Table] | Sequence[Table]) -> QueryPlan:
    """Parse a query against a catalog of tables into a left-deep QueryPlan.

    `schema` is either a mapping from table name to Table or a sequence of
    Tables. Select operations are pushed to the leaves; AND binds tighter
    than OR; parentheses are honored.
    """
    if isinstance(schema, Mapping):
        catalog = dict(schema)
    else:
        catalog = {t.name: t for t in schema}
    return _Parser(text, catalog).parse()
