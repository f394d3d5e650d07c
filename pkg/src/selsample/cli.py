"""Command-line interface.

Subcommands: gen-data, build-sample, build-stats, bounds, sample-size,
estimate, experiment. Every command is deterministic for fixed flags and
seeds. Exit code 0 on success, 2 on validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .execution import estimate_all_nodes
from .harness import (
    METHODS,
    WORKLOAD_KINDS,
    QueryNodeRecord,
    WorkloadSpec,
    generate_workload,
    per_query_csv,
    run_experiment,
    write_experiment_csv,
)
from .queries import parse_query
from .sampling import create_sample, load_sample, save_sample
from .stats import StatsCatalog, build_stats, dump_stats
from .tables import (
    ColumnMeta,
    Domain,
    Table,
    generate_correlated_table,
    generate_uniform_table,
    read_csv,
    save_csv,
)
from .vcbounds import SampleSizeSpec, bound_general, sample_size_eps, sample_size_rel


def _parse_domain(args) -> Domain | None:
    if args.domain_lo is None and args.domain_hi is None:
        return None
    if args.domain_lo is None or args.domain_hi is None:
        raise ValueError("--domain-lo and --domain-hi must be given together")
    return Domain(args.domain_lo, args.domain_hi)


def _load_tables(paths: list[str], domain: Domain | None) -> list[Table]:
    return [read_csv(p, domain=domain) for p in paths]


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part]


def cmd_gen_data(args) -> int:
    domain = Domain(args.domain_lo, args.domain_hi)
    out = Path(args.out)
    name = args.name or out.stem
    if args.kind == "uniform":
        table = generate_uniform_table(name, args.rows, args.cols, domain, args.seed)
    else:
        if args.cols != 2:
            raise ValueError("correlated tables have exactly 2 columns")
        cov_entries = [float(v) for v in args.cov.split(",")]
        if len(cov_entries) != 3:
            raise ValueError("--cov takes three values: var1,cov12,var2")
        v1, c12, v2 = cov_entries
        table = generate_correlated_table(
            name, args.rows, args.mu, [[v1, c12], [c12, v2]], domain, args.seed
        )
    save_csv(table, out)
    print(f"wrote {out}: {table.row_count} rows x {len(table.columns)} columns")
    return 0


def _derived_dimension(args) -> int:
    if args.d_override is not None:
        if args.d_override <= 0:
            raise ValueError("--d-override must be positive")
        return args.d_override
    if args.u is None or args.m is None or args.b is None:
        raise ValueError("need --d-override or all of --u/--m/--b to derive the dimension")
    return bound_general(args.u, args.m, args.b, args.log_base).dimension


def cmd_build_sample(args) -> int:
    tables = _load_tables(args.table, _parse_domain(args))
    if args.size is not None:
        size = args.size
    elif args.auto:
        d = _derived_dimension(args)
        size = sample_size_eps(SampleSizeSpec(epsilon=args.epsilon, delta=args.delta, d=d, c=args.c))
    else:
        raise ValueError("pass --size or --auto")
    sdb = create_sample(size, tables, args.seed)
    manifest = save_sample(sdb, args.out)
    print(f"wrote {manifest}: {len(sdb.tables)} sample table(s) of size {size}")
    return 0


def cmd_build_stats(args) -> int:
    tables = _load_tables(args.table, _parse_domain(args))
    catalog = StatsCatalog(args.buckets, args.mcv)
    for t in tables:
        catalog.update(build_stats(t, args.buckets, args.mcv))
    dump_stats(catalog, args.out)
    print(f"wrote {args.out}: statistics for {len(catalog.entries)} column(s)")
    return 0


def cmd_bounds(args) -> int:
    report = bound_general(args.u, args.m, args.b, args.log_base)
    record = {
        "formula": report.formula_id,
        "u": args.u,
        "m": args.m,
        "b": args.b,
        "log_base": args.log_base,
        "bound": report.bound,
        "dimension": report.dimension,
    }
    if args.json:
        print(json.dumps(record, sort_keys=True))
    else:
        for key, value in record.items():
            print(f"{key}: {value}")
    return 0


def cmd_sample_size(args) -> int:
    d = _derived_dimension(args)
    spec = SampleSizeSpec(
        epsilon=args.epsilon,
        delta=args.delta,
        d=d,
        c=args.c,
        p=args.p,
        c_prime=args.c_prime,
        population=args.population,
    )
    size = sample_size_rel(spec) if args.p is not None else sample_size_eps(spec)
    record = {
        "d": d,
        "epsilon": args.epsilon,
        "delta": args.delta,
        "c": args.c,
        "mode": "relative" if args.p is not None else "absolute",
        "sample_size": size,
    }
    if args.p is not None:
        record["p"] = args.p
        record["c_prime"] = args.c_prime
    if args.population is not None:
        record["population"] = args.population
    if args.json:
        print(json.dumps(record, sort_keys=True))
    else:
        for key, value in record.items():
            print(f"{key}: {value}")
    return 0


def cmd_estimate(args) -> int:
    sdb = load_sample(args.sample)
    exact_tables = None
    if args.exact_against:
        exact_tables = _load_tables(args.exact_against, _parse_domain(args))
        catalog = {t.name: t for t in exact_tables}
    else:
        # Schema for parsing only: columns and value ranges taken from the sample.
        catalog = {}
        for st in sdb.tables:
            cols = [
                ColumnMeta(c, Domain(min(r[i] for r in st.rows), max(r[i] for r in st.rows)))
                for i, c in enumerate(st.columns)
            ]
            catalog[st.base] = Table(st.base, cols, st.rows)
    plan = parse_query(args.query, catalog)
    records = estimate_all_nodes(sdb, plan, db=exact_tables)
    rows = [
        QueryNodeRecord(
            query_id=0,
            node_id=r.node,
            node_kind=r.kind,
            exact=r.exact,
            est_indexed=r.est_indexed,
            est_practitioner=r.est_practitioner,
            s=r.s,
            seed=sdb.seed,
        )
        for r in records
    ]
    text = per_query_csv(rows)
    if args.out:
        Path(args.out).write_text(text, newline="\n")
        print(f"wrote {args.out}: {len(rows)} node estimate(s)")
    else:
        sys.stdout.write(text)
    return 0


def cmd_experiment(args) -> int:
    tables = _load_tables(args.table, _parse_domain(args))
    spec = WorkloadSpec(
        m=args.workload_m, b=args.workload_b, count=args.count, kind=args.kind, seed=args.seed
    )
    workload = generate_workload(spec, tables)
    methods = [m for m in args.methods.split(",") if m]
    if args.sizes:
        sizes = _int_list(args.sizes)
    else:
        u = 2 if args.kind == "join-pair" else 1
        d = bound_general(u, args.workload_m, args.workload_b, args.log_base).dimension
        sizes = [sample_size_eps(SampleSizeSpec(epsilon=args.epsilon, delta=args.delta, d=d))]
    result = run_experiment(
        tables,
        workload,
        sizes,
        args.epsilon,
        methods,
        args.seed,
        stats_buckets=args.buckets,
        stats_mcv=args.mcv,
    )
    summary_path, per_query_path = write_experiment_csv(result, args.out_dir)
    print(f"wrote {summary_path} and {per_query_path}")
    for s in result.summaries:
        size = "-" if s.sample_size is None else s.sample_size
        print(
            f"{s.method:>12} s={size:>8} mean%={s.mean_pct_error:10.3f} "
            f"std%={s.stddev_pct_error:10.3f} within-eps={s.frac_within_eps:.2f} "
            f"excluded={s.excluded_zero_exact}"
        )
    return 0


def _add_domain_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--domain-lo", type=int, default=None, help="domain lower bound for all columns")
    p.add_argument("--domain-hi", type=int, default=None, help="domain upper bound for all columns")


def _add_dimension_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--u", type=int, default=None, help="number of select operations")
    p.add_argument("--m", type=int, default=None, help="max columns per selection predicate")
    p.add_argument("--b", type=int, default=None, help="max clauses per selection predicate")
    p.add_argument("--d-override", type=int, default=None, help="use this VC dimension directly")
    p.add_argument("--log-base", type=float, default=2.0, help="logarithm base for bound formulas")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selsample",
        description="Selectivity estimation via VC-bound-sized, index-aligned samples",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic table as CSV")
    p.add_argument("--kind", choices=["uniform", "correlated"], required=True)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, default=2)
    p.add_argument("--domain-lo", type=int, default=0)
    p.add_argument("--domain-hi", type=int, default=200000)
    p.add_argument("--mu", type=float, default=100000.0, help="mean of both correlated columns")
    p.add_argument(
        "--cov",
        default="900000000,810000000,900000000",
        help="covariance matrix as var1,cov12,var2",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default=None, help="table name (default: output file stem)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("build-sample", help="build an index-aligned sample database")
    p.add_argument("--table", action="append", required=True, help="base table CSV (repeatable)")
    _add_domain_flags(p)
    p.add_argument("--size", type=int, default=None, help="sample size per table")
    p.add_argument("--auto", action="store_true", help="derive size from the VC bound")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--c", type=float, default=0.5)
    _add_dimension_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory for sample CSVs + manifest")
    p.set_defaults(func=cmd_build_sample)

    p = sub.add_parser("build-stats", help="build MCV + equi-depth histogram statistics")
    p.add_argument("--table", action="append", required=True)
    _add_domain_flags(p)
    p.add_argument("--buckets", type=int, default=100)
    p.add_argument("--mcv", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_stats)

    p = sub.add_parser("bounds", help="VC-dimension upper bound for a query class")
    p.add_argument("--u", type=int, default=1)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--log-base", type=float, default=2.0)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sample-size", help="sample size for an epsilon-approximation")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--p", type=float, default=None, help="relative-approximation threshold")
    p.add_argument("--c-prime", type=float, default=0.5)
    p.add_argument("--population", type=int, default=None)
    _add_dimension_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_sample_size)

    p = sub.add_parser("estimate", help="estimate a query's selectivity on a sample")
    p.add_argument("--query", required=True)
    p.add_argument("--sample", required=True, help="sample manifest.json")
    p.add_argument(
        "--exact-against", action="append", default=None, help="base table CSV for exact values"
    )
    _add_domain_flags(p)
    p.add_argument("--out", default=None, help="write the per-node CSV here instead of stdout")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("experiment", help="run a workload over a sample-size sweep")
    p.add_argument("--table", action="append", required=True)
    _add_domain_flags(p)
    p.add_argument("--workload-m", type=int, required=True)
    p.add_argument("--workload-b", type=int, required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--kind", choices=list(WORKLOAD_KINDS), default="select-only")
    p.add_argument("--sizes", default=None, help="comma-separated sample sizes (default: auto)")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--log-base", type=float, default=2.0)
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--buckets", type=int, default=100)
    p.add_argument("--mcv", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, LookupError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
