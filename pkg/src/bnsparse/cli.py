"""Command-line interface: ``bnsparse <subcommand> ...``.

Exit status is 0 on success, 1 on usage errors and 2 on data or model errors.
"""

from __future__ import annotations

import argparse
import logging
import secrets
import sys
from pathlib import Path

from . import bench
from .data import load_csv, write_csv, write_schema
from .errors import BNError, DimensionError
from .graph import (
    Dag,
    enumerate_dags,
    exact_arc_probability,
    iter_parent_masks,
    read_dag,
    shd,
    to_cpdag,
    write_dag,
)
from .model import fit_parameters, forward_sample, log_likelihood, n_parameters, node_log_likelihoods
from .netio import read_network, write_native
from .priors import u_marginal_approx
from .scores import ScoreCache, ScoreConfig, node_scores
from .search import SearchOptions, hill_climb

logger = logging.getLogger("bnsparse")

FORMATS_HELP = """\
file formats:
  data      CSV with a header row naming the variables; no missing cells
  schema    one line per variable: 'name: level1,level2,...'
  dag       'nodes: a, b, c' header, then one 'parent -> child' line per arc
  network   BIF subset (variable/probability blocks) or native format
            ('bn N', 'var', 'parents', 'cpt' lines)
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(32)
        logger.warning("no --seed given, using seed %d", args.seed)
    return args.seed


def _write(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load_dag_for(path, names) -> Dag:
    """Read a DAG file and reorder its nodes to match ``names``."""
    dag, dag_names = read_dag(Path(path).read_text(encoding="utf-8"))
    if sorted(dag_names) != sorted(names):
        raise DimensionError(f"DAG nodes {dag_names} do not match {list(names)}")
    pos = {name: i for i, name in enumerate(names)}
    return Dag(dag.n, [(pos[dag_names[u]], pos[dag_names[v]]) for u, v in dag.arcs])


def cmd_learn(args):
    data = load_csv(args.data, args.schema)
    opts = SearchOptions(
        max_parents=args.max_parents,
        restarts=args.restarts,
        seed=_seed(args) if args.restarts else args.seed,
    )
    dag, trace = hill_climb(data, ScoreConfig(args.score, args.alpha), args.prior, opts)
    if args.trace:
        Path(args.trace).write_text(trace.to_text(), encoding="utf-8")
    _write(write_dag(dag, data.names), args.out)


def cmd_score(args):
    data = load_csv(args.data, args.schema)
    dag = _load_dag_for(args.dag, data.names)
    cfg = ScoreConfig(args.score, args.alpha)
    cache = ScoreCache(data, cfg)
    parts = node_scores(dag, data, cfg, cache)
    total = 0.0
    for value in parts:
        total += value
    lines = [f"total\t{total!r}"]
    lines += [f"{name}\t{value!r}" for name, value in zip(data.names, parts)]
    _write("\n".join(lines) + "\n", args.out)


def cmd_sample(args):
    bn = read_network(args.net)
    data = forward_sample(bn, args.n, _seed(args))
    write_csv(data, sys.stdout if args.out in (None, "-") else args.out)
    if args.schema_out:
        write_schema(bn.schema, args.schema_out)


def cmd_fit(args):
    data = load_csv(args.data, args.schema)
    dag = _load_dag_for(args.dag, data.names)
    bn = fit_parameters(dag, data, args.alpha, args.scheme)
    _write(write_native(bn), args.out)


def cmd_loglik(args):
    bn = read_network(args.net)
    data = load_csv(args.data, schema=bn.schema)
    if data.names != bn.names:
        data = data.select([data.names.index(name) for name in bn.names])
    lines = [f"loglik\t{log_likelihood(bn, data)!r}", f"rows\t{data.n}"]
    if args.per_node:
        lines += [f"{name}\t{v!r}" for name, v in zip(bn.names, node_log_likelihoods(bn, data))]
    _write("\n".join(lines) + "\n", args.out)


def cmd_shd(args):
    a, names_a = read_dag(Path(args.a).read_text(encoding="utf-8"))
    b = _load_dag_for(args.b, names_a)
    print(shd(a, b))


def cmd_cpdag(args):
    dag, names = read_dag(Path(args.dag).read_text(encoding="utf-8"))
    cp = to_cpdag(dag)
    lines = ["nodes: " + ", ".join(names)]
    lines += [f"{names[u]} -> {names[v]}" for u, v in sorted(cp.directed)]
    lines += [f"{names[u]} -- {names[v]}" for u, v in sorted(cp.undirected)]
    _write("\n".join(lines) + "\n", args.out)


def cmd_enumerate(args):
    n = args.n
    if args.list:
        for g in enumerate_dags(n):
            print(" ".join(f"{u}->{v}" for u, v in sorted(g.arcs)) or "(empty)")
    print(f"dags\t{sum(1 for _ in iter_parent_masks(n))}")
    if args.arc_prob:
        fwd, absent = exact_arc_probability(n)
        approx_fwd, approx_absent = u_marginal_approx(n)
        print(f"p_forward\t{fwd}\t{float(fwd)!r}")
        print(f"p_absent\t{absent}\t{float(absent)!r}")
        print(f"approx_p_forward\t{approx_fwd!r}")
        print(f"approx_p_absent\t{approx_absent!r}")


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _cells(text):
    try:
        return [bench.Cell.parse(c) for c in text.split(",") if c.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def cmd_benchmark(args):
    plan = bench.BenchmarkPlan(
        network=args.net,
        ratios=args.ratios,
        replicates=args.replicates,
        test_size=args.test_size,
        cells=args.cells,
        seed=_seed(args),
        max_parents=args.max_parents,
        min_train=args.min_train,
        workers=args.workers,
    )
    ref = plan.load_network()
    logger.info("reference network: %d nodes, %d arcs, %d parameters",
                ref.dag.n, len(ref.dag.arcs), n_parameters(ref))
    rows = bench.run_benchmark(plan)
    paths = bench.emit_tables(rows, args.out, include_time=args.record_time)
    for path in paths.values():
        print(path)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="bnsparse",
        description="Structure learning of discrete Bayesian networks with BDeu, BDs, K2 and BIC.",
        epilog=FORMATS_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help):
        p = sub.add_parser(name, help=help, description=help, epilog=FORMATS_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(func=func)
        return p

    def scoring(p):
        p.add_argument("--score", choices=["bic", "bdeu", "bds", "k2"], default="bdeu")
        p.add_argument("--alpha", type=float, default=1.0, help="imaginary sample size (default 1)")

    p = add("learn", cmd_learn, "learn a DAG by hill climbing")
    p.add_argument("--data", required=True)
    p.add_argument("--schema")
    scoring(p)
    p.add_argument("--prior", choices=["u", "mu"], default="u")
    p.add_argument("--max-parents", type=int)
    p.add_argument("--restarts", type=int, default=0)
    p.add_argument("--seed", type=int)
    p.add_argument("--trace", help="write the search trace to this file")
    p.add_argument("--out", help="output DAG file (default stdout)")

    p = add("score", cmd_score, "score a DAG against a dataset")
    p.add_argument("--dag", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--schema")
    scoring(p)
    p.add_argument("--out")

    p = add("sample", cmd_sample, "draw a dataset from a network by forward sampling")
    p.add_argument("--net", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output CSV (default stdout)")
    p.add_argument("--schema-out", help="also write the network's schema here")

    p = add("fit", cmd_fit, "fit Dirichlet posterior-mean CPTs for a DAG")
    p.add_argument("--dag", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--schema")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--scheme", choices=["bdeu", "cell"], default="bdeu")
    p.add_argument("--out", help="output network in native format (default stdout)")

    p = add("loglik", cmd_loglik, "log-likelihood of a dataset under a network")
    p.add_argument("--net", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--per-node", action="store_true")
    p.add_argument("--out")

    p = add("shd", cmd_shd, "structural Hamming distance between two DAGs (CPDAG based)")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)

    p = add("cpdag", cmd_cpdag, "print the CPDAG of a DAG ('--' marks undirected edges)")
    p.add_argument("--dag", required=True)
    p.add_argument("--out")

    p = add("enumerate", cmd_enumerate, "count labelled DAGs and exact arc probabilities")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--arc-prob", action="store_true")
    p.add_argument("--list", action="store_true")

    p = add("benchmark", cmd_benchmark, "run the simulation study on a reference network")
    p.add_argument("--net", required=True)
    p.add_argument("--ratios", type=_floats, default=list(bench.DEFAULT_RATIOS))
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--cells", type=_cells, default=list(bench.DEFAULT_CELLS),
                   help="comma-separated score:prior:alpha, e.g. bdeu:u:1,bds:mu:1,bic")
    p.add_argument("--test-size", type=int, default=10000)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-parents", type=int, default=8)
    p.add_argument("--min-train", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--record-time", action="store_true", help="add wall_time to raw.csv")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        args.func(args)
    except (BNError, OSError, ValueError) as exc:
        print(f"bnsparse {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
