"""``bip-ramsey-lab`` command-line entry point.

Exit codes: 0 pass (or informational), 1 fail verdict, 2 error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiments as ex
from .construction import ConstructionError, ConstructionParams
from .graph import GraphError, random_bipartite, read_graph
from .numtheory import BudgetError
from .ramsey import SearchBudgetExceeded

log = logging.getLogger("bip-ramsey-lab")

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None, help="report format")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--trials", type=int, default=None, help="trial / sample count")
    p.add_argument("--no-timestamp", action="store_true", help="omit timestamp and timing fields")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for trial-level parallelism")


def _graph_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="graph file in the 'bipartite v1' format")
    src.add_argument("--random", nargs=3, metavar=("X", "Y", "P"),
                     help="use G(X, Y, P) drawn with --seed")


def _load_graph(args):
    if args.graph:
        return read_graph(args.graph)
    x, y, p = args.random
    return random_bipartite(int(x), int(y), float(p), args.seed)


def _params(args) -> ConstructionParams:
    over = {"seed": args.seed}
    for name in ("C", "c", "gamma", "K1", "K2", "K3", "K4", "K5", "retries"):
        v = getattr(args, name, None)
        if v is not None:
            over[name] = v
    return ConstructionParams.defaults(**over)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bip-ramsey-lab", description="Induced-subgraph sizes of bipartite Ramsey graphs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mtable", help="size of the n x n multiplication table")
    p.add_argument("--n", type=int, required=True)
    _common(p)

    p = sub.add_parser("hxyz", help="count of k <= x with a divisor in (y, z]")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--z", type=float, required=True)
    _common(p)

    p = sub.add_parser("phi", help="induced-subgraph size spectrum")
    _graph_args(p)
    p.add_argument("--sampled", action="store_true", help="force the sampled lower bound")
    p.add_argument("--window", type=int, default=None, help="report distinct sizes per window")
    p.add_argument("--budget", type=int, default=ex.EXACT_PHI_BUDGET)
    _common(p)

    p = sub.add_parser("ramsey", help="C-bipartite-Ramsey test")
    _graph_args(p)
    p.add_argument("--C", type=float, default=5.0)
    _common(p)

    p = sub.add_parser("diverse", help="(single or pair) bipartite diversity")
    _graph_args(p)
    p.add_argument("--c", type=float, default=0.2)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--pair-alpha", type=float, default=None, help="switch to the pair version")
    p.add_argument("--eps", type=float, default=None)
    _common(p)

    p = sub.add_parser("rich", help="bipartite richness (exact for sides <= 20, else sampled)")
    _graph_args(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    _common(p)

    p = sub.add_parser("construct", help="run the distinct-size construction")
    _graph_args(p)
    p.add_argument("--l", type=float, default=None, help="target l (default 2*c*m)")
    p.add_argument("--harness", action="store_true", help="sweep l and union the size families")
    p.add_argument("--sizes-out", default=None, help="write sorted sizes, one per line")
    for name in ("C", "c", "gamma", "K1", "K2", "K3", "K4", "K5"):
        p.add_argument(f"--{name}", type=float, default=None)
    p.add_argument("--retries", type=int, default=None)
    _common(p)

    p = sub.add_parser("conjecture", help="Phi(G) >= Phi(K_{n,n}) desk check")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-side", type=int, default=None, help="largest side length (default 2n)")
    p.add_argument("--exhaustive", action="store_true")
    _common(p)

    p = sub.add_parser("density", help="densities of C-Ramsey graphs among G(n, n, 1/2)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--C", type=float, default=5.0)
    p.add_argument("--band", type=float, nargs=2, default=(0.4, 0.6))
    _common(p)

    p = sub.add_parser("ford", help="|M(n)| against the Ford order of magnitude")
    p.add_argument("--n", type=int, nargs="+", default=[1000, 10000, 100000])
    _common(p)

    p = sub.add_parser("claims", help="empirical claim frequencies on G(n, n, 1/2)")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--floor", type=float, default=None)
    _common(p)
    return parser


def run(args) -> ex.Report:
    c = args.command
    trials = args.trials
    if trials is not None and trials < 0:
        raise ValueError("--trials must be non-negative")
    if c == "mtable":
        return ex.cmd_mtable(args.n)
    if c == "hxyz":
        return ex.cmd_hxyz(args.x, args.y, args.z)
    if c == "phi":
        return ex.cmd_phi(_load_graph(args), trials or 0, args.seed, args.window, args.budget,
                          args.jobs, args.sampled)
    if c == "ramsey":
        return ex.cmd_ramsey(_load_graph(args), args.C)
    if c == "diverse":
        return ex.cmd_diverse(_load_graph(args), args.c, args.delta, args.pair_alpha, args.eps, args.seed)
    if c == "rich":
        return ex.cmd_rich(_load_graph(args), args.gamma, args.delta, args.eps, trials or 0, args.seed)
    if c == "construct":
        rep = ex.cmd_construct(_load_graph(args), _params(args), args.l, args.harness)
        if args.sizes_out:
            with open(args.sizes_out, "w", encoding="utf-8") as fh:
                fh.writelines(f"{r['size']}\n" for r in sorted(rep.rows, key=lambda r: r["size"]))
        return rep
    if c == "conjecture":
        return ex.cmd_conjecture(args.n, 1000 if trials is None else trials, args.seed, args.max_side,
                                 args.exhaustive, args.jobs)
    if c == "density":
        return ex.cmd_density(args.n, 100 if trials is None else trials, args.C, args.seed, tuple(args.band))
    if c == "ford":
        return ex.cmd_ford(args.n)
    if c == "claims":
        return ex.cmd_claims(args.n, 200 if trials is None else trials, _params(args), args.seed,
                             args.floor, args.jobs)
    raise ValueError(f"unknown command {c}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    try:
        report = run(args)
        text = ex.format_report(report, args.format, None if args.no_timestamp else ex.now_stamp())
        if args.out == "-":
            sys.stdout.write(text)
        else:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
    except (ValueError, GraphError, BudgetError, ConstructionError, SearchBudgetExceeded, OSError) as e:
        print(f"bip-ramsey-lab: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
