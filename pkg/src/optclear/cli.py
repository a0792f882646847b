"""Command-line entry point: ``optclear {match,quote,frontier,gen,gen-vc,experiment}``.

Exit codes: 0 on success (a book with no profitable match is a success),
2 on parse or validation errors, 3 when a solver does not converge.
Monetary values in reports are rounded to 6 decimal places. ``OPTCLEAR_SEED``
overrides every ``--seed`` flag.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time

from .combo import (DEFAULT_EPS, frontier_combinatorial, match_combinatorial,
                    quote_combinatorial)
from .experiment import (VC_COLUMNS, format_rows, format_table, grid, sweep,
                         vertex_cover_table)
from .formats import (MatchReport, ParseError, parse_chain, parse_legs, parse_orders,
                      write_chain, write_orders)
from .generators import (GenConfig, GenerationError, HardnessConfig, cyclic_pair_set,
                         gen_synthetic_market, gen_vertex_cover_instance, synthetic_chain)
from .model import BUY, SELL, DomainError, ValidationError, normalize
from .standard import (ArbitrageError, compute_frontier, match_standard, quote_ask,
                       quote_bid)

log = logging.getLogger("optclear")

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3


def _seed(args) -> int:
    env = os.environ.get("OPTCLEAR_SEED")
    if env is not None:
        return int(env)
    return args.seed


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _money(x):
    return None if x is None or not math.isfinite(x) else round(x, 6) + 0.0


def _is_multi_asset(m, *contracts) -> bool:
    cs = [o.contract for o in m.orders] + list(contracts)
    return len({a for c in cs for a in c.assets}) > 1


def _float_list(text: str) -> list[float]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if part.startswith("2^"):
            out.append(2.0 ** float(part[2:]))
        else:
            out.append(float(part))
    return out


def _int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def _parse_spots(text: str) -> dict[str, float]:
    spots = {}
    for part in text.split(","):
        name, sep, value = part.partition("=")
        if not sep:
            raise ParseError(f"bad spot {part!r} (expected TICKER=price)")
        spots[name.strip()] = float(value)
    return spots


def _parse_edges(text: str) -> list[tuple[str, str]]:
    edges = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        a, sep, b = part.partition("-")
        if not sep:
            raise ParseError(f"bad edge {part!r} (expected a-b)")
        edges.append((a.strip(), b.strip()))
    return edges


def _graph(args):
    edges = _parse_edges(args.edges)
    if args.vertices:
        vertices = [v.strip() for v in args.vertices.split(",") if v.strip()]
    else:
        vertices = sorted({v for e in edges for v in e})
    return vertices, edges


def _chains(args):
    if args.chain:
        return parse_chain(args.chain)
    if args.spots:
        return synthetic_chain(_parse_spots(args.spots), seed=args.chain_seed)
    raise ParseError("pass --chain FILE or --spots TICKER=price,...")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_match(args) -> int:
    m = parse_orders(args.orders)
    combinatorial = args.combinatorial or _is_multi_asset(m)
    t0 = time.perf_counter()
    if combinatorial:
        res = match_combinatorial(m, eps=args.eps, max_iter=args.max_iter,
                                  fix_L_zero=args.fix_L_zero,
                                  prefer_volume=args.prefer_volume, method=args.method)
    else:
        res = match_standard(m, fix_L_zero=args.fix_L_zero,
                             prefer_volume=args.prefer_volume, method=args.method)
    wall = time.perf_counter() - t0
    report = MatchReport.from_match(args.market_id or os.path.basename(args.orders), res,
                                    wall, "combinatorial" if combinatorial else "standard",
                                    seed=_seed(args))
    _emit(report.to_json(), args.out)
    if res.status != "optimal":
        log.error("clearing ended with status %s", res.status)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_quote(args) -> int:
    m = parse_orders(args.orders)
    target = normalize(args.kind, parse_legs(args.legs), args.strike)
    if args.combinatorial or _is_multi_asset(m, target):
        kw = {"eps": args.eps}
        bid = quote_combinatorial(m, target, BUY, **kw)
        ask = quote_combinatorial(m, target, SELL, **kw)
    else:
        kw = {"check": not args.no_check, "instantaneous": args.instantaneous}
        bid = quote_bid(m, target, **kw)
        ask = quote_ask(m, target, **kw)
    _emit(json.dumps({"contract": str(target), "bid": _money(bid), "ask": _money(ask),
                      "covered": math.isfinite(ask)}, indent=2), args.out)
    return EXIT_OK


def cmd_frontier(args) -> int:
    m = parse_orders(args.orders)
    if args.combinatorial or _is_multi_asset(m):
        ids = frontier_combinatorial(m, tol=args.tol)
    else:
        ids = compute_frontier(m, tol=args.tol)
    n = len(m.orders)
    ordered = [o.id for o in m.orders if o.id in ids]
    _emit(json.dumps({"frontier": ordered, "size": len(ids), "book_size": n,
                      "fraction": round(len(ids) / n, 6) if n else None}, indent=2), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    chains = _chains(args)
    if args.write_chain:
        write_chain(chains, args.write_chain)
    tickers = sorted({q.ticker for q in chains})
    if args.assets:
        universe = tuple(a.strip() for a in args.assets.split(","))
    else:
        universe = tuple(tickers[:args.U])
    pairs = cyclic_pair_set(universe) if args.pair_set else None
    cfg = GenConfig(universe, args.n_orders, args.eta, _seed(args), pairs)
    m = gen_synthetic_market(chains, cfg)
    _emit(write_orders(m), args.out)
    return EXIT_OK


def cmd_gen_vc(args) -> int:
    vertices, edges = _graph(args)
    cfg = HardnessConfig(tuple(vertices), tuple(edges), args.k, args.L)
    m, _, _ = gen_vertex_cover_instance(cfg)
    _emit(write_orders(m), args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.vc:
        vertices, edges = _graph(argparse.Namespace(edges=args.vc, vertices=args.vertices))
        ks = _int_list(args.k) if args.k else None
        rows = vertex_cover_table(vertices, edges, ks, L=args.L)
        _emit(format_rows(rows, VC_COLUMNS), args.out)
        return EXIT_OK
    chains = _chains(args)
    modes = {"off": (False,), "on": (True,), "both": (False, True)}[args.pair_set]
    cells = grid(_float_list(args.etas), _int_list(args.n_orders), _int_list(args.U), modes)
    start = _seed(args)
    seeds = range(start, start + args.seeds)
    summaries = sweep(chains, cells, seeds, workers=args.workers, eps=args.eps,
                      max_iter=args.max_iter)
    _emit(format_table(summaries), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="optclear",
        description="Risk-free clearing of standard and combinatorial option books.",
        epilog="A match exists when the objective exceeds 1e-6 (price units). "
               "Exit codes: 0 ok, 2 bad input, 3 solver did not converge.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, orders=True):
        if orders:
            sp.add_argument("orders", help="order CSV: id,side,kind,legs,strike,price,qty")
        sp.add_argument("-o", "--out", help="write output here instead of stdout")

    sp = sub.add_parser("match", help="clear an order book")
    common(sp)
    sp.add_argument("--combinatorial", action="store_true",
                    help="use constraint generation (automatic for multi-asset books)")
    sp.add_argument("--fix-L-zero", dest="fix_L_zero", action="store_true",
                    help="forbid any worst-case payout offset")
    sp.add_argument("--prefer-volume", action="store_true",
                    help="among optimal matches, maximize total fill")
    sp.add_argument("--eps", type=float, default=DEFAULT_EPS,
                    help="violation tolerance for constraint generation (default 1e-6)")
    sp.add_argument("--max-iter", type=int, default=None,
                    help="iteration cap (default 10*(M+N)+100)")
    sp.add_argument("--seed", type=int, default=0,
                    help="recorded in the report; clearing itself is deterministic")
    sp.add_argument("--method", choices=("highs", "native"), default="highs")
    sp.add_argument("--market-id", default=None)
    sp.set_defaults(func=cmd_match)

    sp = sub.add_parser("quote", help="bid and ask for a contract against the book")
    common(sp)
    sp.add_argument("--kind", choices=("call", "put"), required=True)
    sp.add_argument("--legs", required=True, help="TICKER:weight;... (empty for a constant)")
    sp.add_argument("--strike", type=float, required=True)
    sp.add_argument("--combinatorial", action="store_true")
    sp.add_argument("--eps", type=float, default=DEFAULT_EPS)
    sp.add_argument("--instantaneous", action="store_true",
                    help="lift order quantity caps (marginal quote; standard books only)")
    sp.add_argument("--no-check", action="store_true",
                    help="skip the arbitrage-free check on the book")
    sp.set_defaults(func=cmd_quote)

    sp = sub.add_parser("frontier", help="orders whose price no other portfolio improves")
    common(sp)
    sp.add_argument("--combinatorial", action="store_true")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.set_defaults(func=cmd_frontier)

    def chain_args(sp):
        sp.add_argument("--chain", help="chain CSV: ticker,kind,strike,bid,ask")
        sp.add_argument("--spots", help="build a synthetic chain, e.g. AAPL=150,MSFT=100")
        sp.add_argument("--chain-seed", type=int, default=0)

    sp = sub.add_parser("gen", help="synthetic combinatorial orders priced off a chain")
    common(sp, orders=False)
    chain_args(sp)
    sp.add_argument("--n-orders", type=int, default=150)
    sp.add_argument("--eta", type=float, default=2 ** -4, help="noise level (default 2^-4)")
    sp.add_argument("--U", type=int, default=4, help="use the first U tickers")
    sp.add_argument("--assets", help="explicit comma-separated universe")
    sp.add_argument("--pair-set", action="store_true", help="restrict to a cyclic pair set")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--write-chain", help="also save the chain used")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("gen-vc", help="vertex-cover hardness instance as an order CSV")
    common(sp, orders=False)
    sp.add_argument("--edges", required=True, help="e.g. a-b,b-c,a-c")
    sp.add_argument("--vertices", help="comma-separated (default: vertices of the edges)")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--L", type=float, default=0.0)
    sp.set_defaults(func=cmd_gen_vc)

    sp = sub.add_parser("experiment", help="sweep synthetic markets or vertex-cover verdicts")
    common(sp, orders=False)
    chain_args(sp)
    sp.add_argument("--etas", default="2^-4", help="comma list; 2^-k allowed")
    sp.add_argument("--n-orders", default="150")
    sp.add_argument("--U", default="4")
    sp.add_argument("--pair-set", choices=("off", "on", "both"), default="off")
    sp.add_argument("--seeds", type=int, default=40, help="markets per cell")
    sp.add_argument("--seed", type=int, default=0, help="first seed")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--eps", type=float, default=DEFAULT_EPS)
    sp.add_argument("--max-iter", type=int, default=None)
    sp.add_argument("--vc", help="edge list; runs vertex-cover verdicts instead")
    sp.add_argument("--vertices")
    sp.add_argument("--k", help="comma list of k (default: all valid)")
    sp.add_argument("--L", type=float, default=0.0)
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ParseError, ValidationError, DomainError, ArbitrageError,
            GenerationError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeError as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
