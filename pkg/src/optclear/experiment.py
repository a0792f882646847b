"""Sweeps over synthetic markets: profit, iteration count and wall time.

Each cell fixes ``(eta, n_orders, U, pair set on/off)`` and clears one
generated market per seed. Cells are independent, so they can be fanned
out over a process pool. A failing market is counted in its cell and the
sweep carries on.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .combo import DEFAULT_EPS, lower_violation, match_combinatorial
from .generators import (ChainQuote, GenConfig, HardnessConfig, cyclic_pair_set,
                         gen_synthetic_market, gen_vertex_cover_instance, has_vertex_cover)

log = logging.getLogger(__name__)

TABLE_COLUMNS = ("eta", "n_orders", "U", "pair_set", "runs", "failed",
                 "objective_mean", "objective_se", "iterations_mean", "iterations_se",
                 "wall_mean", "wall_se", "errors")


@dataclass(frozen=True)
class Cell:
    eta: float
    n_orders: int
    U: int
    pair_set: bool = False


@dataclass
class Run:
    cell: Cell
    seed: int
    objective: float = math.nan
    iterations: int = 0
    wall_time: float = math.nan
    error: str | None = None


@dataclass
class CellSummary:
    cell: Cell
    runs: list = field(default_factory=list)

    def _stat(self, attr):
        x = np.array([getattr(r, attr) for r in self.runs if r.error is None], dtype=float)
        if x.size == 0:
            return math.nan, math.nan
        se = x.std(ddof=1) / math.sqrt(x.size) if x.size > 1 else 0.0
        return float(x.mean()), float(se)

    def row(self) -> dict:
        obj, obj_se = self._stat("objective")
        it, it_se = self._stat("iterations")
        wt, wt_se = self._stat("wall_time")
        errs = sorted({r.error for r in self.runs if r.error})
        return {"eta": self.cell.eta, "n_orders": self.cell.n_orders, "U": self.cell.U,
                "pair_set": int(self.cell.pair_set), "runs": len(self.runs),
                "failed": sum(r.error is not None for r in self.runs),
                "objective_mean": obj, "objective_se": obj_se,
                "iterations_mean": it, "iterations_se": it_se,
                "wall_mean": wt, "wall_se": wt_se, "errors": " | ".join(errs)}


# Per-process state: chains and the reference-price cache they induce.
_CHAINS: list = []
_CACHE: dict = {}


def _init_worker(chains):
    global _CHAINS, _CACHE
    _CHAINS, _CACHE = list(chains), {}


def run_one(cell: Cell, seed: int, chains: Sequence[ChainQuote] | None = None,
            cache: dict | None = None, **match_kwargs) -> Run:
    """Generate and clear one market; failures are captured, not raised."""
    chains = _CHAINS if chains is None else chains
    cache = _CACHE if cache is None else cache
    tickers = sorted({q.ticker for q in chains})
    run = Run(cell, seed)
    try:
        if cell.U > len(tickers):
            raise ValueError(f"U={cell.U} but the chain file has {len(tickers)} tickers")
        universe = tuple(tickers[:cell.U])
        pairs = cyclic_pair_set(universe) if cell.pair_set else None
        cfg = GenConfig(universe, cell.n_orders, cell.eta, seed, pairs)
        m = gen_synthetic_market(chains, cfg, cache=cache)
        t0 = time.perf_counter()
        res = match_combinatorial(m, **match_kwargs)
        run.wall_time = time.perf_counter() - t0
        run.iterations = res.iterations
        if res.status != "optimal":
            run.error = f"status {res.status}"
        else:
            run.objective = res.objective
    except Exception as e:  # recorded in the table
        run.error = f"{type(e).__name__}: {e}"
        log.warning("cell %s seed %d failed: %s", cell, seed, run.error)
    return run


def _task(args):
    cell, seed, kwargs = args
    return run_one(cell, seed, **kwargs)


def grid(etas: Sequence[float], ns: Sequence[int], Us: Sequence[int],
         pair_modes: Sequence[bool] = (False,)) -> list[Cell]:
    return [Cell(float(e), int(n), int(u), bool(p))
            for e, n, u, p in itertools.product(etas, ns, Us, pair_modes)]


def sweep(chains: Sequence[ChainQuote], cells: Sequence[Cell], seeds: Sequence[int],
          workers: int = 1, **match_kwargs) -> list[CellSummary]:
    """Run every cell over every seed. ``workers > 1`` uses a process pool."""
    tasks = [(c, s, match_kwargs) for c in cells for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker,
                                 initargs=(list(chains),)) as pool:
            runs = list(pool.map(_task, tasks))
    else:
        _init_worker(chains)
        runs = [_task(t) for t in tasks]
    out = {c: CellSummary(c) for c in cells}
    for r in runs:
        out[r.cell].runs.append(r)
    return [out[c] for c in cells]


def format_table(summaries: Sequence[CellSummary]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, TABLE_COLUMNS, lineterminator="\n")
    w.writeheader()
    for s in summaries:
        row = s.row()
        w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


# ---------------------------------------------------------------------------
# vertex-cover verdicts
# ---------------------------------------------------------------------------

VC_COLUMNS = ("k", "L", "z", "violated", "has_cover", "agree", "nodes", "wall")


def vertex_cover_table(vertices, edges, ks=None, L: float = 0.0,
                       method: str = "highs") -> list[dict]:
    """For each valid ``k``: lower-MILP verdict on the all-ones fill vs exhaustive search."""
    E = len(edges)
    if ks is None:
        ks = [k for k in range(len(vertices) + 1) if E - k - L - 0.5 > 0]
    rows = []
    for k in ks:
        cfg = HardnessConfig(tuple(vertices), tuple(edges), k, L)
        m, gamma, delta = gen_vertex_cover_instance(cfg)
        t0 = time.perf_counter()
        low = lower_violation(m, gamma, delta, L, method=method)
        wall = time.perf_counter() - t0
        violated = low.z > DEFAULT_EPS
        cover = has_vertex_cover(cfg.vertices, cfg.edges, k)
        rows.append({"k": k, "L": L, "z": round(low.z, 9), "violated": int(violated),
                     "has_cover": int(cover), "agree": int(violated == cover),
                     "nodes": low.nodes, "wall": round(wall, 6)})
    return rows


def format_rows(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, columns, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
