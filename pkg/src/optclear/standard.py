"""Consolidated matching, quoting and frontier sets for single-underlying options.

The no-loss constraint ``sum gamma*payoff_buy(S) - sum delta*payoff_sell(S) <= L``
is piecewise linear in ``S``, so it is enough to enforce it at every kink
(the strikes), at ``S = 0``, and on the slope as ``S`` goes to infinity.
"""

from __future__ import annotations

import math

import numpy as np

from .model import (BUY, SELL, DomainError, MarketInstance, MatchResult, OptionContract,
                    Order)
from .numopt import DEFAULT_TOL, LE, LinearProgram, SolveReport, Status, solve_lp

MATCH_TOL = 1e-6
TARGET_ID = "__target__"


class ArbitrageError(RuntimeError):
    """Quoting was requested on a market that still admits a profitable match."""


def _single_asset(m: MarketInstance) -> str | None:
    asset = None
    for o in m.orders:
        names = o.contract.assets
        if len(names) > 1:
            raise DomainError(f"order {o.id} is written on several assets {names}")
        if names:
            if asset is not None and names[0] != asset:
                raise DomainError(f"orders span assets {asset!r} and {names[0]!r}")
            asset = names[0]
    return asset


def breakpoints(m: MarketInstance) -> np.ndarray:
    """Kinks of the aggregate payoff on ``[0, inf)``, always including 0."""
    asset = _single_asset(m)
    pts = {0.0}
    for o in m.orders:
        w = o.contract.weight_map.get(asset, 0.0)
        if w != 0.0 and o.contract.strike / w >= 0:
            pts.add(o.contract.strike / w)
    return np.array(sorted(pts))


def _slopes(arrays, asset_col):
    """Payoff slope of each order as the underlying goes to infinity."""
    if asset_col is None or arrays.W.shape[1] == 0:
        return np.zeros(len(arrays))
    return np.maximum(arrays.chi * arrays.W[:, asset_col], 0.0) * arrays.qty


def build_standard_lp(m: MarketInstance, fix_L_zero: bool = False,
                      pinned: dict[str, float] | None = None) -> LinearProgram:
    """The consolidated clearing LP over variables ``[gamma, delta, L]``.

    One row per breakpoint plus one slope row for ``S -> inf``. ``pinned``
    fixes the fill fraction of the named orders.
    """
    asset = _single_asset(m)
    col = m.universe.index[asset] if asset is not None else None
    M, N = m.M, m.N
    b, s = m.buy_arrays, m.sell_arrays
    pts = breakpoints(m)
    S = np.zeros((len(pts), m.universe.size))
    if col is not None:
        S[:, col] = pts
    F = b.payoffs(S)
    G = s.payoffs(S)
    rows = np.hstack([F, -G, -np.ones((len(pts), 1))])
    slope = np.concatenate([_slopes(b, col), -_slopes(s, col), [0.0]])
    A = np.vstack([rows, slope])
    c = np.concatenate([b.price * b.qty, -s.price * s.qty, [-1.0]])
    lower = np.zeros(M + N + 1)
    upper = np.ones(M + N + 1)
    lower[-1], upper[-1] = (0.0, 0.0) if fix_L_zero else (-np.inf, np.inf)
    ids = [o.id for o in m.buys] + [o.id for o in m.sells]
    for oid, value in (pinned or {}).items():
        j = ids.index(oid)
        lower[j] = upper[j] = value
    return LinearProgram(c, A, [LE] * A.shape[0], np.zeros(A.shape[0]), lower, upper)


def _volume_pass(lp: LinearProgram, best: float, tol: float, method: str) -> SolveReport:
    """Among optimal solutions, maximize total fill."""
    n = lp.n_vars
    c = np.ones(n)
    c[-1] = 0.0
    A = np.vstack([lp.A, -lp.c])
    rhs = np.concatenate([lp.rhs, [-(best - MATCH_TOL * 0.1)]])
    senses = np.concatenate([lp.senses, [LE]])
    return solve_lp(LinearProgram(c, A, senses, rhs, lp.lower, lp.upper), tol, method)


def _result(m: MarketInstance, x: np.ndarray, lp: LinearProgram, iterations=1, **kw):
    M, N = m.M, m.N
    gamma = np.clip(x[:M], 0.0, 1.0) + 0.0
    delta = np.clip(x[M:M + N], 0.0, 1.0) + 0.0
    return MatchResult(gamma=gamma, delta=delta, offset_L=float(x[-1]),
                       objective=float(lp.c @ x),
                       buy_ids=tuple(o.id for o in m.buys),
                       sell_ids=tuple(o.id for o in m.sells),
                       iterations=iterations, **kw)


def match_standard(m: MarketInstance, fix_L_zero: bool = False, prefer_volume: bool = False,
                   tol: float = DEFAULT_TOL, method: str = "highs",
                   pinned: dict[str, float] | None = None) -> MatchResult:
    """Profit-maximizing risk-free match over all strikes and types."""
    lp = build_standard_lp(m, fix_L_zero=fix_L_zero, pinned=pinned)
    rep = solve_lp(lp, tol, method)
    if rep.status != Status.OPTIMAL:
        return MatchResult(np.zeros(m.M), np.zeros(m.N), math.nan, -math.inf,
                           tuple(o.id for o in m.buys), tuple(o.id for o in m.sells),
                           iterations=0, status=rep.status.value)
    x = rep.x
    if prefer_volume:
        vol = _volume_pass(lp, rep.objective, tol, method)
        if vol.optimal:
            x = vol.x
    return _result(m, x, lp, diagnostics={"lp_iterations": rep.iterations,
                                          "rows": lp.n_rows})


def implied_interest_rate(match: MatchResult, year_fraction: float,
                          market: MarketInstance | None = None,
                          outlay: float | None = None) -> float:
    """Continuously compounded rate implied by a negative-``L`` match.

    ``outlay`` (cash paid now, ``a.delta - b.gamma``) is taken from
    ``market`` when not given directly.
    """
    if outlay is None:
        if market is None:
            raise ValueError("pass either the market or the outlay")
        outlay = -match.cash_flow(market)
    L = match.offset_L
    if not (L < 0 and outlay > 0 and year_fraction > 0):
        raise DomainError("implied rate needs L < 0, a positive outlay and year_fraction > 0")
    return math.log(-L / outlay) / year_fraction


def _check_arbitrage_free(m, tol, method):
    res = match_standard(m, tol=tol, method=method)
    if res.objective > MATCH_TOL:
        raise ArbitrageError(f"market admits a match with profit {res.objective:.6f}")


def _solve_quote(m: MarketInstance, target: OptionContract, side: str,
                 instantaneous: bool, tol: float, method: str) -> SolveReport:
    """Solve the quote LP with the target pinned to one unit.

    With ``instantaneous`` the book's quantity caps are lifted, which gives
    the marginal price of an arbitrarily small target.
    """
    aug = m.with_orders(Order(TARGET_ID, side, target, 0.0))
    lp = build_standard_lp(aug, pinned={TARGET_ID: 1.0})
    if instantaneous:
        free = lp.lower[:-1] != lp.upper[:-1]
        lp.upper[:-1][free] = np.inf
    rep = solve_lp(lp, tol, method)
    if rep.status == Status.UNBOUNDED:
        raise ArbitrageError("quote LP is unbounded; the book admits a profitable match")
    return rep


def quote_bid(m: MarketInstance, target: OptionContract, check: bool = True,
              tol: float = DEFAULT_TOL, method: str = "highs",
              instantaneous: bool = False) -> float:
    """Highest price at which ``target`` can be bought risk-free against the book.

    The target joins the sell side at ask 0 with its fill pinned to 1; the
    optimal profit is the maximum gain of selling a dominated portfolio.
    By default each book order is capped at its quantity; ``instantaneous``
    lifts the caps.
    """
    if check:
        _check_arbitrage_free(m, tol, method)
    rep = _solve_quote(m, target, SELL, instantaneous, tol, method)
    if rep.status != Status.OPTIMAL:
        raise RuntimeError(f"bid quote LP ended with status {rep.status.value}")
    return max(rep.objective, 0.0)


def quote_ask(m: MarketInstance, target: OptionContract, check: bool = True,
              tol: float = DEFAULT_TOL, method: str = "highs",
              instantaneous: bool = False) -> float:
    """Lowest cost of a portfolio that dominates ``target``; ``inf`` if none exists."""
    if check:
        _check_arbitrage_free(m, tol, method)
    rep = _solve_quote(m, target, BUY, instantaneous, tol, method)
    if rep.status == Status.INFEASIBLE:
        return math.inf
    if rep.status != Status.OPTIMAL:
        raise RuntimeError(f"ask quote LP ended with status {rep.status.value}")
    return max(-rep.objective, 0.0)


def compute_frontier(m: MarketInstance, tol: float = MATCH_TOL, check: bool = True,
                     method: str = "highs", instantaneous: bool = True) -> set[str]:
    """Ids of orders whose price no portfolio of the other orders improves.

    Membership is judged on instantaneous quotes by default: a dominated
    order can only be swapped out for its replacement portfolio when that
    portfolio is not already used up. With unit quotes the set can be too
    small to reproduce quotes against the full book.
    """
    if check:
        _check_arbitrage_free(m, DEFAULT_TOL, method)
    kw = {"check": False, "method": method, "instantaneous": instantaneous}
    frontier = set()
    for o in m.orders:
        rest = m.without(o.id)
        if o.side == BUY:
            if o.price >= quote_bid(rest, o.contract, **kw) - tol:
                frontier.add(o.id)
        elif o.price <= quote_ask(rest, o.contract, **kw) + tol:
            frontier.add(o.id)
    return frontier
