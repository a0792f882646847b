"""Clearing combinatorial option markets by constraint generation.

An upper LP picks fills against a finite set of price scenarios; a lower
MILP searches for the price vector that the current fills lose the most
on. The scenario is added and the loop repeats until no price vector
breaks the no-loss guarantee.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .model import (BUY, SELL, ConstraintRecord, MarketInstance, MatchResult,
                    OptionContract, Order)
from .numopt import (DEFAULT_TOL, EQ, GE, LE, LinearProgram, MixedIntegerProgram,
                     Status, solve_lp, solve_milp)

log = logging.getLogger(__name__)

DEFAULT_EPS = 1e-6
DEFAULT_BIG_M = 1e6
MIN_BOX = 1e4
DEDUP_TOL = 1e-9
MONOTONE_TOL = 1e-7
TARGET_ID = "__target__"


def default_box(m: MarketInstance) -> float:
    """Upper bound on every asset price searched by the lower problem."""
    strikes = [o.contract.strike for o in m.orders]
    weights = [abs(w) for o in m.orders for _, w in o.contract.weights if w != 0]
    if not strikes or not weights:
        return MIN_BOX
    return max(10.0 * max(strikes) / min(weights), MIN_BOX)


def default_max_iter(m: MarketInstance) -> int:
    return 10 * (m.M + m.N) + 100


# ---------------------------------------------------------------------------
# upper level
# ---------------------------------------------------------------------------

def build_upper_lp(m: MarketInstance, constraints: list[ConstraintRecord],
                   fix_L_zero: bool = False,
                   pinned: dict[str, float] | None = None) -> LinearProgram:
    """Fills ``[gamma, delta, L]`` maximizing profit against ``constraints``."""
    if not constraints:
        raise ValueError("the constraint set must be seeded (e.g. with S = 0)")
    M, N = m.M, m.N
    b, s = m.buy_arrays, m.sell_arrays
    A = np.empty((len(constraints), M + N + 1))
    for i, rec in enumerate(constraints):
        A[i, :M] = rec.f
        A[i, M:M + N] = -rec.g
        A[i, -1] = -1.0 if rec.kind == "point" else 0.0
    c = np.concatenate([b.price * b.qty, -s.price * s.qty, [-1.0]])
    lower = np.zeros(M + N + 1)
    upper = np.ones(M + N + 1)
    lower[-1], upper[-1] = (0.0, 0.0) if fix_L_zero else (-np.inf, np.inf)
    ids = [o.id for o in m.buys] + [o.id for o in m.sells]
    for oid, value in (pinned or {}).items():
        j = ids.index(oid)
        lower[j] = upper[j] = value
    return LinearProgram(c, A, [LE] * len(constraints), np.zeros(len(constraints)),
                         lower, upper)


# ---------------------------------------------------------------------------
# lower level
# ---------------------------------------------------------------------------

@dataclass
class LowerProblem:
    """The adversarial MILP plus the index layout of its variables.

    Variables are ``[S (U), f (buys), g (sells), I (buys)]`` where ``buys``
    and ``sells`` list the order indices included.
    """

    mip: MixedIntegerProgram
    buys: np.ndarray
    sells: np.ndarray
    U: int
    offset_L: float
    big_m: np.ndarray

    @property
    def s_slice(self):
        return slice(0, self.U)

    @property
    def f_slice(self):
        return slice(self.U, self.U + len(self.buys))

    @property
    def g_slice(self):
        start = self.U + len(self.buys)
        return slice(start, start + len(self.sells))

    @property
    def i_slice(self):
        start = self.U + len(self.buys) + len(self.sells)
        return slice(start, start + len(self.buys))


def _affine_range(a: np.ndarray, const: np.ndarray, hi_box: float, recession: bool):
    """Min and max of ``a.S - const`` over the box (or the unit simplex)."""
    if recession:
        if a.shape[1] == 0:
            z = np.zeros(a.shape[0])
            return z - const, z - const
        return a.min(axis=1) - const, a.max(axis=1) - const
    lo = np.minimum(a, 0.0).sum(axis=1) * hi_box - const
    hi = np.maximum(a, 0.0).sum(axis=1) * hi_box - const
    return lo, hi


def build_lower_milp(m: MarketInstance, gamma, delta, L: float,
                     big_m: float | None = None, s_max: float | None = None,
                     active_only: bool = False, recession: bool = False) -> LowerProblem:
    """Most-violating price vector for fixed fills as a binary MILP.

    Each bought payoff ``f_m = max{e_m(S), 0}`` is linearized with an
    indicator ``I_m``. With ``big_m`` a number, every row uses that constant
    (raised to 10x the largest attainable ``|e_m|`` when too small). With
    ``big_m=None`` each row gets the tightest valid constant from the range
    of ``e_m`` over the box, which is equivalent and numerically safer.

    ``recession=True`` searches directions instead: strikes drop out, ``L``
    is ignored and ``S`` ranges over the unit simplex, so the optimum is the
    steepest growth rate of the net liability.
    """
    gamma = np.asarray(gamma, dtype=float)
    delta = np.asarray(delta, dtype=float)
    U = m.universe.size
    box = default_box(m) if s_max is None else float(s_max)
    b, s = m.buy_arrays, m.sell_arrays
    if active_only:
        buys = np.flatnonzero(gamma > 1e-12)
        sells = np.flatnonzero(delta > 1e-12)
    else:
        buys, sells = np.arange(m.M), np.arange(m.N)
    nb, ns = len(buys), len(sells)

    a_buy = (b.chi * b.qty)[buys, None] * b.W[buys]
    c_buy = np.zeros(nb) if recession else (b.chi * b.qty * b.K)[buys]
    a_sell = (s.chi * s.qty)[sells, None] * s.W[sells]
    c_sell = np.zeros(ns) if recession else (s.chi * s.qty * s.K)[sells]

    lo, hi = _affine_range(a_buy, c_buy, box, recession)
    if big_m is None:
        m_lo = np.maximum(-lo, 0.0)
        m_hi = np.maximum(hi, 0.0)
    else:
        need = float(np.max(np.maximum(np.abs(lo), np.abs(hi)), initial=0.0))
        eff = float(big_m)
        if need > eff:
            eff = 10.0 * need
            log.warning("big-M %.3g below attainable payoff %.3g; using %.3g",
                        big_m, need, eff)
        m_lo = np.full(nb, eff)
        m_hi = np.full(nb, eff)

    n_vars = U + nb + ns + nb
    S0, F0, G0, I0 = 0, U, U + nb, U + nb + ns
    rows, senses, rhs = [], [], []

    def add(sense, b, *terms):
        r = np.zeros(n_vars)
        for where, value in terms:
            r[where] = value
        rows.append(r)
        senses.append(sense)
        rhs.append(b)

    S = slice(S0, S0 + U)
    for k in range(nb):
        f, ind = F0 + k, I0 + k
        # e >= M_lo (I - 1)
        add(GE, c_buy[k] - m_lo[k], (S, a_buy[k]), (ind, -m_lo[k]))
        # e <= M_hi I
        add(LE, c_buy[k], (S, a_buy[k]), (ind, -m_hi[k]))
        # f <= e - M_lo (I - 1)
        add(LE, m_lo[k] - c_buy[k], (f, 1.0), (S, -a_buy[k]), (ind, m_lo[k]))
        # f <= M_hi I
        add(LE, 0.0, (f, 1.0), (ind, -m_hi[k]))
    for k in range(ns):
        # g >= e
        add(GE, -c_sell[k], (G0 + k, 1.0), (S, -a_sell[k]))
    if recession:
        add(EQ, 1.0, (S, 1.0))

    c = np.zeros(n_vars)
    c[F0:F0 + nb] = gamma[buys]
    c[G0:G0 + ns] = -delta[sells]
    lower = np.zeros(n_vars)
    upper = np.full(n_vars, np.inf)
    upper[S0:S0 + U] = 1.0 if recession else box
    upper[F0:F0 + nb] = m_hi
    upper[I0:I0 + nb] = 1.0
    if big_m is None:
        # The sign of e is fixed on the whole box for these orders.
        lower[I0:I0 + nb][lo >= 0] = 1.0
        upper[I0:I0 + nb][hi <= 0] = 0.0
    A = np.array(rows).reshape(-1, n_vars)
    lp = LinearProgram(c, A, senses, rhs, lower, upper)
    mip = MixedIntegerProgram(lp, np.arange(I0, I0 + nb))
    return LowerProblem(mip, buys, sells, U, 0.0 if recession else float(L),
                        np.maximum(m_lo, m_hi))


@dataclass
class LowerSolution:
    """Result of a lower-level search.

    ``z`` is the exact net loss beyond ``L`` at ``S`` (or the liability
    slope along direction ``S`` for recession searches), recomputed from
    the payoff definition rather than read off the MILP.
    """

    S: np.ndarray
    z: float
    z_milp: float
    status: str
    nodes: int = 0
    linearization_error: float = 0.0


def _exact_z(m, gamma, delta, L, S, recession):
    if recession:
        rec = ConstraintRecord.along(m, S)
        return float(gamma @ rec.f - delta @ rec.g)
    b, s = m.buy_arrays, m.sell_arrays
    return float(gamma @ b.payoffs(S)[0] - delta @ s.payoffs(S)[0] - L)


def lower_violation(m: MarketInstance, gamma, delta, L: float, big_m: float | None = None,
                    s_max: float | None = None, recession: bool = False,
                    method: str = "highs", tol: float = DEFAULT_TOL,
                    active_only: bool = True, polish: bool = True) -> LowerSolution:
    """Solve the lower MILP and return the worst price vector found."""
    gamma = np.asarray(gamma, dtype=float)
    delta = np.asarray(delta, dtype=float)
    prob = build_lower_milp(m, gamma, delta, L, big_m=big_m, s_max=s_max,
                            active_only=active_only, recession=recession)
    rep = solve_milp(prob.mip, tol, method)
    if not rep.optimal:
        return LowerSolution(np.zeros(m.universe.size), math.nan, math.nan, rep.status.value,
                         rep.nodes)
    S = np.clip(rep.x[prob.s_slice], 0.0, None)
    z_milp = rep.objective - prob.offset_L
    z = _exact_z(m, gamma, delta, L, S, recession)

    b = m.buy_arrays
    if recession:
        f_true = ConstraintRecord.along(m, S).f[prob.buys]
    else:
        f_true = b.payoffs(S)[0][prob.buys]
    active = gamma[prob.buys] > 1e-12
    f_milp = rep.x[prob.f_slice]
    lin_err = float(np.max(np.abs(f_milp - f_true)[active], initial=0.0))

    if polish and len(prob.buys):
        # Re-solve with the indicator pattern fixed: an LP, free of
        # integrality slack, whose optimum is an exact lower bound.
        lo, hi = prob.mip.lp.lower.copy(), prob.mip.lp.upper.copy()
        pattern = np.round(rep.x[prob.i_slice])
        lo[prob.i_slice] = hi[prob.i_slice] = pattern
        pol = solve_lp(prob.mip.lp.with_bounds(lo, hi), tol, method)
        if pol.optimal:
            S2 = np.clip(pol.x[prob.s_slice], 0.0, None)
            z2 = _exact_z(m, gamma, delta, L, S2, recession)
            if z2 > z:
                S, z = S2, z2
    return LowerSolution(S, z, z_milp, "optimal", rep.nodes, lin_err)


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def _unique_hyperplanes(normals: np.ndarray, offsets: np.ndarray):
    keep_n, keep_o, seen = [], [], set()
    for n, o in zip(normals, offsets):
        scale = np.linalg.norm(n)
        if scale == 0:
            continue
        n, o = n / scale, o / scale
        lead = n[np.flatnonzero(np.abs(n) > 1e-12)[0]]
        if lead < 0:
            n, o = -n, -o
        key = tuple(np.round(np.append(n, o), 10))
        if key not in seen:
            seen.add(key)
            keep_n.append(n)
            keep_o.append(o)
    U = normals.shape[1] if normals.ndim == 2 else 0
    return np.array(keep_n).reshape(-1, U), np.array(keep_o)


def arrangement_vertices(normals, offsets, U: int, box: float | None = None,
                         tol: float = 1e-9) -> np.ndarray:
    """Vertices of the arrangement of ``{n.S = o}`` inside the orthant.

    Coordinate planes ``S_u = 0`` are always added; with ``box`` the faces
    ``S_u = box`` are added and vertices outside ``[0, box]^U`` dropped.
    """
    normals = np.asarray(normals, dtype=float).reshape(-1, U)
    offsets = np.asarray(offsets, dtype=float).reshape(-1)
    eye = np.eye(U)
    parts_n = [normals, eye]
    parts_o = [offsets, np.zeros(U)]
    if box is not None:
        parts_n.append(eye)
        parts_o.append(np.full(U, float(box)))
    Hn, Ho = _unique_hyperplanes(np.vstack(parts_n), np.concatenate(parts_o))
    if U == 0:
        return np.zeros((1, 0))
    combos = np.array(list(itertools.combinations(range(len(Hn)), U)))
    if combos.size == 0:
        return np.zeros((0, U))
    mats = Hn[combos]
    rhs = Ho[combos]
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > 1e-10
    pts = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    scale = max(1.0, float(box) if box is not None else 1.0)
    inside = np.all(pts >= -tol * scale, axis=1)
    if box is not None:
        inside &= np.all(pts <= box + tol * scale, axis=1)
    pts = np.clip(pts[inside], 0.0, box)
    if len(pts) == 0:
        return pts
    return np.unique(np.round(pts, 9), axis=0)


def market_hyperplanes(m: MarketInstance):
    """Kink hyperplanes ``w.S = K`` of every order's payoff."""
    W = np.vstack([m.buy_arrays.W, m.sell_arrays.W]).reshape(-1, m.universe.size)
    K = np.concatenate([m.buy_arrays.K, m.sell_arrays.K])
    return W, K


def brute_force_violation(m: MarketInstance, gamma, delta, L: float, box: float,
                          max_assets: int = 4, max_hyperplanes: int = 30):
    """Exact maximum of the net loss beyond ``L`` over ``[0, box]^U``.

    The net liability is linear on each cell of the payoff-kink arrangement,
    so its maximum over the box sits at an arrangement vertex. Enumerates all
    of them; meant for small test instances only.
    """
    U = m.universe.size
    W, K = market_hyperplanes(m)
    Hn, _ = _unique_hyperplanes(W, K)
    if U > max_assets or len(Hn) > max_hyperplanes:
        raise ValueError(f"instance too large for enumeration (U={U}, "
                         f"{len(Hn)} hyperplanes)")
    pts = arrangement_vertices(W, K, U, box=box)
    gamma = np.asarray(gamma, dtype=float)
    delta = np.asarray(delta, dtype=float)
    z = m.buy_arrays.payoffs(pts) @ gamma - m.sell_arrays.payoffs(pts) @ delta - L
    i = int(np.argmax(z))
    return pts[i], float(z[i])


# ---------------------------------------------------------------------------
# constraint generation
# ---------------------------------------------------------------------------

def _row_slack(rec: ConstraintRecord, gamma, delta, L, tol: float) -> float:
    scale = 1.0 + np.abs(rec.f) @ gamma + np.abs(rec.g) @ delta + abs(L)
    return 10.0 * max(tol, 1e-9) * scale


def _is_duplicate(rec: ConstraintRecord, records) -> bool:
    for r in records:
        if r.kind == rec.kind and np.allclose(r.price_point, rec.price_point,
                                              atol=DEDUP_TOL, rtol=0):
            return True
    return False


@dataclass
class _Loop:
    m: MarketInstance
    constraints: list
    eps: float
    max_iter: int
    big_m: float | None
    s_max: float
    method: str
    tol: float
    check_recession: bool
    iterations: int = 0
    z_history: list = field(default_factory=list)
    monotone: bool = True
    lin_error: float = 0.0
    lower_nodes: int = 0

    def run(self, lp_builder, history: list):
        """Alternate upper LP and lower MILP until no violation remains.

        The upper-LP optimum of every round is appended to ``history``;
        adding constraints can only lower it.
        """
        m = self.m
        M, N = m.M, m.N
        x = None
        while True:
            if self.iterations >= self.max_iter:
                return x, "unconverged"
            lp = lp_builder(self.constraints)
            rep = solve_lp(lp, self.tol, self.method)
            self.iterations += 1
            if not rep.optimal:
                return None, rep.status.value
            x = rep.x
            if history and rep.objective > history[-1] + MONOTONE_TOL * (1 + abs(history[-1])):
                self.monotone = False
                log.warning("upper LP objective rose from %g to %g", history[-1], rep.objective)
            history.append(rep.objective)
            gamma, delta, L = np.clip(x[:M], 0, 1), np.clip(x[M:M + N], 0, 1), x[-1]
            low = lower_violation(m, gamma, delta, L, big_m=self.big_m, s_max=self.s_max,
                                  method=self.method, tol=self.tol)
            self.lower_nodes += low.nodes
            if low.status != "optimal":
                log.warning("lower problem ended with status %s", low.status)
                return x, "unconverged"
            self.lin_error = max(self.lin_error, low.linearization_error)
            self.z_history.append(low.z)
            rec = ConstraintRecord.at(m, low.S) if low.z > self.eps else None
            if rec is not None and _is_duplicate(rec, self.constraints):
                # A known scenario can only reappear through LP feasibility
                # slack, which scales with the size of the row.
                if low.z > _row_slack(rec, gamma, delta, L, self.tol):
                    log.warning("lower problem repeated a known scenario; stopping")
                    return x, "stalled"
                rec = None
            if rec is None:
                if not self.check_recession:
                    return x, "optimal"
                ray = lower_violation(m, gamma, delta, L, big_m=self.big_m,
                                      recession=True, method=self.method, tol=self.tol)
                if ray.status != "optimal":
                    return x, "unconverged"
                if ray.z <= self.eps:
                    return x, "optimal"
                rec = ConstraintRecord.along(m, ray.S)
                if _is_duplicate(rec, self.constraints):
                    log.warning("recession search repeated a known direction; stopping")
                    return x, "stalled"
            self.constraints.append(rec)


def match_combinatorial(m: MarketInstance, eps: float = DEFAULT_EPS,
                        max_iter: int | None = None, fix_L_zero: bool = False,
                        prefer_volume: bool = False, big_m: float | None = None,
                        s_max: float | None = None, method: str = "highs",
                        tol: float = DEFAULT_TOL, seed_points=None,
                        pinned: dict[str, float] | None = None,
                        check_recession: bool = True) -> MatchResult:
    """Optimal risk-free clearing of a combinatorial options market.

    Starts from the scenario ``S = 0`` (plus any ``seed_points``) and adds
    the most-violating price vector each round. After the box search finds
    nothing, a recession search rules out losses that grow without bound
    beyond the box. ``status`` is ``"optimal"`` only on convergence.
    """
    U = m.universe.size
    box = default_box(m) if s_max is None else float(s_max)
    constraints = [ConstraintRecord.at(m, np.zeros(U))]
    if seed_points is not None:
        for S in np.atleast_2d(np.asarray(seed_points, dtype=float)):
            if S.size:
                constraints.append(ConstraintRecord.at(m, S))
    loop = _Loop(m, constraints, eps,
                 default_max_iter(m) if max_iter is None else max_iter,
                 big_m, box, method, tol, check_recession)

    def base_lp(C):
        return build_upper_lp(m, C, fix_L_zero=fix_L_zero, pinned=pinned)

    history, volume_history = [], []
    x, status = loop.run(base_lp, history)
    volume_status = None
    if x is not None and status == "optimal" and prefer_volume:
        best = history[-1]

        def volume_lp(C):
            lp = base_lp(C)
            c = np.ones(lp.n_vars)
            c[-1] = 0.0
            A = np.vstack([lp.A, -lp.c])
            rhs = np.concatenate([lp.rhs, [-(best - 0.1 * eps)]])
            return LinearProgram(c, A, np.append(lp.senses, LE), rhs, lp.lower, lp.upper)

        xv, volume_status = loop.run(volume_lp, volume_history)
        if xv is not None and volume_status == "optimal":
            x = xv

    M, N = m.M, m.N
    if x is None:
        return MatchResult(np.zeros(M), np.zeros(N), math.nan, -math.inf,
                           tuple(o.id for o in m.buys), tuple(o.id for o in m.sells),
                           iterations=loop.iterations, constraints=constraints,
                           status=status)
    gamma = np.clip(x[:M], 0, 1) + 0.0
    delta = np.clip(x[M:M + N], 0, 1) + 0.0
    L = float(x[-1])
    b, s = m.buy_arrays, m.sell_arrays
    objective = float(b.price * b.qty @ gamma - s.price * s.qty @ delta - L)
    return MatchResult(
        gamma=gamma, delta=delta, offset_L=L, objective=objective,
        buy_ids=tuple(o.id for o in m.buys), sell_ids=tuple(o.id for o in m.sells),
        iterations=loop.iterations, constraints=constraints, status=status,
        diagnostics={
            "objective_history": history,
            "volume_history": volume_history,
            "monotone": loop.monotone,
            "violation_history": loop.z_history,
            "max_linearization_error": loop.lin_error,
            "lower_nodes": loop.lower_nodes,
            "box": box,
            "volume_status": volume_status,
        })


def quote_combinatorial(m: MarketInstance, target: OptionContract, side: str,
                        **kwargs) -> float:
    """Bid (``side="buy"``) or ask (``side="sell"``) for ``target`` against the book.

    The bid is the largest gain from selling a portfolio the target
    dominates; the ask is the cheapest portfolio dominating the target
    (``inf`` when none exists).
    """
    if side == BUY:
        aug = m.with_orders(Order(TARGET_ID, SELL, target, 0.0))
    elif side == SELL:
        aug = m.with_orders(Order(TARGET_ID, BUY, target, 0.0))
    else:
        raise ValueError(f"side must be 'buy' or 'sell', got {side!r}")
    res = match_combinatorial(aug, pinned={TARGET_ID: 1.0}, **kwargs)
    if res.status == Status.INFEASIBLE.value:
        return math.inf if side == SELL else 0.0
    if res.status != "optimal":
        raise RuntimeError(f"quote did not converge (status {res.status})")
    return max(res.objective, 0.0) if side == BUY else max(-res.objective, 0.0)


def frontier_combinatorial(m: MarketInstance, tol: float = 1e-6, **kwargs) -> set[str]:
    """Frontier set for a combinatorial book: orders no portfolio of the others improves."""
    frontier = set()
    for o in m.orders:
        rest = m.without(o.id)
        if o.side == BUY:
            if o.price >= quote_combinatorial(rest, o.contract, BUY, **kwargs) - tol:
                frontier.add(o.id)
        elif o.price <= quote_combinatorial(rest, o.contract, SELL, **kwargs) + tol:
            frontier.add(o.id)
    return frontier
