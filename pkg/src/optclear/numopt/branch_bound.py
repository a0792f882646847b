"""Best-bound branch-and-bound over binary variables."""

from __future__ import annotations

import heapq
import itertools

import numpy as np

from .problem import MixedIntegerProgram, SolveReport, Status

INT_TOL = 1e-6


def branch_and_bound(mip: MixedIntegerProgram, lp_solver, tol: float = 1e-7,
                     node_limit: int = 1_000_000) -> SolveReport:
    """Exact optimum of ``mip`` using ``lp_solver(lp, tol)`` for relaxations.

    Nodes are explored best bound first (ties by creation order); the
    branching variable is the lowest-index fractional binary.
    """
    lp = mip.lp
    binaries = mip.binaries
    counter = itertools.count()
    nodes = 0
    iterations = 0

    def relax(lower, upper):
        nonlocal nodes, iterations
        nodes += 1
        rep = lp_solver(lp.with_bounds(lower, upper), tol)
        iterations += rep.iterations
        return rep

    root = relax(lp.lower, lp.upper)
    if root.status in (Status.INFEASIBLE, Status.UNBOUNDED, Status.LIMIT):
        return SolveReport(root.status, iterations=iterations, nodes=nodes)

    best_x, best_obj = None, -np.inf
    heap = [(-root.objective, next(counter), lp.lower, lp.upper, root)]
    limited = False
    while heap:
        neg_bound, _, lo, hi, rep = heapq.heappop(heap)
        if -neg_bound <= best_obj + tol:
            continue
        xb = rep.x[binaries]
        frac = np.flatnonzero(np.abs(xb - np.round(xb)) > INT_TOL)
        if frac.size == 0:
            x = rep.x.copy()
            x[binaries] = np.round(xb)
            best_x, best_obj = x, float(lp.c @ x)
            continue
        j = binaries[frac[0]]
        for value in (0.0, 1.0):
            if nodes >= node_limit:
                limited = True
                break
            clo, chi = lo.copy(), hi.copy()
            clo[j] = chi[j] = value
            child = relax(clo, chi)
            if child.status == Status.OPTIMAL and child.objective > best_obj + tol:
                heapq.heappush(heap, (-child.objective, next(counter), clo, chi, child))
        if limited:
            break

    if limited:
        return SolveReport(Status.LIMIT, iterations=iterations, nodes=nodes)
    if best_x is None:
        return SolveReport(Status.INFEASIBLE, iterations=iterations, nodes=nodes)
    return SolveReport(Status.OPTIMAL, x=best_x, objective=best_obj,
                       iterations=iterations, nodes=nodes)
