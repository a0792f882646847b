"""LP and binary MILP solving behind one small interface.

Two interchangeable backends: ``"highs"`` (scipy's HiGHS bindings, the
default) and ``"native"`` (the dense simplex and branch-and-bound in this
package). Both return a :class:`SolveReport` and never raise on
infeasible or unbounded problems.
"""

from __future__ import annotations

from .branch_bound import branch_and_bound
from .highs import highs_lp, highs_milp
from .problem import (DEFAULT_TOL, EQ, GE, LE, LinearProgram, MixedIntegerProgram,
                      SolveReport, Status, dual_bound, duality_gap)
from .simplex import simplex

__all__ = [
    "EQ", "GE", "LE", "DEFAULT_TOL", "LinearProgram", "MixedIntegerProgram",
    "SolveReport", "Status", "dual_bound", "duality_gap", "solve_lp", "solve_milp",
]

METHODS = ("highs", "native")


def solve_lp(lp: LinearProgram, tol: float = DEFAULT_TOL, method: str = "highs") -> SolveReport:
    if method == "highs":
        return highs_lp(lp, tol)
    if method == "native":
        return simplex(lp, tol)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def solve_milp(mip: MixedIntegerProgram, tol: float = DEFAULT_TOL, method: str = "highs",
               node_limit: int = 1_000_000) -> SolveReport:
    if len(mip.binaries) == 0:
        return solve_lp(mip.lp, tol, method)
    if method == "highs":
        return highs_milp(mip, tol, node_limit)
    if method == "native":
        return branch_and_bound(mip, simplex, tol, node_limit)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
