"""Adapters onto scipy's HiGHS bindings."""

from __future__ import annotations

import warnings

import numpy as np
from scipy.optimize import LinearConstraint, linprog, milp

from .problem import EQ, GE, LE, LinearProgram, MixedIntegerProgram, SolveReport, Status

_LINPROG_STATUS = {0: Status.OPTIMAL, 1: Status.LIMIT, 2: Status.INFEASIBLE,
                   3: Status.UNBOUNDED}


def _ub_eq(lp: LinearProgram):
    le = lp.senses == LE
    ge = lp.senses == GE
    eq = lp.senses == EQ
    A_ub = np.vstack([lp.A[le], -lp.A[ge]])
    b_ub = np.concatenate([lp.rhs[le], -lp.rhs[ge]])
    return le, ge, eq, A_ub, b_ub


def _bounds(lp):
    lo = np.where(np.isfinite(lp.lower), lp.lower, None)
    hi = np.where(np.isfinite(lp.upper), lp.upper, None)
    return list(zip(lo, hi))


def highs_lp(lp: LinearProgram, tol: float = 1e-7) -> SolveReport:
    le, ge, eq, A_ub, b_ub = _ub_eq(lp)
    opts = {"primal_feasibility_tolerance": min(tol, 1e-7),
            "dual_feasibility_tolerance": min(tol, 1e-7)}
    res = linprog(-lp.c,
                  A_ub=A_ub if A_ub.size else None, b_ub=b_ub if A_ub.size else None,
                  A_eq=lp.A[eq] if eq.any() else None, b_eq=lp.rhs[eq] if eq.any() else None,
                  bounds=_bounds(lp), method="highs", options=opts)
    status = _LINPROG_STATUS.get(res.status, Status.INFEASIBLE)
    if res.status == 4:
        # Numerical trouble; retry without presolve before giving up.
        res = linprog(-lp.c, A_ub=A_ub if A_ub.size else None,
                      b_ub=b_ub if A_ub.size else None,
                      A_eq=lp.A[eq] if eq.any() else None,
                      b_eq=lp.rhs[eq] if eq.any() else None,
                      bounds=_bounds(lp), method="highs-ds",
                      options={**opts, "presolve": False})
        status = _LINPROG_STATUS.get(res.status, Status.INFEASIBLE)
    if status != Status.OPTIMAL:
        return SolveReport(status, iterations=int(getattr(res, "nit", 0) or 0))
    duals = np.zeros(lp.n_rows)
    n_le = int(le.sum())
    if A_ub.size:
        m_ub = -res.ineqlin.marginals
        duals[le] = m_ub[:n_le]
        duals[ge] = -m_ub[n_le:]
    if eq.any():
        duals[eq] = -res.eqlin.marginals
    x = np.asarray(res.x, dtype=float)
    return SolveReport(Status.OPTIMAL, x=x, objective=float(lp.c @ x),
                       iterations=int(res.nit), duals=duals)


def highs_milp(mip: MixedIntegerProgram, tol: float = 1e-7,
               node_limit: int = 1_000_000) -> SolveReport:
    lp = mip.lp
    integrality = np.zeros(lp.n_vars)
    integrality[mip.binaries] = 1
    lo = np.where(lp.senses == LE, -np.inf, lp.rhs)
    hi = np.where(lp.senses == GE, np.inf, lp.rhs)
    constraints = [LinearConstraint(lp.A, lo, hi)] if lp.n_rows else []
    opts = {"node_limit": node_limit, "mip_rel_gap": 0.0,
            # passed straight through to HiGHS
            "mip_feasibility_tolerance": min(tol, 1e-9),
            "primal_feasibility_tolerance": min(tol, 1e-9)}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = milp(-lp.c, integrality=integrality, bounds=(lp.lower, lp.upper),
                   constraints=constraints, options=opts)
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    if res.status == 0:
        x = np.asarray(res.x, dtype=float)
        x[mip.binaries] = np.round(x[mip.binaries])
        return SolveReport(Status.OPTIMAL, x=x, objective=float(lp.c @ x), nodes=nodes)
    status = {1: Status.LIMIT, 2: Status.INFEASIBLE, 3: Status.UNBOUNDED}.get(
        res.status, Status.INFEASIBLE)
    return SolveReport(status, nodes=nodes)
