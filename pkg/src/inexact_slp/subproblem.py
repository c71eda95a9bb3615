"""The l-inf trust-region linear subproblem and its inexact simplex solve.

Variables of the standard form, in column order::

    x = (d+, d-, r, t, s, z, u, v)

with r - s the equality residual, t the positive part of each inequality
residual, z its slack, and u, v the slacks of the box -delta <= d <= delta.
Rows are equalities, inequalities, upper box, lower box. Rows whose raw
right-hand side -b_i is negative are multiplied by -1 so that the trivial
basis built from (r or s, t or z, u, v) is primal feasible; ``row_sign``
records the flips.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np

from . import merit
from .penalty import ControlParams, RhoAction, InfeasibilitySuspected, penalty_step
from .problem import Evaluation
from .simplex import PIVOT_TOL, PivotStatus, Tableau


class TerminatedBy(enum.Enum):
    RATIOS_SATISFIED = "ratios_satisfied"
    LP_OPTIMAL = "lp_optimal"
    PIVOT_LIMIT = "pivot_limit"
    RHO_FLOOR = "rho_floor"


class SubproblemStalled(RuntimeError):
    def __init__(self, result: "SubproblemResult"):
        self.result = result
        super().__init__(
            f"pivot limit reached after {result.pivots} pivots with r_phi={result.ratios[1]:.3g}"
        )


@dataclass
class StandardLP:
    cbar: np.ndarray
    Abar: np.ndarray
    bbar: np.ndarray
    row_sign: np.ndarray
    delta: float
    n: int
    eq_idx: np.ndarray
    in_idx: np.ndarray
    blocks: dict[str, slice]

    @property
    def n_eq(self) -> int:
        return self.eq_idx.size

    @property
    def n_in(self) -> int:
        return self.in_idx.size


def _cost(ev: Evaluation, rho: float, n_eq: int, n_in: int) -> np.ndarray:
    n = ev.n
    return np.concatenate([
        rho * ev.g, -rho * ev.g,
        np.ones(n_eq), np.ones(n_in), np.ones(n_eq),
        np.zeros(n_in), np.zeros(n), np.zeros(n),
    ])


def build_standard_form(ev: Evaluation, rho: float, delta: float) -> StandardLP:
    if rho < 0 or not delta > 0:
        raise ValueError("need rho >= 0 and delta > 0")
    n = ev.n
    eq_idx = np.flatnonzero(ev.eq_mask)
    in_idx = np.flatnonzero(~ev.eq_mask)
    mE, mI = eq_idx.size, in_idx.size
    sizes = [("d_plus", n), ("d_minus", n), ("r", mE), ("t", mI), ("s", mE), ("z", mI), ("u", n), ("v", n)]
    blocks, start = {}, 0
    for name, size in sizes:
        blocks[name] = slice(start, start + size)
        start += size
    nbar = start
    rows = mE + mI + 2 * n
    Abar = np.zeros((rows, nbar))
    aE, aI = ev.A[eq_idx], ev.A[in_idx]
    eye_n = np.eye(n)

    rE = slice(0, mE)
    Abar[rE, blocks["d_plus"]] = aE
    Abar[rE, blocks["d_minus"]] = -aE
    Abar[rE, blocks["r"]] = -np.eye(mE)
    Abar[rE, blocks["s"]] = np.eye(mE)

    rI = slice(mE, mE + mI)
    Abar[rI, blocks["d_plus"]] = aI
    Abar[rI, blocks["d_minus"]] = -aI
    Abar[rI, blocks["t"]] = -np.eye(mI)
    Abar[rI, blocks["z"]] = np.eye(mI)

    rU = slice(mE + mI, mE + mI + n)
    Abar[rU, blocks["d_plus"]] = eye_n
    Abar[rU, blocks["d_minus"]] = -eye_n
    Abar[rU, blocks["u"]] = eye_n

    rV = slice(mE + mI + n, rows)
    Abar[rV, blocks["d_plus"]] = -eye_n
    Abar[rV, blocks["d_minus"]] = eye_n
    Abar[rV, blocks["v"]] = eye_n

    bbar = np.concatenate([-ev.b[eq_idx], -ev.b[in_idx], np.full(2 * n, float(delta))])
    row_sign = np.where(bbar < 0, -1.0, 1.0)
    return StandardLP(
        cbar=_cost(ev, rho, mE, mI),
        Abar=Abar * row_sign[:, None],
        bbar=bbar * row_sign,
        row_sign=row_sign,
        delta=float(delta),
        n=n,
        eq_idx=eq_idx,
        in_idx=in_idx,
        blocks=blocks,
    )


def initial_basis(lp: StandardLP, ev: Evaluation) -> Tableau:
    """Basis with d = 0: r or s per equality, t or z per inequality, all u and v."""
    b = lp.blocks
    basis = []
    for k, i in enumerate(lp.eq_idx):
        basis.append(b["r"].start + k if ev.b[i] > 0 else b["s"].start + k)
    for k, i in enumerate(lp.in_idx):
        basis.append(b["t"].start + k if ev.b[i] > 0 else b["z"].start + k)
    basis.extend(range(b["u"].start, b["u"].stop))
    basis.extend(range(b["v"].start, b["v"].stop))
    return Tableau(lp.cbar, lp.Abar, lp.bbar, basis)


def extract_primal(tab: Tableau, lp: StandardLP) -> np.ndarray:
    x = tab.primal()
    d = x[lp.blocks["d_plus"]] - x[lp.blocks["d_minus"]]
    return np.clip(d, -lp.delta, lp.delta)


def extract_duals(tab: Tableau, lp: StandardLP) -> np.ndarray:
    """Raw penalty multipliers in original constraint order (lambda = -y on the unflipped rows)."""
    y = tab.duals * lp.row_sign
    lam = np.empty(lp.n_eq + lp.n_in)
    lam[lp.eq_idx] = -y[: lp.n_eq]
    lam[lp.in_idx] = -y[lp.n_eq: lp.n_eq + lp.n_in]
    return lam


def project_duals(ev: Evaluation, raw_lam, nu, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Clamp into the dual box; nu keeps whichever of (nu, lambda) has the better feasibility dual value."""
    lam = merit.project_duals(ev, raw_lam)
    if merit.dual_value(ev, lam, 0.0, delta) > merit.dual_value(ev, nu, 0.0, delta):
        nu = lam.copy()
    return lam, nu


def update_objective_row(tab: Tableau, lp: StandardLP, rho_new: float, ev: Evaluation) -> Tableau:
    lp.cbar = _cost(ev, rho_new, lp.n_eq, lp.n_in)
    tab.set_costs(lp.cbar)
    return tab


def ratios(ev: Evaluation, d, lam, nu, rho: float, gamma: float, delta: float) -> tuple[float, float, float]:
    """(r_v, r_phi, r_c) for the primal-dual iterate (d, lam, nu)."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    l0g = merit.violation(ev) + gamma
    r_v = (l0g - merit.linear_model(ev, d, 0.0)) / (l0g - max(merit.dual_value(ev, nu, 0.0, delta), 0.0))
    r_phi = (l0g - merit.linear_model(ev, d, rho)) / (l0g - merit.dual_value(ev, lam, rho, delta))
    chi = merit.complementarity_measure(ev, d, lam)
    r_c = 1.0 - math.sqrt(max(chi, 0.0) / l0g)
    return r_v, r_phi, r_c


@dataclass(frozen=True)
class IterateRecord:
    """One primal-dual iterate of the subproblem solver (after a pivot or a penalty change)."""

    pivots: int
    rho: float
    l_rho: float
    l_zero: float
    l_origin: float
    p_lam_rho: float
    p_lam_zero: float
    p_nu_zero: float
    p_lam_init_zero: float
    ratios: tuple[float, float, float]
    action: str


@dataclass
class SubproblemResult:
    d: np.ndarray
    lam: np.ndarray
    nu: np.ndarray
    rho_tilde: float
    pivots: int
    ratios: tuple[float, float, float]
    rho_reductions: int
    terminated_by: TerminatedBy
    rho_in: float
    gamma: float
    delta: float
    lp_optimal: bool = False
    infeasibility_suspected: bool = False
    history: list[IterateRecord] = field(default_factory=list)

    @property
    def null_step(self) -> bool:
        return not np.any(self.d)


@dataclass(frozen=True)
class SubproblemParams:
    control: ControlParams = ControlParams()
    max_pivots: int = 100
    exact: bool = False


def solve_subproblem(
    ev: Evaluation,
    rho_in: float,
    gamma: float,
    delta: float,
    params: SubproblemParams = SubproblemParams(),
    lam_init: Optional[np.ndarray] = None,
    trace: Optional[TextIO] = None,
) -> SubproblemResult:
    """Pivot until the three inexactness ratios are met, reducing rho in place as needed.

    Raises SubproblemStalled when the pivot limit is hit with r_phi still short.
    """
    if not rho_in > 0 or not gamma > 0:
        raise ValueError("need rho_in > 0 and gamma > 0")
    ctrl = params.control
    rho = float(rho_in)
    lp = build_standard_form(ev, rho, delta)
    tab = initial_basis(lp, ev)
    zero = np.zeros(ev.n)
    if lam_init is not None and np.size(lam_init) == ev.m:
        lam0 = merit.project_duals(ev, lam_init)
    else:
        lam0 = np.zeros(ev.m)
    p_lam0 = merit.dual_value(ev, lam0, 0.0, delta)
    nu = lam0.copy()
    l_origin = merit.violation(ev)
    reductions = 0
    history: list[IterateRecord] = []
    suspected = False
    terminated = TerminatedBy.PIVOT_LIMIT

    while True:
        optimal = tab.is_optimal()
        d = extract_primal(tab, lp)
        if merit.linear_model(ev, d, rho) > merit.linear_model(ev, zero, rho):
            # never report an iterate worse than the zero step
            d = zero
        if tab.pivots == 0 and reductions == 0:
            # the starting iterate is (0, lambda0), not the slack-cost duals of the trivial basis
            lam = lam0.copy()
        else:
            lam, nu = project_duals(ev, extract_duals(tab, lp), nu, delta)
        rat = ratios(ev, d, lam, nu, rho, gamma, delta)

        if params.exact and not optimal:
            action = RhoAction.CONTINUE
            new_rho = rho
        else:
            try:
                action, new_rho = penalty_step(rat, rho, ctrl)
            except InfeasibilitySuspected:
                suspected = True
                action, new_rho = None, rho

        record = IterateRecord(
            pivots=tab.pivots,
            rho=rho,
            l_rho=merit.linear_model(ev, d, rho),
            l_zero=merit.linear_model(ev, d, 0.0),
            l_origin=l_origin,
            p_lam_rho=merit.dual_value(ev, lam, rho, delta),
            p_lam_zero=merit.dual_value(ev, lam, 0.0, delta),
            p_nu_zero=merit.dual_value(ev, nu, 0.0, delta),
            p_lam_init_zero=p_lam0,
            ratios=rat,
            action=action.value if action else "rho_floor",
        )
        history.append(record)
        if trace is not None:
            trace.write(json.dumps({
                "pivots": tab.pivots, "rho": rho, "basis": tab.basis.tolist(),
                "rhs": tab.rhs.tolist(), "d": d.tolist(), "lambda": lam.tolist(),
                "nu": nu.tolist(), "ratios": list(rat), "action": record.action,
            }) + "\n")

        if action is None:
            terminated = TerminatedBy.RHO_FLOOR
            break
        if action is RhoAction.TERMINATE:
            terminated = TerminatedBy.LP_OPTIMAL if optimal else TerminatedBy.RATIOS_SATISFIED
            break
        if action is RhoAction.REDUCE:
            rho = new_rho
            reductions += 1
            update_objective_row(tab, lp, rho, ev)
            continue
        if optimal:
            # ratios cannot improve further at this penalty
            terminated = TerminatedBy.LP_OPTIMAL
            break
        if tab.pivots >= params.max_pivots:
            terminated = TerminatedBy.PIVOT_LIMIT
            break
        tab.pivot()

    result = SubproblemResult(
        d=d, lam=lam, nu=nu, rho_tilde=rho, pivots=tab.pivots, ratios=rat,
        rho_reductions=reductions, terminated_by=terminated, rho_in=float(rho_in),
        gamma=float(gamma), delta=float(delta), lp_optimal=optimal,
        infeasibility_suspected=suspected, history=history,
    )
    if terminated is TerminatedBy.PIVOT_LIMIT and rat[1] < ctrl.beta_phi:
        raise SubproblemStalled(result)
    return result


__all__ = [
    "PIVOT_TOL", "PivotStatus", "StandardLP", "SubproblemParams", "SubproblemResult",
    "SubproblemStalled", "TerminatedBy", "build_standard_form", "extract_duals",
    "extract_primal", "initial_basis", "project_duals", "ratios", "solve_subproblem",
    "update_objective_row",
]
