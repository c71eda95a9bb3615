"""Dense primal simplex on a standard-form LP: min c'x s.t. Ax = b, x >= 0.

The tableau keeps B^-1 A, B^-1 b and B^-1 explicitly so that the row
multipliers c_B B^-1 are available after every pivot, and the objective row
can be replaced without touching the basis (warm start after a cost change).
"""

from __future__ import annotations

import enum

import numpy as np

PIVOT_TOL = 1e-10
DEGENERATE_SWITCH = 50
REFACTOR_EVERY = 25


class PivotStatus(enum.Enum):
    IMPROVED = "improved"
    DEGENERATE = "degenerate"
    OPTIMAL = "optimal"


class SingularPivot(ArithmeticError):
    pass


class Unbounded(ArithmeticError):
    pass


class Tableau:
    """Simplex state for a basis whose columns of A form a nonsingular block.

    Attributes
    ----------
    basis : int array, basis[i] is the variable basic in row i
    body : B^-1 A
    rhs : B^-1 b (current basic values)
    binv : B^-1
    reduced_costs : c - c_B B^-1 A
    """

    def __init__(self, c, A, b, basis, pivot_tol: float = PIVOT_TOL):
        A = np.array(A, dtype=float)
        self.m, self.n = A.shape
        self.A = A
        self.b = np.array(b, dtype=float).ravel()
        self.c = np.array(c, dtype=float).ravel()
        self.basis = np.array(basis, dtype=int)
        if self.basis.size != self.m or self.c.size != self.n:
            raise ValueError("inconsistent LP dimensions")
        self.pivot_tol = pivot_tol
        B = A[:, self.basis]
        self.binv = np.linalg.inv(B)
        self.body = self.binv @ A
        self.rhs = self.binv @ self.b
        if np.any(self.rhs < -pivot_tol):
            raise ValueError("initial basis is not primal feasible")
        self.rhs = np.maximum(self.rhs, 0.0)
        self.pivots = 0
        self._degenerate_run = 0
        self._refresh_costs()

    def _refresh_costs(self):
        self.duals = self.c[self.basis] @ self.binv
        self.reduced_costs = self.c - self.duals @ self.A
        self.reduced_costs[self.basis] = 0.0

    @property
    def objective(self) -> float:
        return float(self.c[self.basis] @ self.rhs)

    def primal(self) -> np.ndarray:
        x = np.zeros(self.n)
        x[self.basis] = self.rhs
        return x

    def is_optimal(self) -> bool:
        return bool(np.all(self.reduced_costs >= -self.pivot_tol))

    def set_costs(self, c):
        """Replace the cost vector; basis and rhs (hence primal feasibility) are untouched."""
        c = np.array(c, dtype=float).ravel()
        if c.size != self.n:
            raise ValueError("cost vector has wrong size")
        self.c = c
        self._refresh_costs()

    def _entering(self, bland: bool) -> int:
        candidates = np.flatnonzero(self.reduced_costs < -self.pivot_tol)
        if candidates.size == 0:
            return -1
        if bland:
            return int(candidates[0])
        rc = self.reduced_costs[candidates]
        # argmin returns the lowest index on exact ties
        return int(candidates[np.argmin(rc)])

    def _leaving(self, col: int) -> int:
        column = self.body[:, col]
        rows = np.flatnonzero(column > self.pivot_tol)
        if rows.size == 0:
            raise Unbounded(f"column {col} has no positive entry")
        ratios = self.rhs[rows] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        if tied.size == 1:
            return int(tied[0])
        # Bland-style tie break: smallest basic variable index leaves
        return int(tied[np.argmin(self.basis[tied])])

    def pivot_on(self, row: int, col: int):
        piv = self.body[row, col]
        if abs(piv) < self.pivot_tol:
            raise SingularPivot(f"pivot element {piv:.3e} at ({row}, {col})")
        self.body[row] /= piv
        self.binv[row] /= piv
        self.rhs[row] /= piv
        for i in range(self.m):
            if i != row:
                factor = self.body[i, col]
                if factor != 0.0:
                    self.body[i] -= factor * self.body[row]
                    self.binv[i] -= factor * self.binv[row]
                    self.rhs[i] -= factor * self.rhs[row]
        np.maximum(self.rhs, 0.0, out=self.rhs)
        self.basis[row] = col
        self.pivots += 1
        if self.pivots % REFACTOR_EVERY == 0:
            self.refactor()
        self._refresh_costs()

    def refactor(self):
        """Recompute B^-1 from scratch to shed accumulated rounding."""
        self.binv = np.linalg.inv(self.A[:, self.basis])
        self.body = self.binv @ self.A
        self.rhs = np.maximum(self.binv @ self.b, 0.0)

    def pivot(self) -> PivotStatus:
        """One Dantzig pivot (Bland's rule after a run of degenerate pivots)."""
        bland = self._degenerate_run >= DEGENERATE_SWITCH
        col = self._entering(bland)
        if col < 0:
            return PivotStatus.OPTIMAL
        row = self._leaving(col)
        step = self.rhs[row]
        self.pivot_on(row, col)
        if step <= self.pivot_tol:
            self._degenerate_run += 1
            return PivotStatus.DEGENERATE
        self._degenerate_run = 0
        return PivotStatus.IMPROVED

    def solve(self, max_pivots: int = 10_000) -> PivotStatus:
        for _ in range(max_pivots):
            status = self.pivot()
            if status is PivotStatus.OPTIMAL:
                return status
        return PivotStatus.OPTIMAL if self.is_optimal() else PivotStatus.DEGENERATE
