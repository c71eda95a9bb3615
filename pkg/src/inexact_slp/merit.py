"""Scalar machinery of the l1 penalty framework.

Trust region is the l-infinity ball of radius delta, so every dual-norm
quantity below is an l1 norm and the norm-equivalence constant is sqrt(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problem import Evaluation, Kind

ZERO_TOL = 1e-12
DUAL_FEAS_TOL = 1e-12


class DualInfeasible(ValueError):
    pass


@dataclass(frozen=True)
class PenaltyParams:
    rho: float
    gamma: float
    delta: float
    delta_min: float = 0.0
    delta_max: float = math.inf

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not (self.delta > 0 and self.delta_min <= self.delta <= self.delta_max):
            raise ValueError("delta outside [delta_min, delta_max]")


def kappa0(n: int) -> float:
    """||x||_2 <= kappa0 * ||x||_1 holds with 1; the l-inf primal norm needs sqrt(n)."""
    return math.sqrt(n)


def dual_norm(w) -> float:
    return float(np.sum(np.abs(w)))


def _v_terms(z, eq_mask):
    return np.where(eq_mask, np.abs(z), np.maximum(z, 0.0))


def violation(ev: Evaluation) -> float:
    return float(np.sum(_v_terms(ev.b, ev.eq_mask)))


def violation_subgradient_interval(b_i: float, kind: Kind) -> tuple[float, float]:
    if b_i > ZERO_TOL:
        return (1.0, 1.0)
    if b_i < -ZERO_TOL:
        return (-1.0, -1.0) if kind is Kind.EQUALITY else (0.0, 0.0)
    return (-1.0, 1.0) if kind is Kind.EQUALITY else (0.0, 1.0)


def penalty(f: float, v: float, rho: float) -> float:
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    return rho * f + v


def linear_model(ev: Evaluation, d, rho: float) -> float:
    """l(d; rho) = rho <g, d> + sum_i v_i(b_i + <a_i, d>); the rho*f constant is dropped."""
    d = np.asarray(d, dtype=float)
    lin = ev.b + ev.A @ d
    return float(rho * (ev.g @ d) + np.sum(_v_terms(lin, ev.eq_mask)))


def model_reduction(ev: Evaluation, d, rho: float) -> float:
    return linear_model(ev, np.zeros(ev.n), rho) - linear_model(ev, d, rho)


def check_dual_feasible(ev: Evaluation, lam, tol: float = DUAL_FEAS_TOL) -> np.ndarray:
    lam = np.asarray(lam, dtype=float).ravel()
    if lam.size != ev.m:
        raise DualInfeasible(f"expected {ev.m} multipliers, got {lam.size}")
    lo = np.where(ev.eq_mask, -1.0, 0.0)
    if np.any(lam < lo - tol) or np.any(lam > 1.0 + tol):
        raise DualInfeasible(f"multipliers outside the dual box: {lam.tolist()}")
    return lam


def project_duals(ev: Evaluation, lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float).ravel()
    return np.clip(lam, np.where(ev.eq_mask, -1.0, 0.0), 1.0)


def dual_value(ev: Evaluation, lam, rho: float, delta: float) -> float:
    """p(lam; rho) = -delta ||rho g + A^T lam||_1 + <b, lam>."""
    lam = check_dual_feasible(ev, lam)
    return float(-delta * dual_norm(rho * ev.g + ev.A.T @ lam) + ev.b @ lam)


def complementarity_measure(ev: Evaluation, d, lam) -> float:
    lam = check_dual_feasible(ev, lam)
    lin = ev.b + ev.A @ np.asarray(d, dtype=float)
    vals = _v_terms(lin, ev.eq_mask)
    pos = lin > ZERO_TOL
    neg_eq = (lin < -ZERO_TOL) & ev.eq_mask
    return float(np.sum((1.0 - lam[pos]) * vals[pos]) + np.sum((1.0 + lam[neg_eq]) * vals[neg_eq]))


def kkt_residual_opt(ev: Evaluation, lam, rho: float) -> float:
    lam = check_dual_feasible(ev, lam)
    return dual_norm(rho * ev.g + ev.A.T @ lam)


def kkt_residual_fea(ev: Evaluation, nu) -> float:
    nu = check_dual_feasible(ev, nu)
    return dual_norm(ev.A.T @ nu)


def complementarity_residual(ev: Evaluation, lam) -> float:
    lam = check_dual_feasible(ev, lam)
    b = ev.b
    vals = _v_terms(b, ev.eq_mask)
    pos = b > ZERO_TOL
    neg = b < -ZERO_TOL
    neg_eq = neg & ev.eq_mask
    neg_in = neg & ~ev.eq_mask
    return float(
        np.sum((1.0 - lam[pos]) * vals[pos])
        + np.sum((1.0 + lam[neg_eq]) * vals[neg_eq])
        + np.sum(lam[neg_in] * np.abs(b[neg_in]))
    )


def relative_kkt(current: tuple[float, float], initial: tuple[float, float]) -> float:
    return max(current) / max(1.0, *initial)
