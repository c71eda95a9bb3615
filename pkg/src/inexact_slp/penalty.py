"""How rho moves inside and after each subproblem solve, and how gamma decays."""

from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass


class RhoAction(enum.Enum):
    TERMINATE = "terminate"
    REDUCE = "reduce"
    CONTINUE = "continue"


class InfeasibilitySuspected(Exception):
    """A penalty reduction was requested with rho already at its floor."""


@dataclass(frozen=True)
class ControlParams:
    beta_v: float = 0.3
    beta_phi: float = 0.75
    beta_l: float = 0.135
    theta_rho: float = 0.5
    gamma0: float = 0.01
    theta_gamma: float = 0.7
    rho_min: float = 1e-12

    def __post_init__(self):
        if not 0 < self.beta_v < self.beta_phi < 1:
            raise ValueError("need 0 < beta_v < beta_phi < 1")
        if not 0 < self.beta_l <= self.beta_phi * (1 - self.beta_v):
            raise ValueError("need 0 < beta_l <= beta_phi (1 - beta_v)")
        for name in ("theta_rho", "theta_gamma"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if not self.gamma0 > 0 or not self.rho_min > 0:
            raise ValueError("gamma0 and rho_min must be positive")


def penalty_step(ratios: tuple[float, float, float], rho: float, params: ControlParams) -> tuple[RhoAction, float]:
    """Decide what the subproblem solver does with the current primal-dual iterate.

    Returns the action together with the penalty to use next. Raises
    InfeasibilitySuspected if a reduction is due but rho is already at
    ``params.rho_min``; a reduction that would undershoot the floor lands on it.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    r_v, r_phi, r_c = ratios
    if not (r_phi >= params.beta_phi and r_c >= params.beta_v):
        return RhoAction.CONTINUE, rho
    if r_v >= params.beta_v:
        return RhoAction.TERMINATE, rho
    if rho <= params.rho_min:
        raise InfeasibilitySuspected(f"rho={rho:.3e} already at floor")
    return RhoAction.REDUCE, max(params.theta_rho * rho, params.rho_min)


def safeguard_rho(grad_dot_d: float, delta_l_fea: float, gamma: float, rho_tilde: float, beta_l: float) -> float:
    """Largest admissible rho_k <= rho_tilde keeping the penalty model reduction
    within a beta_l fraction of the feasibility model reduction (both relaxed by gamma)."""
    rhs = delta_l_fea + gamma
    if rhs <= 0:
        raise ValueError("feasibility model reduction plus gamma must be positive")
    if delta_l_fea - rho_tilde * grad_dot_d + gamma >= beta_l * rhs:
        return rho_tilde
    # the first branch always holds when grad_dot_d <= 0
    return (1.0 - beta_l) * rhs / grad_dot_d


def next_gamma(k: int, gamma0: float, theta_gamma: float) -> float:
    """gamma_k = gamma0 * theta_gamma**(k-1), k >= 1, floored at the smallest normal double."""
    if k < 1:
        raise ValueError("k starts at 1")
    return max(gamma0 * theta_gamma ** (k - 1), sys.float_info.min)


def reduction_count_bound(gamma: float, delta: float, n: int, rho_prev: float, grad_norm: float,
                         beta_v: float, beta_phi: float, theta_rho: float) -> int:
    """Upper bound on the number of in-solve reductions in one subproblem (needs grad_norm > 0)."""
    scale = gamma / (max(n, 1.0) * delta) * (1.0 - math.sqrt(beta_v / beta_phi)) / (rho_prev * grad_norm)
    return max(0, math.ceil(math.log(scale) / math.log(theta_rho)))


def rho_lower_bound(gamma: float, delta: float, n: int, rho_prev: float, grad_norm: float,
                    beta_v: float, beta_phi: float, theta_rho: float) -> float:
    """Guaranteed lower bound on the penalty returned by one subproblem solve."""
    # max(kappa0^2, 1) = n for the l-inf trust region
    floor = theta_rho * gamma / (max(n, 1.0) * delta) * (1.0 - math.sqrt(beta_v / beta_phi)) / grad_norm
    return min(rho_prev, floor)
