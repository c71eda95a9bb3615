"""Outer loop: inexact penalty-SLP with Armijo line search and trust-region control."""

from __future__ import annotations

import dataclasses
import enum
import logging
from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np

from . import merit
from .penalty import ControlParams, next_gamma, safeguard_rho
from .problem import EvaluationCache, EvaluationError, Problem
from .subproblem import SubproblemParams, SubproblemResult, SubproblemStalled, solve_subproblem

log = logging.getLogger(__name__)

MAX_BACKTRACKS = 60


class Status(enum.Enum):
    KKT_SUCCESS = "kkt_success"
    INFEASIBLE_STATIONARY = "infeasible_stationary"
    ITER_LIMIT = "iter_limit"
    STALLED = "stalled"

    @property
    def exit_code(self) -> int:
        return {Status.KKT_SUCCESS: 1, Status.ITER_LIMIT: -1}.get(self, -2)


class StepType(enum.Enum):
    ACCEPTED = "accepted"
    NULL_STEP = "null_step"
    TERMINAL = "terminal"


class LineSearchFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    # penalty control
    rho0: float = 1.0
    beta_v: float = 0.3
    beta_phi: float = 0.75
    beta_l: float = 0.135
    theta_rho: float = 0.5
    gamma0: float = 0.01
    theta_gamma: float = 0.7
    rho_min: float = 1e-12
    # line search and trust region
    beta_alpha: float = 1e-4
    theta_alpha: float = 0.5
    delta0: float = 1.0
    delta_min: float = 1e-4
    delta_max: float = 64.0
    sigma_lo: float = 0.3
    sigma_hi: float = 0.75
    # limits and tolerances
    max_iter: int = 1024
    max_pivots: int = 100
    kkt_tol: float = 1e-4
    feas_tol: float = 1e-4
    exact: bool = False

    def __post_init__(self):
        self.control  # validates the penalty block
        if not 0 < self.sigma_lo < self.sigma_hi < 1:
            raise ValueError("need 0 < sigma_lo < sigma_hi < 1")
        if not 0 < self.delta_min < self.delta_max:
            raise ValueError("need 0 < delta_min < delta_max")
        if not self.delta_min <= self.delta0 <= self.delta_max:
            raise ValueError("delta0 outside [delta_min, delta_max]")
        for name in ("beta_alpha", "theta_alpha"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.rho0 <= 0 or self.max_iter < 1 or self.max_pivots < 1:
            raise ValueError("rho0, max_iter and max_pivots must be positive")

    @property
    def control(self) -> ControlParams:
        return ControlParams(
            beta_v=self.beta_v, beta_phi=self.beta_phi, beta_l=self.beta_l,
            theta_rho=self.theta_rho, gamma0=self.gamma0, theta_gamma=self.theta_gamma,
            rho_min=self.rho_min,
        )

    def exact_mode(self) -> "SolverConfig":
        """Subproblems solved to LP optimality before any ratio test."""
        return dataclasses.replace(self, exact=True, beta_phi=1.0 - 1e-8)

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class IterationRecord:
    k: int
    x: np.ndarray
    f: float
    v: float
    rho: float
    gamma: float
    delta: float
    alpha: float
    delta_l_opt: float
    delta_l_fea: float
    pivots: int
    E_opt: float
    E_fea: float
    E_c: float
    kkt: float
    step_type: StepType
    d: np.ndarray
    rho_tilde: float
    phi: float
    phi_new: float
    sigma: float
    rho_reductions: int


@dataclass
class SolveReport:
    status: Status
    x: np.ndarray
    f: float
    v: float
    rho: float
    kkt: float
    trace: list[IterationRecord]
    n_iter: int
    n_pivots: int
    n_f: int
    problem: str = ""
    message: str = ""
    subproblems: list[SubproblemResult] = field(default_factory=list, repr=False)

    @property
    def exit_code(self) -> int:
        return self.status.exit_code

    def summary(self) -> dict:
        return {
            "problem": self.problem,
            "iter": self.n_iter,
            "pivot": self.n_pivots,
            "f_evals": self.n_f,
            "f": self.f,
            "v": self.v,
            "kkt": self.kkt,
            "rho": self.rho,
            "exit": self.exit_code,
            "status": self.status.value,
            "message": self.message,
        }


def line_search(cache: EvaluationCache, x, d, rho: float, delta_l: float, config: SolverConfig,
                phi0: Optional[float] = None) -> tuple[float, np.ndarray, int]:
    """Backtrack alpha over theta_alpha**t until the penalty decrease reaches beta_alpha*alpha*delta_l.

    Returns (alpha, x_new, trials). Trial points go through ``cache`` so the
    unit step already evaluated for the trust ratio is not recomputed.
    """
    if delta_l < 0:
        raise ValueError("model reduction must be nonnegative")
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    if phi0 is None:
        f0, b0 = cache.values(x)
        phi0 = merit.penalty(f0, cache.violation_of(b0), rho)
    alpha = 1.0
    for t in range(MAX_BACKTRACKS + 1):
        x_new = x + alpha * d
        f1, b1 = cache.values(x_new)
        if phi0 - merit.penalty(f1, cache.violation_of(b1), rho) >= config.beta_alpha * alpha * delta_l:
            return alpha, x_new, t + 1
        alpha *= config.theta_alpha
    raise LineSearchFailure(f"no acceptable step after {MAX_BACKTRACKS} backtracks")


def trust_ratio(phi_before: float, phi_after: float, delta_l: float) -> float:
    if not delta_l > 0:
        raise ValueError("model reduction must be positive")
    return (phi_before - phi_after) / delta_l


def trust_update(delta: float, sigma: float, config: SolverConfig) -> float:
    if sigma > config.sigma_hi:
        return min(2.0 * delta, config.delta_max)
    if sigma < config.sigma_lo:
        return max(delta / 2.0, config.delta_min)
    return delta


def solve(problem: Problem, x0, config: SolverConfig = SolverConfig(),
          pivot_trace: Optional[TextIO] = None) -> SolveReport:
    x = np.array(x0, dtype=float).ravel()
    if x.size != problem.n or not np.all(np.isfinite(x)):
        raise ValueError("x0 must be a finite vector of the problem dimension")
    cache = EvaluationCache(problem)
    sub_params = SubproblemParams(config.control, config.max_pivots, config.exact)
    rho, delta = config.rho0, config.delta0
    lam_prev: Optional[np.ndarray] = None
    E0: Optional[tuple[float, float]] = None
    E_fea0 = 1.0
    trace: list[IterationRecord] = []
    subs: list[SubproblemResult] = []
    status, message = Status.ITER_LIMIT, ""
    total_pivots = 0
    kkt = np.inf
    ev = None

    for k in range(config.max_iter):
        gamma = next_gamma(k + 1, config.gamma0, config.theta_gamma)
        try:
            ev = cache.full(x)
            cache.clear_values()
            try:
                sub = solve_subproblem(ev, rho, gamma, delta, sub_params, lam_prev, pivot_trace)
            except SubproblemStalled as exc:
                total_pivots += exc.result.pivots
                delta = max(delta / 2.0, config.delta_min)
                log.info("subproblem stalled at k=%d, retrying with delta=%g", k, delta)
                sub = solve_subproblem(ev, rho, gamma, delta, sub_params, lam_prev, pivot_trace)
        except (EvaluationError, SubproblemStalled) as exc:
            status, message = Status.STALLED, str(exc)
            if isinstance(exc, SubproblemStalled):
                total_pivots += exc.result.pivots
            break
        subs.append(sub)
        total_pivots += sub.pivots

        d = sub.d
        v = merit.violation(ev)
        dl_fea = merit.model_reduction(ev, d, 0.0)
        rho_k = safeguard_rho(float(ev.g @ d), dl_fea, gamma, sub.rho_tilde, config.beta_l)
        rho_k = min(rho_k, sub.rho_tilde)
        dl_opt = merit.model_reduction(ev, d, rho_k)

        E_opt = merit.kkt_residual_opt(ev, sub.lam, rho_k)
        E_c = merit.complementarity_residual(ev, sub.lam)
        E_fea = merit.kkt_residual_fea(ev, sub.nu)
        E_c_nu = merit.complementarity_residual(ev, sub.nu)
        if E0 is None:
            E0 = (E_opt, E_c)
            E_fea0 = max(1.0, E_fea)
        kkt = merit.relative_kkt((E_opt, E_c), E0)
        phi = merit.penalty(ev.f, v, rho_k)

        def record(step, alpha=0.0, phi_new=phi, sigma=np.nan):
            trace.append(IterationRecord(
                k=k, x=x.copy(), f=ev.f, v=v, rho=rho_k, gamma=gamma, delta=delta, alpha=alpha,
                delta_l_opt=dl_opt, delta_l_fea=dl_fea, pivots=sub.pivots, E_opt=E_opt,
                E_fea=E_fea, E_c=E_c, kkt=kkt, step_type=step, d=d.copy(),
                rho_tilde=sub.rho_tilde, phi=phi, phi_new=phi_new, sigma=sigma,
                rho_reductions=sub.rho_reductions,
            ))

        rho, lam_prev = rho_k, sub.lam
        if kkt < config.kkt_tol and v < config.feas_tol:
            status = Status.KKT_SUCCESS
            record(StepType.TERMINAL)
            break
        # rho counts as zero once the objective term is below the stationarity tolerance
        rho_negligible = rho_k <= config.rho_min or rho_k * merit.dual_norm(ev.g) <= config.kkt_tol * E_fea0
        if (rho_negligible and v >= config.feas_tol
                and E_fea / E_fea0 < config.kkt_tol and E_c_nu < config.kkt_tol):
            status = Status.INFEASIBLE_STATIONARY
            record(StepType.TERMINAL)
            break
        if sub.null_step or not dl_opt > 0:
            record(StepType.NULL_STEP)
            continue

        try:
            f1, b1 = cache.values(x + d)
            phi1 = merit.penalty(f1, cache.violation_of(b1), rho_k)
            sigma = trust_ratio(phi, phi1, dl_opt)
            if sigma > config.sigma_hi:
                alpha, x_new, phi_new = 1.0, x + d, phi1
            else:
                alpha, x_new, _ = line_search(cache, x, d, rho_k, dl_opt, config, phi0=phi)
                fn, bn = cache.values(x_new)
                phi_new = merit.penalty(fn, cache.violation_of(bn), rho_k)
        except (EvaluationError, LineSearchFailure) as exc:
            status, message = Status.STALLED, str(exc)
            record(StepType.NULL_STEP)
            break
        record(StepType.ACCEPTED, alpha, phi_new, sigma)
        delta = trust_update(delta, sigma, config)
        x = x_new

    if ev is None or not np.array_equal(ev.x, x):
        try:
            ev = cache.full(x)
        except EvaluationError as exc:
            status, message = Status.STALLED, str(exc)
    return SolveReport(
        status=status, x=x, f=ev.f if ev is not None else np.nan,
        v=merit.violation(ev) if ev is not None else np.nan, rho=rho, kkt=float(kkt),
        trace=trace, n_iter=len(trace), n_pivots=total_pivots, n_f=cache.n_values,
        problem=problem.name, message=message, subproblems=subs,
    )
