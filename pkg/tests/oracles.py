"""Independent reference computations used by the tests.

Nothing here imports the simplex or the subproblem solver; each oracle
recomputes its answer by brute force from the definitions.
"""

from __future__ import annotations

import itertools

import numpy as np

from inexact_slp.problem import Evaluation, Kind


def random_evaluation(rng: np.random.Generator, n: int, m: int, scale: float = 2.0,
                      eq_prob: float = 0.5) -> Evaluation:
    g = rng.uniform(-scale, scale, n)
    A = rng.uniform(-scale, scale, (m, n))
    b = rng.uniform(-scale, scale, m)
    kinds = [Kind.EQUALITY if rng.random() < eq_prob else Kind.INEQUALITY for _ in range(m)]
    return Evaluation.from_arrays(np.zeros(n), 0.0, g, b, A, kinds)


def random_dual(rng: np.random.Generator, ev: Evaluation) -> np.ndarray:
    lo = np.where(ev.eq_mask, -1.0, 0.0)
    return rng.uniform(lo, 1.0)


def model_value(ev: Evaluation, d, rho: float) -> float:
    """l(d; rho) written out term by term."""
    total = rho * float(np.dot(ev.g, d))
    for i in range(ev.m):
        z = ev.b[i] + float(np.dot(ev.A[i], d))
        total += abs(z) if ev.kinds[i] is Kind.EQUALITY else max(z, 0.0)
    return total


def vertex_min(ev: Evaluation, rho: float, delta: float, tol: float = 1e-9) -> tuple[float, np.ndarray]:
    """Minimum of l(.; rho) over the box by enumerating arrangement vertices.

    l is convex and piecewise linear on the cells cut out by the hyperplanes
    a_i.d + b_i = 0 and the box faces d_k = +-delta, so its minimum over the
    box sits at a point where n independent hyperplanes meet.
    """
    n = ev.n
    planes = [(ev.A[i], -ev.b[i]) for i in range(ev.m)]
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        planes.append((e, delta))
        planes.append((e, -delta))
    best, arg = np.inf, None
    for subset in itertools.combinations(range(len(planes)), n):
        M = np.array([planes[j][0] for j in subset])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        d = np.linalg.solve(M, np.array([planes[j][1] for j in subset]))
        if np.max(np.abs(d)) > delta * (1 + tol):
            continue
        val = model_value(ev, d, rho)
        if val < best:
            best, arg = val, d
    return best, arg


def basis_enumeration(c, A, b, tol: float = 1e-9) -> float:
    """Optimal value of min c.x s.t. Ax = b, x >= 0 over all basic feasible solutions (inf if none)."""
    A = np.asarray(A, float)
    m, n = A.shape
    best = np.inf
    for cols in itertools.combinations(range(n), m):
        B = A[:, cols]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        xb = np.linalg.solve(B, b)
        if np.any(xb < -tol):
            continue
        best = min(best, float(np.dot(np.asarray(c)[list(cols)], xb)))
    return best


def dual_value(ev: Evaluation, lam, rho: float, delta: float) -> float:
    """p(lam; rho) from the Lagrangian: min over the box of rho g.d + sum lam_i (a_i.d + b_i)."""
    w = rho * ev.g + ev.A.T @ np.asarray(lam)
    # a linear function on a box is minimized coordinate-wise at -delta*sign(w)
    d = -delta * np.sign(w)
    return float(w @ d + ev.b @ lam)


def finite_difference(fn, x, h=1e-6):
    x = np.asarray(x, float)
    out = np.empty(x.size)
    for k in range(x.size):
        e = np.zeros(x.size)
        e[k] = h
        out[k] = (fn(x + e) - fn(x - e)) / (2 * h)
    return out
