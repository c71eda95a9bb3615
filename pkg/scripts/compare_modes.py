#!/usr/bin/env python3
"""Pivot economy of the inexact subproblem solve against solving every LP to optimality.

Prints per-problem iterations and pivots for both modes, the relative pivot
change, and the medians over the feasible catalog.
"""

import numpy as np

from inexact_slp import SolverConfig, catalog, solve


def main():
    base = SolverConfig()
    rows = []
    for entry in catalog():
        if not entry.feasible:
            continue
        inexact = solve(entry.problem, entry.x0, base)
        exact = solve(entry.problem, entry.x0, base.exact_mode())
        rows.append((entry.name, inexact, exact))

    print(f"{'problem':<8} {'iter':>5} {'piv':>5} | {'iter*':>5} {'piv*':>5} | {'change':>7}")
    for name, a, b in rows:
        change = 100.0 * (a.n_pivots - b.n_pivots) / max(b.n_pivots, 1)
        print(f"{name:<8} {a.n_iter:>5} {a.n_pivots:>5} | {b.n_iter:>5} {b.n_pivots:>5} | {change:>6.1f}%")
    med = lambda xs: float(np.median(xs))
    print(f"median total pivots: inexact {med([a.n_pivots for _, a, _ in rows]):.1f}, "
          f"exact {med([b.n_pivots for _, _, b in rows]):.1f}")
    print(f"median pivots/iteration: inexact {med([a.n_pivots / a.n_iter for _, a, _ in rows]):.2f}, "
          f"exact {med([b.n_pivots / b.n_iter for _, _, b in rows]):.2f}")


if __name__ == "__main__":
    main()
