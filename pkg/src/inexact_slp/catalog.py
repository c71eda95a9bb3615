"""Desk-scale problems with analytic reference optima.

Every ``ref_source`` string says where the reference value comes from:
"analytic" values are worked out by hand (Lagrange conditions at the stated
point); the test suite re-checks each against an independent local solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .problem import Constraint, Kind, Problem
from .solver import Status

EQ, INEQ = Kind.EQUALITY, Kind.INEQUALITY


@dataclass(frozen=True)
class CatalogEntry:
    problem: Problem
    x0: np.ndarray
    expected_status: Status
    reference_f: Optional[float] = None
    reference_v: Optional[float] = None
    reference_x: Optional[np.ndarray] = None
    ref_source: str = ""
    tags: frozenset = field(default_factory=frozenset)

    @property
    def name(self) -> str:
        return self.problem.name

    @property
    def feasible(self) -> bool:
        return "infeasible" not in self.tags


def _arr(*v):
    return np.array(v, dtype=float)


def _quadratic():
    return CatalogEntry(
        Problem(3, lambda x: float(x @ x), lambda x: 2 * x, name="QUAD"),
        _arr(1.0, -2.0, 0.5), Status.KKT_SUCCESS, 0.0, 0.0, _arr(0, 0, 0),
        "analytic: minimum of ||x||^2", frozenset({"feasible", "unconstrained"}),
    )


def _hs6():
    return CatalogEntry(
        Problem(
            2, lambda x: (1 - x[0]) ** 2, lambda x: _arr(-2 * (1 - x[0]), 0.0),
            [Constraint(lambda x: 10 * (x[1] - x[0] ** 2), lambda x: _arr(-20 * x[0], 10.0), EQ)],
            name="HS6",
        ),
        _arr(-1.2, 1.0), Status.KKT_SUCCESS, 0.0, 0.0, _arr(1, 1),
        "analytic: f >= 0 with equality at (1, 1)", frozenset({"feasible"}),
    )


def _disk():
    return CatalogEntry(
        Problem(
            2, lambda x: x[0] + x[1], lambda x: _arr(1, 1),
            [Constraint(lambda x: x[0] ** 2 + x[1] ** 2 - 2, lambda x: 2 * x, INEQ)],
            name="DISK",
        ),
        _arr(0.5, 1.0), Status.KKT_SUCCESS, -2.0, 0.0, _arr(-1, -1),
        "analytic: 1 + 2 mu x_i = 0 on the circle gives x = (-1, -1), mu = 1/2",
        frozenset({"feasible"}),
    )


def _infeasible():
    return CatalogEntry(
        Problem(
            1, lambda x: x[0], lambda x: _arr(1.0),
            [Constraint(lambda x: x[0] ** 2 + 1, lambda x: 2 * x, INEQ)],
            name="INFEAS",
        ),
        _arr(3.0), Status.INFEASIBLE_STATIONARY, None, 1.0, _arr(0.0),
        "analytic: v(x) = x^2 + 1 is minimized at x = 0 with v = 1", frozenset({"infeasible"}),
    )


def _degenerate():
    # both constraints vanish at the start point (1, 1)
    return CatalogEntry(
        Problem(
            2, lambda x: (x[0] + 0.5) ** 2 + (x[1] + 0.5) ** 2, lambda x: 2 * (x + 0.5),
            [
                Constraint(lambda x: x[0] - x[1], lambda x: _arr(1, -1), EQ),
                Constraint(lambda x: x[0] ** 2 + x[1] ** 2 - 2, lambda x: 2 * x, INEQ),
            ],
            name="DEGEN",
        ),
        _arr(1.0, 1.0), Status.KKT_SUCCESS, 0.0, 0.0, _arr(-0.5, -0.5),
        "analytic: unconstrained minimizer (-1/2, -1/2) is feasible", frozenset({"feasible", "degenerate"}),
    )


def _hs7():
    return CatalogEntry(
        Problem(
            2, lambda x: math.log(1 + x[0] ** 2) - x[1],
            lambda x: _arr(2 * x[0] / (1 + x[0] ** 2), -1.0),
            [Constraint(lambda x: (1 + x[0] ** 2) ** 2 + x[1] ** 2 - 4,
                        lambda x: _arr(4 * x[0] * (1 + x[0] ** 2), 2 * x[1]), EQ)],
            name="HS7",
        ),
        _arr(2.0, 2.0), Status.KKT_SUCCESS, -math.sqrt(3), 0.0, _arr(0, math.sqrt(3)),
        "analytic: x1 = 0, x2 = sqrt(3), multiplier 1/(2 sqrt 3)", frozenset({"feasible", "hs"}),
    )


def _hs8():
    return CatalogEntry(
        Problem(
            2, lambda x: -1.0, lambda x: np.zeros(2),
            [
                Constraint(lambda x: x[0] ** 2 + x[1] ** 2 - 25, lambda x: 2 * x, EQ),
                Constraint(lambda x: x[0] * x[1] - 9, lambda x: _arr(x[1], x[0]), EQ),
            ],
            name="HS8",
        ),
        _arr(2.0, 1.0), Status.KKT_SUCCESS, -1.0, 0.0,
        _arr(math.sqrt((25 + math.sqrt(301)) / 2), math.sqrt((25 - math.sqrt(301)) / 2)),
        "analytic: constant objective; feasible points solve x1^2 + x2^2 = 25, x1 x2 = 9",
        frozenset({"feasible", "hs", "zero-gradient"}),
    )


def _hs10():
    return CatalogEntry(
        Problem(
            2, lambda x: x[0] - x[1], lambda x: _arr(1, -1),
            [Constraint(lambda x: 3 * x[0] ** 2 - 2 * x[0] * x[1] + x[1] ** 2 - 1,
                        lambda x: _arr(6 * x[0] - 2 * x[1], -2 * x[0] + 2 * x[1]), INEQ)],
            name="HS10",
        ),
        _arr(-10.0, 10.0), Status.KKT_SUCCESS, -1.0, 0.0, _arr(0, 1),
        "analytic: convex ellipse, multiplier 1/2 at (0, 1)", frozenset({"feasible", "hs"}),
    )


def _hs12():
    return CatalogEntry(
        Problem(
            2, lambda x: 0.5 * x[0] ** 2 + x[1] ** 2 - x[0] * x[1] - 7 * x[0] - 7 * x[1],
            lambda x: _arr(x[0] - x[1] - 7, 2 * x[1] - x[0] - 7),
            [Constraint(lambda x: 4 * x[0] ** 2 + x[1] ** 2 - 25, lambda x: _arr(8 * x[0], 2 * x[1]), INEQ)],
            name="HS12",
        ),
        _arr(0.0, 0.0), Status.KKT_SUCCESS, -30.0, 0.0, _arr(2, 3),
        "analytic: multiplier 1/2 at (2, 3)", frozenset({"feasible", "hs"}),
    )


def _hs14():
    s7 = math.sqrt(7)
    return CatalogEntry(
        Problem(
            2, lambda x: (x[0] - 2) ** 2 + (x[1] - 1) ** 2, lambda x: _arr(2 * (x[0] - 2), 2 * (x[1] - 1)),
            [
                Constraint(lambda x: x[0] - 2 * x[1] + 1, lambda x: _arr(1, -2), EQ),
                Constraint(lambda x: x[0] ** 2 / 4 + x[1] ** 2 - 1, lambda x: _arr(x[0] / 2, 2 * x[1]), INEQ),
            ],
            name="HS14",
        ),
        _arr(2.0, 2.0), Status.KKT_SUCCESS, 9 - 23 * s7 / 8, 0.0, _arr((s7 - 1) / 2, (s7 + 1) / 4),
        "analytic: line x1 = 2 x2 - 1 meets the ellipse at x2 = (1 + sqrt 7)/4",
        frozenset({"feasible", "hs"}),
    )


def _hs21():
    cons = [
        Constraint(lambda x: -10 * x[0] + x[1] + 10, lambda x: _arr(-10, 1), INEQ),
        Constraint(lambda x: 2 - x[0], lambda x: _arr(-1, 0), INEQ),
        Constraint(lambda x: x[0] - 50, lambda x: _arr(1, 0), INEQ),
        Constraint(lambda x: -50 - x[1], lambda x: _arr(0, -1), INEQ),
        Constraint(lambda x: x[1] - 50, lambda x: _arr(0, 1), INEQ),
    ]
    return CatalogEntry(
        Problem(2, lambda x: 0.01 * x[0] ** 2 + x[1] ** 2 - 100, lambda x: _arr(0.02 * x[0], 2 * x[1]),
                cons, name="HS21"),
        _arr(-1.0, -1.0), Status.KKT_SUCCESS, -99.96, 0.0, _arr(2, 0),
        "analytic: bound x1 >= 2 active, x2 = 0", frozenset({"feasible", "hs", "bounds"}),
    )


def _hs28():
    return CatalogEntry(
        Problem(
            3, lambda x: (x[0] + x[1]) ** 2 + (x[1] + x[2]) ** 2,
            lambda x: _arr(2 * (x[0] + x[1]), 2 * (x[0] + x[1]) + 2 * (x[1] + x[2]), 2 * (x[1] + x[2])),
            [Constraint(lambda x: x[0] + 2 * x[1] + 3 * x[2] - 1, lambda x: _arr(1, 2, 3), EQ)],
            name="HS28",
        ),
        _arr(-4.0, 1.0, 1.0), Status.KKT_SUCCESS, 0.0, 0.0, _arr(0.5, -0.5, 0.5),
        "analytic: f >= 0, zero at (1/2, -1/2, 1/2) which is feasible", frozenset({"feasible", "hs"}),
    )


def _hs35():
    cons = [Constraint(lambda x: x[0] + x[1] + 2 * x[2] - 3, lambda x: _arr(1, 1, 2), INEQ)]
    for i in range(3):
        e = np.zeros(3)
        e[i] = -1.0
        cons.append(Constraint(lambda x, i=i: -x[i], lambda x, e=e: e.copy(), INEQ))
    return CatalogEntry(
        Problem(
            3,
            lambda x: 9 - 8 * x[0] - 6 * x[1] - 4 * x[2] + 2 * x[0] ** 2 + 2 * x[1] ** 2 + x[2] ** 2
            + 2 * x[0] * x[1] + 2 * x[0] * x[2],
            lambda x: _arr(-8 + 4 * x[0] + 2 * x[1] + 2 * x[2], -6 + 4 * x[1] + 2 * x[0], -4 + 2 * x[2] + 2 * x[0]),
            cons, name="HS35",
        ),
        _arr(0.5, 0.5, 0.5), Status.KKT_SUCCESS, 1 / 9, 0.0, _arr(4 / 3, 7 / 9, 4 / 9),
        "analytic: convex QP, multiplier 2/9 on the linear constraint", frozenset({"feasible", "hs"}),
    )


_BUILDERS = (_quadratic, _hs6, _disk, _infeasible, _degenerate, _hs7, _hs8, _hs10, _hs12, _hs14,
             _hs21, _hs28, _hs35)


def catalog() -> list[CatalogEntry]:
    return [build() for build in _BUILDERS]


def get(name: str) -> CatalogEntry:
    for entry in catalog():
        if entry.name.lower() == name.lower():
            return entry
    raise KeyError(name)


def names() -> list[str]:
    return [entry.name for entry in catalog()]
