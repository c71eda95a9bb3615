"""Nonlinear program definition and first-order evaluation."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

ScalarFn = Callable[[np.ndarray], float]
GradFn = Callable[[np.ndarray], np.ndarray]


class Kind(enum.Enum):
    EQUALITY = "eq"
    INEQUALITY = "ineq"


class EvaluationError(RuntimeError):
    """A user callable returned a non-finite value or a badly shaped gradient."""

    def __init__(self, name: str, x: np.ndarray, what: str = "non-finite value"):
        self.name = name
        self.x = np.array(x, dtype=float)
        super().__init__(f"{what} from {name!r} at x={self.x.tolist()}")


@dataclass(frozen=True)
class Constraint:
    fun: ScalarFn
    grad: GradFn
    kind: Kind
    name: str = ""


@dataclass(frozen=True)
class Problem:
    """min f(x) s.t. c_i(x) = 0 (equality), c_i(x) <= 0 (inequality).

    Constraint order is fixed at construction; multiplier vectors are indexed
    in the same order.
    """

    n: int
    objective: ScalarFn
    gradient: GradFn
    constraints: tuple[Constraint, ...] = ()
    name: str = "problem"
    known_optimum: Optional[float] = None
    optimum_source: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be positive")
        object.__setattr__(self, "constraints", tuple(self.constraints))

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def kinds(self) -> tuple[Kind, ...]:
        return tuple(c.kind for c in self.constraints)


@dataclass(frozen=True, eq=False)
class Evaluation:
    """Values and gradients at a point: f, g = grad f, b = c(x), A = Jacobian."""

    x: np.ndarray
    f: float
    g: np.ndarray
    b: np.ndarray
    A: np.ndarray
    kinds: tuple[Kind, ...]
    eq_mask: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def m(self) -> int:
        return self.b.size

    @classmethod
    def from_arrays(cls, x, f, g, b, A, kinds: Sequence[Kind]) -> "Evaluation":
        """Build an evaluation directly from subproblem data (no callables)."""
        x = np.asarray(x, dtype=float).ravel()
        g = np.asarray(g, dtype=float).ravel()
        b = np.asarray(b, dtype=float).ravel()
        A = np.asarray(A, dtype=float).reshape(b.size, g.size)
        kinds = tuple(kinds)
        if len(kinds) != b.size:
            raise ValueError("one kind per constraint value required")
        eq_mask = np.array([k is Kind.EQUALITY for k in kinds], dtype=bool)
        for arr in (x, g, b, A):
            arr.setflags(write=False)
        eq_mask.setflags(write=False)
        return cls(x=x, f=float(f), g=g, b=b, A=A, kinds=kinds, eq_mask=eq_mask)


def _finite_scalar(fn, x, name):
    try:
        val = float(fn(x))
    except (ArithmeticError, ValueError) as exc:
        raise EvaluationError(name, x, f"exception {exc!r}") from exc
    if not np.isfinite(val):
        raise EvaluationError(name, x)
    return val


def _finite_vector(fn, x, n, name):
    val = np.asarray(fn(x), dtype=float).ravel()
    if val.size != n:
        raise EvaluationError(name, x, f"gradient of size {val.size} (expected {n})")
    if not np.all(np.isfinite(val)):
        raise EvaluationError(name, x)
    return val


def _constraint_name(problem: Problem, i: int) -> str:
    return problem.constraints[i].name or f"c{i}"


def evaluate_values(problem: Problem, x) -> tuple[float, np.ndarray]:
    """Only f and c at x; used by the line search."""
    x = np.asarray(x, dtype=float)
    f = _finite_scalar(problem.objective, x, "objective")
    b = np.array(
        [_finite_scalar(c.fun, x, _constraint_name(problem, i)) for i, c in enumerate(problem.constraints)],
        dtype=float,
    )
    return f, b


def evaluate(problem: Problem, x, values: Optional[tuple[float, np.ndarray]] = None) -> Evaluation:
    """All first-order data at x; ``values`` reuses an earlier (f, c(x)) evaluation."""
    x = np.array(x, dtype=float).ravel()
    if x.size != problem.n:
        raise ValueError(f"x has dimension {x.size}, problem has {problem.n}")
    f, b = values if values is not None else evaluate_values(problem, x)
    g = _finite_vector(problem.gradient, x, problem.n, "objective")
    rows = [
        _finite_vector(c.grad, x, problem.n, _constraint_name(problem, i))
        for i, c in enumerate(problem.constraints)
    ]
    A = np.vstack(rows) if rows else np.zeros((0, problem.n))
    return Evaluation.from_arrays(x, f, g, b, A, problem.kinds)


class EvaluationCache:
    """Memoizes evaluations by point for the duration of one solve.

    Counts objective/constraint value evaluations (the "# f" statistic) and
    gradient evaluations separately.
    """

    def __init__(self, problem: Problem):
        self.problem = problem
        self._full: dict[bytes, Evaluation] = {}
        self._values: dict[bytes, tuple[float, np.ndarray]] = {}
        self.n_values = 0
        self.n_gradients = 0
        self._eq = np.array([k is Kind.EQUALITY for k in problem.kinds], dtype=bool)

    @staticmethod
    def _key(x) -> bytes:
        return np.ascontiguousarray(x, dtype=float).tobytes()

    def values(self, x) -> tuple[float, np.ndarray]:
        key = self._key(x)
        if key in self._full:
            ev = self._full[key]
            return ev.f, ev.b
        if key not in self._values:
            self._values[key] = evaluate_values(self.problem, x)
            self.n_values += 1
        return self._values[key]

    def full(self, x) -> Evaluation:
        key = self._key(x)
        if key not in self._full:
            values = self._values.pop(key, None)
            if values is None:
                self.n_values += 1
            self._full[key] = evaluate(self.problem, x, values)
            self.n_gradients += 1
        return self._full[key]

    def violation_of(self, b) -> float:
        b = np.asarray(b, dtype=float)
        return float(np.sum(np.abs(b[self._eq])) + np.sum(np.maximum(b[~self._eq], 0.0)))

    def clear_values(self):
        self._values.clear()


def check_gradients(problem: Problem, x, h: float = 1e-6) -> dict[str, float]:
    """Worst relative error of each supplied gradient against central differences.

    The error for a function is max_k |fd_k - g_k| / max(1, |fd_k|).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.array(x, dtype=float).ravel()
    funcs = [("objective", problem.objective, problem.gradient)]
    funcs += [(_constraint_name(problem, i), c.fun, c.grad) for i, c in enumerate(problem.constraints)]
    out = {}
    for name, fn, grad in funcs:
        g = _finite_vector(grad, x, problem.n, name)
        fd = np.empty(problem.n)
        for k in range(problem.n):
            e = np.zeros(problem.n)
            e[k] = h
            fp = _finite_scalar(fn, x + e, name)
            fm = _finite_scalar(fn, x - e, name)
            fd[k] = (fp - fm) / (2 * h)
        out[name] = float(np.max(np.abs(fd - g) / np.maximum(1.0, np.abs(fd))))
    return out
