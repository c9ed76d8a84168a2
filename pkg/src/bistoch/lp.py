"""Phase-I simplex for the feasibility problem ``E x = b, x >= 0``.

A dense tableau with anti-cycling pivot rules. The problems solved here
are small (at most a few thousand columns, under a hundred rows), with data
that are simple rationals, so a dense tableau is both fast enough and easy
to reason about. ``verify_solution`` re-checks any claimed solution with
fresh arithmetic so callers never have to trust the tableau.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionError, IterationLimitError

DEFAULT_TOL = 1e-9
# reduced costs and pivot entries below this are treated as zero
_PIVOT_EPS = 1e-11


@dataclass(frozen=True)
class FeasibilityProblem:
    E: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        E = np.atleast_2d(np.asarray(self.E, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if E.shape[0] != b.shape[0]:
            raise DimensionError(f"E has {E.shape[0]} rows but b has {b.shape[0]} entries")
        if not (np.all(np.isfinite(E)) and np.all(np.isfinite(b))):
            raise ValueError("problem data must be finite")
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "b", b)

    @property
    def num_vars(self) -> int:
        return self.E.shape[1]

    @property
    def num_eq(self) -> int:
        return self.E.shape[0]

    def to_json(self) -> str:
        return json.dumps({"E": self.E.tolist(), "b": self.b.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "FeasibilityProblem":
        obj = json.loads(text)
        return cls(np.array(obj["E"], dtype=float), np.array(obj["b"], dtype=float))


@dataclass(frozen=True)
class FeasibilityResult:
    status: str  # "feasible" or "infeasible"
    x: np.ndarray | None
    residual: float
    phase1_objective: float
    iterations: int = field(default=0, compare=False)

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def solve_feasibility(p: FeasibilityProblem, tol: float = DEFAULT_TOL,
                      max_iter: int | None = None, pricing: str = "dantzig") -> FeasibilityResult:
    """Find ``x >= 0`` with ``E x = b`` or report that none exists.

    The phase-I problem minimises the sum of artificial variables; the
    system is declared feasible iff that optimum is at most ``tol``.

    ``pricing="dantzig"`` enters the most negative reduced cost and breaks
    ratio-test ties lexicographically, which rules out cycling and avoids
    the long degenerate stalls plain Bland pricing hits on moment LPs with
    right-hand side ``e_1``. ``pricing="bland"`` uses the smallest-index
    rule for both choices. Remaining ties always go to the smallest basic
    index.

    Raises
    ------
    IterationLimitError
        If the pivot count exceeds ``max_iter`` (default
        ``50 * (num_vars + num_eq)``).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if pricing not in ("dantzig", "bland"):
        raise ValueError(f"unknown pricing rule {pricing!r}")
    m, N = p.E.shape
    if max_iter is None:
        max_iter = 50 * (N + m)

    sign = np.where(p.b < 0, -1.0, 1.0)
    T = np.zeros((m, N + m + 1))
    T[:, :N] = p.E * sign[:, None]
    T[:, N:N + m] = np.eye(m)
    T[:, -1] = p.b * sign
    basis = np.arange(N, N + m)
    # lexicographic keys: right-hand side, then the basis-inverse columns
    lex_cols = [N + m] + list(range(N, N + m))

    # phase-I cost is 1 on each artificial; reduced costs for the all-artificial basis
    rc = np.concatenate([-T[:, :N].sum(axis=0), np.zeros(m)])

    it = 0
    while True:
        candidates = np.flatnonzero(rc < -_PIVOT_EPS)
        if candidates.size == 0:
            break
        if it >= max_iter:
            raise IterationLimitError(f"simplex exceeded {max_iter} pivots")
        if pricing == "bland":
            j = candidates[0]
        else:
            j = candidates[np.argmin(rc[candidates])]
        col = T[:, j]
        # phase I is bounded below by zero, so an entering column always has a pivot row
        rows = np.flatnonzero(col > _PIVOT_EPS)
        keys = lex_cols if pricing == "dantzig" else lex_cols[:1]
        for k in keys:
            ratios = T[rows, k] / col[rows]
            best = ratios.min()
            rows = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            if rows.size == 1:
                break
        r = rows[np.argmin(basis[rows])]
        T[r] /= T[r, j]
        factor = T[:, j].copy()
        factor[r] = 0.0
        T -= np.outer(factor, T[r])
        rc -= rc[j] * T[r, :N + m]
        basis[r] = j
        it += 1

    values = np.zeros(N + m)
    values[basis] = T[:, -1]
    obj = float(values[N:].sum())
    x = values[:N]
    x = np.where(x < 0, 0.0, x)
    residual = float(np.max(np.abs(p.E @ x - p.b))) if m else 0.0
    if obj <= tol and residual <= tol:
        return FeasibilityResult("feasible", x, residual, obj, it)
    return FeasibilityResult("infeasible", None, residual, obj, it)


def verify_solution(p: FeasibilityProblem, x, tol: float = DEFAULT_TOL) -> bool:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != p.num_vars:
        raise DimensionError(f"x has {x.shape[0]} entries, problem has {p.num_vars} variables")
    if x.size and x.min() < -tol:
        return False
    if p.num_eq == 0:
        return True
    return bool(np.max(np.abs(p.E @ x - p.b)) <= tol)
