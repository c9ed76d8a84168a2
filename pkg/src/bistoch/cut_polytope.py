"""Membership in the convex hull of real rank-one correlation matrices.

The real rank-one correlation matrices are exactly ``s s^T`` for sign
vectors ``s``, so membership is an LP over sign vectors. A feasible
distribution converts into a subset function ``f`` (a mixture of Walsh
characters) whose Walsh transform is nonnegative; ``verify_certificate`` checks
that certificate on its own, with a fast Walsh-Hadamard transform, and
never looks at the LP.

Subsets of ``{1..n}`` are indexed by integers in binary-counter order:
bit ``j`` set means element ``j + 1`` is present.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import DimensionError, ResourceCapError
from .linalg_core import as_square, child_seed
from .lp import FeasibilityProblem, solve_feasibility, verify_solution

MAX_CUT_DIM = 12
DEFAULT_TOL = 1e-9
_NOISE = 1e-14


class ShrinkResult(NamedTuple):
    t_max: float
    certificate: "CutDistribution"


@dataclass(frozen=True)
class CutDistribution:
    """Probability weights over sign vectors, keyed like ``"+-+"``.

    Solvers emit canonical keys (first sign ``+``); any key is accepted, so a
    distribution over all subsets can be written down directly.
    """

    n: int
    weights: dict[str, float]

    def __post_init__(self):
        for key, w in self.weights.items():
            if len(key) != self.n or set(key) - {"+", "-"}:
                raise ValueError(f"bad sign key {key!r} for n = {self.n}")
            if not w >= 0:
                raise ValueError(f"negative weight {w} on {key}")
        if abs(sum(self.weights.values()) - 1) > 1e-9:
            raise ValueError("weights must sum to one")

    def signs(self) -> list[tuple[np.ndarray, float]]:
        return [(np.array([1.0 if c == "+" else -1.0 for c in key]), w)
                for key, w in self.weights.items()]

    def correlation(self) -> np.ndarray:
        C = np.zeros((self.n, self.n))
        for s, w in self.signs():
            C += w * np.outer(s, s)
        return C

    def to_json(self) -> dict:
        return {"n": self.n,
                "weights": [{"signs": k, "w": w} for k, w in sorted(self.weights.items())]}

    @classmethod
    def from_json(cls, obj: dict) -> "CutDistribution":
        return cls(int(obj["n"]), {d["signs"]: float(d["w"]) for d in obj["weights"]})


@dataclass(frozen=True)
class WalshCertificate:
    """A real function on the ``2^n`` subsets of ``{1..n}``."""

    n: int
    f: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float).reshape(-1)
        if f.shape[0] != 1 << self.n:
            raise DimensionError(f"need {1 << self.n} values, got {f.shape[0]}")
        object.__setattr__(self, "f", f)

    def value(self, subset) -> float:
        return float(self.f[subset_index(subset)])

    def walsh(self) -> np.ndarray:
        return fwht(self.f)

    def to_json(self) -> dict:
        return {"n": self.n, "f": self.f.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "WalshCertificate":
        return cls(int(obj["n"]), np.array(obj["f"], dtype=float))


@dataclass(frozen=True)
class RhoEstimate:
    n: int
    rank_cap: int
    lower: float
    upper: float

    def to_json(self) -> dict:
        return {"n": self.n, "rank_cap": self.rank_cap, "lower": self.lower, "upper": self.upper}


def subset_index(subset) -> int:
    """Binary-counter index of a subset of ``{1..n}`` (1-based elements)."""
    idx = 0
    for e in subset:
        idx |= 1 << (int(e) - 1)
    return idx


def fwht(values) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform, ``out[S] = sum_T (-1)^|S & T| v[T]``."""
    a = np.array(values, dtype=float)
    size = a.shape[0]
    if size & (size - 1):
        raise DimensionError("length must be a power of two")
    h = 1
    while h < size:
        a = a.reshape(-1, 2, h)
        a = np.stack([a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]], axis=1)
        h *= 2
    return a.reshape(size)


def sign_vectors(n: int) -> np.ndarray:
    """All ``2^(n-1)`` sign vectors with first entry +1, one per row.

    Row ``a`` has ``s_(j+1) = -1`` exactly when bit ``j`` of ``a`` is set.
    """
    a = np.arange(1 << (n - 1))
    S = np.ones((a.shape[0], n))
    for j in range(n - 1):
        S[(a >> j) & 1 == 1, j + 1] = -1.0
    return S


def sign_key(s) -> str:
    return "".join("+" if x > 0 else "-" for x in s)


def validate_correlation(C, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return ``C`` as a float array, or raise if it is not a real correlation matrix."""
    C = np.real_if_close(as_square(C, "C"))
    if np.iscomplexobj(C):
        raise ValueError("correlation matrix must be real")
    C = np.asarray(C, dtype=float)
    if np.max(np.abs(C - C.T)) > tol:
        raise ValueError("correlation matrix must be symmetric")
    if np.max(np.abs(np.diag(C) - 1)) > tol:
        raise ValueError("correlation matrix must have unit diagonal")
    if np.linalg.eigvalsh((C + C.T) / 2)[0] < -tol:
        raise ValueError("correlation matrix must be positive semidefinite")
    return C


def cut_problem(C) -> tuple[FeasibilityProblem, np.ndarray]:
    """Moment LP: weights on canonical sign vectors matching every ``c_ij``, ``i < j``."""
    n = C.shape[0]
    S = sign_vectors(n)
    iu, ju = np.triu_indices(n, 1)
    E = np.vstack([np.ones((1, S.shape[0])), (S[:, iu] * S[:, ju]).T])
    b = np.concatenate([[1.0], C[iu, ju]])
    return FeasibilityProblem(E, b), S


def cut_membership(C, tol: float = DEFAULT_TOL) -> CutDistribution | None:
    """Distribution over sign vectors reproducing ``C``, or None if ``C`` is outside the hull."""
    C = validate_correlation(C)
    n = C.shape[0]
    if n > MAX_CUT_DIM:
        raise ResourceCapError(f"cut LP capped at n = {MAX_CUT_DIM}")
    problem, S = cut_problem(C)
    res = solve_feasibility(problem, tol)
    if not res.feasible:
        return None
    if not verify_solution(problem, res.x, 10 * tol):
        raise RuntimeError("LP returned a solution that fails re-verification")
    # entries at round-off level are artefacts of the final pivots
    weights = {sign_key(s): float(w) for s, w in zip(S, res.x) if w > _NOISE}
    return CutDistribution(n, weights)


def certificate_from_distribution(p: CutDistribution) -> WalshCertificate:
    """``f(T) = sum_A p(A) (-1)^|A & T|``, with ``A`` the set of negative signs."""
    mass = np.zeros(1 << p.n)
    for key, w in p.weights.items():
        A = [i + 1 for i, c in enumerate(key) if c == "-"]
        mass[subset_index(A)] += w
    return WalshCertificate(p.n, fwht(mass))


def distribution_from_certificate(f: WalshCertificate) -> np.ndarray:
    """Inverse of ``certificate_from_distribution``: subset-indexed masses ``fwht(f) / 2^n``."""
    return f.walsh() / (1 << f.n)


def verify_certificate(f: WalshCertificate, C, tol: float = DEFAULT_TOL) -> bool:
    """Check the three certificate conditions for ``C`` directly."""
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    if f.n != n:
        raise DimensionError(f"certificate is for n = {f.n}, matrix has n = {n}")
    if abs(f.f[0] - 1.0) > tol:
        return False
    for i in range(n):
        for j in range(i + 1, n):
            if abs(f.f[(1 << i) | (1 << j)] - C[i, j]) > tol:
                return False
    return bool(f.walsh().min() >= -tol)


def frame_certificate(A_factor, tol: float = 1e-9) -> WalshCertificate:
    """Certificate for ``C/r + (r-1)/r I`` where ``C = A^T A`` and ``A`` is ``r x n``.

    ``f(T) = (1/r) sum_i prod_{j in T} a_ij``; its Walsh transform is
    ``(1/r) sum_i prod_j (1 +/- a_ij)``, nonnegative because every
    ``|a_ij| <= 1``.
    """
    A = np.atleast_2d(np.asarray(A_factor, dtype=float))
    r, n = A.shape
    norms = np.linalg.norm(A, axis=0)
    if np.max(np.abs(norms - 1)) > tol:
        raise ValueError("factor columns must have unit Euclidean norm")
    if np.max(np.abs(A)) > 1 + tol:
        raise ValueError("factor entries must lie in [-1, 1]")
    g = np.zeros(1 << n)
    for row in A:
        vals = np.ones(1)
        for a in row:
            vals = np.concatenate([vals, vals * a])
        g += vals
    return WalshCertificate(n, g / r)


def frame_target(A_factor) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A_factor, dtype=float))
    r, n = A.shape
    return (A.T @ A) / r + (r - 1) / r * np.eye(n)


def cosine_correlation(m: int) -> np.ndarray:
    """Gram matrix of ``m`` equally spaced unit vectors in the plane."""
    if m < 1:
        raise ValueError("m must be positive")
    j = np.arange(m)
    return np.cos(2 * np.pi * (j[:, None] - j[None, :]) / m)


def shrink(C, t: float) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    return t * C + (1 - t) * np.eye(C.shape[0])


def rho_bisection(C, resolution: float = 1e-6, tol: float = DEFAULT_TOL) -> ShrinkResult:
    """Largest ``t`` (to ``resolution``) with ``t C + (1-t) I`` in the rank-one hull.

    The identity is in the hull and the hull is convex, so feasibility is
    monotone in ``t`` and bisection is valid.
    """
    C = validate_correlation(C)
    top = cut_membership(C, tol)
    if top is not None:
        return ShrinkResult(1.0, top)
    lo, hi = 0.0, 1.0
    cert = cut_membership(np.eye(C.shape[0]), tol)
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        d = cut_membership(shrink(C, mid), tol)
        if d is None:
            hi = mid
        else:
            lo, cert = mid, d
    return ShrinkResult(lo, cert)


def triangle_bound(C) -> float:
    """Largest ``t`` allowed by the triangle facets for ``t C + (1-t) I``.

    Every ``s s^T`` satisfies ``s_i s_j + s_i s_k + s_j s_k >= -1`` and the
    three variants with two signs flipped, so any member of the hull does
    too. Shrinking toward ``I`` scales the off-diagonals by ``t``.
    """
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    bound = 1.0
    for i, j, k in itertools.combinations(range(n), 3):
        a, b, c = C[i, j], C[i, k], C[j, k]
        for total in (a + b + c, a - b - c, -a + b - c, -a - b + c):
            if total < -1:
                bound = min(bound, -1.0 / total)
    return bound


def rank_one_terms(p: CutDistribution) -> list[tuple[float, np.ndarray]]:
    return [(w, np.outer(s, s)) for s, w in p.signs()]


def random_correlation(n: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Gram matrix of ``n`` random unit vectors in ``R^rank``."""
    V = rng.standard_normal((rank, n))
    V /= np.linalg.norm(V, axis=0)
    C = V.T @ V
    np.fill_diagonal(C, 1.0)
    return C


def estimate_rho(n: int, rank_cap: int, samples: int = 20, seed: int = 0,
                 resolution: float = 1e-4) -> RhoEstimate:
    """Bracket the worst-case shrink factor over correlation matrices of rank at most ``rank_cap``.

    The lower end is ``1/rank_cap``, which holds for every such matrix. The
    upper end is the smallest bound found over a three-vector planar frame
    padded to ``n``, the cosine matrix, and random matrices, using both the
    triangle facets and LP bisection.
    """
    if n < 1 or rank_cap < 1:
        raise ValueError("n and rank_cap must be positive")
    lower = 1.0 / min(rank_cap, n)
    candidates = []
    if n >= 3 and rank_cap >= 2:
        angles = 2 * np.pi * np.array([0, 1, 2] + [0] * (n - 3)) / 3
        V = np.vstack([np.cos(angles), np.sin(angles)])
        candidates.append(V.T @ V)
        candidates.append(cosine_correlation(n))
    rng = np.random.default_rng(child_seed(seed, n, rank_cap))
    for _ in range(samples):
        candidates.append(random_correlation(n, min(rank_cap, n), rng))
    upper = min(triangle_bound(C) for C in candidates) if candidates else 1.0
    for C in candidates:
        upper = min(upper, rho_bisection(C, resolution).t_max + resolution)
    return RhoEstimate(n, rank_cap, lower, max(lower, min(upper, 1.0)))


def exhaustive_sign_vectors(n: int) -> np.ndarray:
    """All ``2^n`` sign vectors, not canonicalised. Used by independent oracles."""
    return np.array(list(itertools.product([1.0, -1.0], repeat=n)))
