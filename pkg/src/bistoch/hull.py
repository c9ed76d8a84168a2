"""The convex hull of H-unistochastic matrices.

An H-unistochastic matrix is ``|u_ij|^2`` for a Hermitian unitary ``U``.
No exact membership test for their convex hull is known, so this module
works with two kinds of certificate:

* inner: an explicit convex combination of H-unistochastic matrices,
  found by LP over a finite generator set (involutions, the known 3x3 and
  4x4 witnesses, and random Hermitian unitaries of every signature);
* outer: linear inequalities every member must satisfy (the odd-``n``
  trace bound and the ``n = 4`` diagonal functional).

An LP failure over a finite generator set proves nothing, so it is
reported as ``"unknown"`` unless an outer inequality is violated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .birkhoff import (block_diag, check_bistochastic, flat_matrix, katz_block,
                       permutation_matrix, segment_point, validate_symmetric_bistochastic)
from .exceptions import NotUnitaryError, ResourceCapError
from .linalg_core import (as_square, child_seed, hermitian_defect, random_unitary,
                          unitary_defect)
from .lp import FeasibilityProblem, solve_feasibility

HU_TOL = 1e-10
CONDITION_TOL = 1e-12
MAX_INVOLUTION_DIM = 10


@dataclass(frozen=True)
class HermitianUnitary:
    """A Hermitian unitary matrix with a replayable label.

    ``signature`` counts the eigenvalues equal to -1, so the trace is
    ``n - 2 * signature``.
    """

    matrix: np.ndarray
    signature: int
    label: str = ""

    def __post_init__(self):
        U = as_square(self.matrix)
        if hermitian_defect(U) > HU_TOL or unitary_defect(U) > HU_TOL:
            raise NotUnitaryError(f"{self.label or 'matrix'} is not a Hermitian unitary")
        n = U.shape[0]
        if abs(np.trace(U).real - (n - 2 * self.signature)) > 1e-8:
            raise ValueError("signature inconsistent with trace")

    @classmethod
    def from_matrix(cls, U, label: str = "") -> "HermitianUnitary":
        U = np.asarray(U)
        n = U.shape[0]
        minus = int(round((n - np.trace(U).real) / 2))
        return cls(U, minus, label)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def image(self) -> np.ndarray:
        return uni_image(self.matrix)


@dataclass(frozen=True)
class MembershipVerdict:
    status: str  # "inside", "outside" or "unknown"
    weights: dict[str, float] = field(default_factory=dict)
    violated: list[str] = field(default_factory=list)
    residual: float = float("nan")

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.status == "inside":
            out["weights"] = self.weights
            out["residual"] = self.residual
        if self.violated:
            out["violated"] = self.violated
        return out


@dataclass(frozen=True)
class NecessaryCondition:
    name: str
    value: float  # slack; negative means violated
    satisfied: bool


@dataclass(frozen=True)
class WitnessDecomposition:
    """A target matrix written as ``sum_c weight_c * sum_t w_t * image(U_t)``."""

    target: np.ndarray
    components: list[tuple[float, np.ndarray, list[tuple[float, HermitianUnitary]]]]

    def flat_terms(self) -> list[tuple[float, HermitianUnitary]]:
        return [(wc * wt, U) for wc, _, terms in self.components for wt, U in terms]

    def residual(self) -> float:
        """Largest entrywise error of both decomposition levels."""
        total = sum(wc * comp for wc, comp, _ in self.components)
        err = float(np.max(np.abs(total - self.target)))
        for _, comp, terms in self.components:
            rebuilt = sum(wt * U.image() for wt, U in terms)
            err = max(err, float(np.max(np.abs(rebuilt - comp))))
        return err


@dataclass(frozen=True)
class LambdaBracket:
    n: int
    M: np.ndarray
    lower: float
    upper: float
    samples_used: int
    seed: int
    resolution: float
    certificate: MembershipVerdict | None = None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "lower": self.lower,
            "upper": self.upper,
            "samples_used": self.samples_used,
            "seed": self.seed,
            "resolution": self.resolution,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
        }


def uni_image(U, tol: float = 1e-9) -> np.ndarray:
    """Entrywise squared modulus ``U o conj(U)`` of a unitary matrix."""
    U = as_square(U, "U")
    if unitary_defect(U) > tol:
        raise NotUnitaryError("uni_image needs a unitary input")
    return np.abs(U) ** 2


def random_hermitian_unitary(n: int, minus_count: int, seed: int) -> HermitianUnitary:
    """``V diag(+1.., -1..) V^*`` with a Haar-random ``V``."""
    if not 0 <= minus_count <= n:
        raise ValueError(f"minus_count must be in [0, {n}]")
    V = random_unitary(n, seed)
    d = np.ones(n)
    d[n - minus_count:] = -1.0
    U = (V * d) @ V.conj().T
    U = (U + U.conj().T) / 2
    return HermitianUnitary(U, minus_count, f"random:seed={seed}:minus={minus_count}")


def _involutions(n: int):
    def rec(rest):
        if not rest:
            yield []
            return
        first, others = rest[0], rest[1:]
        for tail in rec(others):
            yield [(first,)] + tail
        for i, partner in enumerate(others):
            for tail in rec(others[:i] + others[i + 1:]):
                yield [(first, partner)] + tail

    yield from rec(list(range(n)))


def _cycle_label(cycles) -> str:
    swaps = [c for c in cycles if len(c) == 2]
    if not swaps:
        return "perm:id"
    return "perm:" + "".join(f"({a + 1} {b + 1})" for a, b in swaps)


def involution_generators(n: int) -> list[HermitianUnitary]:
    """All symmetric permutation matrices of size ``n`` (identity included)."""
    if n > MAX_INVOLUTION_DIM:
        raise ResourceCapError(f"involution enumeration capped at n = {MAX_INVOLUTION_DIM}")
    out = []
    for cycles in _involutions(n):
        perm = list(range(n))
        for c in cycles:
            if len(c) == 2:
                a, b = c
                perm[a], perm[b] = b, a
        swaps = sum(len(c) == 2 for c in cycles)
        out.append(HermitianUnitary(permutation_matrix(perm), swaps, _cycle_label(cycles)))
    return out


def witness_unitary_3() -> np.ndarray:
    return np.array([[-1.0, 2.0, 2.0], [2.0, -1.0, 2.0], [2.0, 2.0, -1.0]]) / 3


def exact_witnesses(n: int) -> WitnessDecomposition:
    """Exact decompositions of ``(2/3) M + (1/3) W_n`` for the Katz point ``B_3 (+) I``.

    For ``n = 3`` the target is the image of a single Hermitian unitary.
    For ``n = 4`` it is ``X/4 + 3Y/4`` where ``X`` averages the three
    fixed-point-free involutions and ``Y`` is the 3x3 witness padded by 1.
    """
    U3 = HermitianUnitary(witness_unitary_3(), 2, "witness:3")
    if n == 3:
        target = segment_point(katz_block(3), 2.0 / 3.0)
        return WitnessDecomposition(target, [(1.0, U3.image(), [(1.0, U3)])])
    if n == 4:
        target = segment_point(block_diag(katz_block(3), np.ones((1, 1))), 2.0 / 3.0)
        pairs = {"perm:(1 2)(3 4)": [1, 0, 3, 2],
                 "perm:(1 3)(2 4)": [2, 3, 0, 1],
                 "perm:(1 4)(2 3)": [3, 2, 1, 0]}
        invs = [HermitianUnitary(permutation_matrix(p), 2, lab) for lab, p in pairs.items()]
        X = sum(P.image() for P in invs) / 3
        Y_U = HermitianUnitary(block_diag(witness_unitary_3(), np.ones((1, 1))), 2, "witness:3+1")
        return WitnessDecomposition(target, [
            (0.25, X, [(1.0 / 3.0, P) for P in invs]),
            (0.75, Y_U.image(), [(1.0, Y_U)]),
        ])
    raise ValueError(f"exact witnesses exist only for n in (3, 4), got {n}")


def witness_orbit(n: int) -> list[HermitianUnitary]:
    """Witness unitaries for ``n`` in (3, 4) under every permutation similarity."""
    if n not in (3, 4):
        return []
    seen = {}
    for _, U in exact_witnesses(n).flat_terms():
        if not U.label.startswith("witness"):
            continue
        for perm in itertools.permutations(range(n)):
            P = permutation_matrix(perm)
            V = P @ U.matrix @ P.T
            key = np.round(V * 9).astype(int).tobytes()
            if key not in seen:
                label = U.label if list(perm) == list(range(n)) else f"{U.label}:perm={''.join(str(p + 1) for p in perm)}"
                seen[key] = HermitianUnitary(V, U.signature, label)
    return list(seen.values())


def necessary_conditions(A, tol: float = CONDITION_TOL) -> list[NecessaryCondition]:
    """Linear inequalities satisfied by every matrix in the H-unistochastic hull.

    Odd ``n``: ``trace(A) >= 1/n``. ``n = 4``: for each index ``j``,
    ``3 * sum_{i != j} a_ii - a_jj >= 0``. Values are slacks.
    """
    A = np.asarray(as_square(A), dtype=float)
    n = A.shape[0]
    d = np.diag(A)
    out = []
    if n % 2 == 1:
        slack = float(d.sum() - 1.0 / n)
        out.append(NecessaryCondition("trace_at_least_1/n", slack, slack >= -tol))
    if n == 4:
        for j in range(4):
            slack = float(3 * (d.sum() - d[j]) - d[j])
            out.append(NecessaryCondition(f"diag_functional_{j + 1}", slack, slack >= -tol))
    return out


def sampled_hull_membership(A, generators: list[HermitianUnitary],
                            tol: float = 1e-9) -> MembershipVerdict:
    """Try to write ``A`` as a convex combination of the generators' images."""
    if not generators:
        raise ValueError("need at least one generator")
    A = np.asarray(as_square(A), dtype=float)
    images = np.array([g.image().ravel() for g in generators]).T  # n^2 x G
    E = np.vstack([np.ones((1, len(generators))), images])
    b = np.concatenate([[1.0], A.ravel()])
    res = solve_feasibility(FeasibilityProblem(E, b), tol)
    if res.feasible:
        weights = {}
        for g, w in zip(generators, res.x):
            if w > 0:
                weights[g.label] = weights.get(g.label, 0.0) + float(w)
        rebuilt = sum(w * g.image() for g, w in zip(generators, res.x) if w > 0)
        residual = float(np.max(np.abs(rebuilt - A)))
        return MembershipVerdict("inside", weights, [], residual)
    violated = [f"{c.name} (slack {c.value:.3g})" for c in necessary_conditions(A) if not c.satisfied]
    if violated:
        return MembershipVerdict("outside", {}, violated)
    return MembershipVerdict("unknown")


def default_generators(n: int, sample_count: int, seed: int) -> list[HermitianUnitary]:
    """Involutions, witness orbit (n in 3, 4) and random unitaries over all signatures."""
    gens = involution_generators(n) + witness_orbit(n)
    for i in range(sample_count):
        minus = i % (n + 1)
        U = random_hermitian_unitary(n, minus, child_seed(seed, i))
        gens.append(HermitianUnitary(U.matrix, minus, f"random:seed={seed}:index={i}:minus={minus}"))
    return gens


def outer_bound(M) -> float:
    """Largest ``k`` for which ``k M + (1-k) W_n`` satisfies every necessary condition.

    The conditions are affine in ``k``, so the bound is solved for exactly.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    at0 = necessary_conditions(flat_matrix(n))
    at1 = necessary_conditions(M)
    upper = 1.0
    for c0, c1 in zip(at0, at1):
        if c1.value < -CONDITION_TOL:
            upper = min(upper, c0.value / (c0.value - c1.value))
    return max(0.0, upper)


def estimate_lambda(n: int, M, sample_count: int = 200, seed: int = 0,
                    resolution: float = 1e-6) -> LambdaBracket:
    """Bracket the largest ``k`` with ``k M + (1-k) W_n`` in the hull.

    ``upper`` comes from the necessary conditions, ``lower`` from bisection
    on LP membership over the generator set. Membership is monotone in ``k``
    because ``W_n`` is inside and the hull is convex.
    """
    if resolution < 1e-6:
        raise ValueError("resolution must be at least 1e-6")
    M = validate_symmetric_bistochastic(M)
    if M.shape[0] != n:
        raise ValueError(f"M is {M.shape[0]}x{M.shape[0]}, expected n = {n}")
    gens = default_generators(n, sample_count, seed)
    upper = outer_bound(M)

    def inside(k):
        return sampled_hull_membership(segment_point(M, k), gens)

    lo, cert = 0.0, inside(0.0)
    if cert.status != "inside":
        return LambdaBracket(n, M, 0.0, upper, sample_count, seed, resolution, None)
    top = inside(upper)
    if top.status == "inside":
        return LambdaBracket(n, M, upper, upper, sample_count, seed, resolution, top)
    hi = upper
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        v = inside(mid)
        if v.status == "inside":
            lo, cert = mid, v
        else:
            hi = mid
    return LambdaBracket(n, M, lo, upper, sample_count, seed, resolution, cert)


def is_symmetric_bistochastic(A, tol: float = 1e-9) -> bool:
    chk = check_bistochastic(A, tol)
    return chk.doubly_stochastic and chk.symmetric
