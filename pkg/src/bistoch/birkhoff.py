"""Doubly stochastic and symmetric bistochastic matrices.

Extreme points of the symmetric bistochastic polytope are, up to a
simultaneous row/column permutation, block diagonal with blocks ``B_k``
where ``k`` is 1, 2 or odd. This module builds those points (the
``katz_*`` functions), tests extremality directly by a rank condition,
and provides a brute-force vertex enumeration for small ``n`` that does
not rely on that characterisation at all.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import (InvalidKatzBlockError, InvalidPartitionError,
                         ResourceCapError)
from .linalg_core import as_square

SUPPORT_TOL = 1e-9
MAX_ENUM_DIM = 4


@dataclass(frozen=True)
class KatzPartition:
    """Block sizes of a Katz decomposition, stored in nonincreasing order."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(sorted((int(p) for p in self.parts), reverse=True))
        if not parts:
            raise InvalidPartitionError("a partition needs at least one part")
        for p in parts:
            if p < 1 or (p % 2 == 0 and p != 2):
                raise InvalidPartitionError(f"part {p} is neither odd nor 2")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return sum(self.parts)

    @classmethod
    def parse(cls, text: str) -> "KatzPartition":
        """Parse ``"3,1"`` or ``"3+1"``."""
        try:
            parts = [int(t) for t in text.replace("+", ",").split(",") if t.strip()]
        except ValueError as exc:
            raise InvalidPartitionError(f"cannot parse partition {text!r}") from exc
        return cls(tuple(parts))

    def to_json(self) -> dict:
        return {"parts": list(self.parts)}


class BistochasticCheck(NamedTuple):
    doubly_stochastic: bool
    symmetric: bool


def flat_matrix(n: int) -> np.ndarray:
    """The centroid ``W_n``: every entry ``1/n``."""
    if n < 1:
        raise ValueError("n must be positive")
    return np.full((n, n), 1.0 / n)


def katz_block(k: int) -> np.ndarray:
    if k == 1:
        return np.ones((1, 1))
    if k == 2:
        return np.array([[0.0, 1.0], [1.0, 0.0]])
    if k < 1 or k % 2 == 0:
        raise InvalidKatzBlockError(f"no Katz block of size {k}")
    B = np.zeros((k, k))
    idx = np.arange(k)
    B[idx, (idx + 1) % k] = 0.5
    B[idx, (idx - 1) % k] = 0.5
    return B


def katz_partitions(n: int) -> list[KatzPartition]:
    """All partitions of ``n`` into parts that are odd or equal to 2."""
    if n < 1:
        raise ValueError("n must be positive")
    allowed = [p for p in range(n, 0, -1) if p % 2 == 1 or p == 2]
    out: list[tuple[int, ...]] = []

    def rec(remaining, max_part, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for p in allowed:
            if p <= min(remaining, max_part):
                rec(remaining - p, p, acc + [p])

    rec(n, n, [])
    return [KatzPartition(p) for p in out]


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """Matrix ``P`` with ``P[perm[i], i] = 1`` (0-based), so ``P e_i = e_perm[i]``."""
    perm = [int(i) for i in perm]
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise InvalidPartitionError(f"{perm} is not a permutation of 0..{n - 1}")
    P = np.zeros((n, n))
    P[perm, np.arange(n)] = 1.0
    return P


def block_diag(*blocks: np.ndarray) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.result_type(*blocks))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


def katz_extreme_point(partition: KatzPartition | Sequence[int],
                       perm: Sequence[int] | None = None) -> np.ndarray:
    """``P blockdiag(B_{n_1}, ..., B_{n_m}) P^T`` for the given partition."""
    if not isinstance(partition, KatzPartition):
        partition = KatzPartition(tuple(partition))
    M = block_diag(*(katz_block(k) for k in partition.parts))
    if perm is None:
        return M
    if len(perm) != partition.n:
        raise InvalidPartitionError(f"permutation has size {len(perm)}, partition sums to {partition.n}")
    P = permutation_matrix(perm)
    return P @ M @ P.T


def check_bistochastic(A, tol: float = 1e-9) -> BistochasticCheck:
    A = np.real_if_close(as_square(A))
    if np.iscomplexobj(A):
        return BistochasticCheck(False, False)
    ds = bool(A.min() >= -tol
              and np.all(np.abs(A.sum(axis=0) - 1) <= tol)
              and np.all(np.abs(A.sum(axis=1) - 1) <= tol))
    sym = bool(np.max(np.abs(A - A.T)) <= tol)
    return BistochasticCheck(ds, sym)


def _support_system(M, tol):
    """Row-sum constraint matrix for symmetric perturbations supported on ``M``."""
    n = M.shape[0]
    pairs = [(i, j) for i in range(n) for j in range(i, n) if abs(M[i, j]) > tol]
    A = np.zeros((n, len(pairs)))
    for c, (i, j) in enumerate(pairs):
        A[i, c] += 1.0
        if i != j:
            A[j, c] += 1.0
    return A, pairs


def extremality_direction(M, tol: float = SUPPORT_TOL) -> np.ndarray | None:
    """A nonzero symmetric ``D`` with zero row sums and support inside ``M``'s, or None.

    When one exists, ``M +/- eps D`` stay symmetric bistochastic for small
    ``eps``, so ``M`` is not extreme.
    """
    M = np.asarray(M, dtype=float)
    A, pairs = _support_system(M, tol)
    if not pairs:
        return None
    _, s, Vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-10))
    if rank == len(pairs):
        return None
    d = Vt[rank]
    n = M.shape[0]
    D = np.zeros((n, n))
    for c, (i, j) in enumerate(pairs):
        D[i, j] = D[j, i] = d[c]
    return D


def is_extreme_symmetric_bistochastic(M, tol: float = SUPPORT_TOL) -> bool:
    A, pairs = _support_system(np.asarray(M, dtype=float), tol)
    return np.linalg.matrix_rank(A, tol=1e-10) == len(pairs)


def segment_point(M, k: float) -> np.ndarray:
    """``k M + (1 - k) W_n``."""
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"k must lie in [0, 1], got {k}")
    M = np.asarray(as_square(M), dtype=float)
    return k * M + (1.0 - k) * flat_matrix(M.shape[0])


def katz_orbit(n: int) -> list[np.ndarray]:
    """Every Katz point of size ``n`` under all permutation similarities, deduplicated."""
    if n > MAX_ENUM_DIM + 2:
        raise ResourceCapError(f"orbit enumeration capped at n = {MAX_ENUM_DIM + 2}")
    seen: dict[bytes, np.ndarray] = {}
    for part in katz_partitions(n):
        for perm in itertools.permutations(range(n)):
            X = katz_extreme_point(part, perm)
            seen.setdefault(_key(X), X)
    return list(seen.values())


def enumerate_symmetric_vertices(n: int) -> list[np.ndarray]:
    """Vertices of ``{X symmetric, X >= 0, row sums 1}`` by basis enumeration.

    Independent of the block characterisation: every size-``n`` column subset of the
    row-sum system over the upper triangle is tried, and the nonnegative
    basic solutions are kept.
    """
    if n > MAX_ENUM_DIM:
        raise ResourceCapError(f"vertex enumeration capped at n = {MAX_ENUM_DIM}")
    A, pairs = _support_system(np.ones((n, n)), 0.5)
    ones = np.ones(n)
    seen: dict[bytes, np.ndarray] = {}
    for cols in itertools.combinations(range(len(pairs)), n):
        sub = A[:, cols]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        y = np.linalg.solve(sub, ones)
        if y.min() < -1e-12:
            continue
        X = np.zeros((n, n))
        for val, c in zip(y, cols):
            i, j = pairs[c]
            X[i, j] = X[j, i] = max(val, 0.0)
        seen.setdefault(_key(X), X)
    return list(seen.values())


def _key(X: np.ndarray) -> bytes:
    return np.round(X * 2 * 3 * 5 * 7).astype(np.int64).tobytes()


def validate_symmetric_bistochastic(M, tol: float = 1e-9) -> np.ndarray:
    M = np.asarray(as_square(M), dtype=float)
    chk = check_bistochastic(M, tol)
    if not (chk.doubly_stochastic and chk.symmetric):
        raise ValueError("matrix is not symmetric bistochastic")
    return M
