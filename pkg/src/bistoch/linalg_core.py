"""Dense matrix helpers shared by every other module.

Matrices are plain ``numpy`` arrays (complex128 or float64). All tolerances
are absolute; every matrix handled here has entries bounded by one in
modulus, so relative tolerances buy nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, NotHermitianError

MAX_DIM = 64
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class StructureFlags:
    hermitian: bool
    unitary: bool
    hermitian_unitary: bool
    positive_semidefinite: bool
    tolerance_used: float


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition of a Hermitian matrix.

    ``eigenvalues`` are real and sorted nonincreasing; the columns of
    ``eigenvectors`` are orthonormal and the first component of each column
    with modulus above 1e-12 is real and positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def as_square(A, name: str = "matrix") -> np.ndarray:
    """Return ``A`` as a square 2-D array, raising on bad shape or non-finite entries."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def schur_product(A, B) -> np.ndarray:
    A = as_square(A, "A")
    B = as_square(B, "B")
    if A.shape != B.shape:
        raise DimensionError(f"Schur product needs equal shapes, got {A.shape} and {B.shape}")
    return A * B


def kron(A, B) -> np.ndarray:
    return np.kron(as_square(A, "A"), as_square(B, "B"))


def fourier_matrix(n: int) -> np.ndarray:
    """Unitary Fourier matrix with (j, k) entry ``exp(2 pi i j k / n) / sqrt(n)``, 0-based."""
    if n < 1:
        raise ValueError("n must be positive")
    jk = np.outer(np.arange(n), np.arange(n)) % n
    return np.exp(2j * np.pi * jk / n) / np.sqrt(n)


def hermitian_defect(A) -> float:
    A = np.asarray(A)
    return float(np.max(np.abs(A - A.conj().T)))


def unitary_defect(A) -> float:
    A = np.asarray(A)
    return float(np.max(np.abs(A @ A.conj().T - np.eye(A.shape[0]))))


def classify(A, tol: float = DEFAULT_TOL) -> StructureFlags:
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = as_square(A)
    herm = hermitian_defect(A) <= tol
    unit = unitary_defect(A) <= tol
    psd = False
    if herm:
        H = (A + A.conj().T) / 2
        psd = bool(np.linalg.eigvalsh(H)[0] >= -tol)
    return StructureFlags(herm, unit, herm and unit, psd, tol)


def hermitian_eig(H, tol: float = DEFAULT_TOL) -> Spectrum:
    """Spectral decomposition of a Hermitian matrix with a fixed phase convention."""
    H = as_square(H, "H")
    if hermitian_defect(H) > tol:
        raise NotHermitianError("hermitian_eig needs a Hermitian input")
    H = (H + H.conj().T) / 2
    w, V = np.linalg.eigh(H)
    w = w[::-1].copy()
    V = V[:, ::-1].astype(complex)
    for k in range(V.shape[1]):
        col = V[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-12)[0]
        V[:, k] = col * (abs(col[idx]) / col[idx])
    return Spectrum(w, V)


def psd_factor(C, drop: float = 1e-12) -> np.ndarray:
    """Return G with ``C = G @ G.conj().T``, columns for eigenvalues above ``drop`` only."""
    C = as_square(C, "C")
    C = (C + C.conj().T) / 2
    w, V = np.linalg.eigh(C)
    keep = w > drop
    return V[:, keep] * np.sqrt(w[keep])


def random_unitary(n: int, seed) -> np.ndarray:
    """Haar-random unitary from the QR factorisation of a complex Ginibre matrix.

    ``seed`` feeds numpy's PCG64 generator, so the output is reproducible
    across platforms. The phases of ``R``'s diagonal are folded back into
    ``Q``; without that step the distribution is not unitarily invariant.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def child_seed(seed: int, *index: int) -> int:
    """Deterministic 64-bit sub-seed for stream ``index`` of a base seed."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *index])
    return int(ss.generate_state(1, np.uint64)[0])


def matrix_to_json(A) -> dict:
    """Encode as ``{"n": n, "entries": [...]}``; real matrices use plain numbers."""
    A = as_square(A)
    n = A.shape[0]
    if np.iscomplexobj(A) and np.any(A.imag != 0):
        entries = [[float(z.real), float(z.imag)] for z in A.ravel()]
    else:
        entries = [float(x) for x in np.real(A).ravel()]
    return {"n": n, "entries": entries}


def matrix_from_json(obj: dict) -> np.ndarray:
    """Decode the row-major matrix JSON. Also accepts a nested list of rows."""
    if isinstance(obj, list):
        return as_square(np.array(obj, dtype=float if _all_real(obj) else complex))
    n = int(obj["n"])
    entries = obj["entries"]
    if n > 1 and len(entries) == n and all(isinstance(r, list) and len(r) == n for r in entries):
        entries = [e for row in entries for e in row]
    if len(entries) != n * n:
        raise DimensionError(f"expected {n * n} entries, got {len(entries)}")
    if all(isinstance(e, (int, float)) for e in entries):
        return np.array(entries, dtype=float).reshape(n, n)
    vals = []
    for e in entries:
        if isinstance(e, (int, float)):
            vals.append(complex(e))
        elif len(e) == 2:
            vals.append(complex(e[0], e[1]))
        else:
            raise ValueError(f"bad matrix entry {e!r}")
    return as_square(np.array(vals, dtype=complex).reshape(n, n))


def _all_real(rows) -> bool:
    return all(isinstance(x, (int, float)) for row in rows for x in row)
