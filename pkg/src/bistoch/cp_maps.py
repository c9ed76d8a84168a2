"""Completely positive maps on square matrices, stored as weighted Kraus families.

``KrausMap`` represents ``A -> sum_i w_i V_i A V_i^*``. Kraus families are
not unique, so maps are always compared through their Choi matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .birkhoff import flat_matrix, katz_block
from .cut_polytope import (WalshCertificate, CutDistribution, certificate_from_distribution,
                           cosine_correlation, cut_membership, verify_certificate)
from .exceptions import (DimensionError, NotSchurMapError, NotSelfDualError,
                         NotUnitaryError, ResourceCapError)
from .hull import HermitianUnitary, necessary_conditions
from .linalg_core import (as_square, fourier_matrix, hermitian_defect, matrix_from_json,
                          matrix_to_json, psd_factor, unitary_defect)

DEFAULT_TOL = 1e-9
_DROP = 1e-12


@dataclass(frozen=True)
class KrausMap:
    n: int
    terms: tuple[tuple[float, np.ndarray], ...]

    def __post_init__(self):
        terms = []
        for w, V in self.terms:
            V = np.asarray(as_square(V, "Kraus operator"), dtype=complex)
            if V.shape[0] != self.n:
                raise DimensionError(f"Kraus operator is {V.shape[0]}x{V.shape[0]}, map is on n = {self.n}")
            if not w > 0:
                raise ValueError("Kraus weights must be positive")
            terms.append((float(w), V))
        if not terms:
            raise ValueError("a Kraus map needs at least one term")
        object.__setattr__(self, "terms", tuple(terms))

    @classmethod
    def from_operators(cls, ops: Sequence, weights: Sequence[float] | None = None) -> "KrausMap":
        ops = [np.asarray(V) for V in ops]
        if weights is None:
            weights = [1.0] * len(ops)
        return cls(ops[0].shape[0], tuple(zip(weights, ops)))

    def __call__(self, A) -> np.ndarray:
        return apply_map(self, A)

    @property
    def operators(self) -> list[np.ndarray]:
        return [V for _, V in self.terms]

    def to_json(self) -> dict:
        return {"n": self.n,
                "terms": [{"w": w, "op": matrix_to_json(V)} for w, V in self.terms]}

    @classmethod
    def from_json(cls, obj: dict) -> "KrausMap":
        terms = tuple((float(t.get("w", 1.0)), matrix_from_json(t["op"])) for t in obj["terms"])
        return cls(int(obj["n"]), terms)


@dataclass(frozen=True)
class MixedHermitianUnitary:
    """``A -> sum_i p_i U_i A U_i`` with Hermitian unitaries ``U_i`` and ``sum p_i = 1``."""

    terms: tuple[tuple[float, HermitianUnitary], ...]

    def __post_init__(self):
        terms = tuple((float(p), U) for p, U in self.terms)
        if not terms:
            raise ValueError("need at least one term")
        if any(p <= 0 for p, _ in terms):
            raise ValueError("weights must be positive")
        if abs(sum(p for p, _ in terms) - 1) > 1e-9:
            raise ValueError("weights must sum to one")
        object.__setattr__(self, "terms", terms)

    @property
    def n(self) -> int:
        return self.terms[0][1].n

    def as_kraus(self) -> KrausMap:
        return KrausMap(self.n, tuple((p, U.matrix) for p, U in self.terms))

    def to_json(self) -> dict:
        return {"n": self.n,
                "terms": [{"w": p, "op": matrix_to_json(U.matrix), "signature": U.signature}
                          for p, U in self.terms]}


@dataclass(frozen=True)
class MapProperties:
    cp: bool
    trace_preserving: bool
    unital: bool
    doubly_stochastic: bool
    self_dual: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def apply_map(phi: KrausMap, A) -> np.ndarray:
    A = as_square(A)
    if A.shape[0] != phi.n:
        raise DimensionError(f"map acts on {phi.n}x{phi.n} matrices, got {A.shape}")
    return sum(w * V @ A @ V.conj().T for w, V in phi.terms)


def dual_map(phi: KrausMap) -> KrausMap:
    return KrausMap(phi.n, tuple((w, V.conj().T) for w, V in phi.terms))


def choi_matrix(phi: KrausMap) -> np.ndarray:
    """``sum_ij E_ij (x) phi(E_ij)``: the ``(i, j)`` block of size ``n`` is ``phi(E_ij)``."""
    X = np.array([np.sqrt(w) * V.T.reshape(-1) for w, V in phi.terms])  # r x n^2
    return X.T @ X.conj()


def choi_distance(phi: KrausMap, psi: KrausMap) -> float:
    if phi.n != psi.n:
        raise DimensionError("maps act on different dimensions")
    return float(np.max(np.abs(choi_matrix(phi) - choi_matrix(psi))))


def map_properties(phi: KrausMap, tol: float = DEFAULT_TOL) -> MapProperties:
    if tol <= 0:
        raise ValueError("tol must be positive")
    I = np.eye(phi.n)
    J = choi_matrix(phi)
    cp = bool(np.linalg.eigvalsh((J + J.conj().T) / 2)[0] >= -tol)
    tp = float(np.max(np.abs(sum(w * V.conj().T @ V for w, V in phi.terms) - I))) <= tol
    unital = float(np.max(np.abs(sum(w * V @ V.conj().T for w, V in phi.terms) - I))) <= tol
    sd = float(np.max(np.abs(J - choi_matrix(dual_map(phi))))) <= tol
    return MapProperties(cp, tp, unital, cp and tp and unital, sd)


def hermitian_kraus(phi: KrausMap, tol: float = DEFAULT_TOL) -> KrausMap:
    """Hermitian Kraus family for a self-dual map via ``V = K + iL``.

    For self-dual ``phi``, ``sum w (K A K + L A L) = (phi + phi^*)/2 = phi``.
    The output is not minimal.
    """
    if not map_properties(phi, tol).self_dual:
        raise NotSelfDualError("hermitian_kraus needs a self-dual map")
    terms = []
    for w, V in phi.terms:
        K = (V + V.conj().T) / 2
        L = (V - V.conj().T) / 2j
        for H in (K, L):
            if np.max(np.abs(H)) > _DROP:
                terms.append((w, (H + H.conj().T) / 2))
    return KrausMap(phi.n, tuple(terms))


def delta_matrix(phi: KrausMap) -> np.ndarray:
    """Action on diagonals: entry ``(i, j)`` is ``phi(E_jj)[i, i] = sum w |V_ij|^2``."""
    return sum(w * np.abs(V) ** 2 for w, V in phi.terms)


def schur_map(C, tol: float = DEFAULT_TOL) -> KrausMap:
    """Kraus family for ``A -> C o A`` with diagonal operators from a PSD factor of ``C``."""
    C = as_square(C, "C")
    if np.max(np.abs(np.diag(C) - 1)) > tol or hermitian_defect(C) > tol:
        raise ValueError("schur_map needs a correlation matrix")
    G = psd_factor(C, _DROP)
    if np.max(np.abs(G @ G.conj().T - C)) > 1e-8:
        raise ValueError("schur_map needs a positive semidefinite matrix")
    return KrausMap.from_operators([np.diag(g) for g in G.T])


def extract_schur(phi: KrausMap, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return ``C = phi(J)`` after checking ``phi(E_ij) = C o E_ij`` on every matrix unit."""
    n = phi.n
    C = apply_map(phi, np.ones((n, n)))
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n))
            E[i, j] = 1.0
            out = apply_map(phi, E)
            expected = np.zeros((n, n), dtype=complex)
            expected[i, j] = C[i, j]
            if np.max(np.abs(out - expected)) > tol:
                raise NotSchurMapError("map is not a Schur multiplier")
    if np.max(np.abs(np.diag(C) - 1)) > tol:
        raise NotSchurMapError("map does not fix the diagonal")
    return C


def mixed_from_rank1(decomposition: Sequence[tuple[float, np.ndarray]],
                     tol: float = DEFAULT_TOL) -> KrausMap:
    """Diagonal-unitary Kraus terms ``(p_k, diag(v_k))`` for ``C = sum p_k v_k v_k^*``."""
    terms = []
    for p, v in decomposition:
        v = np.asarray(v, dtype=complex).reshape(-1)
        if np.max(np.abs(np.abs(v) - 1)) > tol:
            raise ValueError("rank-one factors must have unimodular entries")
        terms.append((p, np.diag(v)))
    if abs(sum(p for p, _ in terms) - 1) > tol:
        raise ValueError("weights must sum to one")
    return KrausMap(len(decomposition[0][1]), tuple(terms))


def mixed_hermitian_from_cut(p: CutDistribution) -> MixedHermitianUnitary:
    """The sign-diagonal mixture realising the Schur map of ``p``'s correlation matrix."""
    terms = []
    for s, w in p.signs():
        terms.append((w, HermitianUnitary(np.diag(s).astype(complex), int(np.sum(s < 0)),
                                          f"signs:{''.join('+' if x > 0 else '-' for x in s)}")))
    total = sum(w for w, _ in terms)
    return MixedHermitianUnitary(tuple((w / total, U) for w, U in terms))


def conjugation_map(U, tol: float = DEFAULT_TOL) -> KrausMap:
    U = as_square(U, "U")
    if unitary_defect(U) > tol:
        raise NotUnitaryError("conjugation_map needs a unitary")
    return KrausMap.from_operators([U])


def compose(phi: KrausMap, psi: KrausMap) -> KrausMap:
    """``phi o psi``: apply ``psi`` first."""
    if phi.n != psi.n:
        raise DimensionError("cannot compose maps on different dimensions")
    return KrausMap(phi.n, tuple((w1 * w2, V1 @ V2)
                                 for w1, V1 in phi.terms for w2, V2 in psi.terms))


def tensor_with_identity(phi: KrausMap, q: int) -> KrausMap:
    I = np.eye(q)
    return KrausMap(phi.n * q, tuple((w, np.kron(V, I)) for w, V in phi.terms))


def mix_maps(weights: Sequence[float], maps: Sequence[KrausMap]) -> KrausMap:
    if len(weights) != len(maps) or not maps:
        raise ValueError("need one weight per map")
    if any(w <= 0 for w in weights) or abs(sum(weights) - 1) > 1e-9:
        raise ValueError("mixture weights must be positive and sum to one")
    n = maps[0].n
    if any(m.n != n for m in maps):
        raise DimensionError("cannot mix maps on different dimensions")
    return KrausMap(n, tuple((a * w, V) for a, m in zip(weights, maps) for w, V in m.terms))


def symmetrize(phi: KrausMap) -> KrausMap:
    """``(phi + phi^*) / 2``, always self-dual."""
    return mix_maps([0.5, 0.5], [phi, dual_map(phi)])


def xi_map(n: int, U) -> KrausMap:
    """``Gamma_{U^*} o (complete dephasing) o Gamma_U``."""
    U = as_square(U, "U")
    if U.shape[0] != n:
        raise DimensionError(f"U is {U.shape[0]}x{U.shape[0]}, expected n = {n}")
    dephase = schur_map(np.eye(n))
    return compose(conjugation_map(U.conj().T), compose(dephase, conjugation_map(U)))


@dataclass
class PipelineReport:
    m: int
    q: int
    rho: float
    status: str  # "ok", "infeasible_rho" or "failed"
    cut_distribution: CutDistribution | None = None
    walsh_certificate: WalshCertificate | None = None
    decomposition: MixedHermitianUnitary | None = None
    checks: dict[str, float] = field(default_factory=dict)
    passed: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json(self) -> dict:
        return {
            "m": self.m, "q": self.q, "rho": self.rho, "status": self.status,
            "checks": self.checks, "passed": self.passed,
            "cut_distribution": None if self.cut_distribution is None else self.cut_distribution.to_json(),
            "walsh_certificate": None if self.walsh_certificate is None else self.walsh_certificate.to_json(),
            "decomposition": None if self.decomposition is None else self.decomposition.to_json(),
        }


def fourier_shift_residual(m: int) -> float:
    """Largest error in ``C_m o (v_p v_p^*) = (v_{p-1} v_{p-1}^* + v_{p+1} v_{p+1}^*) / 2`` over ``p``."""
    F = fourier_matrix(m)
    C = cosine_correlation(m)
    err = 0.0
    for p in range(m):
        def proj(k):
            v = F[:, k % m]
            return np.outer(v, v.conj())
        lhs = C * proj(p)
        rhs = 0.5 * (proj(p - 1) + proj(p + 1))
        err = max(err, float(np.max(np.abs(lhs - rhs))))
    return err


def fourier_pipeline(m: int, q: int = 1, rho: float = 0.5,
                          tol: float = DEFAULT_TOL) -> PipelineReport:
    """Certify ``rho (B_m (x) I_q) + (1 - rho) W_n`` is in the H-unistochastic hull.

    Shrinks the rank-two correlation matrix ``C_m (x) J_q`` toward the
    identity by ``rho``, decomposes it over sign vectors with the cut LP,
    and conjugates the resulting sign-diagonal mixture by
    ``U = F_m (x) F_q``. The action of that mixed Hermitian unitary map on
    diagonal matrices is the target matrix.
    """
    if m < 3 or m % 2 == 0:
        raise ValueError("m must be odd and at least 3")
    if q < 1:
        raise ValueError("q must be positive")
    if not 0 < rho <= 1:
        raise ValueError("rho must lie in (0, 1]")
    n = m * q
    if n > 12:
        raise ResourceCapError("pipeline capped at n = m q <= 12")
    report = PipelineReport(m, q, rho, "failed")

    M = np.kron(katz_block(m), np.eye(q))
    C = q * np.kron(cosine_correlation(m), flat_matrix(q))
    report.checks["unit_diagonal_residual"] = float(np.max(np.abs(np.diag(C) - 1)))
    B = rho * C + (1 - rho) * np.eye(n)

    dist = cut_membership(B, tol)
    report.checks["fourier_shift_residual"] = fourier_shift_residual(m)
    report.passed["fourier_shift"] = report.checks["fourier_shift_residual"] <= 1e-10
    if dist is None:
        report.status = "infeasible_rho"
        return report
    report.cut_distribution = dist
    report.walsh_certificate = certificate_from_distribution(dist)
    report.passed["walsh_certificate"] = verify_certificate(report.walsh_certificate, B, 1e-8)

    U = np.kron(fourier_matrix(m), fourier_matrix(q))
    terms = []
    for p, S in mixed_hermitian_from_cut(dist).terms:
        K = U.conj().T @ S.matrix @ U
        report.checks["hermitian_unitary_defect"] = max(
            report.checks.get("hermitian_unitary_defect", 0.0),
            hermitian_defect(K), unitary_defect(K))
        K = (K + K.conj().T) / 2
        terms.append((p, HermitianUnitary(K, S.signature, f"conj:{S.label}")))
    psi = MixedHermitianUnitary(tuple(terms))
    report.decomposition = psi
    report.passed["hermitian_unitary_terms"] = report.checks["hermitian_unitary_defect"] <= 1e-9

    target = rho * M + (1 - rho) * flat_matrix(n)
    delta = delta_matrix(psi.as_kraus())
    report.checks["delta_residual"] = float(np.max(np.abs(delta - target)))
    report.passed["delta_matches_target"] = report.checks["delta_residual"] <= 1e-8
    report.passed["necessary_conditions"] = all(c.satisfied for c in necessary_conditions(delta, 1e-9))

    # same map built the other way: rho (Phi_m (x) id_q) + (1 - rho) Xi
    F_m = fourier_matrix(m)
    phi_m = compose(conjugation_map(F_m.conj().T),
                    compose(schur_map(cosine_correlation(m)), conjugation_map(F_m)))
    parts = [tensor_with_identity(phi_m, q)]
    weights = [rho]
    if rho < 1:
        parts.append(xi_map(n, U))
        weights.append(1 - rho)
    reference = mix_maps(weights, parts)
    report.checks["map_identity_residual"] = choi_distance(psi.as_kraus(), reference)
    report.passed["map_identity"] = report.checks["map_identity_residual"] <= 1e-8

    report.status = "ok" if all(report.passed.values()) else "failed"
    return report


def symmetrized_unitary_2x2(U, tol: float = DEFAULT_TOL) -> MixedHermitianUnitary:
    """Write ``(Gamma_U + Gamma_{U^*}) / 2`` as ``p Gamma_I + (1 - p) Gamma_R``.

    With ``U = V diag(l1, l2) V^*``, the symmetrised map is ``Gamma_V``
    after a Schur multiplier by ``[[1, c], [c, 1]]`` with
    ``c = Re(l1 conj(l2))``, before ``Gamma_{V^*}``. That 2x2 correlation matrix equals
    ``p J + (1 - p) [[1, -1], [-1, 1]]`` with ``p = (1 + c) / 2``, and
    conjugating the sign matrices back gives ``I`` and
    ``R = V diag(1, -1) V^*``.
    """
    U = as_square(U, "U")
    if U.shape != (2, 2):
        raise DimensionError("symmetrized_unitary_2x2 needs a 2x2 matrix")
    if unitary_defect(U) > tol:
        raise NotUnitaryError("input is not unitary")
    T, V = scipy.linalg.schur(np.asarray(U, dtype=complex), output="complex")
    l1, l2 = T[0, 0], T[1, 1]
    c = float(np.clip((l1 * np.conj(l2)).real, -1.0, 1.0))
    p = (1 + c) / 2
    R = V @ np.diag([1.0, -1.0]) @ V.conj().T
    R = (R + R.conj().T) / 2
    terms = []
    if p > 1e-15:
        terms.append((p, HermitianUnitary(np.eye(2, dtype=complex), 0, "identity")))
    if 1 - p > 1e-15:
        terms.append((1 - p, HermitianUnitary(R, 1, "reflection")))
    total = sum(w for w, _ in terms)
    return MixedHermitianUnitary(tuple((w / total, H) for w, H in terms))


def decompose_selfdual_2x2(phi: KrausMap, tol: float = DEFAULT_TOL) -> MixedHermitianUnitary:
    """Mixed Hermitian unitary form of a self-dual 2x2 map given as a mixture of unitary conjugations.

    Every Kraus operator must be a multiple of a unitary. Because the map is
    self-dual it equals its own symmetrisation, and each symmetrised term is
    handled by ``symmetrized_unitary_2x2``. General 2x2 inputs would first
    need a mixed-unitary decomposition, which is not attempted.
    """
    if phi.n != 2:
        raise DimensionError("decompose_selfdual_2x2 needs a map on 2x2 matrices")
    props = map_properties(phi, tol)
    if not props.self_dual:
        raise NotSelfDualError("map is not self-dual")
    if not props.doubly_stochastic:
        raise ValueError("map is not doubly stochastic")
    pieces: list[list] = []  # [weight, HermitianUnitary]
    for idx, (w, V) in enumerate(phi.terms):
        G = V.conj().T @ V
        scale = G[0, 0].real
        if scale <= _DROP or np.max(np.abs(G - scale * np.eye(2))) > tol:
            raise ValueError("every Kraus operator must be proportional to a unitary")
        for p, H in symmetrized_unitary_2x2(V / np.sqrt(scale), tol).terms:
            # H and -H induce the same conjugation, so merge them
            for piece in pieces:
                K = piece[1].matrix
                if min(np.max(np.abs(K - H.matrix)), np.max(np.abs(K + H.matrix))) <= tol:
                    piece[0] += w * scale * p
                    break
            else:
                pieces.append([w * scale * p, HermitianUnitary(H.matrix, H.signature,
                                                               f"{idx}:{H.label}")])
    total = sum(p for p, _ in pieces)
    return MixedHermitianUnitary(tuple((p / total, H) for p, H in pieces))
