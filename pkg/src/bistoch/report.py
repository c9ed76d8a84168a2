"""Run reports and the two small-dimension lambda replays."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .birkhoff import (block_diag, is_extreme_symmetric_bistochastic, katz_block,
                       katz_extreme_point, segment_point)
from .hull import (involution_generators, necessary_conditions, exact_witnesses,
                   sampled_hull_membership, witness_orbit, witness_unitary_3)
from .linalg_core import hermitian_defect, matrix_to_json, unitary_defect

EXACT_TOL = 1e-12
STEP = 1e-6


@dataclass
class RunReport:
    command: str
    inputs: dict
    seed: int = 0
    results: list[dict] = field(default_factory=list)
    certificates: dict = field(default_factory=dict)
    elapsed_ms: int = 0
    _start: float = field(default_factory=time.perf_counter, repr=False)

    def check(self, claim: str, passed: bool, **values) -> bool:
        """Record a pass/fail claim with the numbers that decided it."""
        self.results.append({"claim": claim, "status": "pass" if passed else "fail",
                             "values": values})
        return passed

    def note(self, claim: str, **values) -> None:
        """Record a non-binary result such as a bracket or a verdict."""
        self.results.append({"claim": claim, "status": "bracket", "values": values})

    @property
    def passed(self) -> bool:
        return all(r["status"] != "fail" for r in self.results)

    def finish(self) -> "RunReport":
        self.elapsed_ms = int(round((time.perf_counter() - self._start) * 1000))
        return self

    def to_json(self) -> dict:
        return {"command": self.command, "inputs": self.inputs, "seed": self.seed,
                "results": self.results, "certificates": self.certificates,
                "elapsed_ms": self.elapsed_ms}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2, default=_jsonable)

    def summary(self) -> str:
        lines = [f"{self.command}: {'PASS' if self.passed else 'FAIL'} ({self.elapsed_ms} ms)"]
        for r in self.results:
            vals = ", ".join(f"{k}={_short(v)}" for k, v in r["values"].items())
            lines.append(f"  [{r['status']:>7}] {r['claim']}: {vals}")
        return "\n".join(lines)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return v


def verify_lambda3(perturb: float = 0.0) -> RunReport:
    """Replay the n = 3 case: a witness at k = 2/3 and the trace bound beyond it.

    ``perturb`` shifts one entry of the witness unitary; it exists so the
    failure path can be exercised.
    """
    rep = RunReport("verify-lambda3", {"perturb": perturb})
    B3 = katz_block(3)
    U = witness_unitary_3()
    U[0, 0] += perturb
    rep.check("B3 is an extreme symmetric bistochastic matrix",
              is_extreme_symmetric_bistochastic(B3))
    defect = max(hermitian_defect(U), unitary_defect(U))
    rep.check("witness is Hermitian unitary", defect <= EXACT_TOL, residual=defect)
    target = segment_point(B3, 2 / 3)
    resid = float(np.max(np.abs(np.abs(U) ** 2 - target)))
    rep.check("|U|^2 equals (2/3) B3 + (1/3) W3", resid <= EXACT_TOL, residual=resid)

    slack_at = _slack(segment_point(B3, 2 / 3), "trace_at_least_1/n")
    rep.check("trace bound tight at k = 2/3", abs(slack_at) <= EXACT_TOL, slack=slack_at)
    slack_past = _slack(segment_point(B3, 2 / 3 + STEP), "trace_at_least_1/n")
    rep.check("trace bound rejects k = 2/3 + 1e-6", slack_past < 0, slack=slack_past)
    slack_b3 = _slack(B3, "trace_at_least_1/n")
    rep.check("trace bound rejects B3 itself", slack_b3 < 0, slack=slack_b3)

    verdict = sampled_hull_membership(target, involution_generators(3) + witness_orbit(3))
    rep.check("(2/3) B3 + (1/3) W3 certified inside by LP", verdict.status == "inside",
              residual=verdict.residual)
    rep.certificates["witness_unitary"] = matrix_to_json(U)
    rep.certificates["hull_certificate"] = verdict.to_json()
    return rep.finish()


def verify_lambda4() -> RunReport:
    """Replay the n = 4 case: ``X/4 + 3Y/4`` at k = 2/3 and the diagonal functional beyond it."""
    rep = RunReport("verify-lambda4", {})
    M = katz_extreme_point((3, 1))
    rep.check("Katz{3,1} is an extreme symmetric bistochastic matrix",
              is_extreme_symmetric_bistochastic(M))
    third, ninth = 1 / 3, 1 / 9
    X_expected = third * (np.ones((4, 4)) - np.eye(4))
    Y_expected = block_diag(np.array([[ninth, 4 * ninth, 4 * ninth],
                                      [4 * ninth, ninth, 4 * ninth],
                                      [4 * ninth, 4 * ninth, ninth]]), np.ones((1, 1)))
    w = exact_witnesses(4)
    (wx, X, x_terms), (wy, Y, y_terms) = w.components
    X_rebuilt = sum(t * U.image() for t, U in x_terms)
    rx = float(np.max(np.abs(X_rebuilt - X_expected)))
    rep.check("X is the mean of the three fixed-point-free involutions", rx <= EXACT_TOL,
              residual=rx)
    Y_rebuilt = sum(t * U.image() for t, U in y_terms)
    ry = float(np.max(np.abs(Y_rebuilt - Y_expected)))
    rep.check("Y is H-unistochastic (3x3 witness padded by 1)", ry <= EXACT_TOL, residual=ry)
    target = segment_point(M, 2 / 3)
    rt = float(np.max(np.abs(wx * X_expected + wy * Y_expected - target)))
    rep.check("X/4 + 3Y/4 equals (2/3) M + (1/3) W4", rt <= EXACT_TOL, residual=rt)

    slack_at = _slack(target, "diag_functional_4")
    rep.check("diagonal functional tight at k = 2/3", abs(slack_at) <= EXACT_TOL, slack=slack_at)
    slack_past = _slack(segment_point(M, 2 / 3 + STEP), "diag_functional_4")
    rep.check("diagonal functional rejects k = 2/3 + 1e-6", slack_past < 0, slack=slack_past)
    rep.certificates["weights"] = {"X": wx, "Y": wy}
    rep.certificates["X_involutions"] = [U.label for _, U in x_terms]
    return rep.finish()


def _slack(A, name: str) -> float:
    for c in necessary_conditions(A):
        if c.name == name:
            return c.value
    raise KeyError(name)

