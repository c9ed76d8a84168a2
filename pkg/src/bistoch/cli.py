"""Command-line front end.

Every command prints a JSON report on stdout and a short summary on
stderr. Exit codes: 0 all claims pass, 1 a claim failed, 2 invalid input,
3 a resource cap was hit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import cp_maps, cut_polytope, hull
from .birkhoff import KatzPartition, katz_extreme_point, katz_partitions
from .exceptions import IterationLimitError, ResourceCapError
from .linalg_core import matrix_from_json
from .report import RunReport, verify_lambda3, verify_lambda4

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3
MAX_LAMBDA_DIM = 8


class InputError(Exception):
    pass


def _default_seed() -> int:
    try:
        return int(os.environ.get("BISTOCH_SEED", "0"))
    except ValueError:
        return 0


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_matrix(path: str) -> np.ndarray:
    try:
        return matrix_from_json(_load_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed matrix in {path}: {exc}") from exc


def cmd_verify_lambda3(args) -> RunReport:
    return verify_lambda3(args.perturb)


def cmd_verify_lambda4(args) -> RunReport:
    return verify_lambda4()


def cmd_cut_membership(args) -> RunReport:
    rep = RunReport("cut-membership", {"input": args.input, "shrink": args.shrink, "tol": args.tol})
    C = _load_matrix(args.input)
    try:
        C = cut_polytope.validate_correlation(C)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.shrink is not None:
        if not 0 <= args.shrink <= 1:
            raise InputError("--shrink must lie in [0, 1]")
        C = cut_polytope.shrink(C, args.shrink)
    dist = cut_polytope.cut_membership(C, args.tol)
    if dist is None:
        rep.note("membership", feasible=False,
                 triangle_bound=cut_polytope.triangle_bound(C))
        return rep.finish()
    rep.note("membership", feasible=True)
    f = cut_polytope.certificate_from_distribution(dist)
    rep.check("certificate passes the Walsh test", cut_polytope.verify_certificate(f, C, 10 * args.tol),
              walsh_min=float(f.walsh().min()))
    rebuilt = sum(w * S for w, S in cut_polytope.rank_one_terms(dist))
    resid = float(np.max(np.abs(rebuilt - C)))
    rep.check("rank-one terms reconstruct the matrix", resid <= 1e-8, residual=resid)
    rep.certificates["cut_distribution"] = dist.to_json()
    rep.certificates["walsh_certificate"] = f.to_json()
    return rep.finish()


def cmd_estimate_lambda(args) -> RunReport:
    rep = RunReport("estimate-lambda", {"n": args.n, "partition": args.partition,
                                        "samples": args.samples, "resolution": args.resolution},
                    seed=args.seed)
    if args.n > MAX_LAMBDA_DIM:
        raise ResourceCapError(f"estimate-lambda supports n <= {MAX_LAMBDA_DIM}")
    try:
        part = KatzPartition.parse(args.partition)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if part.n != args.n:
        raise InputError(f"partition {args.partition} does not sum to {args.n}")
    M = katz_extreme_point(part)
    b = hull.estimate_lambda(args.n, M, args.samples, args.seed, args.resolution)
    rep.check("lower <= upper", b.lower <= b.upper + 1e-12, lower=b.lower, upper=b.upper)
    if args.n in (3, 4) and max(part.parts) >= 3:
        rep.check("bracket contains 2/3", b.lower - 1e-12 <= 2 / 3 <= b.upper + 1e-12,
                  lower=b.lower, upper=b.upper)
    rep.certificates["bracket"] = b.to_json()
    return rep.finish()


_PIPELINE_RESIDUALS = {
    "fourier_shift": "fourier_shift_residual",
    "hermitian_unitary_terms": "hermitian_unitary_defect",
    "delta_matches_target": "delta_residual",
    "map_identity": "map_identity_residual",
}


def cmd_pipeline(args) -> RunReport:
    rep = RunReport("pipeline", {"m": args.m, "q": args.q, "rho": args.rho})
    try:
        out = cp_maps.fourier_pipeline(args.m, args.q, args.rho)
    except ResourceCapError:
        raise
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if out.status == "infeasible_rho":
        rep.note("shrunk correlation matrix outside the rank-one hull", feasible=False, rho=args.rho)
    for name, ok in out.passed.items():
        key = _PIPELINE_RESIDUALS.get(name)
        values = {"residual": out.checks[key]} if key in out.checks else {}
        rep.check(name.replace("_", " "), ok, **values)
    rep.certificates["pipeline"] = out.to_json()
    return rep.finish()


def _load_map(path: str) -> cp_maps.KrausMap:
    obj = _load_json(path)
    try:
        if isinstance(obj, dict) and "terms" in obj:
            return cp_maps.KrausMap.from_json(obj)
        return cp_maps.schur_map(matrix_from_json(obj))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"cannot build a map from {path}: {exc}") from exc


def cmd_selfdual_check(args) -> RunReport:
    rep = RunReport("selfdual-check", {"input": args.input, "tol": args.tol})
    phi = _load_map(args.input)
    props = cp_maps.map_properties(phi, args.tol)
    rep.note("map properties", **props.to_json())
    if props.self_dual:
        H = cp_maps.hermitian_kraus(phi, args.tol)
        herm = max(float(np.max(np.abs(V - V.conj().T))) for V in H.operators)
        dist = cp_maps.choi_distance(H, phi)
        rep.check("Hermitian Kraus family is Hermitian", herm <= 1e-10, residual=herm)
        rep.check("Hermitian Kraus family has the same Choi matrix", dist <= 1e-10, residual=dist)
        rep.certificates["hermitian_kraus"] = H.to_json()
    try:
        C = cp_maps.extract_schur(phi, args.tol)
    except ValueError:
        return rep.finish()
    if np.max(np.abs(C.imag)) <= args.tol and phi.n <= cut_polytope.MAX_CUT_DIM:
        Creal = C.real
        d = cut_polytope.cut_membership(Creal, args.tol)
        rep.note("Schur multiplier in the rank-one hull", mixed_hermitian_unitary=d is not None)
        if d is not None:
            mhu = cp_maps.mixed_hermitian_from_cut(d)
            dist = cp_maps.choi_distance(mhu.as_kraus(), phi)
            rep.check("mixed Hermitian unitary form reproduces the map", dist <= 1e-8, residual=dist)
            rep.certificates["mixed_hermitian_unitary"] = mhu.to_json()
        else:
            rep.note("triangle facet bound", t=cut_polytope.triangle_bound(Creal))
    return rep.finish()


def cmd_decompose_2x2(args) -> RunReport:
    rep = RunReport("decompose-2x2", {"input": args.input})
    obj = _load_json(args.input)
    try:
        if isinstance(obj, dict) and "terms" in obj:
            phi = cp_maps.KrausMap.from_json(obj)
            mhu = cp_maps.decompose_selfdual_2x2(phi)
        else:
            U = matrix_from_json(obj)
            mhu = cp_maps.symmetrized_unitary_2x2(U)
            phi = cp_maps.symmetrize(cp_maps.conjugation_map(U))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    dist = cp_maps.choi_distance(mhu.as_kraus(), phi)
    rep.check("decomposition reproduces the symmetrised map", dist <= 1e-10, residual=dist)
    defect = max(max(float(np.max(np.abs(H.matrix - H.matrix.conj().T))),
                     float(np.max(np.abs(H.matrix @ H.matrix - np.eye(2))))) for _, H in mhu.terms)
    rep.check("every term is Hermitian unitary", defect <= 1e-10, residual=defect)
    rep.note("weights", p=[p for p, _ in mhu.terms])
    rep.certificates["decomposition"] = mhu.to_json()
    return rep.finish()


def cmd_compare(args) -> RunReport:
    """Lambda and rho brackets side by side; nothing is asserted about their equality."""
    rep = RunReport("compare", {"n": args.n, "samples": args.samples,
                                "resolution": args.resolution}, seed=args.seed)
    if args.n > MAX_LAMBDA_DIM:
        raise ResourceCapError(f"compare supports n <= {MAX_LAMBDA_DIM}")
    lower, upper = 1.0, 1.0
    per_partition = {}
    for part in katz_partitions(args.n):
        if max(part.parts) < 3:
            continue
        b = hull.estimate_lambda(args.n, katz_extreme_point(part), args.samples, args.seed,
                                 args.resolution)
        per_partition["+".join(map(str, part.parts))] = [b.lower, b.upper]
        lower, upper = min(lower, b.lower), min(upper, b.upper)
    rho = cut_polytope.estimate_rho(args.n, args.n, samples=args.samples // 10 + 1,
                                    seed=args.seed, resolution=max(args.resolution, 1e-4))
    rep.note("lambda bracket", lower=lower, upper=upper)
    rep.note("rho bracket", lower=rho.lower, upper=rho.upper)
    slack = max(args.resolution, 1e-4)
    rep.note("brackets overlap", overlap=max(lower, rho.lower) <= min(upper, rho.upper) + slack)
    rep.certificates["lambda_by_partition"] = per_partition
    return rep.finish()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bistoch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-lambda3", help="replay the n = 3 witness and trace bound")
    p.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify_lambda3)

    p = sub.add_parser("verify-lambda4", help="replay the n = 4 witness and diagonal functional")
    p.set_defaults(func=cmd_verify_lambda4)

    p = sub.add_parser("cut-membership", help="decide rank-one correlation hull membership")
    p.add_argument("--input", required=True)
    p.add_argument("--shrink", type=float)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_cut_membership)

    p = sub.add_parser("estimate-lambda", help="bracket lambda for one Katz extreme point")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--partition", required=True, help="block sizes, e.g. 3,1")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--resolution", type=float, default=1e-3)
    p.set_defaults(func=cmd_estimate_lambda)

    p = sub.add_parser("pipeline", help="certify rho M + (1 - rho) W_n via a mixed Hermitian unitary map")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--rho", type=float, default=0.5)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("selfdual-check", help="self-duality, Hermitian Kraus form, Schur-map hull test")
    p.add_argument("--input", required=True, help="Kraus map JSON or a correlation matrix")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_selfdual_check)

    p = sub.add_parser("decompose-2x2", help="mixed Hermitian unitary form of a symmetrised 2x2 unitary")
    p.add_argument("--input", required=True, help="2x2 unitary matrix JSON or Kraus map JSON")
    p.set_defaults(func=cmd_decompose_2x2)

    p = sub.add_parser("compare", help="lambda and rho brackets for one n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--resolution", type=float, default=1e-3)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rep = args.func(args)
    except (ResourceCapError, IterationLimitError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InputError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(rep.dumps())
    print(rep.summary(), file=sys.stderr)
    return EXIT_PASS if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
