import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bistoch.exceptions import DimensionError, IterationLimitError
from bistoch.lp import FeasibilityProblem, solve_feasibility, verify_solution


def vertex_oracle(E, b, tol=1e-9):
    """Feasible iff some basic solution on independent columns is nonnegative."""
    m, N = E.shape
    if np.max(np.abs(b)) <= tol:
        return True
    for k in range(1, min(m, N) + 1):
        for cols in itertools.combinations(range(N), k):
            sub = E[:, cols]
            if np.linalg.matrix_rank(sub) < k:
                continue
            x, *_ = np.linalg.lstsq(sub, b, rcond=None)
            if x.min() >= -tol and np.max(np.abs(sub @ x - b)) <= tol:
                return True
    return False


def test_simple_feasible():
    p = FeasibilityProblem(np.array([[1.0, 1.0]]), np.array([1.0]))
    r = solve_feasibility(p)
    assert r.feasible and verify_solution(p, r.x)
    assert r.x.sum() == pytest.approx(1.0)


def test_simple_infeasible():
    r = solve_feasibility(FeasibilityProblem(np.array([[1.0, 1.0]]), np.array([-1.0])))
    assert r.status == "infeasible" and r.x is None and r.phase1_objective > 1e-9


def test_cut_moment_system_n3():
    # sign classes (+++), (++-), (+-+), (-++) as canonical vectors starting with +
    S = np.array([[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]], dtype=float)
    pairs = [(0, 1), (0, 2), (1, 2)]
    E = np.vstack([np.ones(4)] + [S[:, i] * S[:, j] for i, j in pairs])
    b = np.array([1.0, -1 / 3, -1 / 3, -1 / 3])
    r = solve_feasibility(FeasibilityProblem(E, b))
    assert r.feasible
    # the system is square and nonsingular, so the solution is unique
    np.testing.assert_allclose(r.x, [0, 1 / 3, 1 / 3, 1 / 3], atol=1e-12)
    np.testing.assert_allclose(np.linalg.solve(E, b), r.x, atol=1e-12)


def test_verify_solution_rejections():
    p = FeasibilityProblem(np.array([[1.0, 1.0]]), np.array([1.0]))
    assert not verify_solution(p, [1.1, -0.1])
    assert not verify_solution(p, [1.0 + 1e-6, 0.0], tol=1e-9)
    assert verify_solution(p, [0.25, 0.75])
    with pytest.raises(DimensionError):
        verify_solution(p, [1.0])


def test_validation():
    with pytest.raises(DimensionError):
        FeasibilityProblem(np.ones((2, 3)), np.ones(3))
    with pytest.raises(ValueError):
        FeasibilityProblem(np.array([[np.nan]]), np.ones(1))
    with pytest.raises(ValueError):
        solve_feasibility(FeasibilityProblem(np.ones((1, 1)), np.ones(1)), tol=0)


def test_iteration_cap_is_distinct():
    E = np.array([[1.0, 2.0, 3.0], [1.0, -1.0, 1.0]])
    with pytest.raises(IterationLimitError):
        solve_feasibility(FeasibilityProblem(E, np.array([4.0, 1.0])), max_iter=0)


def test_json_round_trip():
    p = FeasibilityProblem(np.array([[1.0, 2.0], [0.5, 0.0]]), np.array([1.0, 0.25]))
    q = FeasibilityProblem.from_json(p.to_json())
    np.testing.assert_array_equal(p.E, q.E)
    np.testing.assert_array_equal(p.b, q.b)


def test_degenerate_cut_problem_large():
    # identity correlation at n = 12 is highly degenerate (b = e_1)
    from bistoch.cut_polytope import cut_problem
    p, _ = cut_problem(np.eye(12))
    r = solve_feasibility(p)
    assert r.feasible and verify_solution(p, r.x, 1e-8)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 4), st.integers(1, 6), st.integers(0, 2**32 - 1),
       st.sampled_from(["dantzig", "bland"]))
def test_agrees_with_vertex_oracle(m, N, seed, pricing):
    rng = np.random.default_rng(seed)
    E = rng.integers(-3, 4, size=(m, N)).astype(float)
    b = rng.integers(-3, 4, size=m).astype(float)
    p = FeasibilityProblem(E, b)
    r = solve_feasibility(p, pricing=pricing)
    assert r.feasible == vertex_oracle(E, b)
    if r.feasible:
        assert r.x.min() >= -1e-12 and r.residual <= 1e-9
        assert verify_solution(p, r.x, 1e-8)
    else:
        assert r.phase1_objective > 1e-9 or r.residual > 1e-9
    again = solve_feasibility(p, pricing=pricing)
    assert again.status == r.status
    if r.feasible:
        np.testing.assert_array_equal(again.x, r.x)
