import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from bistoch.cp_maps import KrausMap
from bistoch.linalg_core import random_unitary


def all_sign_vectors(n):
    return np.array(list(itertools.product([1.0, -1.0], repeat=n)))


def exhaustive_cut_feasible(C, tol=1e-8):
    """Independent oracle: HiGHS over all 2^n sign vectors (no symmetry reduction)."""
    n = C.shape[0]
    S = all_sign_vectors(n)
    iu = np.triu_indices(n, 1)
    rows = [np.ones(len(S))] + [S[:, i] * S[:, j] for i, j in zip(*iu)]
    b = np.concatenate([[1.0], C[iu]])
    res = linprog(np.zeros(len(S)), A_eq=np.array(rows), b_eq=b, bounds=(0, None),
                  method="highs")
    if res.status != 0:
        return False
    return bool(np.max(np.abs(np.array(rows) @ res.x - b)) <= tol)


def random_doubly_stochastic_map(n, terms, rng):
    """Mixture of unitary conjugations: completely positive and doubly stochastic."""
    w = rng.dirichlet(np.ones(terms))
    ops = [random_unitary(n, int(rng.integers(2**32))) for _ in range(terms)]
    return KrausMap(n, tuple((float(a), U) for a, U in zip(w, ops)))


def random_unit_columns(n, r, rng):
    A = rng.standard_normal((r, n))
    return A / np.linalg.norm(A, axis=0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[ACCEPTANCE]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = config.stash.get(ACCEPTANCE, [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, seconds, detail in sorted(rows):
        terminalreporter.write_line(
            f"criterion {num}: {'PASS' if ok else 'FAIL'}  {title}  ({seconds:.2f} s)  {detail}")
