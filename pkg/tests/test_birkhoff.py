import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bistoch.birkhoff import (KatzPartition, check_bistochastic, enumerate_symmetric_vertices,
                              extremality_direction, flat_matrix, is_extreme_symmetric_bistochastic,
                              katz_block, katz_extreme_point, katz_orbit, katz_partitions,
                              permutation_matrix, segment_point, validate_symmetric_bistochastic)
from bistoch.exceptions import InvalidKatzBlockError, InvalidPartitionError, ResourceCapError
from bistoch.hull import default_generators, sampled_hull_membership


def brute_partitions(n):
    """Partitions of n into odd parts or 2s, by filtering all compositions."""
    out = set()
    for k in range(1, n + 1):
        for combo in itertools.product(range(1, n + 1), repeat=k):
            if sum(combo) == n and all(p % 2 == 1 or p == 2 for p in combo):
                out.add(tuple(sorted(combo, reverse=True)))
    return out


def as_set(mats):
    return {tuple(np.round(M, 9).ravel()) for M in mats}


def test_flat_matrix():
    np.testing.assert_array_equal(flat_matrix(3), np.full((3, 3), 1 / 3))
    np.testing.assert_array_equal(flat_matrix(1), [[1.0]])
    np.testing.assert_allclose(flat_matrix(5).sum(axis=1), 1)


def test_katz_blocks():
    np.testing.assert_array_equal(katz_block(3), [[0, .5, .5], [.5, 0, .5], [.5, .5, 0]])
    np.testing.assert_array_equal(katz_block(2), [[0, 1], [1, 0]])
    for k in (4, 6, 0):
        with pytest.raises(InvalidKatzBlockError):
            katz_block(k)


def test_katz_partitions_counts():
    assert [p.parts for p in katz_partitions(4)] == [(3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    assert len(katz_partitions(5)) == 6
    assert {p.parts for p in katz_partitions(5)} == {
        (5,), (3, 2), (3, 1, 1), (2, 2, 1), (2, 1, 1, 1), (1, 1, 1, 1, 1)}
    assert [p.parts for p in katz_partitions(1)] == [(1,)]
    for n in range(1, 9):
        assert {p.parts for p in katz_partitions(n)} == brute_partitions(n)


def test_partition_validation():
    assert KatzPartition.parse("1,3").parts == (3, 1)
    assert KatzPartition((3, 1)).n == 4
    for bad in ("4", "3,x", ""):
        with pytest.raises(InvalidPartitionError):
            KatzPartition.parse(bad)


def test_katz_extreme_points():
    np.testing.assert_array_equal(katz_extreme_point((3, 1, 1)),
                                  np.block([[katz_block(3), np.zeros((3, 2))],
                                            [np.zeros((2, 3)), np.eye(2)]]))
    M = katz_extreme_point((3, 1))
    assert M[3, 3] == 1 and np.all(np.diag(M)[:3] == 0)
    np.testing.assert_array_equal(katz_extreme_point((1, 1, 1)), np.eye(3))
    with pytest.raises(InvalidPartitionError):
        katz_extreme_point((3, 1), perm=[0, 1, 2])


def test_check_bistochastic():
    assert check_bistochastic(flat_matrix(4)) == (True, True)
    for perm in itertools.permutations(range(4)):
        P = permutation_matrix(perm)
        involution = all(perm[perm[i]] == i for i in range(4))
        assert check_bistochastic(P) == (True, involution)
    assert not check_bistochastic(np.array([[0.6, 0.6], [0.4, 0.4]])).doubly_stochastic
    with pytest.raises(ValueError):
        validate_symmetric_bistochastic(np.array([[0.6, 0.6], [0.4, 0.4]]))


def test_extremality():
    assert is_extreme_symmetric_bistochastic(katz_block(3))
    assert not is_extreme_symmetric_bistochastic(flat_matrix(3))
    a = katz_extreme_point((3, 1))
    b = katz_extreme_point((2, 2))
    mid = (a + b) / 2
    assert not is_extreme_symmetric_bistochastic(mid)
    D = extremality_direction(mid)
    assert D is not None and np.max(np.abs(D)) > 0
    np.testing.assert_allclose(D, D.T)
    np.testing.assert_allclose(D.sum(axis=1), 0, atol=1e-12)
    eps = 0.5 * mid[mid > 1e-9].min() / np.max(np.abs(D))
    for sign in (1, -1):
        assert check_bistochastic(mid + sign * eps * D) == (True, True)
    assert extremality_direction(katz_block(3)) is None


def test_every_katz_point_is_extreme():
    for n in range(1, 8):
        for part in katz_partitions(n):
            assert is_extreme_symmetric_bistochastic(katz_extreme_point(part))


@pytest.mark.parametrize("n,count", [(1, 1), (2, 2), (3, 5), (4, 14)])
def test_orbit_equals_vertex_set(n, count):
    orbit = as_set(katz_orbit(n))
    vertices = as_set(enumerate_symmetric_vertices(n))
    assert orbit == vertices
    assert len(orbit) == count


def test_enumeration_cap():
    with pytest.raises(ResourceCapError):
        enumerate_symmetric_vertices(9)


def test_segment_points():
    np.testing.assert_allclose(segment_point(katz_block(3), 2 / 3),
                               np.array([[1, 4, 4], [4, 1, 4], [4, 4, 1]]) / 9, atol=1e-15)
    np.testing.assert_array_equal(segment_point(katz_block(3), 0), flat_matrix(3))
    M = katz_extreme_point((3, 1))
    for k in np.linspace(0, 1, 7):
        d = np.diag(segment_point(M, k))
        np.testing.assert_allclose(d, [(1 - k) / 4] * 3 + [(1 + 3 * k) / 4], atol=1e-15)
    with pytest.raises(ValueError):
        segment_point(M, 1.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.data(), st.floats(0, 1))
def test_segment_point_is_symmetric_bistochastic(n, data, k):
    part = data.draw(st.sampled_from(katz_partitions(n)))
    perm = data.draw(st.permutations(range(n)))
    chk = check_bistochastic(segment_point(katz_extreme_point(part, perm), k))
    assert chk.doubly_stochastic and chk.symmetric


@pytest.mark.parametrize("n", [3, 4])
def test_membership_monotone_along_segment(n):
    gens = default_generators(n, 40, seed=11)
    for part in katz_partitions(n):
        M = katz_extreme_point(part)
        ks = np.linspace(0, 1, 11)
        inside = [sampled_hull_membership(segment_point(M, k), gens).status == "inside" for k in ks]
        assert inside[0]
        first_out = inside.index(False) if False in inside else len(ks)
        assert all(inside[:first_out]) and not any(inside[first_out:])
