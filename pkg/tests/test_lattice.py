from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionspec.lattice import (
    CouplingMatrix,
    build_full_ising,
    build_full_xy,
    build_xy_block,
    build_xy_blocks,
    enumerate_subspace,
    popcount,
    popcount_array,
    power_law_couplings,
)
from oracles import conserving_part, ising_dense, power_law, xy_dense


def test_coupling_matrix_validation():
    with pytest.raises(ValueError):
        CouplingMatrix(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        CouplingMatrix(np.array([[1.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        CouplingMatrix(np.array([[0.0, np.nan], [np.nan, 0.0]]))
    c = CouplingMatrix.from_array([[5.0, 1.0], [3.0, 5.0]])
    assert np.array_equal(c.j, [[0.0, 2.0], [2.0, 0.0]])


def test_power_law_matches_oracle_and_nearest_neighbour_limit():
    c = power_law_couplings(6, 2.0, 1.3)
    np.testing.assert_allclose(c.j, power_law(6, 2.0, 1.3), rtol=1e-14)
    assert c.j_max == pytest.approx(2.0)
    nn = power_law_couplings(5, 1.0, np.inf).j
    assert np.array_equal(nn, np.diag(np.ones(4), 1) + np.diag(np.ones(4), -1))


@pytest.mark.parametrize("n,k", [(1, 0), (1, 1), (5, 2), (8, 4), (12, 3), (10, 10)])
def test_subspace_size_order_and_popcount(n, k):
    basis = enumerate_subspace(n, k)
    assert len(basis) == comb(n, k)
    assert np.all(np.diff(basis.masks) > 0)
    assert np.all(popcount_array(basis.masks) == k)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 14).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
def test_rank_unrank_round_trip(nk):
    n, k = nk
    basis = enumerate_subspace(n, k)
    for idx in range(0, len(basis), max(1, len(basis) // 17)):
        mask = basis.unrank(idx)
        assert basis.rank(mask) == idx
        assert popcount(mask) == k
    np.testing.assert_array_equal(basis.index_of(basis.masks), np.arange(len(basis)))


def test_two_spin_ising_eigenvalues():
    j, b = 0.7, 3.0
    c = CouplingMatrix(np.array([[0.0, j], [j, 0.0]]))
    lam = np.linalg.eigvalsh(build_full_ising(c, b).dense())
    r = np.sqrt(4 * b**2 + j**2)
    np.testing.assert_allclose(lam, sorted([-r, -j, j, r]), atol=1e-13)


@pytest.mark.parametrize("n,alpha", [(3, 1.1), (5, 0.8), (6, np.inf)])
def test_full_matrices_match_kronecker_oracle(n, alpha):
    c = power_law_couplings(n, 1.3, alpha)
    np.testing.assert_allclose(build_full_ising(c, 4.0).dense(), ising_dense(c.j, 4.0), atol=1e-13)
    np.testing.assert_allclose(build_full_xy(c, 4.0).dense(), xy_dense(c.j, 4.0), atol=1e-13)


def test_xy_is_conserving_part_of_ising():
    c = power_law_couplings(5, 1.0, 1.5)
    np.testing.assert_allclose(xy_dense(c.j, 2.0), conserving_part(ising_dense(c.j, 2.0)), atol=1e-14)


def test_block_diagonal_and_hop_amplitude():
    c = power_law_couplings(4, 1.0, 1.0)
    blk = build_xy_block(c, 2.5, enumerate_subspace(4, 1))
    # One excitation: diagonal B(2n - N) and hops equal to J_ik.
    np.testing.assert_allclose(blk.matrix, c.j + 2.5 * (2 - 4) * np.eye(4))
    blocks = build_xy_blocks(c, 2.5)
    assert [b.n_excitations for b in blocks] == list(range(5))
    assert blocks[0].matrix[0, 0] == pytest.approx(-10.0)


def test_full_ising_size_guard():
    with pytest.raises(ValueError):
        build_full_ising(power_law_couplings(17, 1.0, 1.0), 1.0)
