from math import comb

import numpy as np
import pytest
from scipy.linalg import expm

from ionspec import dynamics as dyn
from ionspec.lattice import CouplingMatrix, build_full_xy, build_xy_blocks, power_law_couplings
from ionspec.quasiparticles import sine_mode_matrix
from oracles import xy_dense


def test_uniform_angles_give_binomial_sectors():
    n, th = 6, 0.37
    prep = dyn.build_product_state(np.full(n, th))
    expected = [comb(n, k) * np.sin(th) ** (2 * k) * np.cos(th) ** (2 * (n - k)) for k in range(n + 1)]
    np.testing.assert_allclose(prep.sector_probs, expected, atol=1e-14)
    assert prep.state.norm() == pytest.approx(1.0)


@pytest.mark.parametrize("gamma,expected", [
    (0.7, [0.43, 0.42]),
    (1.4, [0.08, 0.33, 0.41]),
    (0.4, [0.74, 0.24]),
])
def test_pair_state_sector_weights_reference_values(gamma, expected):
    a = sine_mode_matrix(7)
    p = dyn.build_product_state(dyn.prep_angles_pair(gamma, a[:, 0], a[:, 6])).sector_probs
    np.testing.assert_allclose(p[: len(expected)], expected, atol=0.005)


def test_single_mode_state_vacuum_weight():
    a = sine_mode_matrix(7)[:, 6]
    p = dyn.build_product_state(dyn.prep_angles_single(0.4, a)).sector_probs
    # prod_j 1/(1 + gamma^2 A_j^2)
    assert p[0] == pytest.approx(np.prod(1 / (1 + 0.16 * a**2)), abs=1e-14)
    assert p[0] == pytest.approx(0.854, abs=5e-4)


def test_two_spin_population_transfer():
    j = 0.8
    c = CouplingMatrix(np.array([[0.0, j], [j, 0.0]]))
    psi0 = dyn.StateVector(2, np.array([0, 1, 0, 0], dtype=complex))
    traj = dyn.evolve(psi0, build_xy_blocks(c, 5.0), [0.0, np.pi / (2 * j)])
    np.testing.assert_allclose(traj.probabilities()[1], [0, 0, 1, 0], atol=1e-14)


def test_block_and_full_evolution_agree_with_matrix_exponential():
    c = power_law_couplings(5, 1.0, 1.1)
    rng = np.random.default_rng(3)
    psi = rng.normal(size=32) + 1j * rng.normal(size=32)
    psi /= np.linalg.norm(psi)
    state = dyn.StateVector(5, psi)
    times = np.linspace(0, 2.0, 5)
    a = dyn.evolve(state, build_xy_blocks(c, 3.0), times).amplitudes
    b = dyn.evolve(state, build_full_xy(c, 3.0), times).amplitudes
    h = xy_dense(c.j, 3.0)
    ref = np.array([expm(-1j * h * t) @ psi for t in times])
    np.testing.assert_allclose(a, ref, atol=1e-11)
    np.testing.assert_allclose(b, ref, atol=1e-11)
    np.testing.assert_allclose(np.linalg.norm(a, axis=1), 1.0, atol=1e-12)
    e = [dyn.energy(dyn.StateVector(5, v), build_xy_blocks(c, 3.0)) for v in a]
    np.testing.assert_allclose(e, e[0], atol=1e-11)


def test_evolve_rejects_uncovered_sectors():
    c = power_law_couplings(3, 1.0, 1.0)
    prep = dyn.build_product_state([0.3, 0.2, 0.1])
    with pytest.raises(ValueError):
        dyn.evolve(prep.state, build_xy_blocks(c, 1.0, [0, 1]), [0.0, 1.0])


@pytest.mark.parametrize("convention,rate", [("supplement", 0.0), ("main", 4.0)])
def test_rotating_frame_removes_field_precession(convention, rate):
    b = 1.7
    c = CouplingMatrix(np.zeros((1, 1)))
    psi0 = dyn.StateVector(1, np.array([1, 1], dtype=complex) / np.sqrt(2))
    times = np.linspace(0, 3, 7)
    traj = dyn.evolve(psi0, build_xy_blocks(c, b), times)
    xy = dyn.transverse_expectations(traj, dyn.RotatingFrame(b, convention))[:, 0]
    np.testing.assert_allclose(xy, np.exp(1j * rate * b * times), atol=1e-13)


def test_postselected_magnetization_identity():
    gamma, a = 0.3, sine_mode_matrix(7)[:, 2]
    prep = dyn.build_product_state(dyn.prep_angles_single(gamma, a))
    c2 = np.prod(np.cos(prep.angles)) ** 2
    sz = dyn.sigma_z_expectations(prep.state.probabilities(), 7, sector=1)
    np.testing.assert_allclose(sz, c2 * gamma**2 * (2 * a**2 - 1), atol=1e-14)
    j = 4
    direct = dyn.postselect_expectations(prep.state, 1, dyn.sigma_z_diagonal(7, j))
    assert direct == pytest.approx(sz[j], abs=1e-15)


def test_pair_projectors_consistent():
    prep = dyn.build_product_state(np.linspace(0.1, 1.2, 5))
    p = prep.state.probabilities()
    mat = dyn.pair_projector_expectations(p, 5)
    s = np.sin(prep.angles) ** 2
    expected = np.outer(s, s)
    np.fill_diagonal(expected, 0.0)
    np.testing.assert_allclose(mat, expected, atol=1e-14)
    assert dyn.pair_projector_expect(prep.state, 1, 3) == pytest.approx(mat[1, 3])


def test_sampling_is_seeded_and_converges():
    prep = dyn.build_product_state([0.5, 0.9, 0.2])
    p = prep.state.probabilities()
    probs = np.vstack([p, p])
    a = dyn.sample_probabilities(probs, 500, seed=11)
    b = dyn.sample_probabilities(probs, 500, seed=11)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a[0], a[1])
    np.testing.assert_allclose(a.sum(axis=1), 1.0)
    big = dyn.sample_probabilities(p, 10**6, seed=1)[0]
    assert np.max(np.abs(big - p)) < 3e-3
    counts = dyn.sample_shots(prep.state, 1000, seed=2)
    assert sum(counts.values()) == 1000
    with pytest.raises(ValueError):
        dyn.sample_probabilities(p, 0, seed=0)


def test_ising_approaches_xy_as_field_grows():
    from ionspec.lattice import build_full_ising

    c = power_law_couplings(4, 1.0, 1.1)
    a = sine_mode_matrix(4)
    prep = dyn.build_product_state(dyn.prep_angles_pair(0.3, a[:, 0], a[:, 3]))
    times = np.linspace(0, 5.0, 51)
    gaps = []
    for b in (10.0, 40.0, 160.0):
        zi = dyn.sigma_z_expectations(dyn.evolve(prep.state, build_full_ising(c, b), times).probabilities(), 4)
        zx = dyn.sigma_z_expectations(dyn.evolve(prep.state, build_xy_blocks(c, b), times).probabilities(), 4)
        gaps.append(np.max(np.abs(zi - zx)))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.01
