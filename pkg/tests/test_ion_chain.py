import numpy as np
import pytest

from ionspec.ion_chain import (
    InstabilityError,
    ResonanceError,
    TrapConfig,
    coupling_from_sidebands,
    equilibrium_positions,
    fit_power_law,
    transverse_modes,
    tune_detuning,
)
from ionspec.lattice import power_law_couplings

TWO_PI = 2 * np.pi


def trap(n=7, detuning=TWO_PI * 20e3, **kw):
    args = dict(axial_freq=TWO_PI * 0.4e6, transverse_freq=TWO_PI * 2.7e6,
                rabi=TWO_PI * 100e3, lamb_dicke=0.05)
    args.update(kw)
    return TrapConfig(n, detuning=detuning, **args)


def test_two_and_three_ion_equilibria():
    np.testing.assert_allclose(equilibrium_positions(2), [-(0.25 ** (1 / 3)), 0.25 ** (1 / 3)], atol=1e-12)
    np.testing.assert_allclose(equilibrium_positions(3), [-(1.25 ** (1 / 3)), 0.0, 1.25 ** (1 / 3)],
                               atol=1e-12)
    assert equilibrium_positions(1) == pytest.approx([0.0])


@pytest.mark.parametrize("n", [4, 9, 20])
def test_equilibrium_force_balance_and_symmetry(n):
    u = equilibrium_positions(n)
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, np.inf)
    force = u - np.sum(np.sign(d) / d**2, axis=1)
    assert np.max(np.abs(force)) < 1e-10
    np.testing.assert_allclose(u, -u[::-1], atol=1e-13)
    assert np.all(np.diff(u) > 0)


def test_two_ion_mode_frequencies():
    t = trap(2)
    m = transverse_modes(t)
    np.testing.assert_allclose(m.frequencies, [t.transverse_freq,
                                               np.sqrt(t.transverse_freq**2 - t.axial_freq**2)], rtol=1e-12)
    np.testing.assert_allclose(np.abs(m.vectors), np.full((2, 2), 1 / np.sqrt(2)), atol=1e-12)


def test_mode_vectors_orthonormal_and_descending():
    m = transverse_modes(trap(7))
    np.testing.assert_allclose(m.vectors.T @ m.vectors, np.eye(7), atol=1e-12)
    assert np.all(np.diff(m.frequencies) < 0)


def test_two_ion_sideband_coupling_by_hand():
    t = trap(2, detuning=TWO_PI * 30e3)
    wt = t.transverse_freq
    wr = np.sqrt(wt**2 - t.axial_freq**2)
    omega, eta = t.rabi[0], t.lamb_dicke
    expected = omega**2 / 4 * eta**2 / 2 * (1 / t.detuning - (wt / wr) / (t.detuning + wt - wr))
    c = coupling_from_sidebands(t)
    assert c.j[0, 1] == pytest.approx(expected, rel=1e-12)


def test_instability_and_resonance_errors():
    with pytest.raises(InstabilityError):
        transverse_modes(trap(7, axial_freq=TWO_PI * 1e6))
    with pytest.raises(ResonanceError):
        coupling_from_sidebands(trap(3, detuning=1e-9))


def test_fit_recovers_exact_power_law():
    j0, alpha = fit_power_law(power_law_couplings(8, -3.0, 1.7))
    assert j0 == pytest.approx(-3.0, rel=1e-12)
    assert alpha == pytest.approx(1.7, rel=1e-12)


def test_alpha_grows_with_detuning_and_tuning_hits_target():
    alphas = [fit_power_law(coupling_from_sidebands(trap(7, detuning=TWO_PI * f)))[1]
              for f in (1e3, 1e4, 1e5, 1e6)]
    assert np.all(np.diff(alphas) > 0)
    delta = tune_detuning(trap(7), 1.1)
    _, alpha = fit_power_law(coupling_from_sidebands(trap(7, detuning=delta)))
    assert alpha == pytest.approx(1.1, abs=1e-5)
    with pytest.raises(ValueError):
        tune_detuning(trap(7), 50.0)
