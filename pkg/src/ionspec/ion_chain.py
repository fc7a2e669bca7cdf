"""Trapped-ion chain: equilibrium positions, transverse modes and sideband couplings.

Positions are in the dimensionless length unit ``(e^2 / 4 pi eps0 M wz^2)^(1/3)``,
so no physical constants are needed. Frequencies are rad/s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import CouplingMatrix

NEWTON_DAMPING = 0.5
NEWTON_MAX_ITER = 200
GRADIENT_TOL = 1e-12


class ConvergenceError(RuntimeError):
    pass


class InstabilityError(ValueError):
    """A transverse mode has non-positive curvature."""


class ResonanceError(ValueError):
    """A sideband denominator vanishes."""


@dataclass(frozen=True)
class TrapConfig:
    n_ions: int
    axial_freq: float
    transverse_freq: float
    rabi: np.ndarray
    lamb_dicke: float
    detuning: float
    mass_scaling: bool = True

    def __post_init__(self):
        rabi = np.broadcast_to(np.asarray(self.rabi, dtype=float), (self.n_ions,)).copy()
        if self.n_ions < 1:
            raise ValueError("n_ions must be positive")
        if self.axial_freq <= 0 or self.transverse_freq <= 0:
            raise ValueError("trap frequencies must be positive")
        if np.any(rabi < 0):
            raise ValueError("Rabi frequencies must be non-negative")
        if self.detuning <= 0:
            raise ValueError("detuning must be positive")
        rabi.setflags(write=False)
        object.__setattr__(self, "rabi", rabi)


@dataclass(frozen=True)
class ModeStructure:
    """Transverse modes, highest frequency first.

    ``vectors[:, m]`` is the normalized displacement of mode ``m`` and
    ``lamb_dicke[j, m]`` the coupling of ion ``j`` to it.
    """

    positions: np.ndarray
    frequencies: np.ndarray
    vectors: np.ndarray
    lamb_dicke: np.ndarray


def _coulomb_gradient(u):
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, np.inf)
    return u - np.sum(np.sign(d) / d**2, axis=1)


def _coulomb_hessian(u):
    d = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(d, np.inf)
    inv3 = 2.0 / d**3
    h = -inv3
    h[np.diag_indices_from(h)] = 1.0 + np.sum(inv3, axis=1)
    return h


def equilibrium_positions(n_ions: int) -> np.ndarray:
    """Stationary point of ``sum u_i^2/2 + sum_{i<k} 1/|u_i - u_k|`` by damped Newton."""
    if n_ions < 1:
        raise ValueError("n_ions must be positive")
    u = 2.0 * (np.arange(n_ions) - (n_ions - 1) / 2.0)
    if n_ions == 1:
        return np.zeros(1)
    for _ in range(NEWTON_MAX_ITER):
        g = _coulomb_gradient(u)
        if np.linalg.norm(g) <= GRADIENT_TOL:
            break
        step = np.linalg.solve(_coulomb_hessian(u), g)
        # Full steps once close; a damped step otherwise. Never let ions cross.
        scale = 1.0 if np.linalg.norm(g) < 1e-3 else NEWTON_DAMPING
        while scale > 1e-6 and np.any(np.diff(u - scale * step) <= 0):
            scale *= 0.5
        u = u - scale * step
    else:
        raise ConvergenceError(
            f"equilibrium search for {n_ions} ions did not converge in {NEWTON_MAX_ITER} steps"
        )
    u = 0.5 * (u - u[::-1])
    return u


def transverse_modes(t: TrapConfig) -> ModeStructure:
    u = equilibrium_positions(t.n_ions)
    beta = (t.transverse_freq / t.axial_freq) ** 2
    d = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(d, np.inf)
    inv3 = 1.0 / d**3
    a = inv3.copy()
    a[np.diag_indices_from(a)] = beta - np.sum(inv3, axis=1)
    lam, vec = np.linalg.eigh(a)
    if np.any(lam <= 0):
        raise InstabilityError(
            f"transverse mode eigenvalue {lam.min():.4g} <= 0: increase the transverse frequency"
        )
    order = np.argsort(lam)[::-1]
    lam, vec = lam[order], vec[:, order]
    for m in range(vec.shape[1]):
        nz = np.flatnonzero(np.abs(vec[:, m]) > 1e-12)
        if vec[nz[0], m] < 0:
            vec[:, m] = -vec[:, m]
    freqs = t.axial_freq * np.sqrt(lam)
    # Center-of-mass mode sits at exactly the transverse trap frequency.
    freqs[0] = t.transverse_freq
    vec[:, 0] = 1.0 / np.sqrt(t.n_ions)
    if t.mass_scaling:
        eta = t.lamb_dicke * vec * np.sqrt(freqs[0] / freqs)[None, :]
    else:
        eta = t.lamb_dicke * vec
    return ModeStructure(u, freqs, vec, eta)


def coupling_from_sidebands(t: TrapConfig, m: ModeStructure | None = None) -> CouplingMatrix:
    """``J_ik = (W_i W_k / 4) sum_m eta_im eta_km / (detuning + w_max - w_m)``."""
    if m is None:
        m = transverse_modes(t)
    denom = t.detuning + m.frequencies[0] - m.frequencies
    if np.any(np.abs(denom) < 1e-12 * m.frequencies[0]):
        raise ResonanceError("sideband detuning is resonant with a transverse mode")
    j = 0.25 * np.outer(t.rabi, t.rabi) * ((m.lamb_dicke / denom) @ m.lamb_dicke.T)
    return CouplingMatrix.from_array(j)


def fit_power_law(c: CouplingMatrix) -> tuple[float, float]:
    """Least-squares fit of ``log|J_ik|`` against ``log|i - k|`` over all pairs.

    Returns ``(j0, alpha)`` with ``|J_ik| ~ j0 / |i - k|**alpha``; the sign of
    ``j0`` follows the sign of the couplings.
    """
    n = c.n_spins
    if n < 3:
        raise ValueError("power-law fit needs at least two distinct separations (n_spins >= 3)")
    i, k = np.triu_indices(n, 1)
    vals = c.j[i, k]
    if np.any(vals == 0):
        raise ValueError("power-law fit needs nonzero couplings")
    x = np.log((k - i).astype(float))
    y = np.log(np.abs(vals))
    slope, intercept = np.polyfit(x, y, 1)
    sign = 1.0 if np.sum(vals) >= 0 else -1.0
    return sign * float(np.exp(intercept)), float(-slope)


def tune_detuning(
    t: TrapConfig, target_alpha: float, lo: float | None = None, hi: float | None = None, tol: float = 1e-6
) -> float:
    """Detuning whose trap-derived couplings fit ``target_alpha`` (bisection).

    Relies on the fitted exponent growing with the detuning.
    """
    modes = transverse_modes(t)
    band = modes.frequencies[0] - modes.frequencies[-1]
    lo = band * 1e-4 if lo is None else lo
    hi = band * 1e3 if hi is None else hi

    def alpha_at(delta):
        trial = TrapConfig(t.n_ions, t.axial_freq, t.transverse_freq, t.rabi,
                           t.lamb_dicke, delta, t.mass_scaling)
        return fit_power_law(coupling_from_sidebands(trial, modes))[1]

    a_lo, a_hi = alpha_at(lo), alpha_at(hi)
    if not a_lo <= target_alpha <= a_hi:
        raise ValueError(
            f"target alpha {target_alpha} outside reachable range [{a_lo:.3f}, {a_hi:.3f}]"
        )
    # Bisect in log-detuning; the exponent varies over decades of detuning.
    llo, lhi = np.log(lo), np.log(hi)
    while lhi - llo > tol:
        mid = 0.5 * (llo + lhi)
        if alpha_at(np.exp(mid)) < target_alpha:
            llo = mid
        else:
            lhi = mid
    return float(np.exp(0.5 * (llo + lhi)))
