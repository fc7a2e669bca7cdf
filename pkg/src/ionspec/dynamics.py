"""State preparation, exact time evolution and measurement models.

States live on the full ``2**N`` space indexed by bitmask (bit ``j`` set means
spin ``j`` up). XY evolution runs block by block over excitation sectors; the
Ising evolution uses the full matrix. Everything diagonal in the z basis is
computed from outcome probabilities, so exact and shot-sampled data share
one code path.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lattice import FullHamiltonian, HamiltonianBlock, enumerate_subspace, popcount_array

CONVENTIONS = ("supplement", "main")


@dataclass(frozen=True)
class StateVector:
    n_spins: int
    full: np.ndarray

    def __post_init__(self):
        full = np.asarray(self.full, dtype=complex)
        if full.shape != (1 << self.n_spins,):
            raise ValueError(f"state of {self.n_spins} spins needs {1 << self.n_spins} amplitudes")
        object.__setattr__(self, "full", full)

    @classmethod
    def from_blocks(cls, n_spins: int, blocks: dict[int, np.ndarray]) -> "StateVector":
        full = np.zeros(1 << n_spins, dtype=complex)
        for n, amps in blocks.items():
            basis = enumerate_subspace(n_spins, n)
            full[basis.masks] = amps
        return cls(n_spins, full)

    def to_blocks(self) -> dict[int, np.ndarray]:
        return {
            n: self.full[enumerate_subspace(self.n_spins, n).masks].copy()
            for n in range(self.n_spins + 1)
        }

    def norm(self) -> float:
        return float(np.linalg.norm(self.full))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.full) ** 2

    def sector_probs(self) -> np.ndarray:
        return sector_probabilities(self.probabilities(), self.n_spins)


@dataclass(frozen=True)
class PreparedState:
    angles: np.ndarray
    state: StateVector
    sector_probs: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Amplitudes on a time grid; ``amplitudes[t]`` is the state at ``times[t]``."""

    n_spins: int
    times: np.ndarray
    amplitudes: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, i: int) -> StateVector:
        return StateVector(self.n_spins, self.amplitudes[i])

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class RotatingFrame:
    """Frame rotating about z at twice the field.

    ``supplement``: x~ = cos(2Bt) x + sin(2Bt) y, the co-rotating frame for
    ``H = +B sum sigma^z`` (``delta = -2B``).
    ``main``: x~ = cos(2Bt) x - sin(2Bt) y, rotating against the precession,
    which leaves a residual rotation at 4B.
    """

    b_field: float
    convention: str = "supplement"

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"frame convention must be one of {CONVENTIONS}")

    def phase(self, t):
        """``x~ + i y~ = exp(i phase) (x + i y)``."""
        sign = -1.0 if self.convention == "supplement" else 1.0
        return sign * 2.0 * self.b_field * np.asarray(t, dtype=float)


def sector_probabilities(probs: np.ndarray, n_spins: int) -> np.ndarray:
    pop = popcount_array(np.arange(probs.shape[-1]))
    out = np.zeros(probs.shape[:-1] + (n_spins + 1,))
    for n in range(n_spins + 1):
        out[..., n] = probs[..., pop == n].sum(axis=-1)
    return out


def prep_angles_single(gamma: float, a) -> np.ndarray:
    return np.arctan(gamma * np.asarray(a, dtype=float))


def prep_angles_pair(gamma: float, a1, a2) -> np.ndarray:
    a1, a2 = np.asarray(a1, dtype=float), np.asarray(a2, dtype=float)
    if a1.shape != a2.shape:
        raise ValueError("mode vectors must have equal length")
    return np.arctan(gamma * (a1 + a2))


def build_product_state(theta) -> PreparedState:
    """``prod_j [cos(theta_j) |down> + sin(theta_j) |up>]``."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("angles must be finite")
    full = np.ones(1)
    # Spin 0 is the least significant bit, so it is the last Kronecker factor.
    for th in theta[::-1]:
        full = np.kron(full, [np.cos(th), np.sin(th)])
    state = StateVector(len(theta), full)
    return PreparedState(theta, state, state.sector_probs())


def _block_propagate(full0, n_spins, blocks, times):
    amps = np.zeros((len(times), full0.size), dtype=complex)
    covered = np.zeros(full0.size, dtype=bool)
    for blk in blocks:
        idx = blk.basis.masks
        covered[idx] = True
        psi0 = full0[idx]
        if not np.any(psi0):
            continue
        lam, vec = np.linalg.eigh(blk.matrix)
        coeff = vec.T @ psi0
        amps[:, idx] = (np.exp(-1j * np.outer(times, lam)) * coeff) @ vec.T
    if np.any(np.abs(full0[~covered]) > 1e-14):
        raise ValueError("state has weight in excitation sectors without a Hamiltonian block")
    return amps


def evolve(
    state: StateVector, h: Sequence[HamiltonianBlock] | FullHamiltonian, times
) -> Trajectory:
    """Exact evolution ``exp(-iHt)|psi>`` by spectral decomposition."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if isinstance(h, FullHamiltonian):
        if h.n_spins != state.n_spins:
            raise ValueError("Hamiltonian and state act on different numbers of spins")
        lam, vec = np.linalg.eigh(h.dense())
        coeff = vec.T @ state.full
        amps = (np.exp(-1j * np.outer(times, lam)) * coeff) @ vec.T
    else:
        blocks = list(h)
        if not blocks or not all(isinstance(b, HamiltonianBlock) for b in blocks):
            raise TypeError("expected a FullHamiltonian or a sequence of HamiltonianBlock")
        if any(b.basis.n_spins != state.n_spins for b in blocks):
            raise ValueError("Hamiltonian blocks and state act on different numbers of spins")
        amps = _block_propagate(state.full, state.n_spins, blocks, times)
    return Trajectory(state.n_spins, times, amps)


def energy(state: StateVector, h: Sequence[HamiltonianBlock] | FullHamiltonian) -> float:
    if isinstance(h, FullHamiltonian):
        return float(np.real(np.vdot(state.full, h.matrix @ state.full)))
    total = 0.0
    for blk in h:
        psi = state.full[blk.basis.masks]
        total += float(np.real(np.vdot(psi, blk.matrix @ psi)))
    return total


# --- transverse observables -------------------------------------------------

def raising_expectations(amplitudes: np.ndarray, n_spins: int) -> np.ndarray:
    """``<sigma^+_j>`` for every site; leading axes of ``amplitudes`` are kept."""
    amplitudes = np.asarray(amplitudes)
    masks = np.arange(amplitudes.shape[-1])
    out = np.empty(amplitudes.shape[:-1] + (n_spins,), dtype=complex)
    for j in range(n_spins):
        down = masks[(masks >> j & 1) == 0]
        out[..., j] = np.sum(
            np.conj(amplitudes[..., down | (1 << j)]) * amplitudes[..., down], axis=-1
        )
    return out


def transverse_expectations(traj: Trajectory, frame: RotatingFrame | None = None) -> np.ndarray:
    """``<sigma^x~_j> + i <sigma^y~_j>`` with shape ``(n_times, N)``."""
    xy = 2.0 * raising_expectations(traj.amplitudes, traj.n_spins)
    if frame is not None:
        xy = xy * np.exp(1j * frame.phase(traj.times))[:, None]
    return xy


def expect_sigma_frame(state: StateVector, j: int, axis: str, t: float = 0.0,
                       frame: RotatingFrame | None = None) -> float:
    if not 0 <= j < state.n_spins:
        raise IndexError(f"site {j} out of range")
    if axis == "z":
        return float(sigma_z_expectations(state.probabilities(), state.n_spins)[j])
    xy = 2.0 * raising_expectations(state.full, state.n_spins)[j]
    if frame is not None:
        xy *= np.exp(1j * frame.phase(t))
    if axis == "x":
        return float(xy.real)
    if axis == "y":
        return float(xy.imag)
    raise ValueError(f"axis must be 'x', 'y' or 'z', got {axis!r}")


# --- z-diagonal observables ---------------------------------------------------

def sigma_z_diagonal(n_spins: int, j: int) -> np.ndarray:
    masks = np.arange(1 << n_spins)
    return 2.0 * (masks >> j & 1) - 1.0


def pair_projector_diagonal(n_spins: int, i: int, j: int) -> np.ndarray:
    masks = np.arange(1 << n_spins)
    return ((masks >> i & 1) & (masks >> j & 1)).astype(float)


def sigma_z_expectations(probs: np.ndarray, n_spins: int, sector: int | None = None) -> np.ndarray:
    """Per-site ``<Pi sigma^z_j Pi>`` (unnormalized) from outcome probabilities."""
    probs = np.asarray(probs)
    if sector is not None:
        probs = probs * (popcount_array(np.arange(probs.shape[-1])) == sector)
    z = np.stack([sigma_z_diagonal(n_spins, j) for j in range(n_spins)], axis=1)
    return probs @ z


def pair_projector_expectations(probs: np.ndarray, n_spins: int, sector: int | None = None) -> np.ndarray:
    """``<Pi P_ij Pi>`` for all pairs, shape ``(..., N, N)``; diagonal left at zero."""
    probs = np.asarray(probs)
    if sector is not None:
        probs = probs * (popcount_array(np.arange(probs.shape[-1])) == sector)
    up = (np.arange(probs.shape[-1])[:, None] >> np.arange(n_spins)[None, :]) & 1
    out = np.einsum("...m,mi,mj->...ij", probs, up, up)
    idx = np.arange(n_spins)
    out[..., idx, idx] = 0.0
    return out


def postselect_expectations(state: StateVector, n: int, obs: np.ndarray, normalized: bool = False) -> float:
    """``<Pi_n O Pi_n>`` for a z-diagonal observable given as its diagonal."""
    probs = state.probabilities()
    obs = np.asarray(obs, dtype=float)
    if obs.shape != probs.shape:
        raise ValueError("observable diagonal must have one entry per basis state")
    in_sector = popcount_array(np.arange(probs.size)) == n
    value = float(np.sum(probs[in_sector] * obs[in_sector]))
    if normalized:
        p_n = float(np.sum(probs[in_sector]))
        if p_n == 0.0:
            raise ZeroDivisionError(f"sector n={n} has zero probability")
        value /= p_n
    return value


def pair_projector_expect(state: StateVector, i: int, j: int) -> float:
    """Probability that spins ``i`` and ``j`` are both up."""
    if i == j:
        raise ValueError("pair projector needs two distinct sites")
    return float(state.probabilities() @ pair_projector_diagonal(state.n_spins, i, j))


# --- projective sampling ------------------------------------------------------

def derive_rng(seed: int, k: int) -> np.random.Generator:
    """Independent stream for sample ``k``, independent of scheduling."""
    return np.random.default_rng(np.random.SeedSequence([seed, k]))


def sample_shots(state: StateVector, shots: int, seed: int) -> Counter:
    """Multinomial z-basis outcomes as ``{mask: count}``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = state.probabilities()
    counts = np.random.default_rng(seed).multinomial(shots, probs / probs.sum())
    return Counter({int(m): int(c) for m, c in zip(np.flatnonzero(counts), counts[counts > 0])})


def sample_probabilities(probs: np.ndarray, shots: int, seed: int) -> np.ndarray:
    """Empirical outcome frequencies at every time, sample ``k`` seeded by ``(seed, k)``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = np.atleast_2d(probs)
    out = np.empty_like(probs, dtype=float)
    for k, p in enumerate(probs):
        out[k] = derive_rng(seed, k).multinomial(shots, p / p.sum()) / shots
    return out
