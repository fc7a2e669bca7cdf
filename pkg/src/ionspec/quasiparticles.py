"""Single-excitation spin waves and first-order hard-core interaction shifts.

Mode energies ``eps_k`` are eigenvalues of the coupling matrix (the n=1 XY
block without the field). ``E_k = 2B + eps_k`` is the gap above the all-down
state; the 2B offset drops out of every beat frequency, so shifts here are
evaluated with ``eps_k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import CouplingMatrix

TWO_PI = 2.0 * np.pi


def _fix_sign(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Flip columns so the first nonzero component is positive."""
    vectors = vectors.copy()
    for k in range(vectors.shape[1]):
        nz = np.flatnonzero(np.abs(vectors[:, k]) > tol)
        if nz.size and vectors[nz[0], k] < 0:
            vectors[:, k] = -vectors[:, k]
    return vectors


def sign_changes(v: np.ndarray, tol: float = 1e-12) -> int:
    """Number of sign flips along ``v``, ignoring (near-)zero entries."""
    s = np.sign(v[np.abs(v) > tol])
    return int(np.count_nonzero(s[1:] != s[:-1]))


@dataclass(frozen=True)
class ModeSet:
    """Spin-wave modes sorted by descending energy; ``amplitudes[:, k-1]`` is mode ``k``."""

    energies: np.ndarray
    amplitudes: np.ndarray
    b_field: float = 0.0

    @property
    def n_spins(self) -> int:
        return len(self.energies)

    def eps(self, k: int) -> float:
        return float(self.energies[_check_mode(k, self.n_spins) - 1])

    def gap(self, k: int) -> float:
        """``E_k = 2B + eps_k``, the gap above the all-down state."""
        return self.eps(k) + 2.0 * self.b_field

    def mode(self, k: int) -> np.ndarray:
        return self.amplitudes[:, _check_mode(k, self.n_spins) - 1]


def _check_mode(k: int, n: int) -> int:
    if not 1 <= k <= n:
        raise ValueError(f"mode index {k} outside 1..{n}")
    return int(k)


def diagonalize_single_excitation(c: CouplingMatrix, b_field: float = 0.0) -> ModeSet:
    eps, vec = np.linalg.eigh(c.j)
    vec = _fix_sign(vec)
    nodes = np.array([sign_changes(vec[:, k]) for k in range(len(eps))])
    # Descending energy; near-degenerate ties ordered by node count.
    key = np.round(-eps / max(c.j_max, 1e-300), 9)
    order = np.lexsort((nodes, key))
    eps, vec = eps[order], vec[:, order]
    eps.setflags(write=False)
    vec.setflags(write=False)
    return ModeSet(eps, vec, float(b_field))


def sine_amplitudes(n_spins: int, k: int) -> np.ndarray:
    """Standing wave ``sqrt(2/(N+1)) sin(k j pi/(N+1))``, sites ``j = 1..N``."""
    _check_mode(k, n_spins)
    j = np.arange(1, n_spins + 1)
    return np.sqrt(2.0 / (n_spins + 1)) * np.sin(k * j * np.pi / (n_spins + 1))


def sine_mode_matrix(n_spins: int) -> np.ndarray:
    """All standing waves as columns, same layout as ``ModeSet.amplitudes``."""
    return np.column_stack([sine_amplitudes(n_spins, k) for k in range(1, n_spins + 1)])


def mode_overlap(a1, a2, a3, a4) -> float:
    """Quartic overlap ``sum_j a1_j a2_j a3_j a4_j``."""
    arrs = [np.asarray(a, dtype=float) for a in (a1, a2, a3, a4)]
    if len({a.shape for a in arrs}) != 1 or arrs[0].ndim != 1:
        raise ValueError("mode vectors must be 1-D and of equal length")
    return float(np.sum(arrs[0] * arrs[1] * arrs[2] * arrs[3]))


def perturbative_shift(k1: int, k2: int, m: ModeSet, amplitudes: np.ndarray | None = None,
                       include_field: bool = False) -> float:
    """First-order hard-core shift ``-2 (E1 + E2) M / (1 + delta_k1k2)``.

    ``amplitudes`` overrides the mode profiles entering the overlap (e.g.
    standing waves). With ``include_field`` the energies carry the 2B offset;
    that raw variant depends on the field convention and does not cancel in V.
    """
    a = m.amplitudes if amplitudes is None else np.asarray(amplitudes)
    e1 = m.gap(k1) if include_field else m.eps(k1)
    e2 = m.gap(k2) if include_field else m.eps(k2)
    v1, v2 = a[:, k1 - 1], a[:, k2 - 1]
    overlap = mode_overlap(v1, v2, v1, v2)
    return -2.0 * (e1 + e2) * overlap / (2.0 if k1 == k2 else 1.0)


@dataclass(frozen=True)
class BeatNotes:
    nu_a: float
    nu_b: float
    nu_c: float
    shifts: dict


def beat_frequencies(k1: int, k2: int, m: ModeSet, amplitudes: np.ndarray | None = None) -> BeatNotes:
    """Perturbative two-excitation beat notes in Hz."""
    if k1 == k2:
        raise ValueError("beat frequencies need two distinct modes")
    v11 = perturbative_shift(k1, k1, m, amplitudes)
    v22 = perturbative_shift(k2, k2, m, amplitudes)
    v12 = perturbative_shift(k1, k2, m, amplitudes)
    de = m.eps(k1) - m.eps(k2)
    nu_a = abs(de + v11 - v12) / TWO_PI
    nu_b = abs(de - v22 + v12) / TWO_PI
    nu_c = abs(2 * de + v11 - v22) / TWO_PI
    return BeatNotes(nu_a, nu_b, nu_c, {(k1, k1): v11, (k2, k2): v22, (k1, k2): v12})


def nib_nif_predictions(m: ModeSet, k_hi: int = 1, k_lo: int | None = None) -> tuple[float, float]:
    """Non-interacting boson and fermion beat frequencies (Hz) for the band-edge pair."""
    n = m.n_spins
    k_lo = n if k_lo is None else k_lo
    if (k_hi, k_lo) != (1, n):
        raise NotImplementedError("NIB/NIF references are defined only for the band-edge pair (1, N)")
    f_nib = 2.0 * abs(m.eps(1) - m.eps(n)) / TWO_PI
    f_nif = abs(m.eps(n) + m.eps(n - 1) - m.eps(1) - m.eps(2)) / TWO_PI
    return f_nib, f_nif
