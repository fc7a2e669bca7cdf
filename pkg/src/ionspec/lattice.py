"""Coupling matrices, Ising/XY Hamiltonians and fixed-excitation bases.

Conventions used throughout the package:

* energies are angular frequencies (rad/s) with hbar = 1;
* bit ``j`` of a basis mask is spin ``j`` (0-based), a set bit is spin up;
* ``sigma^z |up> = +|up>``, and ``sigma^+ = (sigma^x + i sigma^y) / 2`` so
  that the spin-conserving part of ``J sigma^x_i sigma^x_k`` hops an
  excitation with amplitude exactly ``J``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse

DEFAULT_MAX_SPINS = 16


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric, zero-diagonal matrix of spin-spin rates (rad/s)."""

    j: np.ndarray

    def __post_init__(self):
        j = np.array(self.j, dtype=float)
        if j.ndim != 2 or j.shape[0] != j.shape[1] or j.shape[0] < 1:
            raise ValueError(f"coupling matrix must be square, got shape {j.shape}")
        if not np.all(np.isfinite(j)):
            raise ValueError("coupling matrix has non-finite entries")
        if not np.array_equal(j, j.T):
            raise ValueError("coupling matrix is not symmetric")
        if np.any(np.diag(j) != 0.0):
            raise ValueError("coupling matrix must have a zero diagonal")
        j.setflags(write=False)
        object.__setattr__(self, "j", j)

    @property
    def n_spins(self) -> int:
        return self.j.shape[0]

    @property
    def j_max(self) -> float:
        """Largest coupling magnitude, used as the reference scale J."""
        return float(np.max(np.abs(self.j))) if self.n_spins > 1 else 0.0

    @classmethod
    def from_array(cls, j) -> "CouplingMatrix":
        """Symmetrize and zero the diagonal before validating."""
        j = np.asarray(j, dtype=float)
        j = 0.5 * (j + j.T)
        np.fill_diagonal(j, 0.0)
        return cls(j)


def power_law_couplings(n_spins: int, j0: float, alpha: float) -> CouplingMatrix:
    """``J_ik = j0 / |i - k|**alpha``; ``alpha = inf`` gives nearest neighbours only."""
    if isinstance(n_spins, bool) or int(n_spins) != n_spins or n_spins < 1:
        raise ValueError(f"n_spins must be a positive integer, got {n_spins!r}")
    if math.isnan(j0) or math.isnan(alpha):
        raise ValueError("j0 and alpha must not be NaN")
    if not math.isfinite(j0):
        raise ValueError("j0 must be finite")
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    n_spins = int(n_spins)
    idx = np.arange(n_spins)
    sep = np.abs(idx[:, None] - idx[None, :]).astype(float)
    j = np.zeros((n_spins, n_spins))
    off = sep > 0
    if math.isinf(alpha):
        j[sep == 1] = j0
    else:
        j[off] = j0 / sep[off] ** alpha
    return CouplingMatrix(j)


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class SubspaceBasis:
    """Ascending bitmasks of all ``n_spins``-bit integers with ``n_excitations`` bits set."""

    n_spins: int
    n_excitations: int
    masks: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.masks)

    def rank(self, mask: int) -> int:
        """Index of ``mask`` in ``masks`` via combinadic counting (no search)."""
        mask = int(mask)
        if mask >> self.n_spins or popcount(mask) != self.n_excitations:
            raise KeyError(f"mask {mask:#b} is not in the {self.n_excitations}-excitation basis")
        r, seen = 0, 0
        for bit in range(self.n_spins):
            if mask >> bit & 1:
                seen += 1
                r += math.comb(bit, seen)
        return r

    def unrank(self, index: int) -> int:
        if not 0 <= index < len(self.masks):
            raise IndexError(index)
        return int(self.masks[index])

    def index_of(self, masks: np.ndarray) -> np.ndarray:
        """Vectorized rank for arrays of masks known to be in the basis."""
        return np.searchsorted(self.masks, masks)


def enumerate_subspace(n_spins: int, n_excitations: int) -> SubspaceBasis:
    if n_spins < 0 or not 0 <= n_excitations <= n_spins:
        raise ValueError(f"n_excitations={n_excitations} out of range for {n_spins} spins")
    masks = []
    if n_excitations == 0:
        masks = [0]
    else:
        # Gosper's hack walks same-popcount integers in ascending order.
        x = (1 << n_excitations) - 1
        limit = 1 << n_spins
        while x < limit:
            masks.append(x)
            c = x & -x
            r = x + c
            x = (((r ^ x) >> 2) // c) | r
    arr = np.array(masks, dtype=np.int64)
    arr.setflags(write=False)
    return SubspaceBasis(n_spins, n_excitations, arr)


@dataclass(frozen=True)
class HamiltonianBlock:
    """XY Hamiltonian restricted to one excitation-number sector."""

    basis: SubspaceBasis
    matrix: np.ndarray = field(repr=False)
    field_b: float

    @property
    def n_excitations(self) -> int:
        return self.basis.n_excitations


@dataclass(frozen=True)
class FullHamiltonian:
    """Transverse-field Ising Hamiltonian on the full 2**N space (sparse CSR)."""

    n_spins: int
    matrix: sparse.csr_matrix = field(repr=False)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def build_xy_block(c: CouplingMatrix, b_field: float, basis: SubspaceBasis) -> HamiltonianBlock:
    """Excitation-conserving block of ``sum_{i<k} J_ik (s+_i s-_k + h.c.) + B sum_j s^z_j``."""
    if basis.n_spins != c.n_spins:
        raise ValueError(
            f"basis has {basis.n_spins} spins but coupling matrix has {c.n_spins}"
        )
    n = basis.n_excitations
    dim = len(basis)
    h = np.zeros((dim, dim))
    h[np.diag_indices(dim)] = b_field * (2 * n - c.n_spins)
    if 0 < n < c.n_spins:
        masks = basis.masks
        for i in range(c.n_spins):
            for k in range(i + 1, c.n_spins):
                jik = c.j[i, k]
                if jik == 0.0:
                    continue
                bi, bk = 1 << i, 1 << k
                # Exactly one of the two sites occupied: the excitation can hop.
                sel = ((masks & bi) != 0) != ((masks & bk) != 0)
                src = np.nonzero(sel)[0]
                dst = basis.index_of(masks[src] ^ (bi | bk))
                h[src, dst] = jik
    return HamiltonianBlock(basis, h, float(b_field))


def build_xy_blocks(c: CouplingMatrix, b_field: float, sectors=None) -> list[HamiltonianBlock]:
    """Blocks for the requested sectors (default: all ``n = 0..N``)."""
    if sectors is None:
        sectors = range(c.n_spins + 1)
    return [build_xy_block(c, b_field, enumerate_subspace(c.n_spins, n)) for n in sectors]


def build_full_ising(
    c: CouplingMatrix, b_field: float, max_spins: int = DEFAULT_MAX_SPINS
) -> FullHamiltonian:
    """``H = sum_{i<k} J_ik s^x_i s^x_k + B sum_j s^z_j`` in the z product basis."""
    n_spins = c.n_spins
    if n_spins > max_spins:
        raise ValueError(f"{n_spins} spins exceeds the full-space cap of {max_spins}")
    dim = 1 << n_spins
    masks = np.arange(dim, dtype=np.int64)
    pop = popcount_array(masks)
    rows = [masks]
    cols = [masks]
    vals = [b_field * (2.0 * pop - n_spins)]
    for i in range(n_spins):
        for k in range(i + 1, n_spins):
            jik = c.j[i, k]
            if jik == 0.0:
                continue
            rows.append(masks)
            cols.append(masks ^ ((1 << i) | (1 << k)))
            vals.append(np.full(dim, jik))
    m = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()
    m.sum_duplicates()
    return FullHamiltonian(n_spins, m)


def build_full_xy(c: CouplingMatrix, b_field: float, max_spins: int = DEFAULT_MAX_SPINS) -> FullHamiltonian:
    """Full-space XY Hamiltonian: the Ising matrix with double-flip couplings removed."""
    full = build_full_ising(c, b_field, max_spins).matrix.tocoo()
    pop = popcount_array(np.arange(1 << c.n_spins, dtype=np.int64))
    keep = pop[full.row] == pop[full.col]
    m = sparse.coo_matrix(
        (full.data[keep], (full.row[keep], full.col[keep])), shape=full.shape
    ).tocsr()
    return FullHamiltonian(c.n_spins, m)


def popcount_array(masks: np.ndarray) -> np.ndarray:
    """Element-wise number of set bits."""
    masks = np.asarray(masks, dtype=np.int64)
    out = np.zeros(masks.shape, dtype=np.int64)
    m = masks.copy()
    while np.any(m):
        out += m & 1
        m >>= 1
    return out

