"""Measurements on thermal states: correlators, overlaps, magnetization.

Everything diagonal in the computational z-basis (z-z correlators, the
overlap moments, magnetization, the exchange energy) is evaluated from
the basis occupation probabilities p_b = sum_n w_n |V_bn|^2 and the
cached spin table -- no operator matrices are built.  Off-diagonal
one-site terms (sigma^x) use the bit-flip index trick on the
eigenvector array.

Overlap conventions, with c_ij = <sz_i sz_j> and z_i = <sz_i>:

    <R>   = (1/n) sum_i z_i^2          (two independent replicas)
    <R^2> = (1/n^2) sum_ij c_ij^2

both within a single disorder sample.  The classical ground state of
the exchange term is found by exhaustive search over half the spin
configurations (global flip symmetry), chunked so n up to ~20 stays in
memory even though such sizes are far beyond exact diagonalization.
"""

from __future__ import annotations

import math

import numpy as np

from .hilbert import CapacityError, spin_table
from .model import CouplingSample, coupling_matrix, exchange_diagonal
from .spectral import ThermalState

__all__ = [
    "basis_probabilities",
    "site_count",
    "z_expectations",
    "zz_matrix",
    "x_expectations",
    "magnetization_moment",
    "overlap_mean",
    "overlap_square",
    "exchange_expectation",
    "classical_ground_state",
    "MAX_CLASSICAL_SITES",
]

MAX_CLASSICAL_SITES = 20
_CHUNK_BITS = 20  # 2^20 configurations (~8 MB of float64) per block


def site_count(state: ThermalState) -> int:
    n = state.dim.bit_length() - 1
    if 2**n != state.dim:
        raise ValueError(f"state dimension {state.dim} is not a power of 2")
    return n


def basis_probabilities(state: ThermalState) -> np.ndarray:
    """p_b = sum_n w_n |V_bn|^2, the thermal occupation of basis state b."""
    return np.abs(state.vectors) ** 2 @ state.weights


def z_expectations(state: ThermalState) -> np.ndarray:
    n = site_count(state)
    p = basis_probabilities(state)
    return p @ spin_table(n)


def zz_matrix(state: ThermalState) -> np.ndarray:
    """c_ij = <sz_i sz_j>; diagonal is exactly 1."""
    n = site_count(state)
    s = spin_table(n).astype(float)
    p = basis_probabilities(state)
    return (s * p[:, None]).T @ s


def x_expectations(state: ThermalState) -> np.ndarray:
    """<sx_i> per site, via the single-bit-flip permutation of amplitudes."""
    n = site_count(state)
    v = state.vectors
    base = np.arange(state.dim)
    out = np.empty(n)
    for i in range(n):
        out[i] = float(
            np.real(np.einsum("bn,bn,n->", v.conj(), v[base ^ (1 << i)], state.weights))
        )
    return out


def magnetization_moment(state: ThermalState, power: int) -> float:
    """<m^power> with m = (1/n) sum_i sz_i (diagonal, so a p-weighted sum)."""
    if power < 1:
        raise ValueError("power must be >= 1")
    n = site_count(state)
    m_diag = spin_table(n).mean(axis=1)
    return float(basis_probabilities(state) @ m_diag**power)


def overlap_mean(state: ThermalState) -> float:
    z = z_expectations(state)
    return float(z @ z) / z.size


def overlap_square(state: ThermalState) -> float:
    c = zz_matrix(state)
    return float((c * c).sum()) / c.size


def exchange_expectation(state: ThermalState, sample: CouplingSample) -> float:
    """<U> in the thermal state (U is diagonal, so no matrix is formed)."""
    u = exchange_diagonal(sample)
    if u.size != state.dim:
        raise ValueError(
            f"sample dimension {u.size} does not match state dimension {state.dim}"
        )
    return float(basis_probabilities(state) @ u)


def classical_ground_state(
    sample: CouplingSample,
    *,
    max_sites: int = MAX_CLASSICAL_SITES,
) -> tuple[float, int]:
    """Exact minimum of the exchange energy over classical spin patterns.

    Returns (energy, basis index of a minimizer).  Only indices with the
    top bit clear are scanned -- the energy is invariant under a global
    flip, so fixing the last spin halves the work; ties resolve to the
    smallest index within the scanned half.
    """
    n = sample.n_sites
    if n > max_sites:
        raise CapacityError(
            f"classical search over 2^{n - 1} states exceeds the {max_sites}-site cap"
        )
    g = coupling_matrix(sample)
    scale = -0.5 / math.sqrt(n)
    half = 1 << (n - 1)
    chunk = 1 << _CHUNK_BITS
    best_e, best_b = math.inf, 0
    for start in range(0, half, chunk):
        idx = np.arange(start, min(start + chunk, half), dtype=np.int64)
        # spins of block: s_i = 1 - 2*bit_i(b); builds (block, n) on the fly
        s = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n)) & 1)
        energies = scale * np.einsum("bi,bi->b", s @ g, s)
        k = int(np.argmin(energies))
        if energies[k] < best_e:
            best_e, best_b = float(energies[k]), int(idx[k])
    return best_e, best_b
