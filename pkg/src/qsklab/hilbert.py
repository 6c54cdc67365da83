"""Dense Pauli operators on the 2**n_sites tensor-product space.

Basis convention: computational basis states are indexed by integers
b in [0, 2**n_sites); bit i of b (site 0 = least significant bit)
encodes the sigma^z eigenvalue of site i, with bit 0 meaning s_i = +1
and bit 1 meaning s_i = -1.  Operators are stored as dense complex128
matrices throughout -- no sparsity, no symmetry blocking -- so that
every downstream formula can assume one uniform representation.

A site cap (default 14, override with the QSKLAB_MAX_N environment
variable) refuses oversized requests up front instead of letting a
2**n x 2**n allocation take the machine down.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "CapacityError",
    "Operator",
    "max_sites",
    "pauli_op",
    "op_product",
    "total_axis_sum",
    "spin_table",
]

DEFAULT_MAX_SITES = 14
HERMITIAN_ATOL = 1e-12

AXES = ("x", "y", "z")

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128),
}


class CapacityError(RuntimeError):
    """A request exceeded a configured resource cap."""


def max_sites() -> int:
    """Current site cap; QSKLAB_MAX_N overrides the built-in default."""
    raw = os.environ.get("QSKLAB_MAX_N")
    if raw is None:
        return DEFAULT_MAX_SITES
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"QSKLAB_MAX_N must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError("QSKLAB_MAX_N must be >= 1")
    return cap


def check_site_count(n_sites: int) -> None:
    if not isinstance(n_sites, (int, np.integer)) or isinstance(n_sites, bool):
        raise ValueError(f"n_sites must be an integer, got {n_sites!r}")
    if n_sites < 1:
        raise ValueError(f"n_sites must be >= 1, got {n_sites}")
    cap = max_sites()
    if n_sites > cap:
        raise CapacityError(
            f"n_sites={n_sites} exceeds the Hilbert-space cap {cap} "
            "(set QSKLAB_MAX_N to override)"
        )


def _is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T)) <= atol)


def _frozen(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense operator with an explicitly tracked hermiticity flag.

    The flag is only ever set after verification (entrywise against the
    conjugate transpose at 1e-12), so downstream code can branch on it
    without re-checking.
    """

    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {m.shape}")
        if m.dtype != np.complex128 or m.flags.writeable or not m.flags.c_contiguous:
            m = np.array(m, dtype=np.complex128, order="C")
            m.setflags(write=False)
        if self.hermitian and not _is_hermitian(m):
            raise ValueError("hermitian flag requested but matrix is not Hermitian")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:  # full matrices make for unreadable reprs
        return f"Operator(dim={self.dim}, hermitian={self.hermitian})"


@lru_cache(maxsize=512)
def _pauli_matrix(axis: str, site: int, n_sites: int) -> np.ndarray:
    left = np.eye(2 ** (n_sites - 1 - site), dtype=np.complex128)
    right = np.eye(2**site, dtype=np.complex128)
    # site 0 is the least significant bit, so it sits in the rightmost
    # (fastest-varying) kron slot
    return _frozen(np.kron(left, np.kron(_PAULI[axis], right)))


def pauli_op(axis: str, site: int, n_sites: int) -> Operator:
    """sigma^axis acting on one site, identity elsewhere."""
    if axis not in _PAULI:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    check_site_count(n_sites)
    if not isinstance(site, (int, np.integer)) or not 0 <= site < n_sites:
        raise ValueError(f"site must be in [0, {n_sites}), got {site!r}")
    return Operator(_pauli_matrix(axis, int(site), int(n_sites)), hermitian=True)


def op_product(a: Operator, b: Operator) -> Operator:
    """Matrix product a @ b; hermiticity of the result is re-verified."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    m = a.matrix @ b.matrix
    return Operator(_frozen(m), hermitian=_is_hermitian(m))


@lru_cache(maxsize=64)
def _axis_sum_matrix(axis: str, n_sites: int) -> np.ndarray:
    dim = 2**n_sites
    total = np.zeros((dim, dim), dtype=np.complex128)
    for site in range(n_sites):
        total += _pauli_matrix(axis, site, n_sites)
    return _frozen(total)


def total_axis_sum(axis: str, n_sites: int) -> Operator:
    """sum_i sigma^axis_i over all sites."""
    if axis not in _PAULI:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    check_site_count(n_sites)
    return Operator(_axis_sum_matrix(axis, int(n_sites)), hermitian=True)


@lru_cache(maxsize=64)
def spin_table(n_sites: int) -> np.ndarray:
    """(2**n, n) table of sigma^z eigenvalues: S[b, i] = +/-1 for bit i of b."""
    check_site_count(n_sites)
    b = np.arange(2**n_sites, dtype=np.int64)[:, None]
    bits = (b >> np.arange(n_sites, dtype=np.int64)[None, :]) & 1
    return _frozen((1 - 2 * bits).astype(np.int8))
