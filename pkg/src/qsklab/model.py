"""Random exchange couplings and the transverse-field glass Hamiltonian.

The exchange operator is

    U = -(1/sqrt(n)) * sum_{i<j} gamma_ij sz_i sz_j

and the full Hamiltonian

    H = j_coupling * U - h * sum_i sx_i,

with gamma_ij i.i.d. under a DisorderSpec: mean 0, unit variance, finite
E|gamma|^3.  The built-in laws (gaussian, rademacher, uniform) are all
symmetric; arbitrary finite-support table laws can be constructed too,
and nonstandard moments require an explicit require_standard=False (such
laws are excluded from the inequality-checking commands).

Couplings are stored in lexicographic pair order (0,1), (0,2), ...,
(n-2,n-1) and serialize to a plain text block -- one header line
``N=<int> kind=<string> seed=<u64>`` followed by one ``i j gamma`` line
per pair with 17 significant digits, which round-trips float64 exactly.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import roots_hermite, roots_legendre

from .hilbert import Operator, check_site_count, spin_table, total_axis_sum

__all__ = [
    "DisorderSpec",
    "ModelParams",
    "CouplingSample",
    "gaussian_spec",
    "rademacher_spec",
    "uniform_spec",
    "table_spec",
    "gauss_hermite_spec",
    "gauss_legendre_spec",
    "spec_by_name",
    "law_quadrature",
    "sample_couplings",
    "replace_coupling",
    "pairs",
    "n_pairs",
    "pair_index",
    "exchange_diagonal",
    "exchange_operator",
    "build_hamiltonian",
    "gauge_transform",
    "flip_unitary",
    "sample_to_text",
    "sample_from_text",
    "sample_hash",
]

LAW_KINDS = ("gaussian", "rademacher", "uniform", "table")
STANDARD_MOMENT_ATOL = 1e-9
DEFAULT_QUADRATURE_NODES = 24

_UNIFORM_HALF_WIDTH = math.sqrt(3.0)


# --------------------------------------------------------------------------
# disorder laws
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DisorderSpec:
    """Coupling law descriptor: moments plus (for finite laws) the support."""

    kind: str
    mean: float
    variance: float
    third_abs_moment: float
    symmetric: bool
    support: tuple[float, ...] | None = None
    weights: tuple[float, ...] | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind not in LAW_KINDS:
            raise ValueError(f"unknown disorder kind {self.kind!r}")
        if (self.support is None) != (self.weights is None):
            raise ValueError("support and weights must be given together")

    @property
    def discrete(self) -> bool:
        return self.support is not None

    @property
    def standard(self) -> bool:
        return (
            abs(self.mean) <= STANDARD_MOMENT_ATOL
            and abs(self.variance - 1.0) <= STANDARD_MOMENT_ATOL
        )


def gaussian_spec() -> DisorderSpec:
    # E|g|^3 = sqrt(8/pi) for a standard normal
    return DisorderSpec("gaussian", 0.0, 1.0, math.sqrt(8.0 / math.pi), True)


def rademacher_spec() -> DisorderSpec:
    return DisorderSpec("rademacher", 0.0, 1.0, 1.0, True, (-1.0, 1.0), (0.5, 0.5))


def uniform_spec() -> DisorderSpec:
    # uniform on [-sqrt(3), sqrt(3)]: unit variance, E|g|^3 = 3*sqrt(3)/4
    return DisorderSpec("uniform", 0.0, 1.0, 3.0 * math.sqrt(3.0) / 4.0, True)


def table_spec(
    support,
    weights,
    *,
    require_standard: bool = True,
    label: str = "",
) -> DisorderSpec:
    """Finite-support law from explicit points and probabilities.

    Moments are computed here and, unless require_standard=False, the law
    must be centered with unit variance.  Support is canonicalized to
    ascending order so equal laws compare equal.
    """
    pts = np.asarray(support, dtype=float)
    wts = np.asarray(weights, dtype=float)
    if pts.ndim != 1 or pts.shape != wts.shape or pts.size == 0:
        raise ValueError("support and weights must be equal-length 1-d sequences")
    if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(wts))):
        raise ValueError("support and weights must be finite")
    if np.any(wts <= 0.0):
        raise ValueError("weights must be strictly positive")
    if abs(wts.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must sum to 1, got {wts.sum()!r}")
    order = np.argsort(pts)
    pts, wts = pts[order], wts[order]
    if np.any(np.diff(pts) == 0.0):
        raise ValueError("support points must be distinct")
    mean = float(wts @ pts)
    variance = float(wts @ pts**2 - mean**2)
    third_abs = float(wts @ np.abs(pts) ** 3)
    if require_standard:
        if abs(mean) > STANDARD_MOMENT_ATOL:
            raise ValueError(f"table law must be centered, got mean {mean:.3e}")
        if abs(variance - 1.0) > STANDARD_MOMENT_ATOL:
            raise ValueError(f"table law must have unit variance, got {variance!r}")
    symmetric = bool(
        np.allclose(pts, -pts[::-1], atol=1e-12)
        and np.allclose(wts, wts[::-1], atol=1e-12)
    )
    return DisorderSpec(
        "table", mean, variance, third_abs, symmetric,
        tuple(float(p) for p in pts), tuple(float(w) for w in wts), label,
    )


def gauss_hermite_spec(n_nodes: int) -> DisorderSpec:
    """Standard gaussian rendered as a finite table via Gauss-Hermite nodes.

    With n_nodes >= 2 the first and second moments are exact, so the table
    passes the standard-moment check; E|g|^3 converges to sqrt(8/pi) only
    as the node count grows (|g|^3 is not a polynomial).
    """
    if n_nodes < 2:
        raise ValueError("need at least 2 Gauss-Hermite nodes")
    x, w = roots_hermite(n_nodes)
    return table_spec(
        x * math.sqrt(2.0), w / math.sqrt(math.pi),
        label=f"gauss-hermite-{n_nodes}",
    )


def gauss_legendre_spec(n_nodes: int) -> DisorderSpec:
    """Uniform[-sqrt(3), sqrt(3)] rendered as a Gauss-Legendre table."""
    if n_nodes < 2:
        raise ValueError("need at least 2 Gauss-Legendre nodes")
    x, w = roots_legendre(n_nodes)
    return table_spec(
        x * _UNIFORM_HALF_WIDTH, w / 2.0,
        label=f"gauss-legendre-{n_nodes}",
    )


def spec_by_name(name: str) -> DisorderSpec:
    factories = {
        "gaussian": gaussian_spec,
        "rademacher": rademacher_spec,
        "uniform": uniform_spec,
    }
    if name not in factories:
        raise ValueError(
            f"unknown law {name!r}; choose from {sorted(factories)}"
        )
    return factories[name]()


def law_quadrature(spec: DisorderSpec, n_nodes: int | None = None):
    """(points, weights) integrating the law: exact support for discrete
    laws, Gauss-Hermite / Gauss-Legendre rules for the continuous ones."""
    if spec.discrete:
        return np.array(spec.support), np.array(spec.weights)
    n = DEFAULT_QUADRATURE_NODES if n_nodes is None else int(n_nodes)
    if n < 2:
        raise ValueError("need at least 2 quadrature nodes")
    if spec.kind == "gaussian":
        x, w = roots_hermite(n)
        return x * math.sqrt(2.0), w / math.sqrt(math.pi)
    if spec.kind == "uniform":
        x, w = roots_legendre(n)
        return x * _UNIFORM_HALF_WIDTH, w / 2.0
    raise ValueError(f"no quadrature rule for kind {spec.kind!r}")


def draw_couplings(spec: DisorderSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    if spec.kind == "gaussian":
        return rng.standard_normal(size)
    if spec.kind == "rademacher":
        return 2.0 * rng.integers(0, 2, size=size) - 1.0
    if spec.kind == "uniform":
        return rng.uniform(-_UNIFORM_HALF_WIDTH, _UNIFORM_HALF_WIDTH, size=size)
    if spec.kind == "table":
        return rng.choice(np.array(spec.support), size=size, p=np.array(spec.weights))
    raise ValueError(f"unknown disorder kind {spec.kind!r}")


# --------------------------------------------------------------------------
# model parameters and coupling samples
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """System size and couplings: H = j_coupling * U - h * sum_i sx_i."""

    n_sites: int
    beta: float
    h: float
    j_coupling: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.n_sites, (int, np.integer)) or self.n_sites < 1:
            raise ValueError(f"n_sites must be a positive integer, got {self.n_sites!r}")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        for name in ("beta", "h", "j_coupling"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val!r}")
            object.__setattr__(self, name, val)
        if self.beta <= 0.0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.h < 0.0:
            raise ValueError(f"h must be >= 0, got {self.h}")
        if self.j_coupling < 0.0:
            raise ValueError(f"j_coupling must be >= 0, got {self.j_coupling}")


@lru_cache(maxsize=128)
def pairs(n_sites: int) -> tuple[tuple[int, int], ...]:
    """Site pairs (i, j), i < j, in lexicographic order."""
    return tuple((i, j) for i in range(n_sites) for j in range(i + 1, n_sites))


def n_pairs(n_sites: int) -> int:
    return n_sites * (n_sites - 1) // 2


def pair_index(n_sites: int, i: int, j: int) -> int:
    """Position of pair (i, j) in the lexicographic coupling vector."""
    if not 0 <= i < j < n_sites:
        raise ValueError(f"need 0 <= i < j < {n_sites}, got ({i}, {j})")
    return i * (2 * n_sites - i - 1) // 2 + (j - i - 1)


@dataclass(frozen=True, eq=False)
class CouplingSample:
    """One disorder realization: the coupling vector plus provenance."""

    n_sites: int
    gamma: np.ndarray
    kind: str = "unknown"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        g = np.asarray(self.gamma, dtype=float)
        if g.ndim != 1 or g.size != n_pairs(self.n_sites):
            raise ValueError(
                f"expected {n_pairs(self.n_sites)} couplings for n_sites={self.n_sites}, "
                f"got shape {g.shape}"
            )
        if g.size and not np.all(np.isfinite(g)):
            raise ValueError("couplings must be finite")
        if g.flags.writeable:
            g = g.copy()
            g.setflags(write=False)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "seed", int(self.seed))


def sample_couplings(
    spec: DisorderSpec,
    n_sites: int,
    rng: np.random.Generator,
    *,
    seed: int = 0,
) -> CouplingSample:
    """Draw one i.i.d. coupling vector; `seed` is recorded as provenance only."""
    if n_sites < 2:
        raise ValueError("need n_sites >= 2 to have any couplings")
    gamma = draw_couplings(spec, rng, n_pairs(n_sites))
    return CouplingSample(n_sites, gamma, kind=spec.kind, seed=seed)


def replace_coupling(sample: CouplingSample, pair: tuple[int, int], value: float) -> CouplingSample:
    """Copy of the sample with one gamma_ij swapped out."""
    idx = pair_index(sample.n_sites, *pair)
    g = sample.gamma.copy()
    g[idx] = value
    return replace(sample, gamma=g)


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

_HEADER_RE = re.compile(r"^N=(\d+) kind=(\S+) seed=(\d+)$")


def sample_to_text(sample: CouplingSample) -> str:
    lines = [f"N={sample.n_sites} kind={sample.kind} seed={sample.seed}"]
    for (i, j), g in zip(pairs(sample.n_sites), sample.gamma):
        lines.append(f"{i} {j} {g:.17g}")
    return "\n".join(lines) + "\n"


def sample_from_text(text: str) -> CouplingSample:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty coupling block")
    m = _HEADER_RE.match(lines[0])
    if m is None:
        raise ValueError(f"bad coupling header: {lines[0]!r}")
    n_sites, kind, seed = int(m.group(1)), m.group(2), int(m.group(3))
    expected = pairs(n_sites)
    if len(lines) - 1 != len(expected):
        raise ValueError(
            f"expected {len(expected)} coupling lines for N={n_sites}, got {len(lines) - 1}"
        )
    gamma = np.empty(len(expected))
    for row, (line, (i, j)) in enumerate(zip(lines[1:], expected)):
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"bad coupling line {row + 2}: {line!r}")
        if (int(parts[0]), int(parts[1])) != (i, j):
            raise ValueError(
                f"coupling line {row + 2} out of order: expected pair {(i, j)}, got {parts[:2]}"
            )
        gamma[row] = float(parts[2])
    return CouplingSample(n_sites, gamma, kind=kind, seed=seed)


def sample_hash(sample: CouplingSample) -> str:
    """16-hex-digit digest of the canonical text form."""
    return hashlib.sha256(sample_to_text(sample).encode()).hexdigest()[:16]


# --------------------------------------------------------------------------
# operators
# --------------------------------------------------------------------------

def coupling_matrix(sample: CouplingSample) -> np.ndarray:
    """Symmetric n x n matrix with gamma_ij off-diagonal, zero diagonal."""
    n = sample.n_sites
    g = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    g[iu] = sample.gamma
    return g + g.T


def exchange_diagonal(sample: CouplingSample) -> np.ndarray:
    """Diagonal of U = -(1/sqrt(n)) sum_{i<j} gamma_ij sz_i sz_j in the
    computational basis (U is diagonal there)."""
    n = sample.n_sites
    check_site_count(n)
    if n == 1:
        return np.zeros(2)
    s = spin_table(n).astype(float)
    g = coupling_matrix(sample)
    # sum_{i<j} gamma_ij s_i s_j = (s^T G s)/2 with zero-diagonal G
    return -0.5 / math.sqrt(n) * np.einsum("bi,bi->b", s @ g, s)


def exchange_operator(sample: CouplingSample) -> Operator:
    return Operator(np.diag(exchange_diagonal(sample).astype(np.complex128)), hermitian=True)


def build_hamiltonian(params: ModelParams, sample: CouplingSample) -> Operator:
    """H = j * U - h * sum_i sx_i as a dense Hermitian operator."""
    if params.n_sites != sample.n_sites:
        raise ValueError(
            f"params.n_sites={params.n_sites} != sample.n_sites={sample.n_sites}"
        )
    check_site_count(params.n_sites)
    mat = np.diag(params.j_coupling * exchange_diagonal(sample)).astype(np.complex128)
    if params.h != 0.0:
        mat -= params.h * total_axis_sum("x", params.n_sites).matrix
    mat.setflags(write=False)
    return Operator(mat, hermitian=True)


def gauge_transform(sample: CouplingSample, signs) -> CouplingSample:
    """gamma'_ij = eps_i eps_j gamma_ij for a sign vector eps in {-1, +1}^n.

    The transformed model is unitarily equivalent to the original via
    partial spin flips (see flip_unitary), so spectra coincide and z-z
    correlators pick up the factor eps_i eps_j.
    """
    eps = np.asarray(signs)
    n = sample.n_sites
    if eps.shape != (n,):
        raise ValueError(f"signs must have shape ({n},), got {eps.shape}")
    if not np.all(np.abs(eps) == 1):
        raise ValueError("signs must be +1 or -1")
    eps = eps.astype(float)
    factors = np.array([eps[i] * eps[j] for i, j in pairs(n)])
    return replace(sample, gamma=sample.gamma * factors)


def flip_unitary(signs) -> Operator:
    """Product of exp(i pi/2 sx_i) = i*sx_i over the sites with eps_i = -1.

    Conjugating by it maps sz_i -> eps_i sz_i while leaving every sx_j
    alone, which implements the gauge transformation on operators.
    """
    eps = np.asarray(signs)
    n = eps.size
    check_site_count(n)
    if not np.all(np.abs(eps) == 1):
        raise ValueError("signs must be +1 or -1")
    mat = np.ones((1, 1), dtype=np.complex128)
    flip = 1.0j * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
    ident = np.eye(2, dtype=np.complex128)
    for site in reversed(range(n)):  # site 0 ends up in the rightmost slot
        mat = np.kron(mat, flip if eps[site] == -1 else ident)
    return Operator(mat, hermitian=False)
