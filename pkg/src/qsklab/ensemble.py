"""Disorder averaging: Monte Carlo, exact enumeration, gauge-paired runs.

A run is fully identified by an EnsembleConfig; worker count is an
execution detail that never changes a single output bit.  The seed
splitting rule is:

    per sample    SeedSequence(master_seed, spawn_key=(index,))
    per grid node SeedSequence((master_seed, node_index)) -> u64 master

so sample index i always sees the same coupling draw no matter which
worker evaluates it, and the reducer folds results in index order.

Modes:

    monte_carlo   i.i.d. coupling draws, sample statistics with ddof-1
                  variance and std_error = sqrt(var/n).
    enumerate     every assignment of a finite-support law, probability
                  weighted: expectations become exact (std_error = 0).
                  Integration-by-parts remainders come for free here --
                  each quadrature node of each pair coincides with
                  another enumerated assignment, so a second vectorized
                  pass assembles every conditional residual by index
                  arithmetic instead of fresh diagonalizations.
    gauge_paired  Monte Carlo, but each sample's odd z-moments are
                  replaced by their exact gauge-orbit averages (zero)
                  and the even magnetization moments by the orbit
                  closed forms; gauge-invariant observables (overlap,
                  exchange, Duhamel terms) are untouched.

Per-sample remainder quadrature in monte_carlo mode is available but
off by default (it costs nodes x pairs extra diagonalizations per
sample); gaussian runs never need it, since the Stein identity makes
the remainder term exactly zero.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from multiprocessing import get_context

import numpy as np

from .hilbert import check_site_count, spin_table
from .model import (
    CouplingSample,
    DisorderSpec,
    ModelParams,
    build_hamiltonian,
    n_pairs,
    pairs,
    sample_couplings,
    sample_hash,
)
from .observables import (
    basis_probabilities,
    classical_ground_state,
    exchange_expectation,
    x_expectations,
    zz_matrix,
)
from .bounds import all_pair_duhamels, conditional_ibp_residuals, phi
from .spectral import thermal_state

__all__ = [
    "MODES",
    "EnsembleConfig",
    "ObservableStats",
    "SampleReport",
    "BoundReport",
    "EnsembleStats",
    "evaluate_sample",
    "indexed_sample",
    "run_ensemble",
    "assemble_rau_identity",
    "gauge_average_two_point",
    "SweepPoint",
    "sweep_grid",
]

MODES = ("monte_carlo", "enumerate", "gauge_paired")

MAX_ENUM_PAIRS = 24
MAX_ENUM_ASSIGNMENTS = 1 << 24
# the remainder lookup tables hold two (assignments x pairs) float arrays
MAX_ENUM_TABLE = 1 << 22


@dataclass(frozen=True)
class EnsembleConfig:
    """Everything that determines a run's results (and nothing else)."""

    params: ModelParams
    spec: DisorderSpec
    n_samples: int
    master_seed: int = 0
    mode: str = "monte_carlo"
    remainders: bool = False       # monte_carlo/gauge_paired only; enumerate always
    remainder_nodes: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not isinstance(self.n_samples, (int, np.integer)) or self.n_samples < 1:
            raise ValueError(f"n_samples must be a positive integer, got {self.n_samples!r}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "n_samples", int(self.n_samples))
        object.__setattr__(self, "master_seed", int(self.master_seed))
        if self.params.n_sites < 2:
            raise ValueError("ensembles need n_sites >= 2 (no couplings otherwise)")
        check_site_count(self.params.n_sites)
        needs_remainders = self.remainders or self.mode == "enumerate"
        if needs_remainders and self.params.j_coupling <= 0.0:
            raise ValueError("remainder accounting requires j_coupling > 0")
        if self.mode == "enumerate":
            _validate_enumeration(self.spec, self.params.n_sites)
        if self.mode == "gauge_paired" and not self.spec.symmetric:
            raise ValueError("gauge_paired mode requires a symmetric coupling law")

    @property
    def enumeration_size(self) -> int:
        if self.mode != "enumerate":
            raise ValueError("enumeration_size is defined for enumerate mode only")
        return len(self.spec.support) ** n_pairs(self.params.n_sites)


def _validate_enumeration(spec: DisorderSpec, n_sites: int) -> None:
    from .hilbert import CapacityError  # local: keep the import list short

    if not spec.discrete:
        raise ValueError("enumerate mode needs a finite-support law")
    n_pr = n_pairs(n_sites)
    if n_pr > MAX_ENUM_PAIRS:
        raise CapacityError(
            f"enumeration over {n_pr} couplings exceeds the {MAX_ENUM_PAIRS}-pair cap"
        )
    total = len(spec.support) ** n_pr
    if total > MAX_ENUM_ASSIGNMENTS:
        raise CapacityError(
            f"{len(spec.support)}^{n_pr} assignments exceed the 2^24 enumeration cap"
        )
    if total * n_pr > MAX_ENUM_TABLE:
        raise CapacityError(
            "remainder lookup tables for this enumeration exceed the size cap"
        )


@dataclass(frozen=True)
class ObservableStats:
    """Summary of one scalar observable over the ensemble."""

    mean: float
    variance: float
    std_error: float
    n: int
    min: float
    max: float


class _Welford:
    """Weighted streaming mean/variance plus extrema; folded in index order
    so the result is independent of how samples were scheduled."""

    __slots__ = ("count", "wsum", "mean", "m2", "lo", "hi")

    def __init__(self) -> None:
        self.count = 0
        self.wsum = 0.0
        self.mean = 0.0
        self.m2 = 0.0
        self.lo = math.inf
        self.hi = -math.inf

    def add(self, x: float, w: float = 1.0) -> None:
        self.count += 1
        self.wsum += w
        delta = x - self.mean
        self.mean += (w / self.wsum) * delta
        self.m2 += w * delta * (x - self.mean)
        self.lo = min(self.lo, x)
        self.hi = max(self.hi, x)

    def finalize(self, *, exact_weights: bool) -> ObservableStats:
        if self.count == 0:
            raise ValueError("no samples accumulated")
        if exact_weights:
            var = self.m2 / self.wsum
            se = 0.0
        else:
            var = self.m2 / (self.count - 1) if self.count > 1 else 0.0
            se = math.sqrt(var / self.count)
        return ObservableStats(self.mean, max(var, 0.0), se, self.count, self.lo, self.hi)


@dataclass(frozen=True, eq=False)
class SampleReport:
    """All measurements of one disorder realization."""

    n_sites: int
    beta: float
    h: float
    j_coupling: float
    law: str
    symmetric_law: bool
    seed: int
    weight: float
    sample_hash: str
    gamma: np.ndarray             # the couplings themselves: a report is a
                                  # complete, re-runnable description
    zz: np.ndarray                # <sz_i sz_j>, n x n, unit diagonal
    zz01_sq: float                # zz[0,1]^2 of the raw sample (gauge even)
    overlap_mean: float           # <R_12> = (1/n) sum_i <sz_i>^2
    overlap_sq: float             # <R_12^2> = (1/n^2) sum_ij zz_ij^2
    exchange: float               # <U>
    gs_energy: float              # min over classical spin patterns of U
    m1: float
    m2: float
    m4: float
    pair_aa: np.ndarray           # (A_ij, A_ij) per pair, lexicographic
    fb_rhs: np.ndarray            # Phi(beta h (x_i + x_j)) per pair
    ibp_sum: float = math.nan     # sum over pairs of conditional residuals
    rau_residual: float = math.nan

    @property
    def duhamel_pair_avg(self) -> float:
        return float(self.pair_aa.mean())

    @property
    def fb_lower(self) -> float:
        return float(self.fb_rhs.min())

    @property
    def fb_margin_min(self) -> float:
        return float((self.pair_aa - self.fb_rhs).min())

    def to_record(self) -> dict:
        def _f(x: float):
            return None if math.isnan(x) else float(x)

        return {
            "kind": "sample",
            "n": self.n_sites,
            "beta": self.beta,
            "h": self.h,
            "j": self.j_coupling,
            "law": self.law,
            "seed": self.seed,
            "weight": self.weight,
            "sample_hash": self.sample_hash,
            "gamma": [float(g) for g in self.gamma],
            "overlap_sq": self.overlap_sq,
            "overlap_mean": self.overlap_mean,
            "exchange_energy": self.exchange,
            "gs_energy": self.gs_energy,
            "m1": self.m1,
            "m2": self.m2,
            "m4": self.m4,
            "duhamel_aa": self.duhamel_pair_avg,
            "fb_lower": self.fb_lower,
            "fb_margin_min": self.fb_margin_min,
            "zz": [[float(v) for v in row] for row in self.zz],
            "ibp_sum": _f(self.ibp_sum),
            "rau_residual": _f(self.rau_residual),
        }


@dataclass(frozen=True)
class BoundReport:
    """Outcome of one inequality or identity check."""

    name: str
    lhs: float
    rhs: float
    residual: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        rec = {
            "kind": "bound",
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }
        if self.details:
            rec["details"] = self.details
        return rec


_RECORD_FIELDS = (
    "overlap_mean",
    "overlap_sq",
    "exchange",
    "exchange_density",
    "gs_density",
    "exchange_above_gs",
    "m1",
    "m2",
    "m4",
    "duhamel_pair_avg",
    "fb_margin_min",
    "zz01_sq",
)


@dataclass(frozen=True)
class EnsembleStats:
    """Aggregated run: per-observable records plus the assembled pieces."""

    config: EnsembleConfig
    n: int
    records: dict[str, ObservableStats]
    reports: tuple[SampleReport, ...] | None = None

    @property
    def overlap_sq_mean(self) -> float:
        return self.records["overlap_sq"].mean

    @property
    def overlap_variance(self) -> float:
        """E<R^2> - (E<R>)^2, the replica-overlap spread across everything."""
        return self.overlap_sq_mean - self.records["overlap_mean"].mean ** 2

    @property
    def exchange_density_mean(self) -> float:
        return self.records["exchange_density"].mean

    @property
    def duhamel_pair_mean(self) -> float:
        return self.records["duhamel_pair_avg"].mean

    @property
    def delta_n(self) -> float:
        """-(1/n^{3/2}) sum_{i<j} E[delta_ij]; nan when remainders were off."""
        if "ibp_sum" not in self.records:
            return math.nan
        return -self.records["ibp_sum"].mean / self.config.params.n_sites**1.5

    @property
    def rau_residual_mean(self) -> float:
        if "rau_residual" not in self.records:
            return math.nan
        return self.records["rau_residual"].mean

    def to_record(self) -> dict:
        from ._version import __version__

        def _clean(x: float):
            return None if isinstance(x, float) and math.isnan(x) else x

        return {
            "kind": "ensemble_stats",
            "version": __version__,
            "config": config_to_dict(self.config),
            "n": self.n,
            "records": {
                name: {
                    "mean": r.mean, "variance": r.variance, "std_error": r.std_error,
                    "n": r.n, "min": r.min, "max": r.max,
                }
                for name, r in self.records.items()
            },
            "assembled": {
                "overlap_sq_mean": self.overlap_sq_mean,
                "overlap_variance": self.overlap_variance,
                "exchange_density_mean": self.exchange_density_mean,
                "duhamel_pair_mean": self.duhamel_pair_mean,
                "delta_n": _clean(self.delta_n),
                "rau_residual_mean": _clean(self.rau_residual_mean),
            },
        }


def config_to_dict(config: EnsembleConfig) -> dict:
    """Resolved-configuration echo for output files (worker count is an
    execution knob, not identity, and deliberately never appears here)."""
    spec = config.spec
    d = {
        "n": config.params.n_sites,
        "beta": config.params.beta,
        "h": config.params.h,
        "j": config.params.j_coupling,
        "law": spec.kind if not spec.label else f"{spec.kind}:{spec.label}",
        "samples": config.n_samples,
        "seed": config.master_seed,
        "mode": config.mode,
        "remainders": bool(config.remainders or config.mode == "enumerate"),
    }
    if config.remainder_nodes is not None:
        d["remainder_nodes"] = config.remainder_nodes
    return d


# --------------------------------------------------------------------------
# single-sample evaluation
# --------------------------------------------------------------------------

def evaluate_sample(
    params: ModelParams,
    sample: CouplingSample,
    *,
    spec: DisorderSpec | None = None,
    weight: float = 1.0,
    remainders: bool = False,
    remainder_nodes: int | None = None,
    orbit_average: bool = False,
) -> SampleReport:
    """Diagonalize one realization and measure everything the harness tracks.

    `spec` is needed only for remainder quadrature and for the symmetry
    flag; orbit averaging additionally requires the law to be symmetric.
    """
    n = params.n_sites
    symmetric = bool(spec.symmetric) if spec is not None else False
    if orbit_average and not symmetric:
        raise ValueError("orbit averaging requires a symmetric coupling law")

    state = thermal_state(build_hamiltonian(params, sample), params.beta)
    p = basis_probabilities(state)
    s_tab = spin_table(n)
    z = p @ s_tab
    zz = zz_matrix(state)
    zz01_sq = float(zz[0, 1] ** 2)
    overlap_mean = float(z @ z) / n
    overlap_sq = float((zz * zz).sum()) / n**2
    exch = exchange_expectation(state, sample)
    gs_energy, _ = classical_ground_state(sample)
    m_diag = s_tab.mean(axis=1)
    m1 = float(p @ m_diag)
    m2 = float(p @ m_diag**2)
    m4 = float(p @ m_diag**4)

    pair_aa, _ = all_pair_duhamels(state)
    x_exp = x_expectations(state)
    bh = params.beta * params.h
    fb_rhs = np.array([
        phi(max(0.0, bh * (x_exp[i] + x_exp[j]))) for i, j in pairs(n)
    ])

    ibp_sum = math.nan
    rau_residual = math.nan
    if remainders:
        if spec is None:
            raise ValueError("remainder quadrature needs the coupling law")
        deltas = conditional_ibp_residuals(params, sample, spec, n_nodes=remainder_nodes)
        ibp_sum = float(deltas.sum())
        rau_residual = _rau_residual(params, overlap_sq, float(pair_aa.mean()), exch, ibp_sum)

    if orbit_average:
        # exact gauge-orbit averages: odd moments vanish, even magnetization
        # moments collapse to pure pair-counting (every surviving correlator
        # is an identity expectation); gauge-invariant entries are untouched
        m1 = 0.0
        m2 = 1.0 / n
        m4 = (3.0 * n - 2.0) / n**3
        zz = np.eye(n)

    zz.setflags(write=False)
    pair_aa.setflags(write=False)
    fb_rhs.setflags(write=False)
    return SampleReport(
        n_sites=n,
        beta=params.beta,
        h=params.h,
        j_coupling=params.j_coupling,
        law=sample.kind,
        symmetric_law=symmetric,
        seed=sample.seed,
        weight=float(weight),
        sample_hash=sample_hash(sample),
        gamma=sample.gamma,
        zz=zz,
        zz01_sq=zz01_sq,
        overlap_mean=overlap_mean,
        overlap_sq=overlap_sq,
        exchange=exch,
        gs_energy=gs_energy,
        m1=m1,
        m2=m2,
        m4=m4,
        pair_aa=pair_aa,
        fb_rhs=fb_rhs,
        ibp_sum=ibp_sum,
        rau_residual=rau_residual,
    )


def _rau_residual(
    params: ModelParams,
    overlap_sq: float,
    pair_aa_avg: float,
    exchange: float,
    ibp_sum: float,
) -> float:
    """lhs - rhs of the overlap identity, with the remainder term written
    through the pair residual sum (Delta_n = -ibp_sum / n^{3/2})."""
    n = params.n_sites
    bj = params.beta * params.j_coupling
    rhs = (
        1.0 / n
        + (1.0 - 1.0 / n) * pair_aa_avg
        + 2.0 * exchange / (bj * n)
        + 2.0 * ibp_sum / (bj * n**1.5)
    )
    return overlap_sq - rhs


# --------------------------------------------------------------------------
# workers
# --------------------------------------------------------------------------

def indexed_sample(config: EnsembleConfig, index: int) -> CouplingSample:
    """The coupling draw for sample `index`: SeedSequence(master, (index,)).

    This is the whole determinism story -- the draw depends on the index
    alone, never on which worker runs it or in what order.
    """
    seq = np.random.SeedSequence(config.master_seed, spawn_key=(index,))
    seed = int(seq.generate_state(1, np.uint64)[0])
    rng = np.random.Generator(np.random.PCG64(seq))
    return sample_couplings(config.spec, config.params.n_sites, rng, seed=seed)


def _mc_task(args: tuple[EnsembleConfig, int]) -> SampleReport:
    config, index = args
    return evaluate_sample(
        config.params,
        indexed_sample(config, index),
        spec=config.spec,
        remainders=config.remainders,
        remainder_nodes=config.remainder_nodes,
        orbit_average=config.mode == "gauge_paired",
    )


def _enum_digits(index: int, base: int, width: int) -> np.ndarray:
    digits = np.empty(width, dtype=np.int64)
    for p in range(width - 1, -1, -1):
        digits[p] = index % base
        index //= base
    return digits


def _enum_task(args: tuple[EnsembleConfig, int]) -> tuple[SampleReport, np.ndarray, np.ndarray]:
    """Pass 1 of enumeration: measure one assignment; remainders are
    attached in pass 2 from the full per-assignment tables."""
    config, index = args
    spec, params = config.spec, config.params
    support = np.array(spec.support)
    weights = np.array(spec.weights)
    digits = _enum_digits(index, len(support), n_pairs(params.n_sites))
    sample = CouplingSample(
        params.n_sites, support[digits], kind=spec.kind, seed=index
    )
    report = evaluate_sample(
        params,
        sample,
        spec=spec,
        weight=float(np.prod(weights[digits])),
    )
    # the per-pair correlators are the off-diagonal zz entries, so the
    # remainder tables cost nothing beyond what the report already holds
    pair_mean = np.array([report.zz[i, j] for i, j in pairs(params.n_sites)])
    conn = report.pair_aa - pair_mean**2
    return report, pair_mean, conn


def _pool_map(fn, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    ctx = get_context("fork")
    chunk = max(1, len(tasks) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


# --------------------------------------------------------------------------
# the harness
# --------------------------------------------------------------------------

def run_ensemble(
    config: EnsembleConfig,
    *,
    workers: int = 1,
    collect_reports: bool = False,
) -> EnsembleStats:
    """Evaluate the ensemble and aggregate in deterministic sample order."""
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if config.mode == "enumerate":
        reports = _run_enumeration(config, workers)
        exact = True
    else:
        tasks = [(config, i) for i in range(config.n_samples)]
        reports = _pool_map(_mc_task, tasks, workers)
        exact = False

    accs: dict[str, _Welford] = {}
    track = list(_RECORD_FIELDS)
    with_remainders = not math.isnan(reports[0].ibp_sum)
    if with_remainders:
        track += ["ibp_sum", "rau_residual"]
    for name in track:
        accs[name] = _Welford()
    for rep in reports:
        values = {
            "overlap_mean": rep.overlap_mean,
            "overlap_sq": rep.overlap_sq,
            "exchange": rep.exchange,
            "exchange_density": rep.exchange / rep.n_sites,
            "gs_density": rep.gs_energy / rep.n_sites,
            "exchange_above_gs": rep.exchange - rep.gs_energy,
            "m1": rep.m1,
            "m2": rep.m2,
            "m4": rep.m4,
            "duhamel_pair_avg": rep.duhamel_pair_avg,
            "fb_margin_min": rep.fb_margin_min,
            "zz01_sq": rep.zz01_sq,
        }
        if with_remainders:
            values["ibp_sum"] = rep.ibp_sum
            values["rau_residual"] = rep.rau_residual
        for name in track:
            accs[name].add(values[name], rep.weight)

    records = {name: acc.finalize(exact_weights=exact) for name, acc in accs.items()}
    return EnsembleStats(
        config=config,
        n=len(reports),
        records=records,
        reports=tuple(reports) if collect_reports else None,
    )


def _run_enumeration(config: EnsembleConfig, workers: int) -> list[SampleReport]:
    spec, params = config.spec, config.params
    support = np.array(spec.support)
    weights = np.array(spec.weights)
    n_pr = n_pairs(params.n_sites)
    s = len(support)
    total = config.enumeration_size

    results = _pool_map(_enum_task, [(config, a) for a in range(total)], workers)
    reports = [r[0] for r in results]
    c_pairs = np.array([r[1] for r in results])      # (T, P)
    conn_pairs = np.array([r[2] for r in results])   # (T, P)

    # pass 2: every quadrature node of pair p at assignment a is itself the
    # assignment with digit p replaced, so conditional residuals are sums of
    # table lookups: delta_p(a) = sum_k w_k [g_k f - scale * f'] at a|_{p<-k}
    scale = params.beta * params.j_coupling / math.sqrt(params.n_sites)
    idx = np.arange(total, dtype=np.int64)
    ibp = np.zeros(total)
    for p in range(n_pr):
        stride = s ** (n_pr - 1 - p)
        base = idx - ((idx // stride) % s) * stride
        acc = np.zeros(total)
        for k in range(s):
            look = base + k * stride
            acc += weights[k] * (
                support[k] * c_pairs[look, p] - scale * conn_pairs[look, p]
            )
        ibp += acc

    out = []
    for a, rep in enumerate(reports):
        residual = _rau_residual(
            params, rep.overlap_sq, rep.duhamel_pair_avg, rep.exchange, float(ibp[a])
        )
        out.append(replace(rep, ibp_sum=float(ibp[a]), rau_residual=residual))
    return out


def assemble_rau_identity(stats: EnsembleStats, params: ModelParams | None = None) -> BoundReport:
    """Check the ensemble-level overlap identity

        E<R^2> = 1/n + (1 - 1/n) E(A,A) + (2/(beta j n)) E<U> - (2/(beta j)) Delta_n

    from the aggregated ingredients.  Delta_n comes from remainder
    accounting when present; a gaussian law needs none (Stein identity
    makes it exactly zero); anything else without remainders is refused.
    Tolerance: 1e-8 for exact enumeration, else 3 combined standard errors.
    """
    if params is None:
        params = stats.config.params
    elif params != stats.config.params:
        raise ValueError("params disagree with the ones the ensemble was run at")
    n = params.n_sites
    bj = params.beta * params.j_coupling
    if bj <= 0.0:
        raise ValueError("the overlap identity needs beta * j > 0")

    rec = stats.records
    delta_se = 0.0
    if "ibp_sum" in rec:
        delta_n = stats.delta_n
        delta_se = rec["ibp_sum"].std_error / n**1.5
    elif stats.config.spec.kind == "gaussian":
        delta_n = 0.0
    else:
        raise ValueError(
            "no remainder accounting in this run and the law is not gaussian; "
            "re-run with remainders enabled"
        )

    lhs = stats.overlap_sq_mean
    rhs = (
        1.0 / n
        + (1.0 - 1.0 / n) * stats.duhamel_pair_mean
        + 2.0 * rec["exchange"].mean / (bj * n)
        - 2.0 * delta_n / bj
    )
    residual = lhs - rhs
    combined_se = math.sqrt(
        rec["overlap_sq"].std_error ** 2
        + ((1.0 - 1.0 / n) * rec["duhamel_pair_avg"].std_error) ** 2
        + (2.0 * rec["exchange"].std_error / (bj * n)) ** 2
        + (2.0 * delta_se / bj) ** 2
    )
    tolerance = max(1e-8, 3.0 * combined_se)
    return BoundReport(
        name="overlap_identity",
        lhs=lhs,
        rhs=rhs,
        residual=residual,
        tolerance=tolerance,
        passed=abs(residual) <= tolerance,
        details={"delta_n": delta_n, "mode": stats.config.mode, "n_samples": stats.n},
    )


def gauge_average_two_point(report: SampleReport) -> np.ndarray:
    """Exact gauge-orbit average of the report's two-point matrix.

    Off-diagonal entries average to zero over sign patterns (for each
    i != j, eps_i eps_j is +1 and -1 equally often under a symmetric
    law), the diagonal is identically 1; no diagonalization needed.
    """
    if not report.symmetric_law:
        raise ValueError("gauge averaging requires a symmetric coupling law")
    return np.eye(report.n_sites)


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    """One grid node of a sweep: either stats or a recorded failure."""

    beta: float
    h: float
    config: EnsembleConfig | None
    stats: EnsembleStats | None
    error: str | None = None


def point_seed(master_seed: int, index: int) -> int:
    """Per-grid-node master seed: u64 drawn from SeedSequence((master, index))."""
    seq = np.random.SeedSequence((master_seed, index))
    return int(seq.generate_state(1, np.uint64)[0])


def sweep_grid(
    base: EnsembleConfig,
    betas,
    hs,
    *,
    workers: int = 1,
    collect_reports: bool = False,
) -> list[SweepPoint]:
    """Run the ensemble across the (beta, h) grid, row-major with beta as
    the outer loop.  A failing node is recorded and the sweep continues."""
    betas = [float(b) for b in betas]
    hs = [float(x) for x in hs]
    if not betas or not hs:
        raise ValueError("sweep grid must contain at least one (beta, h) node")
    points: list[SweepPoint] = []
    index = 0
    for b in betas:
        for x in hs:
            try:
                cfg = replace(
                    base,
                    params=replace(base.params, beta=b, h=x),
                    master_seed=point_seed(base.master_seed, index),
                )
                stats = run_ensemble(cfg, workers=workers, collect_reports=collect_reports)
                points.append(SweepPoint(b, x, cfg, stats))
            except Exception as exc:  # per-node isolation is the contract
                points.append(SweepPoint(b, x, None, None, error=f"{type(exc).__name__}: {exc}"))
            index += 1
    return points
