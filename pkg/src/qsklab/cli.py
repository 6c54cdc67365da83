"""qsklab command line: verification suites, sweeps, single-sample dumps.

    qsklab verify {algebra,duhamel,lemmas,theorem} [flags]
    qsklab sweep EXPERIMENT_FILE [--workers N]
    qsklab sample --n N --beta B --h H [--j J --law L --seed S]

Exit codes: 0 all checks pass, 1 at least one check failed, 2 usage or
configuration error, 3 a resource cap was hit.  Everything is
deterministic given flags + seed; QSKLAB_MAX_N lifts the Hilbert-space
cap for people with patience.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from ._version import __version__
from .hilbert import AXES, CapacityError, op_product, pauli_op
from .model import (
    CouplingSample,
    ModelParams,
    build_hamiltonian,
    flip_unitary,
    gauge_transform,
    gauss_hermite_spec,
    gauss_legendre_spec,
    pairs,
    sample_couplings,
    spec_by_name,
)
from .spectral import (
    duhamel,
    expectation,
    perturbed_log_partition,
    thermal_state,
)
from .bounds import (
    aip_pair_bound,
    conditional_ibp_residuals,
    ibp_residual,
    theorem_report,
)
from .ensemble import (
    BoundReport,
    EnsembleConfig,
    assemble_rau_identity,
    config_to_dict,
    evaluate_sample,
    indexed_sample,
    run_ensemble,
    sweep_grid,
)
from .experiment import (
    ExperimentError,
    load_experiment,
    sweep_csv_text,
    write_json,
    write_samples_jsonl,
    write_text_atomic,
)

SUITES = ("algebra", "duhamel", "lemmas", "theorem")

_EPS = float(np.finfo(float).eps)


def _dev_report(name: str, deviation: float, tol: float) -> BoundReport:
    """Check that a magnitude is tolerance-small."""
    return BoundReport(
        name=name, lhs=deviation, rhs=0.0, residual=deviation,
        tolerance=tol, passed=deviation <= tol,
    )


def _floor_report(name: str, value: float, floor: float, tol: float, **details) -> BoundReport:
    """Check value >= floor - tol."""
    return BoundReport(
        name=name, lhs=value, rhs=floor, residual=value - floor,
        tolerance=tol, passed=value >= floor - tol, details=details or {},
    )


def _max_abs(m: np.ndarray) -> float:
    return float(np.abs(m).max())


# --------------------------------------------------------------------------
# verify: algebra
# --------------------------------------------------------------------------

_LEVI = {("x", "y"): "z", ("y", "z"): "x", ("z", "x"): "y"}


def suite_algebra(args) -> tuple[list[BoundReport], list[str]]:
    n_max = args.n if args.n is not None else 4
    seed = args.seed if args.seed is not None else 2024
    checks: list[BoundReport] = []
    for n in range(1, n_max + 1):
        dim = 2**n
        eye = np.eye(dim)
        sq_dev = comm_dev = cross_dev = 0.0
        for site in range(n):
            ops = {ax: pauli_op(ax, site, n).matrix for ax in AXES}
            for ax in AXES:
                sq_dev = max(sq_dev, _max_abs(ops[ax] @ ops[ax] - eye))
            for (a, b), c in _LEVI.items():
                comm = ops[a] @ ops[b] - ops[b] @ ops[a]
                comm_dev = max(comm_dev, _max_abs(comm - 2.0j * ops[c]))
        for i, j in pairs(n):
            for a in AXES:
                for b in AXES:
                    pa = pauli_op(a, i, n).matrix
                    pb = pauli_op(b, j, n).matrix
                    cross_dev = max(cross_dev, _max_abs(pa @ pb - pb @ pa))
        checks.append(_dev_report(f"squares_to_identity_n{n}", sq_dev, 1e-10))
        checks.append(_dev_report(f"onsite_commutators_n{n}", comm_dev, 1e-10))
        if n >= 2:
            checks.append(_dev_report(f"cross_site_commute_n{n}", cross_dev, 1e-10))

        if n >= 2:
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, n))))
            sample = sample_couplings(spec_by_name("gaussian"), n, rng)
            params = ModelParams(n_sites=n, beta=1.0, h=0.7)
            h_mat = build_hamiltonian(params, sample).matrix
            w = flip_unitary([-1] * n).matrix
            flip_dev = _max_abs(w @ h_mat @ w.conj().T - h_mat)
            checks.append(_dev_report(f"global_flip_symmetry_n{n}", flip_dev, 1e-10))

            signs = np.where(rng.random(n) < 0.5, -1, 1)
            if np.all(signs == 1):
                signs[0] = -1
            w_eps = flip_unitary(signs).matrix
            h_gauged = build_hamiltonian(params, gauge_transform(sample, signs)).matrix
            gauge_dev = _max_abs(w_eps @ h_mat @ w_eps.conj().T - h_gauged)
            checks.append(_dev_report(f"gauge_equivalence_n{n}", gauge_dev, 1e-10))
    return checks, [f"pauli and symmetry identities for n = 1..{n_max}"]


# --------------------------------------------------------------------------
# verify: duhamel
# --------------------------------------------------------------------------

def suite_duhamel(args) -> tuple[list[BoundReport], list[str]]:
    n = args.n if args.n is not None else 3
    beta = args.beta if args.beta is not None else 1.7
    h = args.h if args.h is not None else 0.6
    seed = args.seed if args.seed is not None else 11
    checks: list[BoundReport] = []

    # single spin in a pure transverse field: (sz, sz) = tanh(beta h)/(beta h)
    one = CouplingSample(1, np.empty(0))
    sz = pauli_op("z", 0, 1)
    for bh in (0.01, 0.1, 1.0, 10.0):
        st = thermal_state(build_hamiltonian(ModelParams(1, 1.0, bh), one), 1.0)
        dev = abs(duhamel(st, sz) - math.tanh(bh) / bh)
        checks.append(_dev_report(f"single_spin_closed_form_bh{bh:g}", dev, 1e-10))

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 1))))
    spec = spec_by_name("gaussian")
    sample = sample_couplings(spec, n, rng)

    # h = 0 makes everything commute: (A, A) = <A^2> = 1 for A = sz_i sz_j
    st0 = thermal_state(build_hamiltonian(ModelParams(n, beta, 0.0), sample), beta)
    a_op = op_product(pauli_op("z", 0, n), pauli_op("z", 1, n))
    checks.append(_dev_report("commuting_case_unit", abs(duhamel(st0, a_op) - 1.0), 1e-10))

    # generating identity: beta^2 (A,A) = d^2/dx^2 log Z + beta^2 <A>^2
    params = ModelParams(n, beta, h)
    h_op = build_hamiltonian(params, sample)
    st = thermal_state(h_op, beta)
    f0 = perturbed_log_partition(h_op, a_op, beta, 0.0)
    step = (_EPS * max(1.0, abs(f0))) ** 0.25 / beta
    d2 = (
        perturbed_log_partition(h_op, a_op, beta, step)
        - 2.0 * f0
        + perturbed_log_partition(h_op, a_op, beta, -step)
    ) / step**2
    lhs = beta**2 * duhamel(st, a_op)
    rhs = d2 + beta**2 * expectation(st, a_op) ** 2
    checks.append(_dev_report("generating_identity_fd", abs(lhs - rhs), 1e-6))

    # sandwich <A>^2 <= (A,A) <= <A^2>
    aa = duhamel(st, a_op)
    mean_sq = expectation(st, a_op) ** 2
    a_sq = expectation(st, op_product(a_op, a_op))
    checks.append(_floor_report("duhamel_above_mean_sq", aa, mean_sq, 1e-12))
    checks.append(_floor_report("duhamel_below_second_moment", a_sq, aa, 1e-12))
    return checks, [f"duhamel identities at n={n}, beta={beta:g}, h={h:g}, seed={seed}"]


# --------------------------------------------------------------------------
# verify: lemmas
# --------------------------------------------------------------------------

_IBP_CUBE_EXPECTED = {"gaussian": 0.0, "rademacher": -2.0, "uniform": -1.2}


def _lemmas_spec(law: str, mode: str, nodes: int):
    """enumerate mode needs a finite law; continuous laws are realized as
    their native quadrature tables, which keeps the run an exact identity
    for the table while approximating the continuous law to node order."""
    if mode != "enumerate":
        return spec_by_name(law), None
    if law == "gaussian":
        return gauss_hermite_spec(nodes), f"gaussian realized as {nodes}-node Gauss-Hermite table"
    if law == "uniform":
        return gauss_legendre_spec(nodes), f"uniform realized as {nodes}-node Gauss-Legendre table"
    return spec_by_name(law), None


def suite_lemmas(args) -> tuple[list[BoundReport], list[str]]:
    n = args.n if args.n is not None else 4
    law = args.law if args.law is not None else "rademacher"
    mode = args.mode if args.mode is not None else "enumerate"
    beta = args.beta if args.beta is not None else 1.0
    h = args.h if args.h is not None else 0.4
    j = args.j if args.j is not None else 1.0
    n_samples = args.samples if args.samples is not None else 200
    seed = args.seed if args.seed is not None else 7
    nodes = args.nodes if args.nodes is not None else 24

    checks: list[BoundReport] = []
    info: list[str] = []
    spec, note = _lemmas_spec(law, mode, nodes)
    if note:
        info.append(note)

    # synthetic remainder: f = g^3 has E[g f] - E[f'] = E[g^4] - 3
    dev = abs(
        ibp_residual(spec, lambda g: g**3, lambda g: 3.0 * g**2, n_nodes=nodes)
        - _IBP_CUBE_EXPECTED[law]
    )
    checks.append(_dev_report(f"ibp_cubic_closed_form_{law}", dev, 1e-10))

    params = ModelParams(n_sites=n, beta=beta, h=h, j_coupling=j)
    config = EnsembleConfig(
        params=params,
        spec=spec,
        n_samples=n_samples,
        master_seed=seed,
        mode=mode,
        remainders=(mode != "enumerate" and law != "gaussian"),
        remainder_nodes=nodes if spec.discrete is False else None,
    )
    stats = run_ensemble(config, workers=args.workers, collect_reports=True)
    info.append(
        f"{mode} run: {stats.n} samples at n={n}, beta={beta:g}, h={h:g}, j={j:g}"
    )

    checks.append(assemble_rau_identity(stats))
    if mode == "enumerate" and law == "gaussian":
        checks.append(_dev_report("gaussian_remainder_vanishes", abs(stats.delta_n), 1e-6))
    if not math.isnan(stats.delta_n):
        info.append(f"remainder term delta_n = {stats.delta_n:+.6e}")

    checks.append(_floor_report(
        "falk_bruch_margin", stats.records["fb_margin_min"].min, 0.0, 1e-9,
    ))
    checks.append(_floor_report(
        "exchange_vs_ground_state", stats.records["exchange_above_gs"].min, 0.0, 1e-9,
    ))

    # physical remainders against the third-moment Taylor bound, re-derived
    # by direct quadrature on a capped subset of the run's samples
    bound = aip_pair_bound(spec, params)
    worst = 0.0
    for rep in stats.reports[:64]:
        sample = CouplingSample(n, rep.gamma, kind=spec.kind, seed=rep.seed)
        worst = max(worst, float(np.abs(
            conditional_ibp_residuals(params, sample, spec, n_nodes=nodes)
        ).max()))
    checks.append(BoundReport(
        name="remainder_taylor_bound", lhs=worst, rhs=bound,
        residual=worst - bound, tolerance=1e-12, passed=worst <= bound + 1e-12,
    ))

    if mode == "enumerate":
        m1r = stats.records["m1"]
        checks.append(_dev_report("per_sample_magnetization_zero",
                                  max(abs(m1r.min), abs(m1r.max)), 1e-10))
        checks.append(_dev_report("m2_pair_counting",
                                  abs(stats.records["m2"].mean - 1.0 / n), 1e-10))
        m4_exact = (3.0 * n - 2.0) / n**3
        checks.append(_dev_report("m4_pair_counting",
                                  abs(stats.records["m4"].mean - m4_exact), 1e-10))
    return checks, info


# --------------------------------------------------------------------------
# verify: theorem
# --------------------------------------------------------------------------

def suite_theorem(args) -> tuple[list[BoundReport], list[str]]:
    n = args.n if args.n is not None else 8
    beta = args.beta if args.beta is not None else 20.0
    h = args.h if args.h is not None else 0.05
    j = args.j if args.j is not None else 1.0
    law = args.law if args.law is not None else "gaussian"
    n_samples = args.samples if args.samples is not None else 200
    seed = args.seed if args.seed is not None else 20240

    spec = spec_by_name(law)
    params = ModelParams(n_sites=n, beta=beta, h=h, j_coupling=j)
    config = EnsembleConfig(
        params=params, spec=spec, n_samples=n_samples,
        master_seed=seed, mode="monte_carlo",
    )
    stats = run_ensemble(config, workers=args.workers)

    rep = theorem_report(
        params, spec,
        overlap_sq_mean=stats.overlap_sq_mean,
        gs_density_mean=stats.records["gs_density"].mean,
    )
    ov = stats.records["overlap_sq"]
    info = [
        f"{n_samples} {law} samples at n={n}, beta={beta:g}, h={h:g}, j={j:g}",
        f"E<R^2>            = {rep.overlap_sq_mean:.6f} +- {ov.std_error:.6f}",
        f"E<R>              = {stats.records['overlap_mean'].mean:.3e}",
        f"overlap variance  = {stats.overlap_variance:.6f}",
        f"gs density mean   = {rep.gs_density_mean:.6f}",
        f"remainder bound   = {rep.delta_bound:.6g}",
        f"finite-n rhs      = {rep.rhs_finite:.6g}   margin = {rep.margin_finite:+.6g}",
        f"limit rhs         = {rep.rhs_limit:.6g}   margin = {rep.margin_limit:+.6g}",
        "(the finite-n remainder bound scales like beta^2/sqrt(n); at low",
        " temperature it is typically vacuous and reported for the record)",
    ]
    checks = [
        _floor_report(
            "overlap_variance_positive", stats.overlap_variance, 0.05, 0.0,
            std_error=ov.std_error,
        ),
        _dev_report(
            "mean_overlap_vanishes", abs(stats.records["overlap_mean"].mean), 1e-12,
        ),
        _floor_report(
            "exchange_vs_ground_state", stats.records["exchange_above_gs"].min, 0.0, 1e-9,
        ),
    ]
    return checks, info


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

_SUITE_FN = {
    "algebra": suite_algebra,
    "duhamel": suite_duhamel,
    "lemmas": suite_lemmas,
    "theorem": suite_theorem,
}


def cmd_verify(args) -> int:
    checks, info = _SUITE_FN[args.suite](args)
    print(f"qsklab {__version__} -- verify {args.suite}")
    for line in info:
        print(f"  {line}")
    width = max(len(c.name) for c in checks)
    for c in checks:
        tag = "PASS" if c.passed else "FAIL"
        print(
            f"{tag}  {c.name:<{width}}  lhs={c.lhs:+.9e}  rhs={c.rhs:+.9e}"
            f"  residual={c.residual:+.3e}  tol={c.tolerance:.1e}"
        )
    n_pass = sum(c.passed for c in checks)
    print(f"{n_pass}/{len(checks)} checks passed")
    if args.out:
        write_json(args.out, {
            "kind": "verify",
            "version": __version__,
            "suite": args.suite,
            "passed": n_pass == len(checks),
            "info": info,
            "checks": [c.to_record() for c in checks],
        })
    return 0 if n_pass == len(checks) else 1


def cmd_sweep(args) -> int:
    exp = load_experiment(args.experiment)
    workers = args.workers if args.workers is not None else exp.workers

    # surface cap violations before any diagonalization happens
    from dataclasses import replace as dc_replace

    for b in exp.betas:
        for x in exp.hs:
            dc_replace(exp.base, params=dc_replace(exp.base.params, beta=b, h=x))

    points = sweep_grid(
        exp.base, exp.betas, exp.hs,
        workers=workers,
        collect_reports=exp.samples_path is not None,
    )
    csv_text = sweep_csv_text(points, exp.base, exp.betas, exp.hs)
    if exp.csv_path:
        write_text_atomic(exp.csv_path, csv_text)
        print(f"wrote {exp.csv_path}")
    if exp.json_path:
        write_json(exp.json_path, {
            "kind": "sweep",
            "version": __version__,
            "config": config_to_dict(exp.base),
            "grid": {"betas": list(exp.betas), "hs": list(exp.hs)},
            "points": [
                {
                    "beta": pt.beta,
                    "h": pt.h,
                    "error": pt.error,
                    "stats": None if pt.stats is None else pt.stats.to_record(),
                }
                for pt in points
            ],
        })
        print(f"wrote {exp.json_path}")
    if exp.samples_path:
        reports = [r for pt in points if pt.stats for r in pt.stats.reports]
        write_samples_jsonl(exp.samples_path, reports, exp.base)
        print(f"wrote {exp.samples_path}")
    if not (exp.csv_path or exp.json_path or exp.samples_path):
        print(csv_text, end="")

    failures = [pt for pt in points if pt.error is not None]
    for pt in failures:
        print(f"node beta={pt.beta:g} h={pt.h:g} failed: {pt.error}", file=sys.stderr)
    print(f"{len(points) - len(failures)}/{len(points)} grid nodes completed")
    return 1 if failures else 0


def cmd_sample(args) -> int:
    params = ModelParams(
        n_sites=args.n,
        beta=args.beta,
        h=args.h,
        j_coupling=args.j if args.j is not None else 1.0,
    )
    spec = spec_by_name(args.law if args.law is not None else "gaussian")
    config = EnsembleConfig(
        params=params, spec=spec, n_samples=1,
        master_seed=args.seed if args.seed is not None else 0,
    )
    report = evaluate_sample(params, indexed_sample(config, 0), spec=spec)
    line = json.dumps(report.to_record(), sort_keys=True)
    print(line)
    if args.out:
        write_samples_jsonl(args.out, [report], config)
    return 0


# --------------------------------------------------------------------------
# parser / entry
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsklab",
        description="exact-diagonalization laboratory for the transverse-field "
                    "random-exchange model",
    )
    parser.add_argument("--version", action="version", version=f"qsklab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="run a named verification suite")
    pv.add_argument("suite", choices=SUITES)
    pv.add_argument("--n", type=int, default=None, help="system size (suite default)")
    pv.add_argument("--beta", type=float, default=None)
    pv.add_argument("--h", type=float, default=None)
    pv.add_argument("--j", type=float, default=None)
    pv.add_argument("--law", choices=("gaussian", "rademacher", "uniform"), default=None)
    pv.add_argument("--samples", type=int, default=None)
    pv.add_argument("--seed", type=int, default=None)
    pv.add_argument("--mode", choices=("monte_carlo", "enumerate", "gauge_paired"),
                    default=None)
    pv.add_argument("--nodes", type=int, default=None,
                    help="quadrature nodes for remainder accounting")
    pv.add_argument("--workers", type=int, default=1)
    pv.add_argument("--out", default=None, help="write a JSON report here")
    pv.set_defaults(func=cmd_verify)

    ps = sub.add_parser("sweep", help="run the sweep described by an experiment file")
    ps.add_argument("experiment", help="path to the experiment file")
    ps.add_argument("--workers", type=int, default=None,
                    help="override the experiment file's worker count")
    ps.set_defaults(func=cmd_sweep)

    pp = sub.add_parser("sample", help="measure one disorder realization")
    pp.add_argument("--n", type=int, required=True)
    pp.add_argument("--beta", type=float, required=True)
    pp.add_argument("--h", type=float, required=True)
    pp.add_argument("--j", type=float, default=None)
    pp.add_argument("--law", choices=("gaussian", "rademacher", "uniform"), default=None)
    pp.add_argument("--seed", type=int, default=None)
    pp.add_argument("--out", default=None, help="also write a JSONL file here")
    pp.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 3
    except ExperimentError as exc:
        print(f"experiment error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
