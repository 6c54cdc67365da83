"""Exact-diagonalization laboratory for the transverse-field
random-exchange (quantum spin-glass) model.

The package is organized bottom-up:

    hilbert      Pauli operators, spin tables, Hilbert-space caps
    model        coupling laws, disorder samples, the Hamiltonian, gauges
    spectral     diagonalization, Gibbs states, Duhamel correlations
    observables  correlators, overlap moments, classical ground states
    bounds       Falk-Bruch machinery, integration-by-parts remainders,
                 the assembled overlap lower bound
    ensemble     disorder averaging (Monte Carlo / enumeration / gauge
                 pairing) with deterministic parallelism
    experiment   experiment files and atomic CSV/JSON writers
    cli          the qsklab command
"""

from ._version import __version__
from .hilbert import (
    AXES,
    CapacityError,
    Operator,
    max_sites,
    op_product,
    pauli_op,
    spin_table,
    total_axis_sum,
)
from .model import (
    CouplingSample,
    DisorderSpec,
    ModelParams,
    build_hamiltonian,
    exchange_diagonal,
    exchange_operator,
    flip_unitary,
    gauge_transform,
    gauss_hermite_spec,
    gauss_legendre_spec,
    gaussian_spec,
    law_quadrature,
    pair_index,
    pairs,
    rademacher_spec,
    replace_coupling,
    sample_couplings,
    sample_from_text,
    sample_hash,
    sample_to_text,
    spec_by_name,
    table_spec,
    uniform_spec,
)
from .spectral import (
    ThermalState,
    connected_duhamel2,
    connected_duhamel3,
    duhamel,
    duhamel_kernel,
    expectation,
    log_partition,
    perturbed_log_partition,
    thermal_state,
)
from .observables import (
    basis_probabilities,
    classical_ground_state,
    exchange_expectation,
    magnetization_moment,
    overlap_mean,
    overlap_square,
    x_expectations,
    z_expectations,
    zz_matrix,
)
from .bounds import (
    CLASSICAL_GS_DENSITY,
    FBPairReport,
    TheoremReport,
    aip_pair_bound,
    aip_total_bound,
    all_pair_duhamels,
    conditional_ibp_residual,
    conditional_ibp_residuals,
    dls,
    double_commutator,
    fb_lower_general,
    fb_pair_report,
    ibp_residual,
    pair_zz_duhamel,
    phi,
    theorem_report,
)
from .ensemble import (
    BoundReport,
    EnsembleConfig,
    EnsembleStats,
    ObservableStats,
    SampleReport,
    SweepPoint,
    assemble_rau_identity,
    evaluate_sample,
    gauge_average_two_point,
    indexed_sample,
    run_ensemble,
    sweep_grid,
)
from .experiment import (
    Experiment,
    ExperimentError,
    load_experiment,
    parse_experiment,
)

__all__ = [name for name in dir() if not name.startswith("_")]
