"""Walk and triangle cumulants of long-range percolation random graphs."""
from .cumulants import (
    CumulantEstimate,
    SampleSet,
    bootstrap_ci,
    cumulants_to_moments,
    k_statistics,
    moments_to_cumulants,
)
from .diagrams import (
    Census,
    Diagram,
    T_table,
    census,
    count_max_tree_diagrams,
    count_min_tree_diagrams,
    count_sigma_prufer,
    count_tree_diagrams_mixed,
    enumerate_diagrams_bruteforce,
    mu_diagram_weight,
)
from .ensemble import EnsembleParams, RegimeSpec, SparseGraph, edge_probability, resolve_regime, sample_graph
from .errors import WalkcumError
from .harness import ComparisonReport, ExperimentPlan, clt_check, emit_report, poisson_gof, run_experiment
from .kernels import BACKEND
from .prufer import PruferCode, prufer_decode, prufer_encode
from .theory import (
    BoundReport,
    LimitValue,
    bound_report,
    compound_moment_asymptote,
    mean_X3,
    mean_Y,
    phi_1,
    phi_2,
    phi_3,
    poisson_limit_params,
    rho_q,
    theta_2_i,
    theta_2_ii,
    theta_i_unweighted,
    theta_ii_unweighted,
    theta_iii,
    xi_1,
    xi_2_twostar,
    xi_3,
)
from .walks import WalkStat, count_closed_X3, count_walks_Y, normalize_statistic
from .weights import (
    FourierTable,
    KernelMoments,
    WeightFunction,
    compute_V,
    eval_h,
    fourier_h,
    theta2_convolution,
    triple_product_H,
)

__version__ = "0.1.0"
