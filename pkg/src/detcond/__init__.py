"""Determinantal random conductance model on finite graphs."""

from .graphs import (
    FiniteGraph,
    SizeCapError,
    build_box,
    builtin_graph,
    contract,
    grid_graph,
    parse_edge_list,
    planar_dual,
    write_edge_list,
)
from .laplacian import (
    Conductances,
    LaplacianState,
    green_gradient,
    kirchhoff_sum,
    log_det_zero_mean,
    transfer_current,
)
from .contours import Contour, enumerate_contours_around
from .dobrushin import DobrushinReport, dobrushin_bound, green_decay_fit
from .duality import (
    DualMap,
    check_duality_pushforward,
    estimate_contour_frequency,
    free_wired_gap,
    is_q_contour,
    peierls_bound,
)
from .gaussian import (
    GradientField,
    PinnedGaussianSampler,
    conditional_kappa_given_eta,
    potential,
    sample_field_given_kappa,
    two_layer_roundtrip,
)
from .mcmc import (
    ChainState,
    CouplingState,
    central_edge,
    checkpoint,
    restore,
    run_coupled,
)
from .model import (
    ExactDistribution,
    MeasureSpec,
    conditional_hard,
    dual_parameter,
    enumerate_distribution,
    log_weight,
    self_dual_point,
    specification_kernel,
)
from .spanning import TreeMeasure, spanning_trees

__version__ = "0.1.0"
