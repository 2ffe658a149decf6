"""Parallel replicated Gibbs sampling for CPT learning in discrete Bayesian networks."""

from .datagen import DataMatrix, forward_sample, mask, replicate, train_test_split
from .errors import (
    CardinalityTooSmall,
    CycleDetected,
    DegenerateLabels,
    DimensionMismatch,
    DuplicateEdge,
    EmptyData,
    EmptyTrace,
    InvalidIndex,
    IoError,
    ParseError,
    SamGibbsError,
    ShapeMismatch,
    ValidationError,
    ZeroSupport,
)
from .metrics import (
    RocCurve,
    ThroughputSummary,
    avg_abs_error,
    kl_avg,
    predict_missing,
    roc_auc,
    throughput,
)
from .model import (
    CountSet,
    CptSet,
    DirichletPrior,
    accumulate_counts,
    full_conditional,
    init_cpts,
    mean_cpts,
    sample_cpts,
    zero_counts,
)
from .network import (
    Coloring,
    MoralGraph,
    Network,
    build_network,
    children_of,
    color_graph,
    moralize,
)
from .sampler import (
    Minibatch,
    SamplerConfig,
    SamplerState,
    Trace,
    TraceRecord,
    anneal_m,
    replicate_minibatch,
    run,
    sweep,
    update_exponential,
    update_moving_sum,
)

__version__ = "0.1.0"

__all__ = [
    "CardinalityTooSmall",
    "Coloring",
    "CountSet",
    "CptSet",
    "CycleDetected",
    "DataMatrix",
    "DegenerateLabels",
    "DimensionMismatch",
    "DirichletPrior",
    "DuplicateEdge",
    "EmptyData",
    "EmptyTrace",
    "InvalidIndex",
    "IoError",
    "Minibatch",
    "MoralGraph",
    "Network",
    "ParseError",
    "RocCurve",
    "SamGibbsError",
    "SamplerConfig",
    "SamplerState",
    "ShapeMismatch",
    "ThroughputSummary",
    "Trace",
    "TraceRecord",
    "ValidationError",
    "ZeroSupport",
    "accumulate_counts",
    "anneal_m",
    "avg_abs_error",
    "build_network",
    "children_of",
    "color_graph",
    "forward_sample",
    "full_conditional",
    "init_cpts",
    "kl_avg",
    "mask",
    "mean_cpts",
    "moralize",
    "predict_missing",
    "replicate",
    "replicate_minibatch",
    "roc_auc",
    "run",
    "sample_cpts",
    "sweep",
    "throughput",
    "train_test_split",
    "update_exponential",
    "update_moving_sum",
    "zero_counts",
]
