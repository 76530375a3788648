"""Piecewise-linear curve summarization and functional clustering.

The pipeline turns each observed curve into a short parameter vector in
three steps: an L1 penalty on discrete second differences proposes
candidate slope-change positions, exhaustive least-squares refits pick
the best subset of each size and a normalized-cost rule picks how many
to keep, and the chosen continuous piecewise-linear fit is encoded by
its node values (order-2 B-spline coefficients) plus knot positions.
Curves are then clustered with restarted k-means, with the cluster
count chosen by a majority vote of four validity indices.
"""

from .bench import BenchConfig, run_ari_benchmark, run_cp_study
from .clustering import (
    KSelection,
    Partition,
    index_hartigan,
    index_kl,
    index_ptbiserial,
    index_sd,
    kmeans,
    membership_profiles,
    select_k_majority,
)
from .dataio import Curve, Dataset, load_dataset, read_table, write_table
from .errors import (
    ConvergenceError,
    EmptySegmentError,
    InputError,
    InvariantError,
    PlfcError,
)
from .metrics import ari, changepoint_frequencies
from .pipeline import PipelineConfig, PipelineResult, run_pipeline, segment_dataset
from .segmentation import Segmentation, best_subsets, continuous_pl_rss, segment, select_k
from .simulate import (
    JITTER_SYMMETRIC,
    JITTER_VERBATIM,
    MODEL_1,
    MODEL_2,
    ClusterSpec,
    ModelSpec,
    TruthRecord,
    get_model,
    interpolant,
    sample_cluster_curve,
    sample_curve,
    sample_dataset,
)
from .spline_features import (
    SplineBasis,
    build_basis,
    featurize,
    project,
    scale_features,
)
from .trend_filter import (
    TrendFit,
    candidates,
    kkt_residual,
    lambda_max,
    search_lambda,
    second_difference,
    solve_tf,
)

__version__ = "1.0.0"

__all__ = [
    "__version__",
    "BenchConfig",
    "ClusterSpec",
    "ConvergenceError",
    "Curve",
    "Dataset",
    "EmptySegmentError",
    "InputError",
    "InvariantError",
    "JITTER_SYMMETRIC",
    "JITTER_VERBATIM",
    "KSelection",
    "MODEL_1",
    "MODEL_2",
    "ModelSpec",
    "Partition",
    "PipelineConfig",
    "PipelineResult",
    "PlfcError",
    "Segmentation",
    "SplineBasis",
    "TrendFit",
    "TruthRecord",
    "ari",
    "best_subsets",
    "build_basis",
    "candidates",
    "changepoint_frequencies",
    "continuous_pl_rss",
    "featurize",
    "get_model",
    "index_hartigan",
    "index_kl",
    "index_ptbiserial",
    "index_sd",
    "interpolant",
    "kkt_residual",
    "kmeans",
    "lambda_max",
    "load_dataset",
    "membership_profiles",
    "project",
    "read_table",
    "run_ari_benchmark",
    "run_cp_study",
    "run_pipeline",
    "sample_cluster_curve",
    "sample_curve",
    "sample_dataset",
    "scale_features",
    "search_lambda",
    "second_difference",
    "segment",
    "segment_dataset",
    "select_k",
    "select_k_majority",
    "solve_tf",
    "write_table",
]
