"""End-to-end driver: segment every curve, build padded feature
vectors, scale, pick a cluster count by majority vote, and cluster.

Curves are processed independently, so the segmentation stage can fan
out over a thread pool; results are merged by curve index and the output
is identical for any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .clustering import (
    K_MAX_DEFAULT,
    K_MIN_DEFAULT,
    KMEANS_MAX_ITER_DEFAULT,
    RESTARTS_DEFAULT,
    KSelection,
    Partition,
    kmeans,
    select_k_majority,
)
from .dataio import Dataset
from .errors import InputError
from .segmentation import S_THRESHOLD_DEFAULT, segment
from .spline_features import featurize, scale_features
from .trend_filter import (
    EPS_REL_DEFAULT,
    GRID_SIZE_DEFAULT,
    MAX_ITER_DEFAULT,
    TOL_DEFAULT,
)

__all__ = ["PipelineConfig", "PipelineResult", "segment_dataset", "run_pipeline"]

K_MAX_SEGMENT_DEFAULT = 10


@dataclass(frozen=True)
class PipelineConfig:
    """Validated knob set for the full pipeline.

    ``force_k`` skips the majority vote and clusters at a fixed count.
    ``jitter`` only matters to callers that also simulate; it is carried
    here so one config object can describe a whole experiment.
    """

    k_max: int = K_MAX_SEGMENT_DEFAULT
    s_threshold: float = S_THRESHOLD_DEFAULT
    grid_size: int = GRID_SIZE_DEFAULT
    eps_rel: float = EPS_REL_DEFAULT
    tol: float = TOL_DEFAULT
    max_iter: int = MAX_ITER_DEFAULT
    cluster_k_min: int = K_MIN_DEFAULT
    cluster_k_max: int = K_MAX_DEFAULT
    restarts: int = RESTARTS_DEFAULT
    kmeans_max_iter: int = KMEANS_MAX_ITER_DEFAULT
    seed: int = 0
    jitter: str = "verbatim"
    force_k: Optional[int] = None
    threads: int = 1

    def __post_init__(self):
        if self.k_max < 1:
            raise InputError(f"k_max must be at least 1, got {self.k_max}")
        if self.grid_size < 2:
            raise InputError(f"grid_size must be at least 2, got {self.grid_size}")
        if not self.s_threshold > 0:
            raise InputError(f"s_threshold must be positive, got {self.s_threshold}")
        if not self.eps_rel > 0:
            raise InputError(f"eps_rel must be positive, got {self.eps_rel}")
        if not self.tol > 0:
            raise InputError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1 or self.kmeans_max_iter < 1:
            raise InputError("iteration limits must be at least 1")
        if not 2 <= self.cluster_k_min <= self.cluster_k_max:
            raise InputError(
                "need 2 <= cluster_k_min <= cluster_k_max, got "
                f"[{self.cluster_k_min}, {self.cluster_k_max}]"
            )
        if self.restarts < 1:
            raise InputError(f"restarts must be at least 1, got {self.restarts}")
        if self.threads < 1:
            raise InputError(f"threads must be at least 1, got {self.threads}")
        if self.force_k is not None and self.force_k < 1:
            raise InputError(f"force_k must be at least 1, got {self.force_k}")
        if self.jitter not in ("verbatim", "symmetric"):
            raise InputError(f"jitter must be verbatim or symmetric, got {self.jitter!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PipelineResult:
    """Everything the pipeline produced, aligned with dataset order."""

    ids: tuple
    segmentations: tuple
    features: np.ndarray
    scaled: np.ndarray
    feature_means: np.ndarray
    feature_sds: np.ndarray
    k_m: int
    selection: Optional[KSelection]
    partition: Partition

    @property
    def labels(self) -> np.ndarray:
        return self.partition.labels


def segment_dataset(dataset: Dataset, config: PipelineConfig) -> tuple:
    """Segment every curve; order follows the dataset regardless of
    thread count."""

    def work(curve):
        return segment(
            curve,
            k_max=config.k_max,
            s_threshold=config.s_threshold,
            grid_size=config.grid_size,
            eps_rel=config.eps_rel,
            tol=config.tol,
            max_iter=config.max_iter,
        )

    if config.threads == 1:
        return tuple(work(c) for c in dataset.curves)
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        return tuple(pool.map(work, dataset.curves))


def run_pipeline(dataset: Dataset, config: PipelineConfig = PipelineConfig()) -> PipelineResult:
    """Segment, featurize, scale, select the cluster count, cluster."""
    if len(dataset) < 2:
        raise InputError("pipeline needs at least 2 curves")
    segs = segment_dataset(dataset, config)
    features, k_m = featurize(segs)
    scaled, means, sds = scale_features(features)
    if config.force_k is not None:
        selection = None
        k_star = config.force_k
    else:
        selection = select_k_majority(
            scaled,
            k_min=config.cluster_k_min,
            k_max=config.cluster_k_max,
            restarts=config.restarts,
            seed=config.seed,
            max_iter=config.kmeans_max_iter,
        )
        k_star = selection.k_star
    partition = kmeans(
        scaled,
        k_star,
        restarts=config.restarts,
        max_iter=config.kmeans_max_iter,
        seed=config.seed,
    )
    return PipelineResult(
        ids=tuple(dataset.ids()),
        segmentations=segs,
        features=features,
        scaled=scaled,
        feature_means=means,
        feature_sds=sds,
        k_m=k_m,
        selection=selection,
        partition=partition,
    )
