"""Synthetic piecewise-linear curve generators.

Two four-cluster generating models on the grid x_i = 10(i-1), i=1..51.
Each curve picks a cluster uniformly, shifts that cluster's knots by a
single discrete offset U, shifts its node values by a single continuous
offset V on [-200, 200], evaluates the continuous piecewise-linear
interpolant through (0, 0), (knots, values), (500, last value), and adds
Gaussian noise.

The default offset support (-30, -20, 10, 0, 10, 20, 30) is kept
verbatim even though it lists 10 twice and omits -10, so P(U=10) is 2/7.
Pass jitter="symmetric" for the balanced support. Draws happen in a
fixed order (cluster, U, V, noise) so runs at different sigma share
everything but the noise scale under one seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import Curve, Dataset
from .errors import InputError, InvariantError

__all__ = [
    "ClusterSpec",
    "ModelSpec",
    "TruthRecord",
    "MODEL_1",
    "MODEL_2",
    "JITTER_VERBATIM",
    "JITTER_SYMMETRIC",
    "get_model",
    "sample_cluster_curve",
    "sample_curve",
    "sample_dataset",
]

N_POINTS = 51
X_GRID = 10.0 * np.arange(N_POINTS)
X_MAX = 500.0

JITTER_VERBATIM = (-30.0, -20.0, 10.0, 0.0, 10.0, 20.0, 30.0)
JITTER_SYMMETRIC = (-30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0)


@dataclass(frozen=True)
class ClusterSpec:
    """One generating cluster: knot positions and node values.

    ``theta`` holds one value per knot plus the value at x = 500; the
    interpolant is pinned to 0 at x = 0.
    """

    z: int
    knots: tuple
    theta: tuple

    def __post_init__(self):
        knots = tuple(float(t) for t in self.knots)
        theta = tuple(float(v) for v in self.theta)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "theta", theta)
        if len(theta) != len(knots) + 1:
            raise InputError(
                f"cluster {self.z}: need {len(knots) + 1} node values, got {len(theta)}"
            )
        arr = np.asarray(knots)
        if arr.size == 0 or not (np.diff(arr) > 0).all():
            raise InputError(f"cluster {self.z}: knots must be strictly increasing")
        if arr[0] <= 0.0 or arr[-1] >= X_MAX:
            raise InputError(f"cluster {self.z}: knots must lie strictly in (0, {X_MAX})")

    @property
    def n_knots(self) -> int:
        return len(self.knots)


@dataclass(frozen=True)
class ModelSpec:
    """A named collection of four generating clusters."""

    name: str
    clusters: tuple

    def __post_init__(self):
        if len(self.clusters) != 4:
            raise InputError(f"model {self.name}: need 4 clusters")
        for want, spec in enumerate(self.clusters, start=1):
            if spec.z != want:
                raise InputError(f"model {self.name}: cluster {want} mislabeled")

    def cluster(self, z: int) -> ClusterSpec:
        if not 1 <= z <= 4:
            raise InputError(f"cluster label must be in 1..4, got {z}")
        return self.clusters[z - 1]


@dataclass(frozen=True)
class TruthRecord:
    """Generating parameters of one sampled curve after jitter."""

    curve_id: str
    z: int
    u: float
    v: float
    knots: tuple
    theta: tuple


MODEL_1 = ModelSpec(
    name="Model1",
    clusters=(
        ClusterSpec(z=1, knots=(150.0, 250.0), theta=(1600.0, 1900.0, 2000.0)),
        ClusterSpec(z=2, knots=(150.0, 300.0), theta=(1400.0, 1800.0, 2200.0)),
        ClusterSpec(
            z=3,
            knots=(100.0, 200.0, 300.0, 400.0),
            theta=(300.0, 1500.0, 1700.0, 2000.0, 2200.0),
        ),
        ClusterSpec(z=4, knots=(50.0, 150.0, 300.0), theta=(200.0, 1300.0, 1800.0, 2100.0)),
    ),
)

MODEL_2 = ModelSpec(
    name="Model2",
    clusters=MODEL_1.clusters[:3]
    + (ClusterSpec(z=4, knots=(150.0, 250.0, 300.0), theta=(200.0, 700.0, 1000.0, 1600.0)),),
)


def get_model(model) -> ModelSpec:
    """Accept a ModelSpec, the number 1 or 2, or a model name."""
    if isinstance(model, ModelSpec):
        return model
    key = str(model).strip().lower()
    if key in ("1", "model1"):
        return MODEL_1
    if key in ("2", "model2"):
        return MODEL_2
    raise InputError(f"unknown model {model!r} (use 1 or 2)")


def _resolve_jitter(jitter) -> np.ndarray:
    if isinstance(jitter, str):
        key = jitter.strip().lower()
        if key == "verbatim":
            return np.asarray(JITTER_VERBATIM)
        if key == "symmetric":
            return np.asarray(JITTER_SYMMETRIC)
        raise InputError(f"unknown jitter set {jitter!r} (use verbatim or symmetric)")
    arr = np.asarray(jitter, dtype=float)
    if arr.ndim != 1 or arr.size == 0 or not np.isfinite(arr).all():
        raise InputError("jitter set must be a nonempty finite 1-d sequence")
    return arr


def interpolant(knots, theta, x) -> np.ndarray:
    """Continuous piecewise-linear curve through (0,0), (knots, theta[:-1]),
    and (500, theta[-1]), evaluated at x."""
    knots = np.asarray(knots, dtype=float)
    theta = np.asarray(theta, dtype=float)
    nodes_x = np.concatenate(([0.0], knots, [X_MAX]))
    nodes_y = np.concatenate(([0.0], theta))
    if not (np.diff(nodes_x) > 0).all():
        raise InputError("knots must be strictly increasing within (0, 500)")
    return np.interp(np.asarray(x, dtype=float), nodes_x, nodes_y)


def sample_cluster_curve(
    spec: ClusterSpec,
    sigma: float,
    rng: np.random.Generator,
    jitter="verbatim",
    curve_id: str = "c0001",
):
    """Draw one curve from a fixed cluster: (Curve, TruthRecord).

    Draw order is U, V, then 51 standard normals; sigma only scales the
    noise block, so different sigmas under one stream are paired.
    """
    if sigma < 0:
        raise InputError(f"sigma must be nonnegative, got {sigma}")
    offsets = _resolve_jitter(jitter)
    u = float(offsets[int(rng.integers(offsets.size))])
    v = float(rng.uniform(-200.0, 200.0))
    knots = np.asarray(spec.knots) + u
    theta = np.asarray(spec.theta) + v
    if knots[0] <= 0.0 or knots[-1] >= X_MAX:
        raise InvariantError(
            f"jittered knots escaped (0, {X_MAX}): offset {u} on cluster {spec.z}"
        )
    noise = rng.standard_normal(N_POINTS)
    y = interpolant(knots, theta, X_GRID) + float(sigma) * noise
    curve = Curve(id=curve_id, x=X_GRID.copy(), y=y)
    truth = TruthRecord(
        curve_id=curve_id,
        z=spec.z,
        u=u,
        v=v,
        knots=tuple(float(t) for t in knots),
        theta=tuple(float(t) for t in theta),
    )
    return curve, truth


def sample_curve(
    model,
    sigma: float,
    rng: np.random.Generator,
    jitter="verbatim",
    curve_id: str = "c0001",
):
    """Draw one curve with a uniform cluster label: (Curve, TruthRecord)."""
    model = get_model(model)
    z = int(rng.integers(1, 5))
    return sample_cluster_curve(
        model.cluster(z), sigma, rng, jitter=jitter, curve_id=curve_id
    )


def curve_stream(seed, index: int) -> np.random.Generator:
    """Independent per-curve stream derived from (seed, index)."""
    entropy = seed if isinstance(seed, (tuple, list)) else (seed,)
    return np.random.default_rng(np.random.SeedSequence(tuple(entropy) + (index,)))


def sample_dataset(model, sigma: float, n_curves: int, seed, jitter="verbatim"):
    """Draw a dataset of independent curves: (Dataset, labels, truths).

    Each curve uses its own stream derived from (seed, index), so any
    single curve is reproducible without generating the others and the
    result does not depend on generation order.
    """
    model = get_model(model)
    if n_curves < 1:
        raise InputError(f"n_curves must be at least 1, got {n_curves}")
    width = max(4, len(str(n_curves)))
    curves = []
    labels = []
    truths = []
    for i in range(n_curves):
        rng = curve_stream(seed, i)
        curve, truth = sample_curve(
            model, sigma, rng, jitter=jitter, curve_id=f"c{i + 1:0{width}d}"
        )
        curves.append(curve)
        labels.append(truth.z)
        truths.append(truth)
    return Dataset(curves=tuple(curves)), labels, truths
