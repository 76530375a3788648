"""k-means over feature vectors and cluster-count selection.

The partitioner is Lloyd's algorithm from k-means++ starts, best of a
fixed number of restarts by within-cluster sum of squares. Restart
streams are spawned from one seed, so the merge is deterministic and
independent of execution order. The cluster count is chosen by majority
vote over four validity indices (KL, Hartigan, SD, point-biserial),
each following the closed forms of the NbClust reference conventions.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import InputError

__all__ = [
    "Partition",
    "KSelection",
    "kmeans",
    "index_kl",
    "index_hartigan",
    "index_sd",
    "index_ptbiserial",
    "select_k_majority",
    "membership_profiles",
]

RESTARTS_DEFAULT = 20
KMEANS_MAX_ITER_DEFAULT = 300
K_MIN_DEFAULT = 2
K_MAX_DEFAULT = 8


@dataclass(frozen=True)
class Partition:
    """One clustering: 1-based labels, centroids, and total wss."""

    labels: np.ndarray
    centroids: np.ndarray
    wss: float
    k: int


@dataclass(frozen=True)
class KSelection:
    """Majority-vote outcome across the four validity indices."""

    per_index_choice: dict
    k_star: int
    votes: dict


def _as_points(points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 1:
        raise InputError("points must be a nonempty 2-d matrix")
    if not np.isfinite(points).all():
        raise InputError("points contain non-finite values")
    return points


def _kmeanspp(points, k, rng):
    n = points.shape[0]
    first = int(rng.integers(n))
    centers = [first]
    d2min = ((points - points[first]) ** 2).sum(axis=1)
    while len(centers) < k:
        total = d2min.sum()
        r = rng.random() * total
        idx = int(np.searchsorted(np.cumsum(d2min), r, side="right"))
        idx = min(idx, n - 1)
        if d2min[idx] == 0.0:
            idx = int(np.argmax(d2min))
        centers.append(idx)
        d2min = np.minimum(d2min, ((points - points[idx]) ** 2).sum(axis=1))
    return points[centers].copy()


def _lloyd(points, k, rng, max_iter, trace=None):
    n = points.shape[0]
    centroids = _kmeanspp(points, k, rng)
    labels = np.full(n, -1, dtype=int)
    for _ in range(max_iter):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        counts = np.bincount(new_labels, minlength=k)
        for c in np.flatnonzero(counts == 0):
            # reseed the empty cluster with the farthest point whose own
            # cluster still keeps at least one other member
            dist_self = d2[np.arange(n), new_labels]
            eligible = counts[new_labels] > 1
            far = int(np.argmax(np.where(eligible, dist_self, -np.inf)))
            counts[new_labels[far]] -= 1
            new_labels[far] = c
            counts[c] = 1
        if trace is not None:
            trace.append(float(d2[np.arange(n), new_labels].sum()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centroids = np.vstack([points[labels == c].mean(axis=0) for c in range(k)])
    wss = float(((points - centroids[labels]) ** 2).sum())
    return labels, centroids, wss


def kmeans(
    points,
    k: int,
    restarts: int = RESTARTS_DEFAULT,
    max_iter: int = KMEANS_MAX_ITER_DEFAULT,
    seed=0,
) -> Partition:
    """Best-of-restarts Lloyd clustering with k-means++ starts.

    Deterministic for a fixed seed: each restart draws from its own
    spawned stream and the best run is chosen by (wss, restart index),
    so any execution order produces the same partition. Labels are
    1-based. ``seed`` may be an int or a tuple of ints.
    """
    points = _as_points(points)
    if restarts < 1:
        raise InputError(f"restarts must be at least 1, got {restarts}")
    if k < 1:
        raise InputError(f"k must be at least 1, got {k}")
    distinct = np.unique(points, axis=0).shape[0]
    if k > distinct:
        raise InputError(f"k={k} exceeds the number of distinct rows ({distinct})")
    streams = np.random.SeedSequence(seed).spawn(restarts)
    best = None
    for ridx, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        labels, centroids, wss = _lloyd(points, k, rng, max_iter)
        key = (wss, ridx)
        if best is None or key < best[0]:
            best = (key, labels, centroids, wss)
    _, labels, centroids, wss = best
    return Partition(labels=labels + 1, centroids=centroids, wss=wss, k=k)


def _wss_table(partitions) -> dict:
    return {k: p.wss for k, p in partitions.items()}


def _argbest(values: dict, largest: bool) -> int:
    if not values:
        raise InputError("no k admissible for this index")
    sign = -1.0 if largest else 1.0
    return min(values, key=lambda k: (sign * values[k], k))


def index_kl(points, partitions, k_min: int, k_max: int) -> int:
    """KL index: maximize |(k-1)^{2/p} W_{k-1} - k^{2/p} W_k| over
    |k^{2/p} W_k - (k+1)^{2/p} W_{k+1}|; needs both neighbors of k."""
    points = _as_points(points)
    p = points.shape[1]
    w = _wss_table(partitions)
    vals = {}
    for k in range(k_min, k_max + 1):
        if k - 1 not in w or k not in w or k + 1 not in w:
            continue
        num = abs((k - 1) ** (2.0 / p) * w[k - 1] - k ** (2.0 / p) * w[k])
        den = abs(k ** (2.0 / p) * w[k] - (k + 1) ** (2.0 / p) * w[k + 1])
        if den == 0.0:
            continue
        vals[k] = num / den
    return _argbest(vals, largest=True)


def index_hartigan(points, partitions, k_min: int, k_max: int) -> int:
    """Hartigan index: largest drop of H(k) = (W_k/W_{k+1} - 1)(n-k-1)."""
    points = _as_points(points)
    n = points.shape[0]
    w = _wss_table(partitions)

    def h(k):
        if k not in w or k + 1 not in w or w[k + 1] == 0.0:
            return None
        return (w[k] / w[k + 1] - 1.0) * (n - k - 1)

    vals = {}
    for k in range(k_min, k_max + 1):
        prev, cur = h(k - 1), h(k)
        if prev is None or cur is None:
            continue
        vals[k] = prev - cur
    return _argbest(vals, largest=True)


def _scat(points, part: Partition) -> float:
    denom = float(np.linalg.norm(points.var(axis=0)))
    if denom == 0.0:
        raise InputError("SD index undefined: all rows are identical")
    total = 0.0
    for c in range(1, part.k + 1):
        total += float(np.linalg.norm(points[part.labels == c].var(axis=0)))
    return total / (part.k * denom)


def _dis(part: Partition) -> float:
    cents = part.centroids
    dists = np.sqrt(((cents[:, None, :] - cents[None, :, :]) ** 2).sum(axis=2))
    off = dists[~np.eye(part.k, dtype=bool)]
    dmin = off.min()
    if dmin <= 0.0:
        return np.inf
    dmax = off.max()
    return (dmax / dmin) * float((1.0 / dists.sum(axis=1)).sum())


def index_sd(points, partitions, k_min: int, k_max: int) -> int:
    """SD index: minimize alpha*Scat(k) + Dis(k), alpha = Dis at the top k."""
    points = _as_points(points)
    ks = [k for k in range(k_min, k_max + 1) if k in partitions]
    ks = [k for k in ks if partitions[k].k >= 2]
    if not ks:
        raise InputError("SD index needs partitions with k >= 2")
    alpha = _dis(partitions[max(ks)])
    vals = {k: alpha * _scat(points, partitions[k]) + _dis(partitions[k]) for k in ks}
    vals = {k: v for k, v in vals.items() if np.isfinite(v)}
    return _argbest(vals, largest=False)


def index_ptbiserial(points, partitions, k_min: int, k_max: int) -> int:
    """Point-biserial index: maximize the correlation between pairwise
    distances and the split into within- and between-cluster pairs."""
    points = _as_points(points)
    n = points.shape[0]
    if n < 2:
        raise InputError("point-biserial index needs at least 2 rows")
    d = pdist(points)
    sd = d.std(ddof=1) if d.size > 1 else 0.0
    iu, ju = np.triu_indices(n, 1)
    vals = {}
    for k in range(k_min, k_max + 1):
        if k not in partitions:
            continue
        labels = partitions[k].labels
        same = labels[iu] == labels[ju]
        n_within = int(same.sum())
        n_between = d.size - n_within
        if n_within == 0 or n_between == 0 or sd == 0.0:
            continue
        f_w = n_within / d.size
        f_b = n_between / d.size
        vals[k] = (d[~same].mean() - d[same].mean()) * np.sqrt(f_w * f_b) / sd
    return _argbest(vals, largest=True)


def select_k_majority(
    points,
    k_min: int = K_MIN_DEFAULT,
    k_max: int = K_MAX_DEFAULT,
    restarts: int = RESTARTS_DEFAULT,
    seed=0,
    max_iter: int = KMEANS_MAX_ITER_DEFAULT,
) -> KSelection:
    """Majority vote over the four indices; ties go to the smallest k.

    Partitions are computed for one k beyond each end of the range where
    the difference-based indices need them, capped by the number of
    distinct rows.
    """
    points = _as_points(points)
    if not 2 <= k_min <= k_max:
        raise InputError(f"need 2 <= k_min <= k_max, got [{k_min}, {k_max}]")
    distinct = np.unique(points, axis=0).shape[0]
    hi = min(k_max, distinct)
    if k_min > hi:
        raise InputError(
            f"k_min={k_min} exceeds the number of distinct rows ({distinct})"
        )
    ks = range(max(1, k_min - 1), min(hi + 1, distinct) + 1)
    partitions = {
        k: kmeans(points, k, restarts=restarts, max_iter=max_iter, seed=seed) for k in ks
    }
    choice = {
        "KL": index_kl(points, partitions, k_min, hi),
        "Hartigan": index_hartigan(points, partitions, k_min, hi),
        "SD": index_sd(points, partitions, k_min, hi),
        "Ptbiserial": index_ptbiserial(points, partitions, k_min, hi),
    }
    votes = Counter(choice.values())
    top = max(votes.values())
    k_star = min(k for k, v in votes.items() if v == top)
    return KSelection(
        per_index_choice=choice, k_star=int(k_star), votes=dict(sorted(votes.items()))
    )


def membership_profiles(labels_by_entity, n_clusters: int) -> tuple[list, np.ndarray]:
    """Per-entity proportion of observations falling in each cluster.

    ``labels_by_entity`` maps an entity to its sequence of 1-based
    cluster labels. Returns (entity ids in input order, matrix) with one
    row per entity; rows sum to 1.
    """
    if n_clusters < 1:
        raise InputError(f"n_clusters must be at least 1, got {n_clusters}")
    ids = list(labels_by_entity)
    if not ids:
        raise InputError("no entities given")
    out = np.zeros((len(ids), n_clusters))
    for i, entity in enumerate(ids):
        labels = list(labels_by_entity[entity])
        if not labels:
            raise InputError(f"entity {entity!r} has no observations")
        for lab in labels:
            lab = int(lab)
            if not 1 <= lab <= n_clusters:
                raise InputError(
                    f"entity {entity!r}: label {lab} outside 1..{n_clusters}"
                )
            out[i, lab - 1] += 1
        out[i] /= len(labels)
    return ids, out
