"""Order-2 B-spline bases, least-squares projection, and feature assembly.

An order-2 B-spline is the degree-1 "hat" function. On the augmented knot
sequence ``(x1, x1, t_1, ..., t_K, xn, xn)`` the K+2 basis functions span
every continuous piecewise-linear function on [x1, xn] with kinks at the
t_j, and each coefficient equals the value of the fit at the knot where
its basis function peaks (the node-value identity). Feature vectors for
clustering concatenate the fitted coefficients and the knot positions,
zero-padded to a common width across curves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataio import Curve
from .errors import EmptySegmentError, InputError

__all__ = [
    "SplineBasis",
    "build_basis",
    "project",
    "featurize",
    "scale_features",
]


@dataclass(frozen=True)
class SplineBasis:
    """Order-2 B-spline basis on an augmented knot sequence.

    Attributes
    ----------
    x1, xn : float
        Interval endpoints; boundary knots are doubled there.
    knots : ndarray
        Interior knots, strictly increasing, strictly inside (x1, xn).
    tau : ndarray
        Augmented sequence (x1, x1, knots..., xn, xn), length K+4.
    size : int
        Number of basis functions, K+2.
    """

    x1: float
    xn: float
    knots: np.ndarray
    tau: np.ndarray = field(init=False)
    size: int = field(init=False)

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        object.__setattr__(self, "knots", knots)
        tau = np.concatenate(([self.x1, self.x1], knots, [self.xn, self.xn]))
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "size", knots.size + 2)

    def design(self, u) -> np.ndarray:
        """Evaluate all basis functions at the points u.

        Returns a (len(u), K+2) matrix built by the order-1 to order-2
        recursion. Order-1 functions are indicators of [tau_i, tau_{i+1}),
        except that the interval ending at xn is closed on the right so
        the basis still sums to 1 at the last point. Recursion terms with
        a zero-length knot interval are dropped (the 0/0 convention).
        """
        u = np.atleast_1d(np.asarray(u, dtype=float))
        tau = self.tau
        m = tau.size
        ind = np.zeros((u.size, m - 1))
        for i in range(m - 1):
            if tau[i + 1] > tau[i]:
                ind[:, i] = (u >= tau[i]) & (u < tau[i + 1])
                if tau[i + 1] == self.xn:
                    ind[u == self.xn, i] = 1.0
        out = np.zeros((u.size, m - 2))
        for i in range(m - 2):
            if tau[i + 1] > tau[i]:
                out[:, i] += (u - tau[i]) / (tau[i + 1] - tau[i]) * ind[:, i]
            if tau[i + 2] > tau[i + 1]:
                out[:, i] += (tau[i + 2] - u) / (tau[i + 2] - tau[i + 1]) * ind[:, i + 1]
        return out

    def evaluate(self, theta, u) -> np.ndarray:
        """Evaluate the spline with coefficients theta at the points u."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.size,):
            raise InputError(f"theta must have length {self.size}, got {theta.shape}")
        return self.design(u) @ theta


def build_basis(x1: float, xn: float, knots) -> SplineBasis:
    """Construct the order-2 basis for interior knots on [x1, xn].

    Knots must be strictly increasing and strictly inside the interval;
    duplicates are rejected.
    """
    knots = np.asarray(knots, dtype=float)
    if not x1 < xn:
        raise InputError(f"need x1 < xn, got {x1} >= {xn}")
    if knots.size:
        if np.any(np.diff(knots) == 0):
            raise InputError("duplicate interior knots")
        if not np.all(np.diff(knots) > 0):
            raise InputError("interior knots must be strictly increasing")
        if not (x1 < knots[0] and knots[-1] < xn):
            raise InputError(f"interior knots must lie strictly inside ({x1}, {xn})")
    return SplineBasis(float(x1), float(xn), knots)


def project(curve: Curve, basis: SplineBasis) -> np.ndarray:
    """Least-squares coefficients of the curve in the given basis.

    Solved through an orthogonal factorization (SVD-backed lstsq). A
    design matrix without full column rank means some basis function has
    no supporting data, which is reported as an empty segment.
    """
    design = basis.design(curve.x)
    theta, _, rank, _ = np.linalg.lstsq(design, curve.y, rcond=None)
    if rank < basis.size:
        empty = np.flatnonzero(~design.any(axis=0))
        detail = f" (no data under basis function(s) {empty.tolist()})" if empty.size else ""
        raise EmptySegmentError(
            f"curve {curve.id!r}: rank-deficient design for knots {basis.knots.tolist()}{detail}"
        )
    return theta


def featurize(segmentations) -> tuple[np.ndarray, int]:
    """Assemble the padded feature matrix from per-curve segmentations.

    Each row is (theta_1..theta_{k_hat+2}, 0-padding, t_1..t_{k_hat}, 0-padding)
    where the theta block has width K_M+2 and the knot block width K_M,
    with K_M the largest k_hat across the input. Returns the matrix and K_M.
    """
    segmentations = list(segmentations)
    if not segmentations:
        raise InputError("featurize needs at least one segmentation")
    k_m = max(int(s.k_hat) for s in segmentations)
    width = 2 * k_m + 2
    out = np.zeros((len(segmentations), width))
    for i, seg in enumerate(segmentations):
        theta = np.asarray(seg.theta, dtype=float)
        knots = np.asarray(seg.knots, dtype=float)
        k = int(seg.k_hat)
        if theta.size != k + 2 or knots.size != k:
            raise InputError(
                f"segmentation {i}: inconsistent sizes (k_hat={k}, "
                f"theta={theta.size}, knots={knots.size})"
            )
        out[i, : k + 2] = theta
        out[i, k_m + 2 : k_m + 2 + k] = knots
    return out, k_m


_SD_NOISE_REL = 1e-9


def scale_features(matrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Standardize columns to zero mean and unit sample variance.

    Constant columns come out as exact zeros and their recorded sd is 0.
    A column whose sample sd is at rounding-noise level, at most 1e-9
    relative to the column magnitude, counts as constant: standardizing
    it would amplify floating-point dust to unit variance.
    Returns (scaled, means, sds) so the transform can be replayed.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise InputError("scale_features needs a 2-d matrix with at least 2 rows")
    constant = matrix.max(axis=0) == matrix.min(axis=0)
    means = matrix.mean(axis=0)
    means[constant] = matrix[0, constant]
    sds = np.zeros(matrix.shape[1])
    nonconst = ~constant
    sds[nonconst] = matrix[:, nonconst].std(axis=0, ddof=1)
    noise = nonconst & (sds <= _SD_NOISE_REL * np.maximum(1.0, np.abs(means)))
    constant = constant | noise
    sds[constant] = 0.0
    denom = np.where(constant, 1.0, sds)
    scaled = (matrix - means) / denom
    scaled[:, constant] = 0.0
    return scaled, means, sds
