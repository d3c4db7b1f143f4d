"""Point clouds, distance matrices and per-axis scaling transforms."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

# literal (k+1)-subset enumeration in diameter_k is only attempted below these sizes
LITERAL_DIAMETER_MAX_POINTS = 25
LITERAL_DIAMETER_MAX_SUBSETS = 200_000


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PointCloud:
    """Finite set of points in R^n, stored as an (N, n) float array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1 and pts.size > 0:
            raise ValidationError("points must be a 2-D array (one row per point)")
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ValidationError(f"point cloud must be nonempty with positive dimension, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("point coordinates must be finite")
        object.__setattr__(self, "points", _frozen(pts))

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]]) -> "PointCloud":
        rows = [list(r) for r in rows]
        if rows and len({len(r) for r in rows}) != 1:
            raise ValidationError("all points must have the same number of coordinates")
        return cls(np.asarray(rows, dtype=float))

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n_points

    def to_list(self) -> list[list[float]]:
        return self.points.tolist()


@dataclass(frozen=True)
class ScalingTransform:
    """Per-axis positive scaling S(x) = (s_1 x_1, ..., s_n x_n)."""

    factors: tuple[float, ...]

    def __post_init__(self):
        try:
            fs = tuple(float(f) for f in self.factors)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"scaling factors must be numbers: {exc}") from None
        if not fs:
            raise ValidationError("a scaling transform needs at least one factor")
        if not all(math.isfinite(f) and f > 0 for f in fs):
            raise ValidationError(f"scaling factors must be finite and strictly positive, got {fs}")
        object.__setattr__(self, "factors", fs)

    @classmethod
    def uniform(cls, s: float, n: int) -> "ScalingTransform":
        return cls((s,) * n)

    @classmethod
    def identity(cls, n: int) -> "ScalingTransform":
        return cls.uniform(1.0, n)

    @property
    def dim(self) -> int:
        return len(self.factors)

    @property
    def s_min(self) -> float:
        return min(self.factors)

    @property
    def s_max(self) -> float:
        return max(self.factors)

    @property
    def variability(self) -> float:
        """Delta s = s_max - s_min."""
        return self.s_max - self.s_min

    @property
    def contains_one(self) -> bool:
        """True when s_min <= 1 <= s_max, the regime where the variability bound is valid."""
        return self.s_min <= 1.0 <= self.s_max

    @property
    def paper_factor(self) -> float:
        return self.variability

    @property
    def corrected_factor(self) -> float:
        """max(s_max - 1, 1 - s_min, 0): the distance perturbation factor valid for every positive transform."""
        return max(self.s_max - 1.0, 1.0 - self.s_min, 0.0)

    def to_dict(self) -> dict:
        return {"factors": list(self.factors)}


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric matrix of pairwise distances with zero diagonal."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.array(self.values, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
            raise ValidationError(f"distance matrix must be square and nonempty, got shape {d.shape}")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValidationError("distances must be finite and nonnegative")
        if np.any(np.diag(d) != 0):
            raise ValidationError("distance matrix must have a zero diagonal")
        if not np.array_equal(d, d.T):
            raise ValidationError("distance matrix must be symmetric")
        object.__setattr__(self, "values", _frozen(d))

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def __len__(self):
        return self.size

    def __getitem__(self, ij):
        return self.values[ij]


def distance_matrix(cloud: PointCloud) -> DistanceMatrix:
    """Euclidean distances between all pairs of points."""
    x = cloud.points
    diff = x[:, None, :] - x[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    # exact symmetry regardless of summation order
    d = np.triu(d, 1)
    return DistanceMatrix(d + d.T)


def apply_scaling(cloud: PointCloud, t: ScalingTransform) -> PointCloud:
    if t.dim != cloud.dim:
        raise ValidationError(f"transform has {t.dim} factors but the cloud has dimension {cloud.dim}")
    return PointCloud(cloud.points * np.asarray(t.factors))


def diameter(dm: DistanceMatrix) -> float:
    return float(dm.values.max())


def diameter_k(dm: DistanceMatrix, k: int, literal: bool | None = None) -> float:
    """Largest diameter of a (k+1)-subset of the points.

    Subsets smaller than two points have no pairs, so the tuple size is
    max(k + 1, 2); with that convention the value equals ``diameter(dm)``
    for every admissible k. Small inputs are enumerated literally (the
    oracle for that equality); ``literal`` forces either route.
    """
    if k < 0:
        raise ValidationError("homology dimension must be nonnegative")
    n = dm.size
    if n < k + 1:
        raise ValidationError(f"need at least {k + 1} points for {k + 1}-tuples, got {n}")
    size = max(k + 1, 2)
    if n < size:
        return 0.0
    if literal is None:
        literal = n <= LITERAL_DIAMETER_MAX_POINTS and math.comb(n, size) <= LITERAL_DIAMETER_MAX_SUBSETS
    if not literal:
        return diameter(dm)
    d = dm.values
    best = 0.0
    for subset in itertools.combinations(range(n), size):
        best = max(best, max(d[i, j] for i, j in itertools.combinations(subset, 2)))
    return float(best)


def compose(transforms: Sequence[ScalingTransform]) -> ScalingTransform:
    """Single transform equivalent to applying ``transforms`` in sequence."""
    if not transforms:
        raise ValidationError("compose needs at least one transform")
    n = transforms[0].dim
    if any(t.dim != n for t in transforms):
        raise ValidationError("all transforms must share the same dimension")
    factors = [1.0] * n
    for t in transforms:
        factors = [a * b for a, b in zip(factors, t.factors)]
    return ScalingTransform(tuple(factors))
