"""Clustering of class position vectors and silhouette scoring of groupings.

K-means uses k-means++ seeding and Lloyd iterations under squared
Euclidean distance (the centroid step is only mean-optimal there; the
configurable norm applies to the class-distance matrix, not to
clustering). Runs are fully deterministic: restart r draws its RNG from
(seed, r) and the best run is chosen by within-cluster sum of squares,
ties going to the lowest restart index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .features import DistanceMatrix, PositionMatrix


@dataclass
class KMeansConfig:
    num_groups: int
    seed: int
    max_iters: int = 300
    tol: float = 1e-6
    restarts: int = 10

    def validate(self, num_classes: int) -> None:
        if not 1 <= self.num_groups <= num_classes:
            raise ValidationError(
                f"num_groups={self.num_groups} outside [1, {num_classes}]"
            )
        if self.max_iters < 1 or self.restarts < 1 or self.tol < 0:
            raise ValidationError("max_iters/restarts must be >=1 and tol >= 0")


@dataclass(eq=False)
class Grouping:
    """Partition of the classes into num_groups non-empty groups."""

    num_classes: int
    num_groups: int
    assign: np.ndarray

    @property
    def groups(self) -> list[list[int]]:
        return [
            [int(y) for y in np.flatnonzero(self.assign == g)]
            for g in range(self.num_groups)
        ]

    def validate(self) -> None:
        if self.assign.shape != (self.num_classes,):
            raise ValidationError("assign must have one entry per class")
        if len(np.unique(self.assign)) != self.num_groups or (
            self.assign.min(initial=0) < 0 or self.assign.max(initial=0) >= self.num_groups
        ):
            raise ValidationError("every group index in [0, num_groups) must be used")


@dataclass(eq=False)
class SilhouetteReport:
    per_class: np.ndarray
    mean: float
    a: np.ndarray
    b: np.ndarray


def _kmeans_pp_init(points: np.ndarray, x: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((x, points.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = points[first]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, x):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(d2), r))
            idx = min(idx, n - 1)
        centers[c] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _assign_to_centers(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    return np.argmin(d2, axis=1)


def _repair_empty(points: np.ndarray, assign: np.ndarray, centers: np.ndarray, x: int) -> np.ndarray:
    """Move the point farthest from its centroid into each empty cluster.

    Only points from clusters with at least two members are eligible, so
    a repair can never create a new empty cluster.
    """
    assign = assign.copy()
    while True:
        counts = np.bincount(assign, minlength=x)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            return assign
        eligible = counts[assign] >= 2
        dist = np.sum((points - centers[assign]) ** 2, axis=1)
        dist[~eligible] = -np.inf
        victim = int(np.argmax(dist))
        assign[victim] = int(empty[0])
        centers[empty[0]] = points[victim]


def lloyd(
    points: np.ndarray, x: int, rng: np.random.Generator, max_iters: int, tol: float
) -> tuple[np.ndarray, float, list[float]]:
    """A single seeded k-means run.

    Returns (assignment, final WCSS, per-iteration WCSS history). The
    history is monotonically non-increasing.
    """
    centers = _kmeans_pp_init(points, x, rng)
    assign = np.zeros(points.shape[0], dtype=np.int64)
    history: list[float] = []
    prev = np.inf
    for _ in range(max_iters):
        assign = _assign_to_centers(points, centers)
        assign = _repair_empty(points, assign, centers, x)
        for g in range(x):
            centers[g] = points[assign == g].mean(axis=0)
        wcss = float(np.sum((points - centers[assign]) ** 2))
        history.append(wcss)
        if prev - wcss <= tol:
            break
        prev = wcss
    return assign, history[-1], history


def kmeans(p: PositionMatrix, cfg: KMeansConfig) -> Grouping:
    """Best-of-restarts k-means over the class position vectors."""
    p.validate()
    cfg.validate(p.num_classes)
    best_assign = None
    best_wcss = np.inf
    for r in range(cfg.restarts):
        rng = np.random.default_rng((cfg.seed, r))
        assign, wcss, _ = lloyd(p.rows, cfg.num_groups, rng, cfg.max_iters, cfg.tol)
        if wcss < best_wcss:
            best_wcss = wcss
            best_assign = assign
    g = Grouping(num_classes=p.num_classes, num_groups=cfg.num_groups, assign=best_assign)
    g.validate()
    return g


def silhouette(g: Grouping, d: DistanceMatrix) -> SilhouetteReport:
    """Per-class silhouette coefficients of a grouping under distances d.

    a(i) is the mean distance from class i to the other classes of its
    group, b(i) the smallest mean distance to any other group. Classes in
    singleton groups get a(i) = 0 and s(i) = 0 by convention, as does the
    degenerate a = b = 0 case.
    """
    g.validate()
    d.validate()
    if g.num_classes != d.num_classes:
        raise ValidationError("grouping and distance matrix disagree on num_classes")
    if g.num_groups < 2:
        raise ValidationError("silhouette needs at least two groups")
    k = g.num_classes
    members = [np.flatnonzero(g.assign == grp) for grp in range(g.num_groups)]
    a = np.zeros(k)
    b = np.zeros(k)
    s = np.zeros(k)
    for i in range(k):
        own = int(g.assign[i])
        mates = members[own][members[own] != i]
        a[i] = float(d.entries[i, mates].mean()) if mates.size else 0.0
        b[i] = min(
            float(d.entries[i, members[other]].mean())
            for other in range(g.num_groups)
            if other != own
        )
        denom = max(a[i], b[i])
        if mates.size and denom > 0.0:
            s[i] = (b[i] - a[i]) / denom
    return SilhouetteReport(per_class=s, mean=float(s.mean()), a=a, b=b)
