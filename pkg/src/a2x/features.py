"""Class position vectors and pairwise class distances.

The position vector of a class is the arithmetic mean of its sample
embeddings, accumulated in float64. Class distances are taken between
position vectors under a selectable norm; l2 is the default, l1 and
l-infinity are provided as variants.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dataio import EmbeddingSet
from .errors import ValidationError


class Norm(enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @classmethod
    def parse(cls, name: str) -> "Norm":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValidationError(f"unknown norm {name!r}; expected l1, l2 or linf") from None


@dataclass(eq=False)
class PositionMatrix:
    """One float64 mean-feature row per class."""

    num_classes: int
    dim: int
    rows: np.ndarray

    def validate(self) -> None:
        if self.rows.shape != (self.num_classes, self.dim) or self.rows.dtype != np.float64:
            raise ValidationError("rows must be float64 with shape (num_classes, dim)")
        if not np.isfinite(self.rows).all():
            raise ValidationError("position vectors contain NaN or Inf")


@dataclass(eq=False)
class DistanceMatrix:
    """Symmetric class-to-class distances with a zero diagonal."""

    num_classes: int
    entries: np.ndarray

    def validate(self) -> None:
        k = self.num_classes
        if self.entries.shape != (k, k) or self.entries.dtype != np.float64:
            raise ValidationError("entries must be float64 with shape (K, K)")
        if not np.isfinite(self.entries).all():
            raise ValidationError("distances contain NaN or Inf")
        if (self.entries < 0).any():
            raise ValidationError("distances must be nonnegative")
        if np.diagonal(self.entries).any():
            raise ValidationError("diagonal must be exactly zero")
        if not np.array_equal(self.entries, self.entries.T):
            raise ValidationError("distance matrix must be exactly symmetric")


def position_vectors(e: EmbeddingSet) -> PositionMatrix:
    """Mean embedding per class, one row per class index."""
    e.validate()
    vectors = e.vectors.astype(np.float64)
    rows = np.empty((e.num_classes, e.dim), dtype=np.float64)
    for i in range(e.num_classes):
        rows[i] = vectors[e.labels == i].mean(axis=0)
    p = PositionMatrix(num_classes=e.num_classes, dim=e.dim, rows=rows)
    p.validate()
    return p


def _norm(diff: np.ndarray, norm: Norm) -> float:
    if norm is Norm.L1:
        return float(np.sum(np.abs(diff)))
    if norm is Norm.L2:
        return float(np.sqrt(np.sum(diff * diff)))
    return float(np.max(np.abs(diff))) if diff.size else 0.0


def distance_matrix(p: PositionMatrix, norm: Norm = Norm.L2) -> DistanceMatrix:
    """Pairwise distances between position vectors.

    Only the upper triangle is computed; the lower triangle is mirrored,
    so symmetry is exact by construction.
    """
    p.validate()
    k = p.num_classes
    entries = np.zeros((k, k), dtype=np.float64)
    for i in range(k):
        for j in range(i + 1, k):
            d = _norm(p.rows[i] - p.rows[j], norm)
            entries[i, j] = d
            entries[j, i] = d
    dm = DistanceMatrix(num_classes=k, entries=entries)
    dm.validate()
    return dm
