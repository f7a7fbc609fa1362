"""Synthetic fixtures: embeddings with planted group structure, random datasets.

The planted generator lays out super-cluster centers on orthogonal axes
at exact pairwise distance ``separation``, scatters class means around
them and samples around the class means, both at scale ``spread``. With
separation well above spread (20x in the standard fixture), clustering
the class position vectors must recover the planted partition.
"""

from __future__ import annotations

import numpy as np

from .dataio import EmbeddingSet, TensorDataset
from .errors import ValidationError


def planted_embeddings(
    num_classes: int,
    planted_groups: int,
    dim: int,
    per_class: int,
    spread: float,
    separation: float,
    seed: int,
) -> tuple[EmbeddingSet, list[list[int]]]:
    """Gaussian class clouds whose class means form planted super-clusters.

    Classes are distributed round-robin over the super-clusters; the
    returned list records that planted grouping. Requires
    planted_groups <= dim so the centers fit on orthogonal axes.
    """
    if not 1 <= planted_groups <= num_classes:
        raise ValidationError(f"planted_groups={planted_groups} outside [1, {num_classes}]")
    if planted_groups > dim:
        raise ValidationError("planted_groups must not exceed dim")
    if separation <= 0 or spread < 0 or per_class < 1 or dim < 1:
        raise ValidationError("separation must be > 0, spread >= 0, per_class/dim >= 1")
    rng = np.random.default_rng(seed)
    centers = np.zeros((planted_groups, dim))
    for g in range(planted_groups):
        centers[g, g] = separation / np.sqrt(2.0)
    supers = [y % planted_groups for y in range(num_classes)]
    class_means = np.stack(
        [centers[supers[y]] + spread * rng.standard_normal(dim) for y in range(num_classes)]
    )
    labels = np.repeat(np.arange(num_classes, dtype=np.uint32), per_class)
    vectors = np.empty((num_classes * per_class, dim), dtype=np.float32)
    for y in range(num_classes):
        block = class_means[y] + spread * rng.standard_normal((per_class, dim))
        vectors[y * per_class : (y + 1) * per_class] = block.astype(np.float32)
    e = EmbeddingSet(dim=dim, num_classes=num_classes, labels=labels, vectors=vectors)
    e.validate()
    groups = [[y for y in range(num_classes) if supers[y] == g] for g in range(planted_groups)]
    return e, groups


def random_dataset(
    n: int, channels: int, height: int, width: int, num_classes: int, seed: int
) -> TensorDataset:
    """Uniform random pixels and labels; handy for poisoning round trips."""
    rng = np.random.default_rng(seed)
    ds = TensorDataset(
        channels=channels,
        height=height,
        width=width,
        num_classes=num_classes,
        labels=rng.integers(0, num_classes, size=n).astype(np.uint32),
        pixels=rng.integers(0, 256, size=(n, channels, height, width), dtype=np.uint8),
    )
    ds.validate()
    return ds
