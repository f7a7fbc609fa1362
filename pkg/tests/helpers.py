"""Shared test utilities: fixture builders and an adjusted Rand index."""

from __future__ import annotations

import math

import numpy as np

from a2x.dataio import EmbeddingSet, Mapping, TensorDataset


def make_dataset(rng: np.random.Generator, n=None, c=None, h=None, w=None, k=None) -> TensorDataset:
    n = int(rng.integers(0, 12)) if n is None else n
    c = int(rng.integers(1, 4)) if c is None else c
    h = int(rng.integers(1, 7)) if h is None else h
    w = int(rng.integers(1, 7)) if w is None else w
    k = int(rng.integers(1, 6)) if k is None else k
    return TensorDataset(
        channels=c,
        height=h,
        width=w,
        num_classes=k,
        labels=rng.integers(0, k, size=n).astype(np.uint32),
        pixels=rng.integers(0, 256, size=(n, c, h, w), dtype=np.uint8),
    )


def make_embeddings(rng: np.random.Generator, k=None, dim=None, per_class=None) -> EmbeddingSet:
    k = int(rng.integers(1, 6)) if k is None else k
    dim = int(rng.integers(1, 8)) if dim is None else dim
    per_class = int(rng.integers(1, 5)) if per_class is None else per_class
    extra = int(rng.integers(0, 4))
    labels = np.concatenate(
        [np.repeat(np.arange(k), per_class), rng.integers(0, k, size=extra)]
    ).astype(np.uint32)
    order = rng.permutation(len(labels))
    labels = labels[order]
    vectors = rng.standard_normal((len(labels), dim)).astype(np.float32)
    return EmbeddingSet(dim=dim, num_classes=k, labels=labels, vectors=vectors)


def make_mapping(rng: np.random.Generator, k=None, x=None) -> Mapping:
    k = int(rng.integers(1, 12)) if k is None else k
    x = int(rng.integers(1, k + 1)) if x is None else x
    while True:
        assign = rng.integers(0, x, size=k)
        if len(np.unique(assign)) == x:
            break
    groups = [[int(y) for y in np.flatnonzero(assign == g)] for g in range(x)]
    targets = [int(t) for t in rng.choice(k, size=x, replace=False)]
    return Mapping.from_groups(k, groups, targets)


def partition_sets(groups: list[list[int]]) -> set[frozenset[int]]:
    return {frozenset(g) for g in groups}


def adjusted_rand_index(a: list[int], b: list[int]) -> float:
    """ARI between two flat cluster-label sequences."""
    assert len(a) == len(b)
    n = len(a)
    labels_a = sorted(set(a))
    labels_b = sorted(set(b))
    contingency = np.zeros((len(labels_a), len(labels_b)), dtype=np.int64)
    for x, y in zip(a, b):
        contingency[labels_a.index(x), labels_b.index(y)] += 1
    sum_comb = sum(math.comb(int(v), 2) for v in contingency.flat)
    sum_rows = sum(math.comb(int(v), 2) for v in contingency.sum(axis=1))
    sum_cols = sum(math.comb(int(v), 2) for v in contingency.sum(axis=0))
    total = math.comb(n, 2)
    expected = sum_rows * sum_cols / total if total else 0.0
    max_index = (sum_rows + sum_cols) / 2.0
    if max_index == expected:
        return 1.0
    return (sum_comb - expected) / (max_index - expected)
