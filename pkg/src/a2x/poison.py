"""Dirty-label dataset poisoning: trigger the victims, relabel to the map.

Victims are floor(rate * n) samples drawn uniformly without replacement,
label-agnostic. Each victim gets the trigger applied and its label
replaced by the mapping's target for its original class; every other
sample is carried over untouched, bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dataio import Mapping, TensorDataset
from .errors import ValidationError
from .triggers import TriggerSpec, apply, render, trigger_to_json

POISON_MODE_ALL = "all"


@dataclass
class PoisonPlan:
    rate: float
    seed: int
    mapping: Mapping
    trigger: TriggerSpec
    mode: str = POISON_MODE_ALL

    def validate(self) -> None:
        if not 0.0 <= self.rate <= 1.0:
            raise ValidationError(f"rate must lie in [0, 1], got {self.rate}")
        if self.mode != POISON_MODE_ALL:
            raise ValidationError(f"unknown poison mode {self.mode!r}")
        self.mapping.validate()


@dataclass
class PoisonManifest:
    rate: float
    seed: int
    trigger: TriggerSpec
    mapping: Mapping
    rows: list[tuple[int, int, int]] = field(default_factory=list)  # (index, orig, new)

    @property
    def count(self) -> int:
        return len(self.rows)

    def to_json(self) -> str:
        doc = {
            "rate": self.rate,
            "seed": self.seed,
            "count": self.count,
            "trigger": trigger_to_json(self.trigger),
            "mapping": {
                "num_classes": self.mapping.num_classes,
                "x": self.mapping.x,
                "groups": self.mapping.groups,
                "targets": self.mapping.targets,
                "table": self.mapping.table,
            },
            "rows": [list(row) for row in self.rows],
        }
        return json.dumps(doc, separators=(",", ":"))


def select_victims(ds: TensorDataset, rate: float, seed: int) -> np.ndarray:
    """Sorted indices of exactly floor(rate * n) uniformly drawn samples."""
    if not 0.0 <= rate <= 1.0:
        raise ValidationError(f"rate must lie in [0, 1], got {rate}")
    count = int(math.floor(rate * ds.n))
    rng = np.random.default_rng(seed)
    picks = rng.choice(ds.n, size=count, replace=False)
    return np.sort(picks.astype(np.int64))


def poison_dataset(ds: TensorDataset, plan: PoisonPlan) -> tuple[TensorDataset, PoisonManifest]:
    """Triggered-and-relabeled copy of ds plus the manifest describing it."""
    ds.validate()
    plan.validate()
    if plan.mapping.num_classes != ds.num_classes:
        raise ValidationError(
            f"mapping has {plan.mapping.num_classes} classes, dataset has {ds.num_classes}"
        )
    rt = render(plan.trigger, ds.channels, ds.height, ds.width)
    victims = select_victims(ds, plan.rate, plan.seed)
    labels = ds.labels.copy()
    pixels = ds.pixels.copy()
    rows: list[tuple[int, int, int]] = []
    for idx in victims:
        i = int(idx)
        orig = int(ds.labels[i])
        new = plan.mapping.table[orig]
        pixels[i] = apply(ds.pixels[i], rt)
        labels[i] = new
        rows.append((i, orig, new))
    out = TensorDataset(
        channels=ds.channels,
        height=ds.height,
        width=ds.width,
        num_classes=ds.num_classes,
        labels=labels,
        pixels=pixels,
    )
    manifest = PoisonManifest(
        rate=plan.rate, seed=plan.seed, trigger=plan.trigger, mapping=plan.mapping, rows=rows
    )
    return out, manifest


def trigger_all(ds: TensorDataset, trigger: TriggerSpec) -> TensorDataset:
    """Every sample triggered, labels untouched; this is the variant fed to
    the embedding exporter when position vectors come from triggered data."""
    ds.validate()
    rt = render(trigger, ds.channels, ds.height, ds.width)
    pixels = np.empty_like(ds.pixels)
    for i in range(ds.n):
        pixels[i] = apply(ds.pixels[i], rt)
    return TensorDataset(
        channels=ds.channels,
        height=ds.height,
        width=ds.width,
        num_classes=ds.num_classes,
        labels=ds.labels.copy(),
        pixels=pixels,
    )
