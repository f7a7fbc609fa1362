"""Construction, scoring and validation of class mappings.

Covers the optimized pipeline output (grouping + assignment), the two
baselines (cyclic next-class and seeded random mappings), the summed
group-to-target distance objective, silhouette scoring, and the Pearson
coefficient used to correlate mapping quality with externally measured
attack success rates.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .assignment import Assignment
from .dataio import Mapping, mapping_errors, mapping_to_json
from .errors import ValidationError
from .features import DistanceMatrix
from .grouping import Grouping, silhouette

_MASK64 = (1 << 64) - 1


@dataclass
class MappingScore:
    objective: float
    silhouette_mean: float | None
    self_target_count: int


@dataclass(frozen=True)
class Finding:
    level: str  # "error" or "warning"
    message: str


def build_mapping(g: Grouping, a: Assignment) -> Mapping:
    g.validate()
    if g.num_groups != a.x:
        raise ValidationError(f"grouping has {g.num_groups} groups but {a.x} targets")
    return Mapping.from_groups(g.num_classes, g.groups, a.targets)


def cyclic_mapping(num_classes: int) -> Mapping:
    """The all-to-all baseline: every class targets the next one, wrapping."""
    if num_classes < 2:
        raise ValidationError("cyclic mapping needs at least 2 classes")
    groups = [[y] for y in range(num_classes)]
    targets = [(y + 1) % num_classes for y in range(num_classes)]
    return Mapping.from_groups(num_classes, groups, targets)


def grouping_of(m: Mapping) -> Grouping:
    """View a mapping's groups as a Grouping value."""
    assign = np.empty(m.num_classes, dtype=np.int64)
    for g, members in enumerate(m.groups):
        assign[members] = g
    return Grouping(num_classes=m.num_classes, num_groups=m.x, assign=assign)


def _surjection_table(n: int, x: int) -> list[list[int]]:
    # ways[r][j]: assignments of r remaining classes that leave all x
    # groups non-empty, given j groups already hit
    ways = [[0] * (x + 1) for _ in range(n + 1)]
    ways[0][x] = 1
    for r in range(1, n + 1):
        for j in range(x + 1):
            total = j * ways[r - 1][j]
            if j < x:
                total += (x - j) * ways[r - 1][j + 1]
            ways[r][j] = total
    return ways


def _sample_surjection(n: int, x: int, rng: random.Random) -> list[int]:
    """Uniform draw over the class->group assignments with no empty group.

    Equivalent to redrawing independent uniform assignments until none of
    the x groups is empty, but sampled exactly (big-integer weights), so
    it terminates even where rejection would effectively never succeed,
    e.g. x = n for large n.
    """
    ways = _surjection_table(n, x)
    hit = [False] * x
    j = 0
    assign = []
    for step in range(n):
        r = n - step
        w_hit = ways[r - 1][j]
        w_new = ways[r - 1][j + 1] if j < x else 0
        pick = rng.randrange(j * w_hit + (x - j) * w_new)
        acc = 0
        for g in range(x):
            acc += w_hit if hit[g] else w_new
            if pick < acc:
                assign.append(g)
                if not hit[g]:
                    hit[g] = True
                    j += 1
                break
    return assign


def random_mapping(num_classes: int, num_groups: int, seed: int) -> Mapping:
    """Uniformly random grouping (no empty groups) with uniformly random
    distinct targets; fully determined by the seed."""
    if not 1 <= num_groups <= num_classes:
        raise ValidationError(f"num_groups={num_groups} outside [1, {num_classes}]")
    rng = random.Random(seed)
    assign = _sample_surjection(num_classes, num_groups, rng)
    targets = rng.sample(range(num_classes), num_groups)
    groups = [[y for y in range(num_classes) if assign[y] == g] for g in range(num_groups)]
    return Mapping.from_groups(num_classes, groups, targets)


def score_mapping(m: Mapping, d: DistanceMatrix) -> MappingScore:
    """Objective, mean silhouette (absent for a single group) and the
    number of groups that target one of their own members."""
    m.validate()
    d.validate()
    if m.num_classes != d.num_classes:
        raise ValidationError("mapping and distance matrix disagree on num_classes")
    objective = 0.0
    for gi, members in enumerate(m.groups):
        t = m.targets[gi]
        for j in sorted(members):
            objective += float(d.entries[j, t])
    sil = silhouette(grouping_of(m), d).mean if m.x >= 2 else None
    self_targets = sum(1 for gi, members in enumerate(m.groups) if m.targets[gi] in members)
    return MappingScore(objective=objective, silhouette_mean=sil, self_target_count=self_targets)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient of two equal-length series."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValidationError("inputs must be equal-length 1-d sequences")
    if len(x) < 2:
        raise ValidationError("need at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.sum(dx * dx))
    syy = float(np.sum(dy * dy))
    if sxx == 0.0 or syy == 0.0:
        raise ValidationError("correlation undefined: zero variance")
    return float(np.sum(dx * dy)) / math.sqrt(sxx * syy)


def derive_seed(master: int, index: int) -> int:
    """Counter-derived per-row seed (splitmix64 finalizer)."""
    z = (master + 0x9E3779B97F4A7C15 * (index + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass
class SweepRow:
    index: int
    mapping: Mapping
    score: MappingScore


def sweep_random(
    num_classes: int, num_groups: int, n: int, seed: int, d: DistanceMatrix
) -> list[SweepRow]:
    """Score ``n`` seeded random mappings; row i uses derive_seed(seed, i)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    rows = []
    for i in range(n):
        m = random_mapping(num_classes, num_groups, derive_seed(seed, i))
        rows.append(SweepRow(index=i, mapping=m, score=score_mapping(m, d)))
    return rows


SWEEP_CSV_HEADER = ["index", "objective", "silhouette_mean", "self_target_count", "mapping_json"]


def write_sweep_csv(rows: Iterable[SweepRow], sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(SWEEP_CSV_HEADER)
    for row in rows:
        sil = "" if row.score.silhouette_mean is None else repr(row.score.silhouette_mean)
        writer.writerow(
            [
                row.index,
                repr(row.score.objective),
                sil,
                row.score.self_target_count,
                mapping_to_json(row.mapping, compact=True),
            ]
        )


def validate_mapping(m: Mapping) -> list[Finding]:
    """Invariant violations as error findings; a warning per group whose
    target lies inside the group (legal, but worth surfacing upstream)."""
    findings = [Finding("error", msg) for msg in mapping_errors(m)]
    if findings:
        return findings
    for gi, members in enumerate(m.groups):
        if m.targets[gi] in members:
            findings.append(
                Finding("warning", f"group {gi} targets its own member class {m.targets[gi]}")
            )
    return findings
