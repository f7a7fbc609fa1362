"""Maximum-weight assignment of target classes to source-class groups.

The objective sums, over every group, the distances from the group's
member classes to its target class; targets must be pairwise distinct.
This is a rectangular maximum-weight bipartite matching: weights are
negated, the matrix padded with zero dummy rows to square, and the
square problem solved with a potentials-based Hungarian algorithm.

Ties between optimal assignments are broken toward the lexicographically
smallest targets array. After the first solve, each row is fixed in turn
to the smallest zero-reduced-cost column whose completion still reaches
the optimal value; complementary slackness makes the dual-based screen a
superset of the columns usable by any optimum, so the result is the
lexicographic minimum without enumerating assignments.

Forbidden edges (a group targeting one of its own members, when the
config requests that constraint) carry a large finite sentinel cost
instead of infinity; an optimal matching that still picks a sentinel
edge proves infeasibility.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import GuardError, InfeasibleError, ValidationError
from .features import DistanceMatrix
from .grouping import Grouping

BRUTE_FORCE_GUARD = 10_000_000
_CHUNK = 200_000


@dataclass(eq=False)
class GroupDistanceMatrix:
    """X-by-K summed distances from each group to each candidate target.

    ``groups`` records the member classes behind each row; it is needed
    only when self-targets are forbidden.
    """

    x: int
    num_classes: int
    entries: np.ndarray
    groups: list[list[int]] | None = None

    def validate(self) -> None:
        if self.x < 1 or self.x > self.num_classes:
            raise ValidationError(f"x={self.x} outside [1, {self.num_classes}]")
        if self.entries.shape != (self.x, self.num_classes) or self.entries.dtype != np.float64:
            raise ValidationError("entries must be float64 with shape (x, num_classes)")
        if not np.isfinite(self.entries).all() or (self.entries < 0).any():
            raise ValidationError("entries must be finite and nonnegative")


@dataclass
class Assignment:
    targets: list[int]

    @property
    def x(self) -> int:
        return len(self.targets)


@dataclass
class AssignConfig:
    forbid_self_target: bool = False


def group_distances(g: Grouping, d: DistanceMatrix) -> GroupDistanceMatrix:
    """Sum class distances into group rows, accumulating members in
    ascending class order so results are reproducible bit for bit."""
    g.validate()
    d.validate()
    if g.num_classes != d.num_classes:
        raise ValidationError("grouping and distance matrix disagree on num_classes")
    groups = g.groups
    entries = np.zeros((g.num_groups, g.num_classes), dtype=np.float64)
    for i, members in enumerate(groups):
        for j in members:
            entries[i] += d.entries[j]
    gd = GroupDistanceMatrix(
        x=g.num_groups, num_classes=g.num_classes, entries=entries, groups=groups
    )
    gd.validate()
    return gd


def assignment_objective(entries: np.ndarray, targets: list[int] | np.ndarray) -> float:
    """Sequential float64 sum of entries[i, targets[i]]; every code path
    that compares objectives uses this one summation order."""
    total = 0.0
    for i, t in enumerate(targets):
        total += float(entries[i, t])
    return total


def _min_cost_square(cost: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Minimum-cost perfect matching on a square matrix.

    Shortest augmenting paths with dual potentials; O(n^3). Returns
    (col_of_row, u, v) with cost[i, j] >= u[i] + v[j] everywhere and
    equality on matched edges.
    """
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # row matched to each column, 1-based; 0 = none
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        way = np.zeros(n + 1, dtype=np.int64)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            cur = cost[i0 - 1, :] - u[i0] - v[1:]
            free = ~used[1:]
            improve = free & (cur < minv[1:])
            if improve.any():
                idx = np.flatnonzero(improve)
                minv[idx + 1] = cur[idx]
                way[idx + 1] = j0
            free_cols = np.flatnonzero(free) + 1
            j1 = int(free_cols[np.argmin(minv[free_cols])])
            delta = minv[j1]
            used_cols = np.flatnonzero(used)
            u[p[used_cols]] += delta
            v[used_cols] -= delta
            minv[free_cols] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = int(way[j0])
            p[j0] = p[j1]
            j0 = j1
    col_of_row = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        col_of_row[p[j] - 1] = j - 1
    return col_of_row, u[1:], v[1:]


def _forbidden_mask(d: GroupDistanceMatrix, cfg: AssignConfig) -> np.ndarray:
    forbidden = np.zeros((d.x, d.num_classes), dtype=bool)
    if cfg.forbid_self_target:
        if d.groups is None:
            raise ValidationError(
                "forbid_self_target requires group membership on the distance matrix"
            )
        for i, members in enumerate(d.groups):
            forbidden[i, members] = True
    return forbidden


def _padded_cost(entries: np.ndarray, forbidden: np.ndarray, k: int) -> tuple[np.ndarray, float]:
    sentinel = k * float(entries.max(initial=0.0)) + 2.0
    cost = np.zeros((k, k), dtype=np.float64)
    cost[: entries.shape[0]] = -entries
    cost[: entries.shape[0]][forbidden] = sentinel
    return cost, sentinel


def _complete(
    entries: np.ndarray,
    forbidden: np.ndarray,
    rows: list[int],
    cols: list[int],
) -> list[int] | None:
    """Max-weight injective assignment of ``rows`` into ``cols``; None if
    only a forbidden edge would make it perfect."""
    if not rows:
        return []
    sub = entries[np.ix_(rows, cols)]
    sub_forbidden = forbidden[np.ix_(rows, cols)]
    cost, sentinel = _padded_cost(sub, sub_forbidden, len(cols))
    col_of_row, _, _ = _min_cost_square(cost)
    picks = col_of_row[: len(rows)]
    if sub_forbidden[np.arange(len(rows)), picks].any():
        return None
    return [cols[c] for c in picks]


def hungarian_max(d: GroupDistanceMatrix, cfg: AssignConfig | None = None) -> Assignment:
    """Targets maximizing the summed group-to-target distances."""
    cfg = cfg or AssignConfig()
    d.validate()
    x, k = d.x, d.num_classes
    forbidden = _forbidden_mask(d, cfg)
    cost, _ = _padded_cost(d.entries, forbidden, k)
    col_of_row, u, v = _min_cost_square(cost)
    targets = [int(t) for t in col_of_row[:x]]
    if forbidden[np.arange(x), targets].any():
        raise InfeasibleError("every complete assignment uses a forbidden self-target")
    best = assignment_objective(d.entries, targets)

    # Lexicographic tie-break: row by row, move to the smallest tight
    # column that still completes to the optimal value exactly.
    tol = 1e-9 * max(1.0, float(np.abs(cost).max()))
    fixed: list[int] = []
    avail = list(range(k))
    for i in range(x):
        t_i = targets[i]
        for t in avail:
            if t >= t_i:
                break
            if forbidden[i, t] or cost[i, t] - u[i] - v[t] > tol:
                continue
            rest = [c for c in avail if c != t]
            comp = _complete(d.entries, forbidden, list(range(i + 1, x)), rest)
            if comp is None:
                continue
            candidate = fixed + [t] + comp
            if assignment_objective(d.entries, candidate) == best:
                targets = candidate
                t_i = t
                break
        fixed.append(t_i)
        avail.remove(t_i)
    return Assignment(targets=fixed)


def brute_force_assign(d: GroupDistanceMatrix, cfg: AssignConfig | None = None) -> Assignment:
    """Exhaustive reference maximizer with the same tie-break rule.

    Enumerates injective target tuples in lexicographic order, so the
    first maximum encountered is the lexicographically smallest one.
    """
    cfg = cfg or AssignConfig()
    d.validate()
    x, k = d.x, d.num_classes
    size = math.perm(k, x)
    if size > BRUTE_FORCE_GUARD:
        raise GuardError(
            f"{k}!/{k - x}! = {size} exceeds the {BRUTE_FORCE_GUARD} enumeration guard"
        )
    forbidden = _forbidden_mask(d, cfg)
    best_obj = -np.inf
    best: list[int] | None = None
    perms = itertools.permutations(range(k), x)
    while True:
        chunk = np.array(list(itertools.islice(perms, _CHUNK)), dtype=np.int64)
        if chunk.size == 0:
            break
        obj = np.zeros(len(chunk), dtype=np.float64)
        for c in range(x):
            obj += d.entries[c, chunk[:, c]]
        if cfg.forbid_self_target:
            bad = np.zeros(len(chunk), dtype=bool)
            for c in range(x):
                bad |= forbidden[c, chunk[:, c]]
            obj[bad] = -np.inf
        idx = int(np.argmax(obj))
        if obj[idx] > best_obj:
            best_obj = float(obj[idx])
            best = [int(t) for t in chunk[idx]]
    if best is None or best_obj == -np.inf:
        raise InfeasibleError("every complete assignment uses a forbidden self-target")
    return Assignment(targets=best)
