"""Bottleneck and p-Wasserstein distances between persistence diagrams.

Ground cost between two off-diagonal points is the L-infinity distance; a
point matched to the diagonal costs half its persistence. Essential classes
only match each other (cost |b - b'|), and diagrams with different numbers
of essential classes are infinitely far apart.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import BudgetError, ValidationError
from .rips import PersistenceDiagram

BRUTE_FORCE_MAX_POINTS = 8
DIAGONAL = None


@dataclass(frozen=True)
class DiagramMatching:
    """Assignments as (index in first | None, index in second | None); None is the diagonal.

    Indices address ``D.pairs`` followed by ``D.essential``.
    """

    assignments: tuple[tuple[int | None, int | None], ...]
    cost: float
    norm: str  # "bottleneck" or "wasserstein"
    p: float | None = None


def _check(D: PersistenceDiagram, D2: PersistenceDiagram) -> None:
    if D.dim != D2.dim:
        raise ValidationError(f"cannot compare diagrams of dimensions {D.dim} and {D2.dim}")


def _pair_costs(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if len(A) and len(B):
        C = np.maximum(np.abs(A[:, None, 0] - B[None, :, 0]), np.abs(A[:, None, 1] - B[None, :, 1]))
    else:
        C = np.zeros((len(A), len(B)))
    da = (A[:, 1] - A[:, 0]) / 2 if len(A) else np.zeros(0)
    db = (B[:, 1] - B[:, 0]) / 2 if len(B) else np.zeros(0)
    return C, da, db


def _finite(D: PersistenceDiagram) -> np.ndarray:
    return np.asarray(D.pairs, dtype=float).reshape(-1, 2)


def _essential_matching(D: PersistenceDiagram, D2: PersistenceDiagram):
    """Sorted-order matching of essential births; optimal for every p in one dimension."""
    if len(D.essential) != len(D2.essential):
        return None
    off, off2 = len(D.pairs), len(D2.pairs)
    return [(off + i, off2 + i, abs(a - b)) for i, (a, b) in enumerate(zip(D.essential, D2.essential))]


def _perfect_matching(A_n: int, B_n: int, C, da, db, r: float):
    """Max matching on the diagonal-augmented graph using edges of cost <= r.

    Left: A then diagonal copies of B. Right: B then diagonal copies of A.
    """
    rows, cols = [], []
    for i in range(A_n):
        for j in range(B_n):
            if C[i, j] <= r:
                rows.append(i)
                cols.append(j)
        if da[i] <= r:
            rows.append(i)
            cols.append(B_n + i)
    for j in range(B_n):
        if db[j] <= r:
            rows.append(A_n + j)
            cols.append(j)
        for i in range(A_n):
            rows.append(A_n + j)
            cols.append(B_n + i)
    size = A_n + B_n
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return match if np.all(match >= 0) else None


def bottleneck_matching(D: PersistenceDiagram, D2: PersistenceDiagram) -> DiagramMatching:
    _check(D, D2)
    ess = _essential_matching(D, D2)
    if ess is None:
        return DiagramMatching((), math.inf, "bottleneck")
    A, B = _finite(D), _finite(D2)
    C, da, db = _pair_costs(A, B)
    m, k = len(A), len(B)
    ess_cost = max((c for _, _, c in ess), default=0.0)
    if m + k == 0:
        return DiagramMatching(tuple((i, j) for i, j, _ in ess), ess_cost, "bottleneck")
    candidates = np.unique(np.concatenate([[0.0], C.ravel(), da, db]))
    lo, hi = 0, len(candidates) - 1
    best = _perfect_matching(m, k, C, da, db, candidates[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        match = _perfect_matching(m, k, C, da, db, candidates[mid])
        if match is None:
            lo = mid + 1
        else:
            hi, best = mid, match
    value = float(candidates[lo])
    assignments = []
    for i in range(m):
        j = int(best[i])
        assignments.append((i, j if j < k else DIAGONAL))
    for j in range(k):
        if best[m + j] == j:
            assignments.append((DIAGONAL, j))
    assignments.extend((i, j) for i, j, _ in ess)
    return DiagramMatching(tuple(assignments), max(value, ess_cost), "bottleneck")


def bottleneck(D: PersistenceDiagram, D2: PersistenceDiagram) -> float:
    """Exact bottleneck distance; ``math.inf`` when essential counts differ."""
    return bottleneck_matching(D, D2).cost


def wasserstein_matching(D: PersistenceDiagram, D2: PersistenceDiagram, p: float) -> DiagramMatching:
    _check(D, D2)
    if not (p >= 1 and math.isfinite(p)):
        raise ValidationError(f"Wasserstein order p must be finite and >= 1, got {p}")
    ess = _essential_matching(D, D2)
    if ess is None:
        return DiagramMatching((), math.inf, "wasserstein", p)
    A, B = _finite(D), _finite(D2)
    C, da, db = _pair_costs(A, B)
    m, k = len(A), len(B)
    total = 0.0
    assignments = []
    if m + k:
        cost = np.full((m + k, m + k), np.inf)
        cost[:m, :k] = C**p
        cost[:m, k:][np.diag_indices(m)] = da**p
        cost[m:, :k][np.diag_indices(k)] = db**p
        cost[m:, k:] = 0.0
        rows, cols = linear_sum_assignment(cost)
        for r, c in zip(rows, cols):
            if r < m:
                assignments.append((int(r), int(c) if c < k else DIAGONAL))
                total += cost[r, c]
            elif c < k:
                assignments.append((DIAGONAL, int(c)))
                total += cost[r, c]
    for i, j, c in ess:
        assignments.append((i, j))
        total += c**p
    return DiagramMatching(tuple(assignments), float(total), "wasserstein", p)


def wasserstein(D: PersistenceDiagram, D2: PersistenceDiagram, p: float = 2.0) -> float:
    """(min over matchings of sum ||x - g(x)||_inf^p)^(1/p)."""
    m = wasserstein_matching(D, D2, p)
    return m.cost ** (1.0 / p)


def brute_force_bottleneck(D: PersistenceDiagram, D2: PersistenceDiagram) -> float:
    """Bottleneck distance by enumerating every matching. Test oracle for small diagrams."""
    _check(D, D2)
    if len(D) + len(D2) > BRUTE_FORCE_MAX_POINTS:
        raise BudgetError(f"brute-force oracle limited to {BRUTE_FORCE_MAX_POINTS} points in total")
    if len(D.essential) != len(D2.essential):
        return math.inf
    ess = 0.0
    if D.essential:
        ess = min(
            max(abs(a - b) for a, b in zip(D.essential, perm))
            for perm in itertools.permutations(D2.essential)
        )
    A, B = list(D.pairs), list(D2.pairs)

    def linf(a, b):
        return max(abs(a[0] - b[0]), abs(a[1] - b[1]))

    def half(a):
        return (a[1] - a[0]) / 2

    best = math.inf

    def search(i: int, used: frozenset, worst: float):
        nonlocal best
        if worst >= best:
            return
        if i == len(A):
            rest = [half(B[j]) for j in range(len(B)) if j not in used]
            best = min(best, max([worst, *rest]))
            return
        search(i + 1, used, max(worst, half(A[i])))
        for j in range(len(B)):
            if j not in used:
                search(i + 1, used | {j}, max(worst, linf(A[i], B[j])))

    search(0, frozenset(), 0.0)
    return max(best, ess)
