"""Vietoris-Rips filtrations and persistent homology over Z/2.

A simplex enters the filtration at its diameter (largest pairwise distance
among its vertices). Persistence pairs come from the standard column
reduction of the boundary matrix in filtration order, with clearing.
Columns are Python ints used as bitsets over simplex indices, so a column
addition is a single XOR and the pivot is ``bit_length() - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import BudgetError, ValidationError
from .metric import DistanceMatrix, diameter

DEFAULT_SIMPLEX_BUDGET = 5_000_000
# largest cloud accepted per homology dimension unless the caller overrides it
DEFAULT_POINT_BUDGET = {0: 1000, 1: 64, 2: 25}


class Simplex(NamedTuple):
    # field order makes plain tuple comparison the filtration order
    filtration_value: float
    dim: int
    vertices: tuple[int, ...]


@dataclass(frozen=True)
class Filtration:
    simplices: tuple[Simplex, ...]
    max_dim: int
    max_radius: float

    def __len__(self):
        return len(self.simplices)

    def count_by_dim(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for s in self.simplices:
            counts[s.dim] = counts.get(s.dim, 0) + 1
        return counts


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite (birth, death) pairs and essential births for one homology dimension."""

    dim: int
    pairs: tuple[tuple[float, float], ...] = ()
    essential: tuple[float, ...] = ()

    def __post_init__(self):
        if self.dim < 0:
            raise ValidationError("homology dimension must be nonnegative")
        pairs = []
        for p in self.pairs:
            if len(p) != 2:
                raise ValidationError(f"diagram pair must have two entries, got {p!r}")
            b, d = float(p[0]), float(p[1])
            if not (math.isfinite(b) and math.isfinite(d)):
                raise ValidationError("finite pairs must have finite birth and death")
            if d < b:
                raise ValidationError(f"death {d} precedes birth {b}")
            pairs.append((b, d))
        essential = [float(b) for b in self.essential]
        if not all(math.isfinite(b) for b in essential):
            raise ValidationError("essential births must be finite")
        object.__setattr__(self, "pairs", tuple(sorted(pairs)))
        object.__setattr__(self, "essential", tuple(sorted(essential)))

    def __len__(self):
        return len(self.pairs) + len(self.essential)

    @property
    def deaths(self) -> list[float]:
        return [d for _, d in self.pairs]

    def scaled(self, s: float) -> "PersistenceDiagram":
        return PersistenceDiagram(self.dim, [(s * b, s * d) for b, d in self.pairs], [s * b for b in self.essential])

    def to_dict(self) -> dict:
        return {"dim": self.dim, "pairs": [list(p) for p in self.pairs], "essential": list(self.essential)}

    @classmethod
    def from_dict(cls, data: dict) -> "PersistenceDiagram":
        try:
            return cls(int(data["dim"]), [tuple(p) for p in data.get("pairs", [])], list(data.get("essential", [])))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed diagram: {exc}") from None


def check_point_budget(n_points: int, max_homology_dim: int, budget: dict[int, int] | None = None) -> None:
    limits = DEFAULT_POINT_BUDGET if budget is None else budget
    limit = limits.get(max_homology_dim)
    if limit is None:
        raise BudgetError(f"no point budget configured for H{max_homology_dim}")
    if n_points > limit:
        raise BudgetError(f"{n_points} points exceeds the H{max_homology_dim} budget of {limit}")


def build_filtration(
    dm: DistanceMatrix,
    max_dim: int,
    max_radius: float | None = None,
    budget: int = DEFAULT_SIMPLEX_BUDGET,
) -> Filtration:
    """Rips filtration with simplices of dimension <= max_dim + 1.

    ``max_dim`` is the highest homology dimension the filtration must
    support. ``max_radius`` defaults to the diameter, giving the complete
    filtration.
    """
    if max_dim < 0:
        raise ValidationError("max_dim must be nonnegative")
    if max_radius is None:
        max_radius = diameter(dm)
    elif not max_radius > 0:
        raise ValidationError("max_radius must be positive")
    d = dm.values.tolist()
    n = dm.size
    top = max_dim + 1

    simplices = [Simplex(0.0, 0, (v,)) for v in range(n)]
    if len(simplices) > budget:
        raise BudgetError(f"filtration exceeds the budget of {budget} simplices")
    layer = simplices
    for dim in range(1, top + 1):
        nxt = []
        for value, _, verts in layer:
            last = verts[-1]
            for w in range(last + 1, n):
                row = d[w]
                v = value
                for u in verts:
                    if row[u] > v:
                        v = row[u]
                if v <= max_radius:
                    nxt.append(Simplex(v, dim, verts + (w,)))
            if len(simplices) + len(nxt) > budget:
                raise BudgetError(f"filtration exceeds the budget of {budget} simplices")
        simplices.extend(nxt)
        layer = nxt
    simplices.sort()
    return Filtration(tuple(simplices), max_dim, float(max_radius))


def _faces(verts: tuple[int, ...]) -> Iterable[tuple[int, ...]]:
    for i in range(len(verts)):
        yield verts[:i] + verts[i + 1:]


def _boundary_columns(f: Filtration) -> list[int]:
    index: dict[tuple[int, ...], int] = {}
    columns = []
    prev = None
    for j, s in enumerate(f.simplices):
        if prev is not None and s < prev:
            raise ValidationError(f"filtration out of order at position {j}")
        if len(s.vertices) != s.dim + 1 or any(a >= b for a, b in zip(s.vertices, s.vertices[1:])):
            raise ValidationError(f"simplex {s.vertices} is not a strictly increasing vertex list of dimension {s.dim}")
        col = 0
        if s.dim > 0:
            for face in _faces(s.vertices):
                i = index.get(face)
                if i is None:
                    raise ValidationError(f"face {face} of {s.vertices} missing or ordered after it")
                if f.simplices[i].filtration_value > s.filtration_value:
                    raise ValidationError(f"face {face} enters after its coface {s.vertices}")
                col |= 1 << i
        index[s.vertices] = j
        columns.append(col)
        prev = s
    return columns


def persistence_pairs(f: Filtration, max_homology_dim: int) -> tuple[list[tuple[int, int]], list[int]]:
    """Index-level pairing: (birth index, death index) pairs and unpaired creators.

    Only creators of dimension <= max_homology_dim are reported as unpaired.
    """
    if max_homology_dim < 0:
        raise ValidationError("max_homology_dim must be nonnegative")
    if max_homology_dim + 1 > f.max_dim + 1:
        raise ValidationError(
            f"filtration built for H<= {f.max_dim} cannot give H{max_homology_dim}; rebuild with max_dim >= {max_homology_dim}"
        )
    columns = _boundary_columns(f)
    dims = [s.dim for s in f.simplices]
    by_dim: dict[int, list[int]] = {}
    for j, k in enumerate(dims):
        by_dim.setdefault(k, []).append(j)

    pivot_of: dict[int, int] = {}  # low row -> column owning it
    cleared: set[int] = set()
    pairs = []
    for k in range(max_homology_dim + 1, 0, -1):
        for j in by_dim.get(k, ()):
            if j in cleared:
                continue
            col = columns[j]
            while col:
                low = col.bit_length() - 1
                other = pivot_of.get(low)
                if other is None:
                    break
                col ^= columns[other]
            columns[j] = col
            if col:
                low = col.bit_length() - 1
                pivot_of[low] = j
                cleared.add(low)
                pairs.append((low, j))
    paired = set(pivot_of)
    unpaired = [
        j
        for k in range(max_homology_dim + 1)
        for j in by_dim.get(k, ())
        if j not in paired and columns[j] == 0
    ]
    return pairs, unpaired


def compute_persistence(
    f: Filtration,
    max_homology_dim: int,
    keep_zero_persistence: bool = False,
) -> list[PersistenceDiagram]:
    """Persistence diagrams for dimensions 0..max_homology_dim."""
    pairs, unpaired = persistence_pairs(f, max_homology_dim)
    simp = f.simplices
    finite: list[list[tuple[float, float]]] = [[] for _ in range(max_homology_dim + 1)]
    essential: list[list[float]] = [[] for _ in range(max_homology_dim + 1)]
    for i, j in pairs:
        k = simp[i].dim
        if k > max_homology_dim:
            continue
        b, d = simp[i].filtration_value, simp[j].filtration_value
        if d > b or keep_zero_persistence:
            finite[k].append((b, d))
    for i in unpaired:
        essential[simp[i].dim].append(simp[i].filtration_value)
    return [PersistenceDiagram(k, finite[k], essential[k]) for k in range(max_homology_dim + 1)]


def rips_diagrams(
    dm: DistanceMatrix,
    max_homology_dim: int,
    max_radius: float | None = None,
    point_budget: dict[int, int] | None = None,
    simplex_budget: int = DEFAULT_SIMPLEX_BUDGET,
) -> list[PersistenceDiagram]:
    """Distance matrix to diagrams in one call, enforcing the point budget."""
    check_point_budget(dm.size, max_homology_dim, point_budget)
    f = build_filtration(dm, max_homology_dim, max_radius, budget=simplex_budget)
    return compute_persistence(f, max_homology_dim)


def diagrams_by_dim(diagrams: Sequence[PersistenceDiagram]) -> dict[int, PersistenceDiagram]:
    return {d.dim: d for d in diagrams}
