"""Scaling factors with minimal variability under a topological tolerance.

The program

    minimize   s_max - s_min
    subject to (s_max - s_min) * diam <= epsilon,  s_min <= s_i <= s_max,  s_i > 0

is one-dimensional once s_min is fixed, so it is solved in closed form.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

from .bounds import paper_bound
from .errors import ValidationError
from .metric import ScalingTransform

UNIFORM = "uniform-preferred"
BOUNDARY = "boundary-spread"
STRATEGIES = (UNIFORM, BOUNDARY)


def max_variability(epsilon: float, diam: float) -> float:
    """Largest s_max - s_min whose variability bound stays within ``epsilon``.

    A zero diameter (single point, or duplicates only) is rejected: every
    scaling leaves such a cloud unchanged, so the cap is unbounded.
    """
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    if diam == 0:
        raise ValidationError("diameter is zero: any scaling is topologically safe, the variability cap is unbounded")
    if not (diam > 0 and math.isfinite(diam)):
        raise ValidationError(f"diameter must be positive and finite, got {diam}")
    return epsilon / diam


@dataclass(frozen=True)
class OptimizationRequest:
    n: int
    epsilon: float
    diam: float
    strategy: str = UNIFORM
    k: int = 1  # axes placed at s_max under boundary-spread
    s_min_choice: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("axis count n must be at least 1")
        if not self.epsilon > 0:
            raise ValidationError("epsilon must be positive")
        if not self.diam > 0:
            raise ValidationError("diam must be positive")
        if not (self.s_min_choice > 0 and math.isfinite(self.s_min_choice)):
            raise ValidationError("s_min_choice must be positive")
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.strategy == BOUNDARY and not 1 <= self.k <= self.n:
            raise ValidationError(f"boundary-spread needs 1 <= k <= n, got k={self.k}, n={self.n}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class OptimizationResult:
    transform: ScalingTransform
    achieved_variability: float
    variability_cap: float
    bound_at_solution: float

    def to_dict(self) -> dict:
        return {
            "factors": list(self.transform.factors),
            "achieved_variability": self.achieved_variability,
            "variability_cap": self.variability_cap,
            "bound_at_solution": self.bound_at_solution,
        }


def solve(req: OptimizationRequest) -> OptimizationResult:
    """Closed-form optimum.

    uniform-preferred: every factor equals s_min_choice (variability 0, the
    global minimum). boundary-spread: n - k factors at s_min_choice and the
    last k at s_min_choice + cap, spending the whole tolerance.
    """
    cap = max_variability(req.epsilon, req.diam)
    s0 = req.s_min_choice
    if req.strategy == UNIFORM:
        factors = (s0,) * req.n
        achieved = 0.0
    else:
        factors = (s0,) * (req.n - req.k) + (s0 + cap,) * req.k
        achieved = cap
    t = ScalingTransform(factors)
    # the bound is reported from the exact cap; s0 + cap - s0 can differ from cap by an ulp
    return OptimizationResult(t, achieved, cap, achieved * req.diam)


def optimal_scaling_factors(n: int, epsilon: float, diam: float) -> tuple[float, ...]:
    """The textbook algorithm: its feasibility test always passes, so it returns uniform unit factors."""
    cap = max_variability(epsilon, diam)
    s_min = 1.0
    if cap >= 0:
        return (s_min,) * n
    return (s_min,) * (n - 1) + (s_min + cap,)  # unreachable for epsilon, diam > 0


@dataclass(frozen=True)
class ModalityScaling:
    group_sizes: tuple[int, ...]
    group_factors: tuple[float, ...]
    variability_cap: float
    bound: float

    def transform(self) -> ScalingTransform:
        return ScalingTransform(tuple(f for f, size in zip(self.group_factors, self.group_sizes) for _ in range(size)))

    def to_dict(self) -> dict:
        return {
            "group_sizes": list(self.group_sizes),
            "group_factors": list(self.group_factors),
            "variability_cap": self.variability_cap,
            "bound": self.bound,
        }


def modality_scaling(group_sizes: Sequence[int], epsilon: float, diam: float) -> ModalityScaling:
    """One factor per feature group: all groups at 1 except the last, which gets 1 + cap."""
    sizes = tuple(int(g) for g in group_sizes)
    if not sizes:
        raise ValidationError("need at least one group")
    if any(g < 1 for g in sizes):
        raise ValidationError(f"every group needs at least one axis, got {sizes}")
    cap = max_variability(epsilon, diam)
    if len(sizes) == 1:
        return ModalityScaling(sizes, (1.0,), cap, 0.0)
    factors = (1.0,) * (len(sizes) - 1) + (1.0 + cap,)
    return ModalityScaling(sizes, factors, cap, cap * diam)


def satisfies_tolerance(result: OptimizationResult, epsilon: float, diam: float, tol: float = 1e-9) -> bool:
    return paper_bound(result.transform, diam) <= epsilon + tol
