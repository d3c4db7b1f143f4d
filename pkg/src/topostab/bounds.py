"""Stability bounds for persistence diagrams under per-axis scaling, and their empirical checks.

Two bound families are computed side by side:

* the variability bound (``bound_paper``) uses the factor ``s_max - s_min``; valid whenever
  ``s_min <= 1 <= s_max``;
* corrected bounds use ``max(s_max - 1, 1 - s_min)``, which bounds
  ``|d_S - d_X| / d_X`` for every positive transform and therefore must
  never be violated.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import BoundViolationError, ValidationError
from .matching import bottleneck, wasserstein
from .metric import (
    DistanceMatrix,
    PointCloud,
    ScalingTransform,
    apply_scaling,
    compose,
    diameter,
    diameter_k,
    distance_matrix,
)
from .rips import PersistenceDiagram, rips_diagrams

ABS_TOL = 1e-9


def tolerance(diam: float) -> float:
    """Absolute slack for bound comparisons on quantities of order ``diam``."""
    return ABS_TOL * max(1.0, diam)


def _check_diam(diam: float) -> None:
    if not (diam >= 0 and math.isfinite(diam)):
        raise ValidationError(f"diameter must be finite and nonnegative, got {diam}")


def paper_bound(t: ScalingTransform, diam: float) -> float:
    _check_diam(diam)
    return t.variability * diam


def corrected_bound(t: ScalingTransform, diam: float) -> float:
    _check_diam(diam)
    return t.corrected_factor * diam


def dimension_bound(t: ScalingTransform, dm: DistanceMatrix, k: int, corrected: bool = False) -> float:
    """Per-dimension bound using the largest diameter among (k+1)-point subsets."""
    if t.dim < 1:
        raise ValidationError("empty transform")
    diam_k = diameter_k(dm, k)
    return (t.corrected_factor if corrected else t.variability) * diam_k


def _products(ts: Sequence[ScalingTransform]) -> tuple[float, float]:
    if not ts:
        raise ValidationError("need at least one transform")
    n = ts[0].dim
    if any(t.dim != n for t in ts):
        raise ValidationError("all transforms must share the same dimension")
    return math.prod(t.s_max for t in ts), math.prod(t.s_min for t in ts)


def cumulative_bound(ts: Sequence[ScalingTransform], diam: float) -> float:
    """(prod s_max^(j) - prod s_min^(j)) * diam for a sequence of transforms."""
    _check_diam(diam)
    hi, lo = _products(ts)
    return (hi - lo) * diam


def corrected_cumulative_bound(ts: Sequence[ScalingTransform], diam: float) -> float:
    _check_diam(diam)
    hi, lo = _products(ts)
    return max(hi - 1.0, 1.0 - lo, 0.0) * diam


def cumulative_regime_contains_one(ts: Sequence[ScalingTransform]) -> bool:
    hi, lo = _products(ts)
    return lo <= 1.0 <= hi


def expected_variability_uniform(a: float, b: float, n: int) -> float:
    """E[max - min] of n i.i.d. uniform(a, b) factors."""
    if not (0 < a <= b):
        raise ValidationError(f"need 0 < a <= b, got a={a}, b={b}")
    if n < 1:
        raise ValidationError("axis count must be at least 1")
    return (b - a) * (1.0 - 2.0 / (n + 1))


@dataclass(frozen=True)
class StabilityReport:
    homology_dim: int
    diameter: float
    factors: tuple[float, ...]
    measured_bottleneck: float
    bound_paper: float
    bound_corrected: float
    regime_contains_one: bool
    holds_paper: bool
    holds_corrected: bool
    diagram_points: int
    diagram_points_scaled: int
    wasserstein_p: float | None = None
    measured_wasserstein: float | None = None
    wasserstein_chain_bound: float | None = None
    holds_wasserstein_chain: bool | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["factors"] = list(self.factors)
        return d


def stability_report(
    D: PersistenceDiagram,
    DS: PersistenceDiagram,
    t: ScalingTransform,
    diam: float,
    p: float | None = None,
    *,
    bound_paper: float | None = None,
    bound_corrected: float | None = None,
    regime: bool | None = None,
) -> StabilityReport:
    """Compare two diagrams against the bounds for ``t``.

    Explicit bounds and regime override the single-transform defaults, which
    is how cumulative bounds for transform sequences are checked.
    """
    if bound_paper is None:
        bound_paper = paper_bound(t, diam)
    if bound_corrected is None:
        bound_corrected = corrected_bound(t, diam)
    if regime is None:
        regime = t.contains_one
    tol = tolerance(diam)
    measured = bottleneck(D, DS)
    report = dict(
        homology_dim=D.dim,
        diameter=diam,
        factors=t.factors,
        measured_bottleneck=measured,
        bound_paper=bound_paper,
        bound_corrected=bound_corrected,
        regime_contains_one=regime,
        holds_paper=measured <= bound_paper + tol,
        holds_corrected=measured <= bound_corrected + tol,
        diagram_points=len(D),
        diagram_points_scaled=len(DS),
    )
    if p is not None:
        wp = wasserstein(D, DS, p)
        chain = (len(D) + len(DS)) ** (1.0 / p) * bound_corrected
        report.update(
            wasserstein_p=float(p),
            measured_wasserstein=wp,
            wasserstein_chain_bound=chain,
            holds_wasserstein_chain=wp <= chain + tol,
        )
    r = StabilityReport(**report)
    if not r.holds_corrected:
        raise BoundViolationError(
            f"H{r.homology_dim}: measured bottleneck {measured!r} exceeds corrected bound {bound_corrected!r} "
            f"for factors {t.factors}"
        )
    if r.holds_wasserstein_chain is False:
        raise BoundViolationError(
            f"H{r.homology_dim}: W_{p} = {r.measured_wasserstein!r} exceeds chain bound {r.wasserstein_chain_bound!r}"
        )
    return r


def verify_stability(
    cloud: PointCloud,
    t: ScalingTransform,
    dims: Sequence[int] = (0, 1),
    p: float | None = None,
    point_budget: dict[int, int] | None = None,
) -> list[StabilityReport]:
    """Measure diagram perturbation under ``t`` and check it against every bound.

    Both clouds get complete Rips filtrations. Raises BoundViolationError if a
    corrected bound fails.
    """
    dims = sorted(set(dims))
    if not dims or dims[0] < 0:
        raise ValidationError("dims must be a nonempty list of nonnegative integers")
    top = dims[-1]
    dm = distance_matrix(cloud)
    dms = distance_matrix(apply_scaling(cloud, t))
    D = rips_diagrams(dm, top, point_budget=point_budget)
    DS = rips_diagrams(dms, top, point_budget=point_budget)
    diam = diameter(dm)
    return [stability_report(D[k], DS[k], t, diam, p) for k in dims]


def verify_iterated(
    cloud: PointCloud,
    ts: Sequence[ScalingTransform],
    dims: Sequence[int] = (0, 1),
    p: float | None = None,
    point_budget: dict[int, int] | None = None,
) -> list[StabilityReport]:
    """Apply ``ts`` in sequence and check the cumulative bounds."""
    total = compose(ts)
    dims = sorted(set(dims))
    if not dims or dims[0] < 0:
        raise ValidationError("dims must be a nonempty list of nonnegative integers")
    dm = distance_matrix(cloud)
    scaled = cloud
    for t in ts:
        scaled = apply_scaling(scaled, t)
    D = rips_diagrams(dm, dims[-1], point_budget=point_budget)
    DS = rips_diagrams(distance_matrix(scaled), dims[-1], point_budget=point_budget)
    diam = diameter(dm)
    return [
        stability_report(
            D[k],
            DS[k],
            total,
            diam,
            p,
            bound_paper=cumulative_bound(ts, diam),
            bound_corrected=corrected_cumulative_bound(ts, diam),
            regime=cumulative_regime_contains_one(ts),
        )
        for k in dims
    ]


@dataclass(frozen=True)
class RandomScalingSpec:
    """I.i.d. per-axis scaling factors.

    ``distribution`` is "uniform" (params: a, b) or "truncnorm"
    (params: mu, sigma, low, high; normal truncated to [low, high]).
    """

    distribution: str
    params: dict = field(default_factory=dict)
    n: int = 3
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("axis count must be at least 1")
        if self.trials < 1:
            raise ValidationError("trial count must be at least 1")
        if self.seed < 0:
            raise ValidationError("seed must be nonnegative")
        p = self.params
        if self.distribution == "uniform":
            a, b = p.get("a"), p.get("b")
            if a is None or b is None or not (0 < a <= b):
                raise ValidationError("uniform scaling needs 0 < a <= b")
        elif self.distribution == "truncnorm":
            mu, sigma, lo, hi = (p.get(k) for k in ("mu", "sigma", "low", "high"))
            if None in (mu, sigma, lo, hi):
                raise ValidationError("truncnorm scaling needs mu, sigma, low, high")
            if not (0 < lo < hi) or sigma <= 0:
                raise ValidationError("truncnorm scaling needs 0 < low < high and sigma > 0")
        else:
            raise ValidationError(f"unknown distribution {self.distribution!r}")

    def rng(self, trial: int) -> np.random.Generator:
        # one independent stream per (seed, trial) so ordering and parallelism never matter
        return np.random.default_rng([self.seed, trial])

    def sample(self, trial: int) -> np.ndarray:
        rng = self.rng(trial)
        p = self.params
        if self.distribution == "uniform":
            return rng.uniform(p["a"], p["b"], size=self.n)
        out = np.empty(0)
        while out.size < self.n:
            draw = rng.normal(p["mu"], p["sigma"], size=self.n)
            out = np.concatenate([out, draw[(draw >= p["low"]) & (draw <= p["high"])]])
        return out[: self.n]


def _variability_chunk(args) -> tuple[np.ndarray, np.ndarray]:
    spec, start, stop = args
    var = np.empty(stop - start)
    regime = np.empty(stop - start, dtype=bool)
    for i, trial in enumerate(range(start, stop)):
        s = spec.sample(trial)
        lo, hi = s.min(), s.max()
        var[i] = hi - lo
        regime[i] = lo <= 1.0 <= hi
    return var, regime


def _chunks(total: int, parts: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, total, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def sample_variability(spec: RandomScalingSpec, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Delta s and regime flag for every trial, in trial order."""
    chunks = [(spec, a, b) for a, b in _chunks(spec.trials, max(1, workers))]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_variability_chunk, chunks))
    else:
        parts = [_variability_chunk(c) for c in chunks]
    return np.concatenate([v for v, _ in parts]), np.concatenate([r for _, r in parts])


@dataclass(frozen=True)
class MonteCarloReport:
    mean_variability: float
    std_error: float
    expected_bound: float
    trials: int
    seed: int
    regime_violation_fraction: float
    closed_form_variability: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def monte_carlo_expected_bound(spec: RandomScalingSpec, diam: float, workers: int = 1) -> MonteCarloReport:
    """Estimate E[s_max - s_min] and the implied bound E[Delta s] * diam."""
    _check_diam(diam)
    var, regime = sample_variability(spec, workers)
    mean = float(np.mean(var))
    se = float(np.std(var, ddof=1) / math.sqrt(var.size)) if var.size > 1 else 0.0
    closed = None
    if spec.distribution == "uniform":
        closed = expected_variability_uniform(spec.params["a"], spec.params["b"], spec.n)
    return MonteCarloReport(
        mean_variability=mean,
        std_error=se,
        expected_bound=mean * diam,
        trials=spec.trials,
        seed=spec.seed,
        regime_violation_fraction=float(1.0 - regime.mean()),
        closed_form_variability=closed,
    )
