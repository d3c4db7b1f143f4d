"""Experiment pipelines behind the CLI subcommands.

Every runner returns a :class:`Report`: a JSON-ready dict plus a flat list
of rows for CSV output. Randomized runners derive one generator per trial
from ``(seed, trial)``, so reports do not depend on worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .bounds import (
    RandomScalingSpec,
    corrected_bound,
    corrected_cumulative_bound,
    cumulative_bound,
    cumulative_regime_contains_one,
    dimension_bound,
    monte_carlo_expected_bound,
    paper_bound,
    verify_iterated,
    verify_stability,
)
from .errors import BoundViolationError, ValidationError
from .generators import GeneratorSpec, generate
from .matching import bottleneck, wasserstein
from .metric import PointCloud, ScalingTransform, apply_scaling, compose, diameter, distance_matrix
from .optimize import BOUNDARY, UNIFORM, OptimizationRequest, max_variability, modality_scaling, solve
from .rips import DEFAULT_POINT_BUDGET, build_filtration, check_point_budget, compute_persistence

COMMANDS = (
    "diagram",
    "distance",
    "bound",
    "optimize",
    "verify",
    "trials",
    "iterate",
    "case-study-rgb",
    "case-study-multimodal",
    "montecarlo",
    "cloud",
)
REGIME_MODES = ("contains-one", "above-one", "below-one", "any")


@dataclass(frozen=True)
class ExperimentConfig:
    input: str | None = None
    generate: str | None = None
    epsilon: float = 5.0
    dims: tuple[int, ...] = (0, 1)
    wasserstein_p: float | None = None
    trials: int = 100
    seed: int = 0
    max_dim: int = 2
    max_radius: float | None = None
    out: str | None = None
    format: str = "json"
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials must be at least 1")
        if not self.epsilon > 0:
            raise ValidationError("epsilon must be positive")
        if not self.dims or not set(self.dims) <= {0, 1, 2}:
            raise ValidationError(f"dims must be a nonempty subset of {{0, 1, 2}}, got {self.dims}")
        if max(self.dims) > self.max_dim:
            raise ValidationError(f"dims {self.dims} exceed --max-dim {self.max_dim}")
        if self.wasserstein_p is not None and not (self.wasserstein_p >= 1 and math.isfinite(self.wasserstein_p)):
            raise ValidationError("wasserstein p must be finite and >= 1")
        if self.max_radius is not None and not self.max_radius > 0:
            raise ValidationError("max radius must be positive")
        if self.format not in ("json", "csv"):
            raise ValidationError("format must be json or csv")
        if self.seed < 0:
            raise ValidationError("seed must be nonnegative")
        if self.workers < 1:
            raise ValidationError("workers must be at least 1")
        if self.input and self.generate:
            raise ValidationError("give either an input file or a generator spec, not both")


@dataclass
class Report:
    data: dict
    rows: list[dict] = field(default_factory=list)

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return io.rows_to_csv(self.rows or [_flatten(self.data)])
        return io.dumps(self.data)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list) and v and isinstance(v[0], (dict, list)):
            continue
        else:
            out[key] = v
    return out


def _header(command: str, **extra) -> dict:
    return {"schema": io.SCHEMA_VERSION, "command": command, **extra}


def load_point_cloud(source: str | Path | GeneratorSpec) -> PointCloud:
    if isinstance(source, GeneratorSpec):
        return generate(source)
    return io.read_point_cloud(source)


def config_cloud(cfg: ExperimentConfig, default: str | None = None) -> tuple[PointCloud, str]:
    if cfg.input:
        return load_point_cloud(cfg.input), cfg.input
    spec_text = cfg.generate or default
    if spec_text is None:
        raise ValidationError("need --input or --generate")
    return load_point_cloud(GeneratorSpec.parse(spec_text, seed=cfg.seed)), spec_text


# single-cloud commands


def run_cloud(cfg: ExperimentConfig, scale: ScalingTransform | None = None) -> str:
    """Emit the (optionally scaled) input cloud as CSV or JSON text."""
    cloud, _ = config_cloud(cfg)
    if scale is not None:
        cloud = apply_scaling(cloud, scale)
    if cfg.format == "csv":
        return io.cloud_to_csv(cloud)
    return io.dumps(io.cloud_to_dict(cloud))


def run_diagram(cfg: ExperimentConfig) -> Report:
    cloud, source = config_cloud(cfg)
    top = max(cfg.dims)
    check_point_budget(cloud.n_points, top)
    dm = distance_matrix(cloud)
    f = build_filtration(dm, top, cfg.max_radius)
    diagrams = compute_persistence(f, top)
    chosen = [d for d in diagrams if d.dim in cfg.dims]
    data = _header(
        "diagram",
        source=source,
        n_points=cloud.n_points,
        dimension=cloud.dim,
        diameter=diameter(dm),
        max_radius=f.max_radius,
        simplices=len(f),
        diagrams=[d.to_dict() for d in chosen],
    )
    rows = [{"dim": d.dim, "birth": b, "death": dd} for d in chosen for b, dd in d.pairs]
    rows += [{"dim": d.dim, "birth": b, "death": math.inf} for d in chosen for b in d.essential]
    return Report(data, rows)


def run_distance(cfg: ExperimentConfig, diagrams_a: str, diagrams_b: str) -> Report:
    A = {d.dim: d for d in io.read_diagrams(diagrams_a)}
    B = {d.dim: d for d in io.read_diagrams(diagrams_b)}
    results = []
    for k in sorted(set(A) & set(B)):
        if k not in cfg.dims:
            continue
        entry = {"dim": k, "distances": [io.distance_result("bottleneck", bottleneck(A[k], B[k]))]}
        if cfg.wasserstein_p is not None:
            entry["distances"].append(
                io.distance_result("wasserstein", wasserstein(A[k], B[k], cfg.wasserstein_p), cfg.wasserstein_p)
            )
        results.append(entry)
    if not results:
        raise ValidationError("the two diagram files share no homology dimension among --dims")
    rows = [{"dim": r["dim"], **d} for r in results for d in r["distances"]]
    return Report(_header("distance", results=results), rows)


def run_bound(cfg: ExperimentConfig, transforms: Sequence[ScalingTransform], diam: float | None = None) -> Report:
    if not transforms:
        raise ValidationError("need at least one transform")
    dm = None
    if diam is None:
        cloud, _ = config_cloud(cfg)
        dm = distance_matrix(cloud)
        diam = diameter(dm)
    per = []
    for t in transforms:
        entry = {
            "factors": list(t.factors),
            "s_min": t.s_min,
            "s_max": t.s_max,
            "variability": t.variability,
            "regime_contains_one": t.contains_one,
            "bound_paper": paper_bound(t, diam),
            "bound_corrected": corrected_bound(t, diam),
        }
        if dm is not None:
            entry["dimension_bounds"] = [
                {"dim": k, "bound_paper": dimension_bound(t, dm, k), "bound_corrected": dimension_bound(t, dm, k, True)}
                for k in cfg.dims
                if dm.size >= k + 1
            ]
        per.append(entry)
    data = _header("bound", diameter=diam, transforms=per)
    if len(transforms) > 1:
        total = compose(transforms)
        data["cumulative"] = {
            "factors": list(total.factors),
            "bound_paper": cumulative_bound(transforms, diam),
            "bound_corrected": corrected_cumulative_bound(transforms, diam),
            "regime_contains_one": cumulative_regime_contains_one(transforms),
        }
    rows = [{k: v for k, v in e.items() if k != "dimension_bounds"} for e in per]
    return Report(data, rows)


def run_optimize(
    cfg: ExperimentConfig,
    n: int | None = None,
    diam: float | None = None,
    strategy: str = UNIFORM,
    k: int = 1,
    s_min: float = 1.0,
) -> Report:
    source = None
    if diam is None or n is None:
        cloud, source = config_cloud(cfg)
        if diam is None:
            diam = diameter(distance_matrix(cloud))
        if n is None:
            n = cloud.dim
    req = OptimizationRequest(n=n, epsilon=cfg.epsilon, diam=diam, strategy=strategy, k=k, s_min_choice=s_min)
    res = solve(req)
    data = _header("optimize", source=source, request=req.to_dict(), result=res.to_dict())
    return Report(data, [{**req.to_dict(), **res.to_dict()}])


def _report_rows(reports, **extra) -> list[dict]:
    return [{**extra, **r.to_dict()} for r in reports]


def run_verify(cfg: ExperimentConfig, t: ScalingTransform) -> Report:
    cloud, source = config_cloud(cfg)
    reports = verify_stability(cloud, t, cfg.dims, cfg.wasserstein_p)
    data = _header("verify", source=source, n_points=cloud.n_points, reports=[r.to_dict() for r in reports])
    return Report(data, _report_rows(reports))


def run_iterate(cfg: ExperimentConfig, transforms: Sequence[ScalingTransform]) -> Report:
    cloud, source = config_cloud(cfg)
    reports = verify_iterated(cloud, transforms, cfg.dims, cfg.wasserstein_p)
    data = _header(
        "iterate",
        source=source,
        transforms=[list(t.factors) for t in transforms],
        composed=list(compose(transforms).factors),
        cumulative_regime_contains_one=cumulative_regime_contains_one(transforms),
        reports=[r.to_dict() for r in reports],
    )
    return Report(data, _report_rows(reports))


# randomized campaigns


def random_cloud(rng: np.random.Generator, max_points: int = 30, max_axes: int = 5) -> PointCloud:
    n_points = int(rng.integers(2, max_points + 1))
    n_axes = int(rng.integers(1, max_axes + 1))
    if rng.random() < 0.5:
        pts = rng.uniform(-1.0, 1.0, (n_points, n_axes))
    else:
        pts = rng.normal(0.0, 1.0, (n_points, n_axes))
    return PointCloud(pts)


def random_transform(rng: np.random.Generator, n: int, mode: str = "contains-one") -> ScalingTransform:
    """Random positive factors; ``mode`` controls where they sit relative to 1."""
    if mode == "any":
        mode = REGIME_MODES[int(rng.integers(0, 3))]
    if mode == "contains-one":
        s = rng.uniform(0.5, 1.5, n)
        if n == 1:
            s[0] = 1.0
        else:
            i, j = rng.choice(n, 2, replace=False)
            s[i] = rng.uniform(0.5, 1.0)
            s[j] = rng.uniform(1.0, 1.5)
            if rng.random() < 0.25:
                s[i] = 1.0
    elif mode == "above-one":
        s = rng.uniform(1.0, 3.0, n) + 1e-3
    elif mode == "below-one":
        s = rng.uniform(0.2, 1.0, n) - 1e-3
    else:
        raise ValidationError(f"unknown regime mode {mode!r}")
    return ScalingTransform(tuple(float(v) for v in s))


@dataclass(frozen=True)
class TrialSettings:
    seed: int
    mode: str
    dims: tuple[int, ...]
    p: float | None
    max_points: int
    max_axes: int


def _trial(settings: TrialSettings, trial: int) -> list[dict]:
    rng = np.random.default_rng([settings.seed, trial])
    cloud = random_cloud(rng, settings.max_points, settings.max_axes)
    t = random_transform(rng, cloud.dim, settings.mode)
    reports = verify_stability(cloud, t, settings.dims, settings.p)
    return _report_rows(reports, trial=trial, n_points=cloud.n_points, n_axes=cloud.dim)


def _trial_chunk(args) -> list[dict]:
    settings, start, stop = args
    rows = []
    for i in range(start, stop):
        rows.extend(_trial(settings, i))
    return rows


def run_trials(
    cfg: ExperimentConfig,
    mode: str = "contains-one",
    max_points: int = 30,
    max_axes: int = 5,
) -> Report:
    """Random clouds and transforms; counts bound violations per regime.

    A corrected-bound violation aborts the campaign with BoundViolationError.
    """
    if mode not in REGIME_MODES:
        raise ValidationError(f"mode must be one of {REGIME_MODES}")
    if max_points < 2 or max_axes < 1:
        raise ValidationError("need max_points >= 2 and max_axes >= 1")
    check_point_budget(max_points, max(cfg.dims))
    settings = TrialSettings(cfg.seed, mode, tuple(sorted(set(cfg.dims))), cfg.wasserstein_p, max_points, max_axes)
    bounds = np.linspace(0, cfg.trials, min(cfg.workers, cfg.trials) + 1).astype(int)
    chunks = [(settings, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if cfg.workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_trial_chunk, chunks))
    else:
        parts = [_trial_chunk(c) for c in chunks]
    rows = [r for part in parts for r in part]

    aggregates = {}
    for regime in (True, False):
        sel = [r for r in rows if r["regime_contains_one"] is regime]
        aggregates["contains_one" if regime else "outside"] = {
            "rows": len(sel),
            "paper_violations": sum(not r["holds_paper"] for r in sel),
            "corrected_violations": sum(not r["holds_corrected"] for r in sel),
            "max_ratio_to_paper": max(
                (r["measured_bottleneck"] / r["bound_paper"] for r in sel if r["bound_paper"] > 0), default=0.0
            ),
        }
    if aggregates["contains_one"]["paper_violations"]:
        raise BoundViolationError("variability bound violated inside the regime s_min <= 1 <= s_max")
    data = _header(
        "trials",
        seed=cfg.seed,
        trials=cfg.trials,
        mode=mode,
        dims=list(settings.dims),
        wasserstein_p=cfg.wasserstein_p,
        max_points=max_points,
        max_axes=max_axes,
        aggregates=aggregates,
        rows=rows,
    )
    return Report(data, rows)


def run_montecarlo(
    cfg: ExperimentConfig,
    n: int,
    distribution: str = "uniform",
    params: dict | None = None,
    diam: float = 1.0,
) -> Report:
    spec = RandomScalingSpec(distribution, params or {"a": 1.0, "b": 2.0}, n=n, trials=cfg.trials, seed=cfg.seed)
    rep = monte_carlo_expected_bound(spec, diam, cfg.workers)
    data = _header("montecarlo", distribution=distribution, params=dict(spec.params), n=n, diameter=diam, **rep.to_dict())
    return Report(data)


# case studies

RGB_WORKED_EXAMPLE = {"low": (50.0, 60.0, 40.0), "high": (200.0, 180.0, 220.0), "printed_diameter": 263.02}
RGB_DEFAULT_IMAGE = "rgb-pixels:width=6,height=6,low=50/60/40,high=200/180/220"


def run_case_study_rgb(cfg: ExperimentConfig) -> Report:
    """RGB augmentation: variability caps for the full cube and for an image, factor assignment, verification."""
    eps = cfg.epsilon
    cube = 255.0 * math.sqrt(3.0)
    cloud, source = config_cloud(cfg, default=RGB_DEFAULT_IMAGE)
    if cloud.dim != 3:
        raise ValidationError("RGB case study needs 3-channel points")
    lo, hi = cloud.points.min(axis=0), cloud.points.max(axis=0)
    ranges = hi - lo
    dm = distance_matrix(cloud)
    diam = diameter(dm)
    cap = max_variability(eps, diam)
    uniform = solve(OptimizationRequest(3, eps, diam, UNIFORM))
    spread = solve(OptimizationRequest(3, eps, diam, BOUNDARY, k=1))
    image = {
        "n_pixels": cloud.n_points,
        "channel_min": lo.tolist(),
        "channel_max": hi.tolist(),
        "channel_ranges": ranges.tolist(),
        "diameter": diam,
        "range_diagonal": float(np.linalg.norm(ranges)),
        "variability_cap": cap,
    }
    if np.array_equal(lo, RGB_WORKED_EXAMPLE["low"]) and np.array_equal(hi, RGB_WORKED_EXAMPLE["high"]):
        printed = RGB_WORKED_EXAMPLE["printed_diameter"]
        image["worked_example"] = {
            "printed_diameter": printed,
            "printed_variability_cap": eps / printed,
            "recomputed_diameter": math.sqrt(69300.0),
            "discrepancy": math.sqrt(69300.0) - printed,
            "note": "sqrt(150^2 + 120^2 + 180^2) = sqrt(69300) = 263.249...; the printed 263.02 is not reproducible, the recomputed value is used",
        }
    verification = []
    if cloud.n_points <= DEFAULT_POINT_BUDGET[max(cfg.dims)]:
        verification = [r.to_dict() for r in verify_stability(cloud, spread.transform, cfg.dims, cfg.wasserstein_p)]
        for r in verification:
            r["within_epsilon"] = r["measured_bottleneck"] <= eps + 1e-9
    data = _header(
        "case-study-rgb",
        epsilon=eps,
        source=source,
        rgb_cube={"diameter": cube, "variability_cap": max_variability(eps, cube)},
        image=image,
        uniform_solution=uniform.to_dict(),
        channel_assignment={"red": spread.transform.factors[0], "green": spread.transform.factors[1], "blue": spread.transform.factors[2]},
        boundary_solution=spread.to_dict(),
        verification=verification,
    )
    rows = [{"quantity": "cube_diameter", "value": cube}, {"quantity": "cube_variability_cap", "value": max_variability(eps, cube)}]
    rows += [{"quantity": "image_diameter", "value": diam}, {"quantity": "image_variability_cap", "value": cap}]
    rows += [{"quantity": f"factor_{c}", "value": f} for c, f in zip("rgb", spread.transform.factors)]
    return Report(data, rows)


def run_case_study_multimodal(
    cfg: ExperimentConfig,
    diam: float = 200.0,
    group_sizes: Sequence[int] = (300, 512),
    ranges: Sequence[float] = (1.0, 100.0),
    verify_points: int = 24,
) -> Report:
    """Per-modality factors under a tolerance, plus an end-to-end check on a synthetic two-modality cloud."""
    eps = cfg.epsilon
    if len(ranges) != len(group_sizes):
        raise ValidationError("need one range per group")
    ms = modality_scaling(group_sizes, eps, diam)
    # range equalization: scale every group up to the largest range
    target = max(ranges)
    equalize = [target / r for r in ranges]
    eq_var = max(equalize) - min(equalize)
    full = ms.transform()
    data = _header(
        "case-study-multimodal",
        epsilon=eps,
        diameter=diam,
        variability_cap=ms.variability_cap,
        range_equalization={
            "group_ranges": list(ranges),
            "factors": equalize,
            "variability": eq_var,
            "feasible": eq_var <= ms.variability_cap,
        },
        assignment=ms.to_dict(),
        transform_dimension=full.dim,
        bound=ms.bound,
        bound_from_factors=paper_bound(full, diam),
    )
    verification = []
    if verify_points >= 2 and len(group_sizes) == 2:
        # small stand-in cloud: 3 text-like and 4 image-like axes, rescaled to the requested diameter
        spec = GeneratorSpec("multimodal", verify_points, 7, {"text_range": ranges[0], "image_range": ranges[1]}, cfg.seed)
        raw = generate(spec)
        raw_diam = diameter(distance_matrix(raw))
        cloud = PointCloud(raw.points * (diam / raw_diam))
        small = ScalingTransform((ms.group_factors[0],) * 3 + (ms.group_factors[1],) * 4)
        for r in verify_stability(cloud, small, cfg.dims, cfg.wasserstein_p):
            d = r.to_dict()
            d["within_epsilon"] = r.measured_bottleneck <= eps + 1e-9
            verification.append(d)
    data["verification"] = verification
    rows = [
        {"group": i, "size": s, "factor": f} for i, (s, f) in enumerate(zip(ms.group_sizes, ms.group_factors))
    ]
    return Report(data, rows)
