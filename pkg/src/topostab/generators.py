"""Synthetic point-cloud families, each deterministic for a given seed."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, ValidationError
from .metric import PointCloud

FAMILIES = ("circle", "square", "gaussian-blobs", "rgb-pixels", "grid", "multimodal")
MAX_GENERATED_POINTS = 10_000


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n_points: int = 20
    dim: int = 2
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown generator family {self.family!r}; choose from {FAMILIES}")
        if self.dim < 1:
            raise ValidationError("dimension must be at least 1")
        if self.seed < 0:
            raise ValidationError("seed must be nonnegative")

    @classmethod
    def parse(cls, text: str, seed: int | None = None) -> "GeneratorSpec":
        """Parse ``family:key=value,...``, e.g. ``circle:n=12,radius=1,seed=7``.

        Keys ``n`` and ``dim`` set the point count and dimension; everything
        else becomes a family parameter. Tuple-valued parameters use ``/``
        as separator (``low=50/60/40``).
        """
        family, _, rest = text.partition(":")
        kwargs: dict = {"family": family.strip()}
        params: dict = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValidationError(f"generator option {item!r} is not key=value")
            key = key.strip()
            try:
                if key == "n":
                    kwargs["n_points"] = int(value)
                elif key == "dim":
                    kwargs["dim"] = int(value)
                elif key == "seed":
                    kwargs["seed"] = int(value)
                elif "/" in value:
                    params[key] = tuple(float(v) for v in value.split("/"))
                else:
                    params[key] = float(value)
            except ValueError:
                raise ValidationError(f"bad value for generator option {key!r}: {value!r}") from None
        if seed is not None and "seed" not in kwargs:
            kwargs["seed"] = seed
        return cls(params=params, **kwargs)


def _rng(spec: GeneratorSpec) -> np.random.Generator:
    return np.random.default_rng(spec.seed)


def _embed(points: np.ndarray, dim: int) -> np.ndarray:
    if points.shape[1] > dim:
        raise ValidationError(f"family needs at least {points.shape[1]} dimensions")
    out = np.zeros((points.shape[0], dim))
    out[:, : points.shape[1]] = points
    return out


def _circle(spec: GeneratorSpec) -> np.ndarray:
    rng = _rng(spec)
    r = spec.params.get("radius", 1.0)
    noise = spec.params.get("noise", 0.0)
    theta = np.sort(rng.uniform(0, 2 * math.pi, spec.n_points))
    pts = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    if noise:
        pts = pts + rng.normal(0, noise, pts.shape)
    return _embed(pts, spec.dim)


def _square(spec: GeneratorSpec) -> np.ndarray:
    """Uniform samples on the boundary of an axis-aligned square."""
    rng = _rng(spec)
    side = spec.params.get("side", 1.0)
    t = rng.uniform(0, 4, spec.n_points)
    edge, u = np.floor(t).astype(int), (t % 1.0) * side
    x = np.choose(edge, [u, np.full_like(u, side), side - u, np.zeros_like(u)])
    y = np.choose(edge, [np.zeros_like(u), u, np.full_like(u, side), side - u])
    return _embed(np.column_stack([x, y]), spec.dim)


def _blobs(spec: GeneratorSpec) -> np.ndarray:
    rng = _rng(spec)
    k = int(spec.params.get("centers", 3))
    if k < 1:
        raise ValidationError("gaussian-blobs needs at least one center")
    spread = spec.params.get("spread", 10.0)
    std = spec.params.get("std", 1.0)
    centers = rng.uniform(-spread, spread, (k, spec.dim))
    labels = np.arange(spec.n_points) % k
    return centers[labels] + rng.normal(0, std, (spec.n_points, spec.dim))


def rgb_gradient(width: int, height: int, low=(0.0, 0.0, 0.0), high=(255.0, 255.0, 255.0)) -> np.ndarray:
    """Pixels of a synthetic gradient image as RGB vectors, row-major.

    Red varies along x, green along y, blue along the diagonal, so pixel
    (0, 0) is ``low`` and the opposite corner is ``high``; every other pixel
    lies in the box between them and the cloud diameter is |high - low|.
    """
    if width < 1 or height < 1:
        raise ValidationError("image must be at least 1x1")
    lo, hi = np.asarray(low, float), np.asarray(high, float)
    if lo.shape != (3,) or hi.shape != (3,):
        raise ValidationError("low/high must be RGB triples")
    if np.any(lo < 0) or np.any(hi > 255):
        raise ValidationError("RGB values must lie in [0, 255]")
    tx = np.linspace(0.0, 1.0, width) if width > 1 else np.zeros(1)
    ty = np.linspace(0.0, 1.0, height) if height > 1 else np.zeros(1)
    gx, gy = np.meshgrid(tx, ty)
    gx, gy = gx.ravel(), gy.ravel()
    frac = np.column_stack([gx, gy, (gx + gy) / 2])
    return np.rint(lo + (hi - lo) * frac)


def _rgb(spec: GeneratorSpec) -> np.ndarray:
    p = spec.params
    w, h = int(p.get("width", 8)), int(p.get("height", 8))
    pts = rgb_gradient(w, h, p.get("low", (0, 0, 0)), p.get("high", (255, 255, 255)))
    noise = p.get("noise", 0.0)
    if noise:
        pts = np.clip(np.rint(pts + _rng(spec).normal(0, noise, pts.shape)), 0, 255)
    return pts


def _grid(spec: GeneratorSpec) -> np.ndarray:
    per = int(spec.params.get("per_axis", max(1, round(spec.n_points ** (1 / spec.dim)))))
    spacing = spec.params.get("spacing", 1.0)
    axes = [np.arange(per) * spacing] * spec.dim
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, spec.dim)


def _multimodal(spec: GeneratorSpec) -> np.ndarray:
    """Two feature groups with very different ranges (text-like then image-like axes)."""
    rng = _rng(spec)
    n_text = int(spec.params.get("text_dims", 3))
    n_image = int(spec.params.get("image_dims", 4))
    if n_text < 1 or n_image < 1:
        raise ValidationError("multimodal needs at least one axis per group")
    text = rng.uniform(0, spec.params.get("text_range", 1.0), (spec.n_points, n_text))
    image = rng.uniform(0, spec.params.get("image_range", 100.0), (spec.n_points, n_image))
    return np.hstack([text, image])


_BUILDERS = {
    "circle": _circle,
    "square": _square,
    "gaussian-blobs": _blobs,
    "rgb-pixels": _rgb,
    "grid": _grid,
    "multimodal": _multimodal,
}


def expected_size(spec: GeneratorSpec) -> int:
    if spec.family == "rgb-pixels":
        return int(spec.params.get("width", 8)) * int(spec.params.get("height", 8))
    if spec.family == "grid":
        per = int(spec.params.get("per_axis", max(1, round(spec.n_points ** (1 / spec.dim)))))
        return per**spec.dim
    return spec.n_points


def generate(spec: GeneratorSpec) -> PointCloud:
    size = expected_size(spec)
    if size < 1:
        raise ValidationError("generator must produce at least one point")
    if size > MAX_GENERATED_POINTS:
        raise BudgetError(f"generator would produce {size} points; budget is {MAX_GENERATED_POINTS}")
    return PointCloud(_BUILDERS[spec.family](spec))
