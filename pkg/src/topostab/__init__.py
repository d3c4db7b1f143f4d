"""Persistent homology of point clouds under per-axis scaling.

Rips persistence diagrams, bottleneck/Wasserstein distances, stability
bounds for non-uniform scaling, and closed-form scaling-factor selection.
"""

from .bounds import (
    RandomScalingSpec,
    StabilityReport,
    corrected_bound,
    cumulative_bound,
    dimension_bound,
    expected_variability_uniform,
    monte_carlo_expected_bound,
    paper_bound,
    verify_stability,
)
from .errors import BoundViolationError, BudgetError, TopoStabError, ValidationError
from .matching import bottleneck, brute_force_bottleneck, wasserstein
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
from .optimize import OptimizationRequest, OptimizationResult, max_variability, modality_scaling, solve
from .rips import Filtration, PersistenceDiagram, Simplex, build_filtration, compute_persistence

__version__ = "0.1.0"

__all__ = [
    "BoundViolationError",
    "BudgetError",
    "DistanceMatrix",
    "Filtration",
    "OptimizationRequest",
    "OptimizationResult",
    "PersistenceDiagram",
    "PointCloud",
    "RandomScalingSpec",
    "ScalingTransform",
    "Simplex",
    "StabilityReport",
    "TopoStabError",
    "ValidationError",
    "apply_scaling",
    "bottleneck",
    "brute_force_bottleneck",
    "build_filtration",
    "compose",
    "compute_persistence",
    "corrected_bound",
    "cumulative_bound",
    "diameter",
    "diameter_k",
    "dimension_bound",
    "distance_matrix",
    "expected_variability_uniform",
    "max_variability",
    "modality_scaling",
    "monte_carlo_expected_bound",
    "paper_bound",
    "solve",
    "verify_stability",
    "wasserstein",
]
