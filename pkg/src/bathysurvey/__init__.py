"""Depth-constrained bathymetric survey autonomy.

An online Gaussian-process depth model with exact incremental Cholesky
updates, a predicted-depth contour follower that respects the survey
polygon, a sweep-monotone partitioner with lawnmower coverage planning,
and a deterministic mission simulator tying them together.
"""

from .contour import ContourFollower, FollowerConfig, FollowerState, Mode, Pose, solve_arc_heading
from .coverage import (
    Cell,
    PathPlan,
    PathSegment,
    SweepRecord,
    cells_to_geojson,
    lawnmower_cell,
    partition_monotone,
    plan_coverage,
    plan_transit,
    shrink_corners,
    sweep_polygon,
)
from .errors import (
    ConfigError,
    EmptyModelError,
    FactorizationError,
    GeometryError,
    MissionAbort,
    NumericalError,
    SurveyError,
)
from .geometry import (
    Arc,
    Polygon,
    bearing_between,
    load_polygon,
    normalize_bearing,
    point_in_polygon,
    save_polygon,
    simplify_closed_curve,
)
from .gp import (
    BenchResult,
    GpModel,
    HyperFit,
    HyperParams,
    LmlReport,
    Prediction,
    benchmark_prediction,
    extend_cholesky,
    kernel,
    kernel_matrix,
    op_count,
    optimize_hypers,
)
from .sim import (
    GaussianSumField,
    GridField,
    MissionConfig,
    MissionLog,
    PlaneField,
    VesselState,
    apply_overrides,
    canonical_scenario,
    load_scenario,
    run_mission,
    sonar_sample,
    step_vessel,
    true_depth,
)

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "BenchResult",
    "Cell",
    "ConfigError",
    "ContourFollower",
    "EmptyModelError",
    "FactorizationError",
    "FollowerConfig",
    "FollowerState",
    "GaussianSumField",
    "GeometryError",
    "GpModel",
    "GridField",
    "HyperFit",
    "HyperParams",
    "LmlReport",
    "MissionAbort",
    "MissionConfig",
    "MissionLog",
    "Mode",
    "NumericalError",
    "PathPlan",
    "PathSegment",
    "PlaneField",
    "Polygon",
    "Pose",
    "Prediction",
    "SurveyError",
    "SweepRecord",
    "VesselState",
    "apply_overrides",
    "bearing_between",
    "benchmark_prediction",
    "canonical_scenario",
    "cells_to_geojson",
    "extend_cholesky",
    "kernel",
    "kernel_matrix",
    "lawnmower_cell",
    "load_polygon",
    "load_scenario",
    "normalize_bearing",
    "op_count",
    "optimize_hypers",
    "partition_monotone",
    "plan_coverage",
    "plan_transit",
    "point_in_polygon",
    "run_mission",
    "save_polygon",
    "shrink_corners",
    "simplify_closed_curve",
    "solve_arc_heading",
    "sonar_sample",
    "step_vessel",
    "sweep_polygon",
    "true_depth",
    "__version__",
]
