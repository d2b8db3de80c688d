"""Volume growth functions, admissible trees and their geometric checks."""
from .exceptions import (
    DomainError,
    HorizonTooSmall,
    IncompleteCatalog,
    InfeasibleGrowth,
    InfeasibleSelection,
    MalformedTree,
    MultiTrunk,
    NormalizationFailed,
    OnTrunk,
    PlacementConflict,
    SearchExhausted,
    VolGrowthError,
)
from .growth import (
    BgdReport,
    DoublingReport,
    GrowthCertificate,
    GrowthFunction,
    IncrementsBoundedBy,
    IncrementsDiverge,
    check_bgd,
    check_doubling,
    growth_equivalent,
    limit_behavior,
    normalize,
)
from .tree import (
    AdmissibleTree,
    EndsLayout,
    LevelSet,
    ball_count,
    build_tree,
    departure_level,
    layout_from_tree,
)
from .pieces import (
    PieceCatalog,
    PieceParams,
    WarpProfile,
    beta_root,
    default_catalog,
    min_thickening,
    synthesize_params,
    warp_function,
)
from .assembly import (
    AssemblyPlan,
    DiscreteGrowth,
    assemble,
    choose_nj,
    discrete_growth,
    growth_constant_bound,
    lemma16_bounds_check,
    vanishing_density_check,
)
from .graph import (
    MetricGraph,
    annulus_components,
    ball_volume,
    build_gadget_graph,
    check_distance_bounds,
    check_sandwich,
    pointwise_doubling,
)
from .geometry import (
    DoublingConfig,
    RcaConfig,
    bounded_case_check,
    doubling_bound_check,
    rca_nj_threshold,
    rca_theta,
    verify_rca,
    verify_rce,
)

from .estimator import GrowthSynthesizer

__version__ = "0.1.0"

__all__ = [
    "AdmissibleTree",
    "AssemblyPlan",
    "BgdReport",
    "DiscreteGrowth",
    "DomainError",
    "DoublingConfig",
    "DoublingReport",
    "EndsLayout",
    "GrowthCertificate",
    "GrowthFunction",
    "GrowthSynthesizer",
    "HorizonTooSmall",
    "IncompleteCatalog",
    "IncrementsBoundedBy",
    "IncrementsDiverge",
    "InfeasibleGrowth",
    "InfeasibleSelection",
    "LevelSet",
    "MalformedTree",
    "MetricGraph",
    "MultiTrunk",
    "NormalizationFailed",
    "OnTrunk",
    "PieceCatalog",
    "PieceParams",
    "PlacementConflict",
    "RcaConfig",
    "SearchExhausted",
    "VolGrowthError",
    "WarpProfile",
    "annulus_components",
    "assemble",
    "ball_count",
    "ball_volume",
    "beta_root",
    "bounded_case_check",
    "build_gadget_graph",
    "build_tree",
    "check_bgd",
    "check_distance_bounds",
    "check_doubling",
    "check_sandwich",
    "choose_nj",
    "default_catalog",
    "departure_level",
    "discrete_growth",
    "doubling_bound_check",
    "growth_constant_bound",
    "growth_equivalent",
    "layout_from_tree",
    "lemma16_bounds_check",
    "limit_behavior",
    "min_thickening",
    "normalize",
    "pointwise_doubling",
    "rca_nj_threshold",
    "rca_theta",
    "synthesize_params",
    "vanishing_density_check",
    "verify_rca",
    "verify_rce",
    "warp_function",
]
