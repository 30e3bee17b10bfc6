"""Learning on finite metric spaces under average-smoothness budgets.

The package measures smoothness of a labeled sample by the mean of its
local slopes (strong form) or by the best level-set bound (weak form)
instead of the worst-case Lipschitz constant, and provides:

* slope profiles and their invariants (:mod:`avgsmooth.slope`);
* a pointwise max-ratio extension of partial labelings
  (:mod:`avgsmooth.pmse`) plus defect location and repair
  (:mod:`avgsmooth.defects`);
* budgeted label smoothing, exact and approximate, dense and
  hierarchical (:mod:`avgsmooth.smooth_reg`), and a bicriteria
  relabeling for binary labels (:mod:`avgsmooth.smooth_class`);
* slope-trimmed net extension with deterministic guarantees and the
  adversarial sampling game around it (:mod:`avgsmooth.extend`);
* closed-form covering and generalization bounds
  (:mod:`avgsmooth.bounds`).
"""

from . import errors
from .bounds import (
    BoundReport,
    ambient_cover_bound,
    distance_additive_term,
    empirical_cover_bound,
    empirical_cover_estimate,
    eps0_from,
    generalization_bound,
    lip_cover_bound,
    sample_weak_class,
    tv_bound,
    weak_strong_log_check,
)
from .defects import DefectReport, find_defects, repair, slope_witnesses
from .extend import (
    ExtensionGuarantees,
    ExtensionResult,
    GameConfig,
    GameStatistics,
    extend_classification,
    extend_regression,
    round_to_label,
    validate_extension_game,
)
from .metric_core import (
    METRIC_TAGS,
    FiniteMetricSpace,
    LabeledSample,
    WeightedSample,
    aspect_ratio,
    build_space,
    diameter,
    min_interpoint_distance,
)
from .nets import (
    Hierarchy,
    NetResult,
    build_hierarchy,
    build_net,
    estimate_ddim,
    voronoi_assign,
)
from .pmse import (
    Extender,
    PropertyReport,
    build_extender,
    pmse_eval,
    pmse_extend,
    verify_pmse_properties,
)
from .slope import (
    SlopeProfile,
    check_markov,
    class_membership,
    level_set,
    local_slope,
    local_slopes,
    profile,
)
from .smooth_class import (
    AUDIT_B,
    LevelPlan,
    RelabelPlan,
    clsrp_bicriteria,
    min_knapsack_cover_2approx,
    slope_audit,
)
from .smooth_reg import (
    LinearProgram,
    LPSolution,
    PackingCoveringForm,
    RegSmoothingProblem,
    SmoothingSolution,
    SolverStats,
    approx_pc_solve,
    dense_lp,
    exact_lp_solve,
    pc_form,
    smooth_dense,
    smooth_hierarchical,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "__version__",
    # metric_core
    "METRIC_TAGS",
    "FiniteMetricSpace",
    "WeightedSample",
    "LabeledSample",
    "build_space",
    "diameter",
    "min_interpoint_distance",
    "aspect_ratio",
    # nets
    "NetResult",
    "Hierarchy",
    "voronoi_assign",
    "build_net",
    "build_hierarchy",
    "estimate_ddim",
    # slope
    "SlopeProfile",
    "local_slope",
    "local_slopes",
    "profile",
    "level_set",
    "class_membership",
    "check_markov",
    # pmse
    "Extender",
    "PropertyReport",
    "build_extender",
    "pmse_eval",
    "pmse_extend",
    "verify_pmse_properties",
    # defects
    "DefectReport",
    "slope_witnesses",
    "find_defects",
    "repair",
    # smooth_reg
    "RegSmoothingProblem",
    "SolverStats",
    "SmoothingSolution",
    "LinearProgram",
    "LPSolution",
    "PackingCoveringForm",
    "exact_lp_solve",
    "dense_lp",
    "pc_form",
    "approx_pc_solve",
    "smooth_dense",
    "smooth_hierarchical",
    # smooth_class
    "AUDIT_B",
    "LevelPlan",
    "RelabelPlan",
    "min_knapsack_cover_2approx",
    "slope_audit",
    "clsrp_bicriteria",
    # extend
    "ExtensionGuarantees",
    "ExtensionResult",
    "GameConfig",
    "GameStatistics",
    "extend_regression",
    "extend_classification",
    "round_to_label",
    "validate_extension_game",
    # bounds
    "BoundReport",
    "lip_cover_bound",
    "ambient_cover_bound",
    "eps0_from",
    "empirical_cover_bound",
    "distance_additive_term",
    "generalization_bound",
    "tv_bound",
    "weak_strong_log_check",
    "empirical_cover_estimate",
    "sample_weak_class",
]
