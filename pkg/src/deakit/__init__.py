"""deakit: frontier-efficiency scoring, clustering and modular classification.

The toolkit scores decision-making units with input-oriented CCR DEA (solved
by a built-in two-phase simplex), bands the scores into performance classes,
groups feature columns by correlation and records by a 1-by-k SOM, trains
reduced multivariate polynomial ridge classifiers per cluster, and reports
modular vs. non-modular cross-validated accuracy.
"""

from .dataset import (
    BranchRecord,
    Dataset,
    NormalizationStats,
    ZScoreScaler,
    default_cluster_spec,
    denormalize,
    generate_synthetic,
    load_csv,
    normalize,
    write_csv,
)
from .dea import (
    EfficiencyBins,
    EfficiencyScore,
    PerformanceClass,
    assign_class,
    ccr_input_efficiency,
    evaluate_all,
)
from .evaluation import (
    CvReport,
    FoldPlan,
    ModularReport,
    compare_pipelines,
    make_folds,
    modular_ca,
    weighted_cv,
)
from .exceptions import (
    BadProportionsError,
    DeakitError,
    DimensionMismatchError,
    DuplicateIdError,
    EmptyClusterError,
    EmptyTrainingFoldError,
    KOutOfRangeError,
    MalformedRowError,
    NonPositiveInputError,
    SolverFailureError,
    ThetaOutOfRangeError,
    TooFewRecordsError,
    TooFewRowsError,
    TooManyTermsError,
)
from .pipeline import PipelineConfig, run_pipeline
from .rm import (
    RmClassifier,
    expand_full_mp,
    expand_rm,
    expand_rm_prime,
    full_mp_term_count,
    rm_prime_term_count,
    rm_term_count,
    term_count,
)
from .simplex import LpSolution, LpStatus, solve_lp
from .som import SomClusterer, cluster_sizes
from .varclus import (
    Dendrogram,
    agglomerate,
    cluster_correlation_table,
    cluster_stats,
    correlation_matrix,
    cut,
    dendrogram_to_dot,
    select_k,
)

__version__ = "0.1.0"

__all__ = [
    "BranchRecord",
    "Dataset",
    "NormalizationStats",
    "ZScoreScaler",
    "default_cluster_spec",
    "denormalize",
    "generate_synthetic",
    "load_csv",
    "normalize",
    "write_csv",
    "EfficiencyBins",
    "EfficiencyScore",
    "PerformanceClass",
    "assign_class",
    "ccr_input_efficiency",
    "evaluate_all",
    "CvReport",
    "FoldPlan",
    "ModularReport",
    "compare_pipelines",
    "make_folds",
    "modular_ca",
    "weighted_cv",
    "BadProportionsError",
    "DeakitError",
    "DimensionMismatchError",
    "DuplicateIdError",
    "EmptyClusterError",
    "EmptyTrainingFoldError",
    "KOutOfRangeError",
    "MalformedRowError",
    "NonPositiveInputError",
    "SolverFailureError",
    "ThetaOutOfRangeError",
    "TooFewRecordsError",
    "TooFewRowsError",
    "TooManyTermsError",
    "PipelineConfig",
    "run_pipeline",
    "RmClassifier",
    "expand_full_mp",
    "expand_rm",
    "expand_rm_prime",
    "full_mp_term_count",
    "rm_prime_term_count",
    "rm_term_count",
    "term_count",
    "LpSolution",
    "LpStatus",
    "solve_lp",
    "SomClusterer",
    "cluster_sizes",
    "Dendrogram",
    "agglomerate",
    "cluster_correlation_table",
    "cluster_stats",
    "correlation_matrix",
    "cut",
    "dendrogram_to_dot",
    "select_k",
]
