"""Signed meta-path preference inference and feature-bundle design.

Users rate movies and movies carry typed features. Ratings are split into a
like graph and a dislike graph around each user's mean, random walks along
three fixed path shapes turn them into user-feature preference scores, and
aggregated scores drive the choice of features for a new movie.
"""

from .design import (
    DEFAULT_CAPACITIES,
    AggregatedScores,
    Design,
    KnapsackTooLarge,
    aggregate_scores,
    design_budget,
    design_cardinality,
    expected_conversions,
)
from .evaluation import (
    AucReport,
    FoldPlan,
    LikeLabels,
    auc,
    baseline_popular,
    baseline_top,
    compare_designs,
    cross_validate,
    knn_design_score,
    label_likes,
    movie_means,
    predict_movie_scores,
)
from .graph import (
    FeatureCatalog,
    FilterResult,
    FilterThresholds,
    IngestError,
    MembershipMatrix,
    RatingRange,
    RatingsMatrix,
    SignedSplit,
    TransitionOperator,
    UserStats,
    align,
    dataset_hash,
    filter_core,
    ingest_membership,
    ingest_ratings,
    read_membership,
    read_ratings,
    row_normalize,
    split_and_reweigh,
    summary,
    user_means,
)
from .itemsets import (
    DependencyVerdict,
    FrequentItemset,
    TransactionDb,
    independence_test,
    mine,
    type_combination_report,
)
from .kernels import aggregate_fused
from .walks import (
    FastAggregate,
    MemoryBudgetError,
    PathKind,
    PathWeights,
    PreferenceMatrix,
    TargetSet,
    UnknownUserError,
    WalkOperators,
    aggregate_fast,
    build_operators,
    combine_paths,
    fit_operators,
    infer_full,
    infer_paths,
    infer_rows,
    signed_path_scores,
    walk_scores_single_sign,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
