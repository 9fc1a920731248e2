"""Speech-text modality alignment analysis over stored activations."""

from .alignment import (
    AlignmentPath,
    AlignmentStats,
    CorpusAlignment,
    TokenMatrix,
    alignment_path,
    aps,
    corpus_alignment_stats,
    path_consistency,
    spearman,
    token_matrix,
)
from .coarse import (
    SimilarityProfile,
    aggregate_profiles,
    layer_averaged_scalar,
    layer_profile,
)
from .fixture import FixtureSpec, generate_fixture, planted_path_accuracy
from .intervene import (
    InterventionPlan,
    angle_project,
    apply_plan,
    apply_plans,
    build_plans,
    length_normalize,
    select_tokens,
)
from .kernels import cosine, euclidean, mean_pool
from .regression import (
    RegressionResult,
    ScoreRecord,
    compute_gap,
    correlate,
    correlate_groups,
    ols_fit,
)
from .store import (
    ActivationSet,
    LayerStack,
    Manifest,
    SampleEntry,
    load_manifest,
    read_sample,
    write_manifest,
    write_sample,
)

__version__ = "0.1.0"
