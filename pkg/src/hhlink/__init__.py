"""Privacy-preserving record linkage for shelter administrative data.

The pipeline: plaintext profiles are encoded into keyed Bloom-filter bit
vectors (encoder), every candidate pair is scored with per-field and pooled
Dice coefficients (similarity, pairgen), a trained classifier accepts or
rejects each pair (models, tuner), accepted links are resolved into person
clusters (cluster), and utilization metrics are computed per person
(hhsc_metrics).  synth builds labeled test corpora, evaluate scores results
against ground truth, data_io fixes the file formats, and adjudication runs
the manual-review service.
"""

from .encoder import (
    FIELD_NAMES,
    NUM_FIELDS,
    EncodedProfile,
    EncoderConfig,
    PlainProfile,
    encode_field,
    encode_profile,
    field_strings,
    normalize_field,
    qgrams,
)
from .similarity import FeatureVector, dice, dice_all, edit_distance, features
from .pairgen import (
    FEATURE_COLUMNS,
    PairTable,
    compare_all,
    label_pairs,
    labeled_candidates,
    stratified_kfold,
    stratified_split,
)
from .models import (
    LogisticModel,
    LrHyperparams,
    MlpHyperparams,
    MlpModel,
    Model,
    ThresholdModel,
    TreeHyperparams,
    TreeModel,
    load_model,
    lr_train,
    mlp_train,
    predict,
    predict_table,
    save_model,
    tree_train,
)
from .tuner import Grid, GridSearchResult, default_grid, final_fit, grid_search
from .cluster import (
    Cluster,
    Clustering,
    LinkEdge,
    center_cluster,
    cluster_stats,
    make_edge,
    merge_center_cluster,
    sort_edges,
)
from .evaluate import ClusterMetrics, PairMetrics, cluster_metrics, pair_metrics
from .synth import generate_corpus, generate_roster, validate_corpus
from .hhsc_metrics import (
    Episode,
    PersonUsage,
    StayRecord,
    all_usages,
    cohort_report,
    episodes,
    generate_stays,
    merge_stays,
    top5_threshold,
    usage,
)
from . import data_io
from .errors import (
    BadDistributionError,
    BothEmptyError,
    DegenerateClassError,
    DuplicateIdError,
    EmptyFieldError,
    EmptyInputError,
    HhlinkError,
    LengthMismatchError,
    ParseError,
    PatternInfeasibleError,
    SchemaError,
    UnknownEndpointError,
    UnknownProfileError,
    UntrainedModelError,
    VectorSizeMismatchError,
)

__version__ = "0.1.0"

__all__ = [
    "FIELD_NAMES",
    "NUM_FIELDS",
    "FEATURE_COLUMNS",
    "PlainProfile",
    "EncoderConfig",
    "EncodedProfile",
    "normalize_field",
    "field_strings",
    "qgrams",
    "encode_field",
    "encode_profile",
    "FeatureVector",
    "dice",
    "dice_all",
    "edit_distance",
    "features",
    "PairTable",
    "compare_all",
    "label_pairs",
    "labeled_candidates",
    "stratified_split",
    "stratified_kfold",
    "Model",
    "ThresholdModel",
    "LogisticModel",
    "TreeModel",
    "MlpModel",
    "LrHyperparams",
    "TreeHyperparams",
    "MlpHyperparams",
    "lr_train",
    "tree_train",
    "mlp_train",
    "predict",
    "predict_table",
    "save_model",
    "load_model",
    "Grid",
    "GridSearchResult",
    "default_grid",
    "grid_search",
    "final_fit",
    "LinkEdge",
    "make_edge",
    "sort_edges",
    "Cluster",
    "Clustering",
    "center_cluster",
    "merge_center_cluster",
    "cluster_stats",
    "PairMetrics",
    "ClusterMetrics",
    "pair_metrics",
    "cluster_metrics",
    "generate_roster",
    "generate_corpus",
    "validate_corpus",
    "StayRecord",
    "Episode",
    "PersonUsage",
    "merge_stays",
    "episodes",
    "usage",
    "all_usages",
    "top5_threshold",
    "cohort_report",
    "generate_stays",
    "data_io",
    "HhlinkError",
    "EmptyFieldError",
    "LengthMismatchError",
    "BothEmptyError",
    "VectorSizeMismatchError",
    "DegenerateClassError",
    "UnknownProfileError",
    "UnknownEndpointError",
    "UntrainedModelError",
    "BadDistributionError",
    "PatternInfeasibleError",
    "SchemaError",
    "ParseError",
    "DuplicateIdError",
    "EmptyInputError",
    "__version__",
]
