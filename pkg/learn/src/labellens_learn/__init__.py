"""Learning dominance outcomes from exported label datasets."""

from .analyze import (
    component_label_correlation,
    correlation_summary,
    pca_eigenvalues,
    pearson_table,
    significant_components,
    target_correlations,
    write_plots,
)
from .data import (
    FEATURES,
    ROW_ID,
    TARGET,
    Run,
    add_online_efficiency,
    attach_row_ids,
    discover_runs,
    feature_matrix,
    load_run,
    multi_iteration,
)
from .metrics import METRIC_NAMES, aggregate, class_accuracy, evaluate
from .protocols import (
    OFFLINE_PROTOCOLS,
    offline_frames,
    online_pair,
    run_offline,
    run_online,
)
from .sampling import TRAIN_FRACTION, instance_quota, sample_balanced
from .train import fit, make_model, score

__version__ = "0.1.0"

__all__ = [
    "FEATURES",
    "ROW_ID",
    "TARGET",
    "METRIC_NAMES",
    "OFFLINE_PROTOCOLS",
    "TRAIN_FRACTION",
    "Run",
    "add_online_efficiency",
    "aggregate",
    "attach_row_ids",
    "class_accuracy",
    "component_label_correlation",
    "correlation_summary",
    "discover_runs",
    "evaluate",
    "feature_matrix",
    "fit",
    "instance_quota",
    "load_run",
    "make_model",
    "multi_iteration",
    "offline_frames",
    "online_pair",
    "pca_eigenvalues",
    "pearson_table",
    "run_offline",
    "run_online",
    "sample_balanced",
    "score",
    "significant_components",
    "target_correlations",
    "write_plots",
    "__version__",
]
