"""labellens: an exact resource-constrained shortest-path solver that records
every dynamic-programming label it generates, classifies label outcomes, and
exports them as machine-learning-ready datasets."""

from .instance import (
    ARC_DISTANCE,
    NODE_DEMAND,
    Instance,
    ParseError,
    convert_cvrp,
    derive_costs,
    load_instance,
    parse_instance,
    preprocess_reachability,
    save_instance,
    serialize_instance,
)
from .labeling import (
    BACKWARD,
    CLOSED,
    DOMINATED,
    FORWARD,
    OPEN,
    DirectionContext,
    DirectionRun,
    Label,
    LabelPool,
    dominates,
    extend,
    join,
    make_root,
    reconstruct,
)
from .dssr import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    IterationReport,
    RelaxationState,
    SolveResult,
    augment_sets,
    detect_cycles,
    solve,
)
from .telemetry import (
    DATASET_G,
    DATASET_I,
    Dataset,
    LabelRecord,
    RecordingSink,
    RunCollector,
    export_csv,
    import_csv,
    make_dataset,
    make_execution_id,
    summarize,
    variant_rows,
)
from .normalize import (
    IterationStats,
    NormalizedRecord,
    export_normalized_csv,
    iteration_stats,
    normalize_iteration,
    normalize_run,
    oracle_objective,
)
from .gen import generate_instance

__version__ = "0.1.0"

__all__ = [
    "ARC_DISTANCE",
    "NODE_DEMAND",
    "Instance",
    "ParseError",
    "convert_cvrp",
    "derive_costs",
    "load_instance",
    "parse_instance",
    "preprocess_reachability",
    "save_instance",
    "serialize_instance",
    "BACKWARD",
    "CLOSED",
    "DOMINATED",
    "FORWARD",
    "OPEN",
    "DirectionContext",
    "DirectionRun",
    "Label",
    "LabelPool",
    "dominates",
    "extend",
    "join",
    "make_root",
    "reconstruct",
    "STATUS_INFEASIBLE",
    "STATUS_OPTIMAL",
    "IterationReport",
    "RelaxationState",
    "SolveResult",
    "augment_sets",
    "detect_cycles",
    "solve",
    "DATASET_G",
    "DATASET_I",
    "Dataset",
    "LabelRecord",
    "RecordingSink",
    "RunCollector",
    "export_csv",
    "import_csv",
    "make_dataset",
    "make_execution_id",
    "summarize",
    "variant_rows",
    "IterationStats",
    "NormalizedRecord",
    "export_normalized_csv",
    "iteration_stats",
    "normalize_iteration",
    "normalize_run",
    "oracle_objective",
    "generate_instance",
    "__version__",
]
