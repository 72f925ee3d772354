"""Recording every label the solver generates, and shipping it as CSV.

Each generated label -- whether its insertion later succeeds or not -- is
snapshotted at generation time, after the direction's generation counters
have counted it (so the first label of a run reports ``nlabels_network = 1``,
``nlabels_open_network = 1``) but before the node pool is touched (node-level
counters describe the pool the label is about to meet).  At the end of the
iteration every label is classified:

* ``P``  -- inserted and never displaced (on the pool's final Pareto front),
* ``GI`` -- inserted, later displaced by a dominating label,
* ``GD`` -- rejected at insertion time.

Dataset ``G`` is every generated label; dataset ``I`` restricts to the
inserted ones (``P`` and ``GI``).  Rows are exported in generation order,
forward direction first, which together with deterministic label ids makes
repeated runs byte-identical.

Floats are serialized with nine significant digits; node bitsets travel as
lowercase hex strings and can be omitted entirely (``include_bitsets=False``)
when file size matters more than lineage debugging.
"""

from __future__ import annotations

import csv
import uuid
from dataclasses import dataclass, fields

from .labeling import BACKWARD, DIRECTION_NAMES, DOMINATED, FORWARD, DirectionRun, InsertOutcome, Label

CLASS_PARETO = "P"
CLASS_GENERATED_DOMINATED = "GD"
CLASS_GENERATED_INSERTED = "GI"
LABEL_CLASSES = (CLASS_PARETO, CLASS_GENERATED_DOMINATED, CLASS_GENERATED_INSERTED)

DATASET_G = "G"
DATASET_I = "I"
DATASET_VARIANTS = (DATASET_G, DATASET_I)

_EXECUTION_NAMESPACE = uuid.uuid5(uuid.NAMESPACE_URL, "labellens/execution")


@dataclass
class LabelRecord:
    """One exported row.  Field order is the CSV column order."""

    execution_id: str
    iteration: int
    direction: str
    node: int
    predecessor: int
    objective: float
    consumption_critical: float
    tour_length: int
    nvisited: int
    nvisited_unaltered: int
    nunreachable: int
    nunreachable_unaltered: int
    repeated_visits: int
    visited: int | None
    visited_unaltered: int | None
    unreachable: int | None
    nlabels_network: int
    nlabels_dominated_network: int
    nlabels_closed_network: int
    nlabels_open_network: int
    nlabels_node: int
    nlabels_closed_node: int
    nlabels_open_node: int
    dominated: int | None = None
    label_class: str | None = None


_FIELD_TO_COLUMN = {"execution_id": "executionID", "label_class": "class"}
RAW_COLUMNS = [_FIELD_TO_COLUMN.get(f.name, f.name) for f in fields(LabelRecord)]
BITSET_COLUMNS = ("visited", "visited_unaltered", "unreachable")
_INT_FIELDS = {
    "iteration",
    "node",
    "predecessor",
    "tour_length",
    "nvisited",
    "nvisited_unaltered",
    "nunreachable",
    "nunreachable_unaltered",
    "repeated_visits",
    "nlabels_network",
    "nlabels_dominated_network",
    "nlabels_closed_network",
    "nlabels_open_network",
    "nlabels_node",
    "nlabels_closed_node",
    "nlabels_open_node",
    "dominated",
}
_FLOAT_FIELDS = {"objective", "consumption_critical"}


def make_execution_id(instance_name: str, seed: int, policy: str, split: float) -> str:
    """Deterministic execution id: same run setup, same id, byte for byte."""
    return str(uuid.uuid5(_EXECUTION_NAMESPACE, f"{instance_name}:{seed}:{policy}:{split!r}"))


class RecordingSink:
    """Telemetry hooks for one (iteration, direction) run.

    Builds one :class:`LabelRecord` per generated label (index == label id)
    and, when ``capture_events`` is on, a replayable event log of
    ``("gen", id)``, ``("insert", id, displaced_ids)``, ``("reject", id,
    dominator_id)`` and ``("close", id)`` tuples in execution order.
    """

    def __init__(self, execution_id: str, iteration: int, direction: int, capture_events: bool = False):
        self.execution_id = execution_id
        self.iteration = iteration
        self.direction_name = DIRECTION_NAMES[direction]
        self.capture_events = capture_events
        self.records: list[LabelRecord] = []
        self.events: list[tuple] = []
        self._rejected: set[int] = set()

    # -- hooks called by DirectionRun ----------------------------------------

    def on_generated(self, label: Label, run: DirectionRun) -> None:
        pool = run.pools[label.node]
        counters = run.counters
        self.records.append(
            LabelRecord(
                execution_id=self.execution_id,
                iteration=self.iteration,
                direction=self.direction_name,
                node=label.node,
                predecessor=label.pred_id,
                objective=label.cost,
                consumption_critical=label.consumption,
                tour_length=label.tour_length,
                nvisited=label.visited.bit_count(),
                nvisited_unaltered=label.visited_unaltered.bit_count(),
                nunreachable=label.unreachable.bit_count(),
                nunreachable_unaltered=(label.unreachable | label.visited_unaltered).bit_count(),
                repeated_visits=label.repeated_visits,
                visited=label.visited,
                visited_unaltered=label.visited_unaltered,
                unreachable=label.unreachable,
                nlabels_network=counters.generated,
                nlabels_dominated_network=counters.dominated,
                nlabels_closed_network=counters.closed,
                nlabels_open_network=counters.open,
                nlabels_node=pool.total_inserted,
                nlabels_closed_node=pool.closed_count,
                nlabels_open_node=pool.open_count,
            )
        )
        if self.capture_events:
            self.events.append(("gen", label.id))

    def on_inserted(self, label: Label, outcome: InsertOutcome) -> None:
        if self.capture_events:
            self.events.append(("insert", label.id, tuple(d.id for d in outcome.displaced)))

    def on_rejected(self, label: Label, dominator: Label) -> None:
        self._rejected.add(label.id)
        if self.capture_events:
            self.events.append(("reject", label.id, dominator.id))

    def on_closed(self, label: Label) -> None:
        if self.capture_events:
            self.events.append(("close", label.id))

    # -- end-of-iteration classification --------------------------------------

    def finalize(self, run: DirectionRun) -> list[LabelRecord]:
        """Assign classes from final label statuses; returns the records."""
        if len(self.records) != len(run.labels):
            raise RuntimeError(
                f"telemetry out of sync: {len(self.records)} records for {len(run.labels)} labels"
            )
        for label, record in zip(run.labels, self.records):
            if label.id in self._rejected:
                record.label_class = CLASS_GENERATED_DOMINATED
            elif label.status == DOMINATED:
                record.label_class = CLASS_GENERATED_INSERTED
            else:
                record.label_class = CLASS_PARETO
            record.dominated = 0 if record.label_class == CLASS_PARETO else 1
        return self.records


class RunCollector:
    """Per-iteration sink pair factory plus merged row storage for one solve."""

    def __init__(self, execution_id: str, capture_events: bool = False):
        self.execution_id = execution_id
        self.capture_events = capture_events
        self._sinks: dict[int, tuple[RecordingSink, RecordingSink]] = {}
        self._rows: dict[int, list[LabelRecord]] = {}

    def begin_iteration(self, iteration: int) -> tuple[RecordingSink, RecordingSink]:
        pair = (
            RecordingSink(self.execution_id, iteration, FORWARD, self.capture_events),
            RecordingSink(self.execution_id, iteration, BACKWARD, self.capture_events),
        )
        self._sinks[iteration] = pair
        return pair

    def end_iteration(self, iteration: int, fwd_run, bwd_run, join_result) -> None:
        fwd_sink, bwd_sink = self._sinks[iteration]
        self._rows[iteration] = fwd_sink.finalize(fwd_run) + bwd_sink.finalize(bwd_run)

    @property
    def iterations(self) -> list[int]:
        return sorted(self._rows)

    def rows(self, iteration: int) -> list[LabelRecord]:
        return self._rows[iteration]

    def all_rows(self) -> list[LabelRecord]:
        return [row for iteration in self.iterations for row in self._rows[iteration]]

    def sinks(self, iteration: int) -> tuple[RecordingSink, RecordingSink]:
        return self._sinks[iteration]


# ---------------------------------------------------------------------------
# datasets


@dataclass
class Dataset:
    """Rows of one variant for one iteration of one instance run."""

    variant: str
    instance: str
    iteration: int
    rows: list[LabelRecord]


def variant_rows(rows: list[LabelRecord], variant: str) -> list[LabelRecord]:
    """G keeps everything; I keeps the inserted classes (P, GI)."""
    if variant == DATASET_G:
        return list(rows)
    if variant == DATASET_I:
        return [r for r in rows if r.label_class in (CLASS_PARETO, CLASS_GENERATED_INSERTED)]
    raise ValueError(f"unknown dataset variant {variant!r}")


def make_dataset(variant: str, instance: str, iteration: int, rows: list[LabelRecord]) -> Dataset:
    return Dataset(variant, instance, iteration, variant_rows(rows, variant))


# ---------------------------------------------------------------------------
# CSV export / import


def format_float(x: float) -> str:
    return format(float(x), ".9g")


def export_csv(rows: list[LabelRecord], path, include_bitsets: bool = True) -> None:
    """Write rows in column order; refuses unclassified (unfinalized) rows."""
    columns = RAW_COLUMNS if include_bitsets else [c for c in RAW_COLUMNS if c not in BITSET_COLUMNS]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            if row.label_class is None or row.dominated is None:
                raise ValueError("cannot export unfinalized records (class not assigned yet)")
            out = []
            for field in fields(LabelRecord):
                name = field.name
                if not include_bitsets and name in BITSET_COLUMNS:
                    continue
                value = getattr(row, name)
                if name in BITSET_COLUMNS:
                    out.append("" if value is None else format(value, "x"))
                elif name in _FLOAT_FIELDS:
                    out.append(format_float(value))
                else:
                    out.append(str(value))
            writer.writerow(out)


def import_csv(path) -> list[LabelRecord]:
    """Inverse of :func:`export_csv`; bitset columns may be absent (-> None)."""
    rows: list[LabelRecord] = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            return rows
        column_to_field = {_FIELD_TO_COLUMN.get(f.name, f.name): f.name for f in fields(LabelRecord)}
        unknown = [c for c in reader.fieldnames if c not in column_to_field]
        if unknown:
            raise ValueError(f"unknown columns in {path}: {unknown}")
        for raw in reader:
            kwargs = {}
            for column, text in raw.items():
                name = column_to_field[column]
                if name in BITSET_COLUMNS:
                    kwargs[name] = int(text, 16) if text else None
                elif name in _FLOAT_FIELDS:
                    kwargs[name] = float(text)
                elif name in _INT_FIELDS:
                    kwargs[name] = int(text)
                else:
                    kwargs[name] = text
            for bitset in BITSET_COLUMNS:
                kwargs.setdefault(bitset, None)
            rows.append(LabelRecord(**kwargs))
    return rows


# ---------------------------------------------------------------------------
# aggregation


def summarize(datasets: list[Dataset]) -> list[dict]:
    """Aggregate datasets into per-group rows (plus an ``all`` row per variant).

    Groups are instance-name prefixes before the first ``-`` (the generator
    encodes the instance class there).  Per group: instance count, total
    labels, share of Pareto labels, mean iterations per instance, and mean
    labels-per-iteration per instance.
    """
    per_instance: dict[tuple[str, str], dict] = {}
    for ds in datasets:
        stats = per_instance.setdefault(
            (ds.variant, ds.instance), {"labels": 0, "pareto": 0, "iterations": 0}
        )
        stats["labels"] += len(ds.rows)
        stats["pareto"] += sum(1 for r in ds.rows if r.label_class == CLASS_PARETO)
        stats["iterations"] = max(stats["iterations"], ds.iteration)

    out: list[dict] = []
    for variant in DATASET_VARIANTS:
        instances = {name: s for (v, name), s in per_instance.items() if v == variant}
        if not instances:
            continue
        groups: dict[str, list[str]] = {}
        for name in instances:
            groups.setdefault(name.split("-")[0], []).append(name)
        for group in [*sorted(groups), "all"]:
            members = groups.get(group) if group != "all" else list(instances)
            labels = sum(instances[m]["labels"] for m in members)
            pareto = sum(instances[m]["pareto"] for m in members)
            out.append(
                {
                    "dataset": variant,
                    "group": group,
                    "instances": len(members),
                    "labels": labels,
                    "pareto_pct": 100.0 * pareto / labels if labels else 0.0,
                    "avg_iterations": sum(instances[m]["iterations"] for m in members) / len(members),
                    "avg_labels_per_iteration": sum(
                        instances[m]["labels"] / max(instances[m]["iterations"], 1) for m in members
                    )
                    / len(members),
                }
            )
    return out
