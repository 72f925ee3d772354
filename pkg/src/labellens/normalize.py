"""Feature normalization for exported label rows.

Online consumers cannot wait for the full value distribution, so scale-bound
features of iteration ``i`` are normalized against statistics of iteration
``i - 1`` of the same run (everything needed is derivable from the raw CSV
itself plus instance capacity and size):

* ``objective``       -> min-max against the previous iteration's objective
  range, deliberately *unclamped* (values outside [0, 1] signal drift);
  a degenerate range (min == max) maps to 0.5 and raises the row flag;
* ``consumption_critical`` -> divided by capacity (in [0, 1] by feasibility);
* ``tour_length``     -> divided by the previous iteration's longest path;
* ``nvisited`` family -> divided by the node count ``n``;
* ``repeated_visits`` -> divided by the row's own tour length;
* ``nlabels_network`` -> divided by the previous iteration's generated total
  of the same direction (may exceed 1 as the run grows);
* dominated/closed/open network counters -> fractions of the row's own
  ``nlabels_network`` snapshot;
* ``nlabels_node``    -> divided by the previous iteration's insertion total
  of the same (direction, node) pool;
* closed/open node counters -> fractions of the row's own ``nlabels_node``.

Any zero denominator yields 0 and sets the row's ``_flag``.  After the two
operands exist, ``efficiency = 1 - objective_norm * consumption_norm`` is
appended (a label is efficient when it is cheap or leaves budget headroom).
Iteration 1 has no predecessor and is dropped from normalized output.

Objective statistics pool both directions by default; ``per_direction``
keeps separate ranges (costs of the two frontiers can live on different
scales when the split is uneven).
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import csv

from .telemetry import (
    BITSET_COLUMNS,
    CLASS_GENERATED_INSERTED,
    CLASS_PARETO,
    LabelRecord,
    format_float,
)

OBJECTIVE_STATS_MODES = ("pooled", "per_direction")
_POOLED_KEY = "*"


@dataclass
class IterationStats:
    """Everything normalization needs to know about one (previous) iteration."""

    iteration: int
    objective: dict[str, tuple[float, float]]  # key: "*" or direction name
    max_tour_length: int
    generated: dict[str, int]  # direction -> labels generated
    inserted: dict[tuple[str, int], int]  # (direction, node) -> labels inserted
    objective_stats: str = "pooled"


def iteration_stats(rows: list[LabelRecord], objective_stats: str = "pooled") -> IterationStats:
    """Compute an iteration's statistics purely from its exported rows."""
    if objective_stats not in OBJECTIVE_STATS_MODES:
        raise ValueError(f"unknown objective stats mode {objective_stats!r}")
    if not rows:
        raise ValueError("cannot compute statistics of an empty iteration")
    iteration = rows[0].iteration
    objective: dict[str, tuple[float, float]] = {}
    generated: dict[str, int] = {}
    inserted: dict[tuple[str, int], int] = {}
    max_tour = 0
    for row in rows:
        if row.iteration != iteration:
            raise ValueError("iteration_stats expects rows of a single iteration")
        key = _POOLED_KEY if objective_stats == "pooled" else row.direction
        if key in objective:
            lo, hi = objective[key]
            objective[key] = (min(lo, row.objective), max(hi, row.objective))
        else:
            objective[key] = (row.objective, row.objective)
        generated[row.direction] = generated.get(row.direction, 0) + 1
        if row.label_class in (CLASS_PARETO, CLASS_GENERATED_INSERTED):
            pool = (row.direction, row.node)
            inserted[pool] = inserted.get(pool, 0) + 1
        if row.tour_length > max_tour:
            max_tour = row.tour_length
    return IterationStats(
        iteration=iteration,
        objective=objective,
        max_tour_length=max_tour,
        generated=generated,
        inserted=inserted,
        objective_stats=objective_stats,
    )


@dataclass
class NormalizedRecord:
    """One normalized row.  Field order is the CSV column order."""

    execution_id: str
    iteration: int
    direction: str
    node: int
    predecessor: int
    objective: float
    consumption_critical: float
    efficiency: float
    tour_length: float
    nvisited: float
    nvisited_unaltered: float
    nunreachable: float
    nunreachable_unaltered: float
    repeated_visits: float
    visited: int | None
    visited_unaltered: int | None
    unreachable: int | None
    nlabels_network: float
    nlabels_dominated_network: float
    nlabels_closed_network: float
    nlabels_open_network: float
    nlabels_node: float
    nlabels_closed_node: float
    nlabels_open_node: float
    dominated: int
    label_class: str
    flag: int


_NORM_FIELD_TO_COLUMN = {"execution_id": "executionID", "label_class": "class", "flag": "_flag"}
NORMALIZED_COLUMNS = [_NORM_FIELD_TO_COLUMN.get(f.name, f.name) for f in fields(NormalizedRecord)]
_NORM_FLOAT_FIELDS = {
    "objective",
    "consumption_critical",
    "efficiency",
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
}


def normalize_objective(value: float, stats: IterationStats, direction: str) -> tuple[float, bool]:
    """Min-max against the previous iteration; (value, degenerate?)."""
    key = _POOLED_KEY if stats.objective_stats == "pooled" else direction
    if key not in stats.objective:
        return 0.5, True  # the previous iteration never saw this direction
    lo, hi = stats.objective[key]
    if hi == lo:
        return 0.5, True
    return (value - lo) / (hi - lo), False


def efficiency_of(objective_norm: float, consumption_norm: float) -> float:
    """``1 - objective * consumption`` on already-normalized operands."""
    return 1.0 - objective_norm * consumption_norm


def normalize_iteration(
    rows: list[LabelRecord],
    prev_stats: IterationStats,
    capacity: float,
    n: int,
) -> list[NormalizedRecord]:
    """Normalize one iteration's rows against the previous iteration's stats."""
    out: list[NormalizedRecord] = []
    for row in rows:
        if row.label_class is None or row.dominated is None:
            raise ValueError("cannot normalize unfinalized records")
        flag = False

        def ratio(value: float, denominator: float) -> float:
            nonlocal flag
            if denominator == 0:
                flag = True
                return 0.0
            return value / denominator

        obj_norm, degenerate = normalize_objective(row.objective, prev_stats, row.direction)
        flag = flag or degenerate
        cons_norm = ratio(row.consumption_critical, capacity)
        out.append(
            NormalizedRecord(
                execution_id=row.execution_id,
                iteration=row.iteration,
                direction=row.direction,
                node=row.node,
                predecessor=row.predecessor,
                objective=obj_norm,
                consumption_critical=cons_norm,
                efficiency=efficiency_of(obj_norm, cons_norm),
                tour_length=ratio(row.tour_length, prev_stats.max_tour_length),
                nvisited=ratio(row.nvisited, n),
                nvisited_unaltered=ratio(row.nvisited_unaltered, n),
                nunreachable=ratio(row.nunreachable, n),
                nunreachable_unaltered=ratio(row.nunreachable_unaltered, n),
                repeated_visits=ratio(row.repeated_visits, row.tour_length),
                visited=row.visited,
                visited_unaltered=row.visited_unaltered,
                unreachable=row.unreachable,
                nlabels_network=ratio(row.nlabels_network, prev_stats.generated.get(row.direction, 0)),
                nlabels_dominated_network=ratio(row.nlabels_dominated_network, row.nlabels_network),
                nlabels_closed_network=ratio(row.nlabels_closed_network, row.nlabels_network),
                nlabels_open_network=ratio(row.nlabels_open_network, row.nlabels_network),
                nlabels_node=ratio(row.nlabels_node, prev_stats.inserted.get((row.direction, row.node), 0)),
                nlabels_closed_node=ratio(row.nlabels_closed_node, row.nlabels_node),
                nlabels_open_node=ratio(row.nlabels_open_node, row.nlabels_node),
                dominated=row.dominated,
                label_class=row.label_class,
                flag=1 if flag else 0,
            )
        )
    return out


def normalize_run(
    rows_by_iteration: dict[int, list[LabelRecord]],
    capacity: float,
    n: int,
    objective_stats: str = "pooled",
) -> dict[int, list[NormalizedRecord]]:
    """Normalize every iteration after the first against its predecessor."""
    out: dict[int, list[NormalizedRecord]] = {}
    iterations = sorted(rows_by_iteration)
    for prev_it, current_it in zip(iterations, iterations[1:]):
        if current_it != prev_it + 1:
            raise ValueError(f"iteration gap between {prev_it} and {current_it}")
        stats = iteration_stats(rows_by_iteration[prev_it], objective_stats)
        out[current_it] = normalize_iteration(rows_by_iteration[current_it], stats, capacity, n)
    return out


def oracle_objective(rows: list[LabelRecord], objective_stats: str = "pooled") -> list[tuple[float, bool]]:
    """Hindsight normalization of an iteration against its *own* min/max.

    Used to validate the online scheme: with same-iteration statistics every
    non-degenerate value lands in [0, 1] exactly.
    """
    stats = iteration_stats(rows, objective_stats)
    return [normalize_objective(row.objective, stats, row.direction) for row in rows]


def export_normalized_csv(rows: list[NormalizedRecord], path, include_bitsets: bool = True) -> None:
    columns = (
        NORMALIZED_COLUMNS
        if include_bitsets
        else [c for c in NORMALIZED_COLUMNS if c not in BITSET_COLUMNS]
    )
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            out = []
            for field in fields(NormalizedRecord):
                name = field.name
                if not include_bitsets and name in BITSET_COLUMNS:
                    continue
                value = getattr(row, name)
                if name in BITSET_COLUMNS:
                    out.append("" if value is None else format(value, "x"))
                elif name in _NORM_FLOAT_FIELDS:
                    out.append(format_float(value))
                else:
                    out.append(str(value))
            writer.writerow(out)
