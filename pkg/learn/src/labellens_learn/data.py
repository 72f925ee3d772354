"""Loading exported label runs: manifests, raw CSVs, normalized CSVs.

This package talks to the solver exclusively through its published run
format: a run directory holds ``manifest.json`` plus per-iteration CSV files
(``{instance}.it{k}.{V}.csv`` raw, ``...norm.csv`` normalized), where variant
``G`` contains every generated label and ``I`` only the inserted ones.  The
manifest carries everything else we need (instance size, capacity, iteration
count, file map), so no instance documents are ever parsed here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

MANIFEST_NAME = "manifest.json"

#: Model inputs, in column order.  All exist in normalized exports; raw
#: exports lack ``efficiency`` until :func:`add_online_efficiency` adds it.
FEATURES = (
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
)

TARGET = "dominated"  # 1 = the label was displaced or rejected, 0 = kept

#: Bookkeeping column attached on load; never a model input.
ROW_ID = "row_id"


@dataclass
class Run:
    """One collected run: its directory and parsed manifest."""

    run_dir: Path
    manifest: dict

    @property
    def instance(self) -> str:
        return self.manifest["instance"]

    @property
    def group(self) -> str:
        return self.instance.split("-")[0]

    @property
    def iterations(self) -> int:
        return self.manifest["iterations"]

    @property
    def capacity(self) -> float:
        return self.manifest["capacity"]

    def raw(self, variant: str, iteration: int) -> pd.DataFrame:
        name = self.manifest["files"][variant][str(iteration)]
        return attach_row_ids(pd.read_csv(self.run_dir / name), variant)

    def normalized(self, variant: str, iteration: int) -> pd.DataFrame:
        name = self.manifest["normalized_files"][variant][str(iteration)]
        return attach_row_ids(pd.read_csv(self.run_dir / name), variant)

    def has_normalized(self) -> bool:
        return "normalized_files" in self.manifest


def load_run(path: str | Path) -> Run:
    """Load one run from its directory or its manifest path."""
    path = Path(path)
    manifest_path = path / MANIFEST_NAME if path.is_dir() else path
    with open(manifest_path, encoding="utf-8") as handle:
        return Run(manifest_path.parent, json.load(handle))


def discover_runs(root: str | Path) -> list[Run]:
    """All runs under ``root``, sorted by instance name for determinism."""
    runs = [load_run(p) for p in sorted(Path(root).rglob(MANIFEST_NAME))]
    return sorted(runs, key=lambda r: r.instance)


def multi_iteration(runs: list[Run]) -> list[Run]:
    return [r for r in runs if r.iterations >= 2]


def attach_row_ids(frame: pd.DataFrame, variant: str) -> pd.DataFrame:
    """Give every row a stable identity so set disjointness is checkable.

    Rows within one export file are in generation order per direction, so
    (executionID, variant, iteration, direction, rank within the direction
    block) pins a row uniquely and survives any later slicing or shuffling.
    """
    rank = frame.groupby("direction").cumcount()
    frame[ROW_ID] = (
        frame["executionID"].astype(str)
        + ":" + variant
        + ":" + frame["iteration"].astype(str)
        + ":" + frame["direction"].astype(str)
        + ":" + rank.astype(str)
    )
    return frame


def add_online_efficiency(
    frame: pd.DataFrame, previous: pd.DataFrame | None, capacity: float
) -> pd.DataFrame:
    """Attach ``efficiency`` to raw rows the way an online consumer would.

    ``efficiency = 1 - objective_norm * consumption_norm`` where the
    objective is min-maxed against the *previous* iteration's objective range
    (pooled across directions) and consumption is divided by capacity.  A
    degenerate previous range pins the objective factor at 0.5; with no
    previous iteration at all (iteration 1) the feature is 0.
    """
    frame = frame.copy()
    if previous is None:
        frame["efficiency"] = 0.0
        return frame
    lo = float(previous["objective"].min())
    hi = float(previous["objective"].max())
    if hi == lo:
        objective_norm = pd.Series(0.5, index=frame.index)
    else:
        objective_norm = (frame["objective"] - lo) / (hi - lo)
    consumption_norm = (
        frame["consumption_critical"] / capacity if capacity else pd.Series(0.0, index=frame.index)
    )
    frame["efficiency"] = 1.0 - objective_norm * consumption_norm
    return frame


def feature_matrix(frame: pd.DataFrame) -> tuple[np.ndarray, np.ndarray]:
    """``(X, y)`` from a frame that has every feature column and the target."""
    missing = [c for c in FEATURES if c not in frame.columns]
    if missing:
        raise ValueError(f"frame lacks feature columns {missing}")
    X = frame.loc[:, list(FEATURES)].to_numpy(dtype=float)
    y = frame[TARGET].to_numpy(dtype=int)
    return X, y
