"""Evaluation protocols over collected runs.

Offline protocols consume the *normalized* last-iteration datasets (the
stable, scale-free view of a finished run) and differ only in how instances
are split between training and evaluation:

* ``one_vs_all``   -- train on a single instance, evaluate on all others;
* ``all_but_one``  -- leave one instance out, train on the rest;
* ``random_split`` -- split the instances in half at random;
* ``by_class``     -- train on one generator class, evaluate on the others;
* ``noise``        -- ``all_but_one`` with features replaced by uniform
  noise: a leak detector whose balanced accuracy must hover near 0.5.

The online protocol mimics deployment inside a running solver: for each run
it trains on the raw rows of the penultimate iteration (with ``efficiency``
recomputed from previous-iteration statistics, exactly like an in-loop
consumer that has not seen the future) and predicts the final iteration's
outcomes.  Training sets are always balanced with the shared sampler.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from functools import partial

import numpy as np
import pandas as pd

from .data import FEATURES, Run, add_online_efficiency
from .metrics import aggregate
from .sampling import sample_balanced
from .train import fit, score

OFFLINE_PROTOCOLS = ("one_vs_all", "all_but_one", "random_split", "by_class", "noise")


def _map_ordered(task, items, workers: int) -> list:
    """Run ``task`` over ``items``, optionally in parallel, preserving order.

    Every task is independent and internally seeded, so the result list is
    identical for any worker count; ``workers`` only bounds parallelism.
    """
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(task, items))
    return [task(item) for item in items]


def offline_frames(runs: list[Run], variant: str = "G") -> dict[str, pd.DataFrame]:
    """Per-instance normalized last-iteration frames (multi-iteration runs)."""
    frames: dict[str, pd.DataFrame] = {}
    for run in runs:
        if run.iterations < 2 or not run.has_normalized():
            continue
        frames[run.instance] = run.normalized(variant, run.iterations)
    if not frames:
        raise ValueError("no normalized multi-iteration runs found")
    return frames


def _evaluate_pair(pair, seed: int) -> list[dict]:
    """Fit one (train_frames, eval_frames) pair; score every eval frame."""
    tag, train_names, train_frames, eval_frames = pair
    train, _ = sample_balanced(train_frames, seed)
    if train.empty:
        return []
    model = fit(train, seed)
    return [
        {
            "train": tag,
            "train_instances": list(train_names),
            "eval": eval_name,
            **score(model, eval_frame),
        }
        for eval_name, eval_frame in sorted(eval_frames.items())
        if not eval_frame.empty
    ]


def _evaluations(pairs, seed: int, workers: int = 1) -> dict:
    chunks = _map_ordered(partial(_evaluate_pair, seed=seed), pairs, workers)
    evaluations = [row for chunk in chunks for row in chunk]
    if not evaluations:
        raise ValueError("protocol produced no evaluations")
    return {"evaluations": evaluations, "mean": aggregate(evaluations)}


def one_vs_all(frames: dict[str, pd.DataFrame], seed: int, workers: int = 1) -> dict:
    names = sorted(frames)
    pairs = [
        (name, [name], {name: frames[name]}, {other: frames[other] for other in names if other != name})
        for name in names
    ]
    return {"protocol": "one_vs_all", **_evaluations(pairs, seed, workers)}


def all_but_one(frames: dict[str, pd.DataFrame], seed: int, workers: int = 1) -> dict:
    names = sorted(frames)
    pairs = [
        (
            f"all-but-{name}",
            [other for other in names if other != name],
            {other: frames[other] for other in names if other != name},
            {name: frames[name]},
        )
        for name in names
    ]
    return {"protocol": "all_but_one", **_evaluations(pairs, seed, workers)}


def random_split(frames: dict[str, pd.DataFrame], seed: int, workers: int = 1) -> dict:
    names = sorted(frames)
    if len(names) < 2:
        raise ValueError("random_split needs at least two instances")
    rng = np.random.default_rng(seed)
    shuffled = list(names)
    rng.shuffle(shuffled)
    half = len(shuffled) // 2
    train_names, eval_names = sorted(shuffled[:half]), sorted(shuffled[half:])
    pairs = [
        (
            "random-half",
            train_names,
            {name: frames[name] for name in train_names},
            {name: frames[name] for name in eval_names},
        )
    ]
    return {"protocol": "random_split", **_evaluations(pairs, seed, workers)}


def by_class(frames: dict[str, pd.DataFrame], seed: int, workers: int = 1) -> dict:
    groups: dict[str, list[str]] = {}
    for name in sorted(frames):
        groups.setdefault(name.split("-")[0], []).append(name)
    if len(groups) < 2:
        raise ValueError("by_class needs at least two instance groups")
    pairs = []
    for group, members in sorted(groups.items()):
        eval_frames = {
            name: frames[name] for other, names in groups.items() if other != group for name in names
        }
        pairs.append((f"class-{group}", members, {name: frames[name] for name in members}, eval_frames))
    return {"protocol": "by_class", **_evaluations(pairs, seed, workers)}


def noise(frames: dict[str, pd.DataFrame], seed: int, workers: int = 1) -> dict:
    """Leak detector: same splits as all_but_one, but features are noise."""
    rng = np.random.default_rng(seed)
    scrambled = {}
    for name in sorted(frames):
        frame = frames[name].copy()
        frame[list(FEATURES)] = pd.DataFrame(
            rng.uniform(size=(len(frame), len(FEATURES))), index=frame.index, columns=list(FEATURES)
        )
        scrambled[name] = frame
    result = all_but_one(scrambled, seed, workers)
    result["protocol"] = "noise"
    return result


def run_offline(
    runs: list[Run], protocol: str, variant: str = "G", seed: int = 0, workers: int = 1
) -> dict:
    frames = offline_frames(runs, variant)
    dispatch = {
        "one_vs_all": one_vs_all,
        "all_but_one": all_but_one,
        "random_split": random_split,
        "by_class": by_class,
        "noise": noise,
    }
    if protocol not in dispatch:
        raise ValueError(f"unknown offline protocol {protocol!r}")
    return dispatch[protocol](frames, seed, workers)


# ---------------------------------------------------------------------------
# online


def online_pair(run: Run, variant: str = "G") -> tuple[pd.DataFrame, pd.DataFrame]:
    """(train, eval) raw frames for one run: penultimate vs final iteration.

    ``efficiency`` is rebuilt the online way: each iteration's rows take
    their objective statistics from the previous iteration of the widest
    collected variant (``G`` when present), matching how the exporter
    normalizes; iteration 1 has no reference and gets the flagged zero.
    """
    if run.iterations < 2:
        raise ValueError(f"{run.instance} has a single iteration; nothing to predict")
    universe = "G" if "G" in run.manifest["files"] else variant
    last = run.iterations
    penultimate = last - 1
    before = run.raw(universe, penultimate - 1) if penultimate >= 2 else None
    train = add_online_efficiency(run.raw(variant, penultimate), before, run.capacity)
    eval_frame = add_online_efficiency(
        run.raw(variant, last), run.raw(universe, penultimate), run.capacity
    )
    return train, eval_frame


def _online_one(run: Run, variant: str, seed: int) -> tuple[str, object]:
    if run.iterations < 2:
        return "skip", (run.instance, "single iteration")
    train_frame, eval_frame = online_pair(run, variant)
    balanced, _ = sample_balanced({run.instance: train_frame}, seed)
    if balanced.empty:
        # Training iteration lacks a class (or its minority rounds to a
        # zero quota): no balanced sample exists, so the run is excluded
        # just as the sampler excludes empty-class instances.
        return "skip", (run.instance, "no balanced training sample")
    model = fit(balanced, seed)
    return "eval", {
        "train": run.instance,
        "train_instances": [run.instance],
        "eval": run.instance,
        **score(model, eval_frame),
    }


def run_online(runs: list[Run], variant: str = "G", seed: int = 0, workers: int = 1) -> dict:
    """Train on each run's penultimate iteration, score its final one."""
    outcomes = _map_ordered(partial(_online_one, variant=variant, seed=seed), runs, workers)
    evaluations = [payload for kind, payload in outcomes if kind == "eval"]
    skipped = [payload for kind, payload in outcomes if kind == "skip"]
    if not evaluations:
        raise ValueError("no multi-iteration runs to evaluate online")
    return {
        "protocol": f"online-{variant}",
        "evaluations": evaluations,
        "skipped": skipped,
        "mean": aggregate(evaluations),
    }
