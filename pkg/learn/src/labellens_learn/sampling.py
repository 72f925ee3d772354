"""Balanced training-set sampling with a per-instance contribution cap.

Label datasets are dominated-heavy and their sizes vary wildly across
instances, so training sets are drawn per instance and balanced exactly:
instance ``i`` contributes ``k_i`` rows of each class, where

    k_i = min(floor(0.8 * minority_i), median_j(minority_j))

``minority_i`` being the size of instance ``i``'s rarer class.  The 0.8
factor keeps evaluation rows of both classes in every instance; the median
cap stops one huge instance from dwarfing the rest.  Everything not sampled
stays in the per-instance evaluation remainder.
"""

from __future__ import annotations

import math

import numpy as np
import pandas as pd

from .data import TARGET

TRAIN_FRACTION = 0.8


def instance_quota(minorities: list[int]) -> list[int]:
    """Per-instance class quota ``k_i`` under the shared median cap."""
    if not minorities:
        return []
    cap = int(np.median(minorities))
    return [min(math.floor(TRAIN_FRACTION * m), cap) for m in minorities]


def sample_balanced(
    frames: dict[str, pd.DataFrame], seed: int
) -> tuple[pd.DataFrame, dict[str, pd.DataFrame]]:
    """Draw a balanced training frame; return it plus per-instance remainders.

    Instances whose quota is zero (fewer than two rows of some class) still
    appear in the evaluation remainder with all their rows.
    """
    rng = np.random.default_rng(seed)
    names = sorted(frames)
    minorities = [
        int(min((frames[name][TARGET] == 0).sum(), (frames[name][TARGET] == 1).sum()))
        for name in names
    ]
    quotas = instance_quota(minorities)
    train_parts: list[pd.DataFrame] = []
    eval_frames: dict[str, pd.DataFrame] = {}
    for name, quota in zip(names, quotas):
        frame = frames[name]
        picked = np.zeros(len(frame), dtype=bool)
        if quota > 0:
            for klass in (0, 1):
                positions = np.flatnonzero((frame[TARGET] == klass).to_numpy())
                chosen = rng.choice(positions, size=quota, replace=False)
                picked[chosen] = True
        if picked.any():
            train_parts.append(frame.iloc[picked])
        eval_frames[name] = frame.iloc[~picked]
    train = (
        pd.concat(train_parts, ignore_index=True)
        if train_parts
        else next(iter(frames.values())).iloc[0:0]
    )
    return train, eval_frames
