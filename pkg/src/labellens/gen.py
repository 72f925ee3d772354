"""Synthetic instance generation for tests, benchmarks and dataset building.

Three structural classes, encoded as the instance-name prefix so that
aggregation can group by them:

* ``U`` (uniform) -- nodes on a uniform integer grid, mid-range prizes,
  capacity sized so roughly half the interior nodes fit on one path;
* ``C`` (cluster) -- nodes drawn around a few cluster centers, so short
  intra-cluster hops with prizes make tight negative cycles likely;
* ``T`` (tight)   -- uniform positions but high prizes and a small budget,
  the stress class for relaxation iterations.

Everything is drawn from one ``random.Random`` seeded by an integer derived
from ``(seed, n, class, resource_mode)``, so a given parameter combination
always produces the same document, byte for byte.  Coordinates are distinct
integer grid points, which keeps every rounded distance at least 1, and
interior demands are at least 1 -- together these rule out zero-consumption
cycles, the one structure the labeling core cannot bound.
"""

from __future__ import annotations

import random

from .instance import (
    ARC_DISTANCE,
    NODE_DEMAND,
    Instance,
    derive_costs,
    rounded_distances,
    validate_instance,
)

CLASSES = ("uniform", "cluster", "tight")
_CLASS_PREFIX = {"uniform": "U", "cluster": "C", "tight": "T"}
_GRID = 60  # coordinates live in [0, _GRID]^2


def _derived_seed(seed: int, n: int, klass: str, resource_mode: str) -> int:
    mix = seed
    mix = mix * 1_000_003 + CLASSES.index(klass)
    mix = mix * 1_000_003 + n
    mix = mix * 1_000_003 + (0 if resource_mode == NODE_DEMAND else 1)
    return mix & 0x7FFFFFFFFFFFFFFF


def _uniform_coords(rng: random.Random, n: int) -> list[tuple[float, float]]:
    side = _GRID + 1
    cells = rng.sample(range(side * side), n)
    return [(float(c % side), float(c // side)) for c in cells]


def _cluster_coords(rng: random.Random, n: int) -> list[tuple[float, float]]:
    centers = [
        (rng.randint(10, _GRID - 10), rng.randint(10, _GRID - 10))
        for _ in range(2 if n < 10 else 3)
    ]
    seen: set[tuple[int, int]] = set()
    coords: list[tuple[float, float]] = []
    while len(coords) < n:
        cx, cy = centers[rng.randrange(len(centers))]
        point = (
            min(_GRID, max(0, cx + rng.randint(-7, 7))),
            min(_GRID, max(0, cy + rng.randint(-7, 7))),
        )
        if point not in seen:
            seen.add(point)
            coords.append((float(point[0]), float(point[1])))
    return coords


def generate_instance(
    seed: int,
    n: int | None = None,
    klass: str = "uniform",
    resource_mode: str = NODE_DEMAND,
) -> Instance:
    """Build one feasible instance with at least one negative-cost arc.

    ``n`` defaults to ``6 + seed % 7`` (sizes 6..12).  The source is node 0
    and the destination node ``n - 1``; both carry zero demand and prize, so
    the direct source-dest arc keeps every instance feasible.
    """
    if klass not in CLASSES:
        raise ValueError(f"unknown instance class {klass!r}")
    if n is None:
        n = 6 + seed % 7
    if n < 3:
        raise ValueError("generated instances need at least 3 nodes")
    rng = random.Random(_derived_seed(seed, n, klass, resource_mode))

    coords = _cluster_coords(rng, n) if klass == "cluster" else _uniform_coords(rng, n)
    interior = range(1, n - 1)

    demand = [0.0] * n
    for i in interior:
        demand[i] = float(rng.randint(1, 9))

    if klass == "tight":
        prize_lo, prize_hi = 20, 80
    elif klass == "cluster":
        prize_lo, prize_hi = 5, 55
    else:
        prize_lo, prize_hi = 0, 45
    prize = [0.0] * n
    for i in interior:
        prize[i] = float(rng.randint(prize_lo, prize_hi))

    dist = rounded_distances(coords)
    if resource_mode == NODE_DEMAND:
        visits = max(2, n // 3) if klass == "tight" else max(3, n // 2)
        mean_demand = sum(demand[i] for i in interior) / max(1, n - 2)
        capacity = float(max(demand[i] for i in interior) + 1)
        capacity = max(capacity, float(round(mean_demand * visits)))
        resource = [[0.0] * n for _ in range(n)]
    else:
        visits = max(2, n // 3) if klass == "tight" else max(3, n // 2)
        off_diag = sorted(dist[i][j] for i in range(n) for j in range(n) if i != j)
        median = off_diag[len(off_diag) // 2]
        capacity = float(max(dist[0][n - 1] + 1, round(median * (visits * 0.8))))
        resource = dist

    # Guarantee at least one profitable (negative-cost) arc; bumping prizes
    # deterministically preserves reproducibility.
    cost = derive_costs(coords, prize)
    guard = 0
    while not any(cost[i][j] < 0 for i in range(n) for j in range(n) if i != j):
        for i in interior:
            prize[i] += float(rng.randint(5, 15))
        cost = derive_costs(coords, prize)
        guard += 1
        if guard > 50:  # pragma: no cover - the bump must eventually win
            raise RuntimeError("failed to make any arc profitable")

    inst = Instance(
        name=f"{_CLASS_PREFIX[klass]}-n{n}-s{seed}",
        n=n,
        source=0,
        dest=n - 1,
        capacity=capacity,
        resource_mode=resource_mode,
        coords=coords,
        demand=demand if resource_mode == NODE_DEMAND else [0.0] * n,
        prize=prize,
        cost=cost,
        resource=resource,
    )
    validate_instance(inst)
    return inst
