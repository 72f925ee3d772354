"""Bidirectional label-setting core for the resource-constrained solver.

A *label* is a partial path kept as ``(node, cost, visited, consumption)``
plus bookkeeping that the relaxation and the telemetry layer need: the
unprojected visited set, the unreachable-node bitset, tour length, repeated
visits, lineage and a lifecycle status (``open`` until selected for extension,
``closed`` afterwards, ``dominated`` once displaced or rejected).

Node visited-sets are Python ints used as bitsets.  ``visited`` is the
*relaxed* memory: extending to ``j`` projects the parent's set through the
per-node elementarity mask before adding ``j``, so only nodes the relaxation
tracks at ``j`` are remembered.  ``visited_unaltered`` accumulates every node
the path actually touched and is never projected.

Dominance (same node, same direction): ``a`` dominates ``b`` iff

    a.cost <= b.cost,  a.visited ⊆ b.visited,  a.consumption <= b.consumption

with at least one of the three strict.  Node pools keep only mutually
non-dominated labels; an insertion either bounces off a dominating resident
or displaces every resident it dominates.

The forward run grows paths from the source, the backward run grows them from
the destination on the transposed graph; each stops extending a label once
its consumption passes its half of the capacity budget, and complete paths
are recovered by joining compatible forward/backward label pairs across one
arc (plus single-direction labels that already reached the far endpoint).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .instance import Instance, Reachability

OPEN, CLOSED, DOMINATED = 0, 1, 2
STATUS_NAMES = {OPEN: "open", CLOSED: "closed", DOMINATED: "dominated"}

FORWARD, BACKWARD = 0, 1
DIRECTION_NAMES = {FORWARD: "forward", BACKWARD: "backward"}

POLICIES = ("node", "greedy")

NO_PRED = -1


class LabelStoreError(RuntimeError):
    """Internal corruption: a predecessor chain points at a missing label."""


class LabelBudgetExceeded(RuntimeError):
    """A direction generated more labels than the configured safety budget."""


class Label:
    """One partial path.  Mutable only through its lifecycle status."""

    __slots__ = (
        "id",
        "direction",
        "node",
        "pred_id",
        "pred_node",
        "cost",
        "consumption",
        "visited",
        "visited_unaltered",
        "unreachable",
        "tour_length",
        "repeated_visits",
        "status",
    )

    def __init__(
        self,
        id: int,
        direction: int,
        node: int,
        pred_id: int,
        pred_node: int,
        cost: float,
        consumption: float,
        visited: int,
        visited_unaltered: int,
        unreachable: int,
        tour_length: int,
        repeated_visits: int,
    ):
        self.id = id
        self.direction = direction
        self.node = node
        self.pred_id = pred_id
        self.pred_node = pred_node
        self.cost = cost
        self.consumption = consumption
        self.visited = visited
        self.visited_unaltered = visited_unaltered
        self.unreachable = unreachable
        self.tour_length = tour_length
        self.repeated_visits = repeated_visits
        self.status = OPEN

    def __repr__(self) -> str:  # debugging aid only
        return (
            f"Label(id={self.id}, dir={DIRECTION_NAMES[self.direction]}, node={self.node}, "
            f"cost={self.cost}, r={self.consumption}, S={self.visited:x}, "
            f"status={STATUS_NAMES[self.status]})"
        )


def dominates(a: Label, b: Label) -> bool:
    """True iff ``a`` dominates ``b``.  Both must share node and direction."""
    if a.node != b.node or a.direction != b.direction:
        raise ValueError(
            f"dominance is only defined within one pool: "
            f"({DIRECTION_NAMES[a.direction]}, node {a.node}) vs "
            f"({DIRECTION_NAMES[b.direction]}, node {b.node})"
        )
    if a.cost > b.cost or a.consumption > b.consumption:
        return False
    if (a.visited | b.visited) != b.visited:  # a.visited ⊆ b.visited
        return False
    return a.cost < b.cost or a.consumption < b.consumption or a.visited != b.visited


class DirectionContext:
    """Orientation-resolved view of an instance for one search direction.

    Holds the cost and per-extension resource-need matrices already
    transposed for backward runs, so extension code is direction-agnostic.
    """

    def __init__(
        self,
        inst: Instance,
        reach: Reachability,
        direction: int,
    ):
        n = inst.n
        self.direction = direction
        self.n = n
        self.capacity = inst.capacity
        self.full_mask = (1 << n) - 1
        dterm = inst.demand_term()
        if direction == FORWARD:
            self.origin = inst.source
            self.terminal = inst.dest
            self.cost = inst.cost
            self.need = reach.need_forward
        else:
            self.origin = inst.dest
            self.terminal = inst.source
            self.cost = [[inst.cost[j][i] for j in range(n)] for i in range(n)]
            self.need = reach.need_backward
        self.root_consumption = dterm[self.origin]

    def unreachable_bits(self, head: int, consumed: float, visited: int) -> int:
        row = self.need[head]
        budget = self.capacity - consumed
        bits = visited
        for k in range(self.n):
            if row[k] > budget:
                bits |= 1 << k
        return bits


def make_root(ctx: DirectionContext, new_id: int = 0) -> Label:
    """The empty path at the direction's origin node."""
    visited = 1 << ctx.origin
    consumption = ctx.root_consumption
    return Label(
        id=new_id,
        direction=ctx.direction,
        node=ctx.origin,
        pred_id=NO_PRED,
        pred_node=NO_PRED,
        cost=0.0,
        consumption=consumption,
        visited=visited,
        visited_unaltered=visited,
        unreachable=ctx.unreachable_bits(ctx.origin, consumption, visited),
        tour_length=0,
        repeated_visits=0,
    )


def extend(label: Label, j: int, ctx: DirectionContext, pi_mask_j: int, new_id: int) -> Label | None:
    """Extend ``label`` along one arc to node ``j``; ``None`` when infeasible.

    Infeasible means: a two-cycle (``j`` is the immediate predecessor), ``j``
    already in the label's relaxed memory, or the capacity budget exceeded.
    The child's relaxed set is the parent's projected through ``pi_mask_j``
    (the elementarity mask of ``j``) plus ``j`` itself.
    """
    if label.status == DOMINATED:
        raise ValueError("extending a dominated label violates pool purity")
    if j == label.node or j == label.pred_node:
        return None
    if (label.visited >> j) & 1:
        return None
    consumption = label.consumption + ctx.need[label.node][j]
    if consumption > ctx.capacity:
        return None
    visited = (label.visited & pi_mask_j) | (1 << j)
    repeated = label.repeated_visits + ((label.visited_unaltered >> j) & 1)
    visited_unaltered = label.visited_unaltered | (1 << j)
    return Label(
        id=new_id,
        direction=label.direction,
        node=j,
        pred_id=label.id,
        pred_node=label.node,
        cost=label.cost + ctx.cost[label.node][j],
        consumption=consumption,
        visited=visited,
        visited_unaltered=visited_unaltered,
        unreachable=ctx.unreachable_bits(j, consumption, visited),
        tour_length=label.tour_length + 1,
        repeated_visits=repeated,
    )


@dataclass
class InsertOutcome:
    """What happened when a label met its node pool."""

    accepted: bool
    displaced: tuple[Label, ...] = ()
    displaced_open: int = 0  # how many displaced labels were still open
    dominator: Label | None = None  # the resident that rejected the label


class LabelPool:
    """Non-dominated labels of one (direction, node) pair.

    ``members`` holds the live labels (open or closed).  ``total_inserted``
    counts every label ever accepted, monotonically; ``open_count`` and
    ``closed_count`` track the live split and always sum to ``len(members)``.
    """

    __slots__ = ("node", "members", "total_inserted", "open_count", "closed_count")

    def __init__(self, node: int):
        self.node = node
        self.members: list[Label] = []
        self.total_inserted = 0
        self.open_count = 0
        self.closed_count = 0

    def try_insert(self, label: Label) -> InsertOutcome:
        """Insert unless dominated; displace residents the label dominates.

        Rejection is checked first, so a rejected label never displaces
        anything (pool purity makes the two orderings equivalent: a pool
        cannot contain both a dominator and a dominated resident).
        """
        for resident in self.members:
            if dominates(resident, label):
                return InsertOutcome(accepted=False, dominator=resident)
        displaced = [resident for resident in self.members if dominates(label, resident)]
        displaced_open = 0
        if displaced:
            gone = set(id(resident) for resident in displaced)
            self.members = [m for m in self.members if id(m) not in gone]
            for resident in displaced:
                if resident.status == OPEN:
                    displaced_open += 1
                    self.open_count -= 1
                else:
                    self.closed_count -= 1
                resident.status = DOMINATED
        self.members.append(label)
        self.total_inserted += 1
        self.open_count += 1
        return InsertOutcome(accepted=True, displaced=tuple(displaced), displaced_open=displaced_open)

    def on_closed(self) -> None:
        self.open_count -= 1
        self.closed_count += 1

    def live(self) -> list[Label]:
        return self.members


@dataclass
class NetworkCounters:
    """Per-direction label totals; ``generated == open + closed + dominated``."""

    generated: int = 0
    open: int = 0
    closed: int = 0
    dominated: int = 0


class _GreedySelector:
    """Always returns the cheapest open label network-wide (ties: lowest id)."""

    def __init__(self, n: int, origin: int):
        self._heap: list[tuple[float, int, Label]] = []

    def push(self, label: Label) -> None:
        heapq.heappush(self._heap, (label.cost, label.id, label))

    def next(self) -> Label | None:
        while self._heap:
            _, _, label = heapq.heappop(self._heap)
            if label.status == OPEN:
                return label
        return None


class _NodeSelector:
    """Drains the current node's pool (cheapest first), then advances in a
    fixed 0..n-1 round-robin starting at the direction's origin."""

    def __init__(self, n: int, origin: int):
        self._heaps: list[list[tuple[float, int, Label]]] = [[] for _ in range(n)]
        self._n = n
        self._current = origin

    def push(self, label: Label) -> None:
        heapq.heappush(self._heaps[label.node], (label.cost, label.id, label))

    def next(self) -> Label | None:
        # The caller only asks while an open label exists somewhere; stale
        # (closed or displaced) heap entries are dropped lazily on the way.
        while True:
            heap = self._heaps[self._current]
            while heap:
                _, _, label = heapq.heappop(heap)
                if label.status == OPEN:
                    return label
            if all(not h for h in self._heaps):
                return None
            self._current = (self._current + 1) % self._n


_SELECTORS = {"greedy": _GreedySelector, "node": _NodeSelector}


class NullSink:
    """No-op telemetry hooks (used by plain solves and benchmarks)."""

    def on_generated(self, label: Label, run: "DirectionRun") -> None:
        pass

    def on_inserted(self, label: Label, outcome: InsertOutcome) -> None:
        pass

    def on_rejected(self, label: Label, dominator: Label) -> None:
        pass

    def on_closed(self, label: Label) -> None:
        pass


class DirectionRun:
    """One direction of one relaxation iteration.

    Drives the label-setting loop: select an open label under the configured
    policy, close it, and (unless it sits past the consumption threshold or on
    the terminal node) extend it along every outgoing arc.  Every generated
    label -- accepted or not -- is reported to the telemetry sink *before* its
    insertion is attempted, with the generation counters already including it
    and the node-pool counters still untouched.
    """

    def __init__(
        self,
        ctx: DirectionContext,
        pi_masks: list[int],
        threshold: float,
        policy: str = "node",
        sink: NullSink | None = None,
        label_budget: int = 1_000_000,
    ):
        if policy not in _SELECTORS:
            raise ValueError(f"unknown selection policy {policy!r}")
        self.ctx = ctx
        self.direction = ctx.direction
        self.pi_masks = pi_masks
        self.threshold = threshold
        self.policy = policy
        self.sink = sink if sink is not None else NullSink()
        self.label_budget = label_budget
        self.pools = [LabelPool(node) for node in range(ctx.n)]
        self.labels: list[Label] = []
        self.counters = NetworkCounters()
        self.attempts = 0  # every extension try, feasible or not
        self.insertions = 0
        self._selector = _SELECTORS[policy](ctx.n, ctx.origin)

    def run(self) -> None:
        root = make_root(self.ctx, new_id=0)
        if root.consumption > self.ctx.capacity:
            return  # origin demand alone exceeds the budget; nothing to do
        self._generated(root)
        self._insert(root)
        counters = self.counters
        ctx = self.ctx
        n = ctx.n
        while counters.open > 0:
            label = self._selector.next()
            if label is None:  # pragma: no cover - guarded by counters.open
                raise LabelStoreError("selector found no open label while counters disagree")
            self._close(label)
            if label.consumption > self.threshold:
                continue  # kept for joining, but never extended
            if label.node == ctx.terminal:
                continue
            for j in range(n):
                if j == label.node:
                    continue
                self.attempts += 1
                child = extend(label, j, ctx, self.pi_masks[j], len(self.labels))
                if child is None:
                    continue
                self._generated(child)
                self._insert(child)

    # -- lifecycle plumbing -------------------------------------------------

    def _generated(self, label: Label) -> None:
        self.labels.append(label)
        self.counters.generated += 1
        self.counters.open += 1
        if self.counters.generated > self.label_budget:
            raise LabelBudgetExceeded(
                f"{DIRECTION_NAMES[self.direction]} run exceeded {self.label_budget} labels; "
                "the instance likely has a negative cycle with zero resource consumption"
            )
        self.sink.on_generated(label, self)

    def _insert(self, label: Label) -> None:
        outcome = self.pools[label.node].try_insert(label)
        if not outcome.accepted:
            label.status = DOMINATED
            self.counters.open -= 1
            self.counters.dominated += 1
            self.sink.on_rejected(label, outcome.dominator)
            return
        self.insertions += 1
        if outcome.displaced:
            self.counters.dominated += len(outcome.displaced)
            self.counters.open -= outcome.displaced_open
            self.counters.closed -= len(outcome.displaced) - outcome.displaced_open
        self._selector.push(label)
        self.sink.on_inserted(label, outcome)

    def _close(self, label: Label) -> None:
        label.status = CLOSED
        self.counters.open -= 1
        self.counters.closed += 1
        self.pools[label.node].on_closed()
        self.sink.on_closed(label)


def reconstruct(run: DirectionRun, label: Label) -> list[int]:
    """Node sequence from the run's origin to ``label`` (origin first)."""
    path = []
    current = label
    store = run.labels
    while True:
        path.append(current.node)
        if current.pred_id == NO_PRED:
            break
        if not (0 <= current.pred_id < len(store)):
            raise LabelStoreError(f"label {current.id} points at missing predecessor {current.pred_id}")
        parent = store[current.pred_id]
        if parent.id != current.pred_id:
            raise LabelStoreError(f"label store out of order at id {current.pred_id}")
        current = parent
    path.reverse()
    return path


@dataclass
class JoinResult:
    """Best complete source-dest path recovered from the two runs."""

    cost: float
    path: list[int]
    forward_id: int | None
    backward_id: int | None
    elementary: bool


def join(inst: Instance, forward: DirectionRun, backward: DirectionRun) -> JoinResult | None:
    """Concatenate compatible forward/backward labels across every arc.

    A pair is compatible when the joint consumption fits the capacity and the
    two *relaxed* visited sets are disjoint; dominance keeps representatives
    of every useful pair, so scanning live labels is exact.  Forward labels
    already at the destination and backward labels already at the source
    enter as single-direction candidates.  Ties on cost prefer an elementary
    path, then the lexicographically smallest node sequence, which keeps the
    result deterministic under any selection policy.
    """
    n = inst.n
    res = inst.resource
    cost_m = inst.cost
    capacity = inst.capacity
    f_live = [[l for l in forward.pools[v].members if l.status == CLOSED] for v in range(n)]
    b_live = [[l for l in backward.pools[v].members if l.status == CLOSED] for v in range(n)]

    best_cost: float | None = None
    ties: list[tuple[Label | None, Label | None]] = []

    def offer(cost: float, f: Label | None, b: Label | None) -> None:
        nonlocal best_cost
        if best_cost is None or cost < best_cost:
            best_cost = cost
            ties.clear()
            ties.append((f, b))
        elif cost == best_cost:
            ties.append((f, b))

    for f in f_live[inst.dest]:
        offer(f.cost, f, None)
    for b in b_live[inst.source]:
        offer(b.cost, None, b)
    for i in range(n):
        if i == inst.dest or not f_live[i]:
            continue
        for j in range(n):
            if j == inst.source or j == i or not b_live[j]:
                continue
            arc_cost = cost_m[i][j]
            arc_res = res[i][j]
            for f in f_live[i]:
                budget = capacity - f.consumption - arc_res
                if budget < 0:
                    continue
                fv = f.visited
                fc = f.cost + arc_cost
                for b in b_live[j]:
                    if b.consumption <= budget and (fv & b.visited) == 0:
                        offer(fc + b.cost, f, b)

    if best_cost is None:
        return None

    best: tuple[tuple[int, list[int]], Label | None, Label | None] | None = None
    for f, b in ties:
        fwd_part = reconstruct(forward, f) if f is not None else []
        bwd_part = list(reversed(reconstruct(backward, b))) if b is not None else []
        path = fwd_part + bwd_part
        key = (0 if len(set(path)) == len(path) else 1, path)
        if best is None or key < best[0]:
            best = (key, f, b)
    key, f, b = best
    path = (reconstruct(forward, f) if f is not None else []) + (
        list(reversed(reconstruct(backward, b))) if b is not None else []
    )
    return JoinResult(
        cost=best_cost,
        path=path,
        forward_id=f.id if f is not None else None,
        backward_id=b.id if b is not None else None,
        elementary=key[0] == 0,
    )
