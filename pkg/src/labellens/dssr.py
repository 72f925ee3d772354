"""Iterative state-space relaxation around the bidirectional labeling core.

The solver starts from the loosest useful relaxation -- every node's
elementarity set contains only itself, so a label's memory forgets a node as
soon as it extends somewhere that does not track it -- and tightens it only
where cycles actually appear.  Each iteration:

1. run forward and backward label-setting under the current per-node masks,
2. join the frontiers into the best complete source-dest path,
3. if that path is elementary it is optimal (costs are lower bounds that only
   grow as masks grow) and the loop stops; otherwise every repeated node is
   added to the masks of the nodes strictly inside its cycle spans, which
   makes the same cycle infeasible in the next iteration.

Every augmentation strictly grows some mask, and a full mask set makes the
relaxation exact, so the loop terminates after at most ``n * n`` iterations
(one per possible mask bit, plus the final exact round).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .instance import Instance, Reachability
from .labeling import (
    BACKWARD,
    FORWARD,
    DirectionContext,
    DirectionRun,
    JoinResult,
    join,
)

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"


class RelaxationState:
    """Per-node elementarity masks ``pi[i]`` (bitsets), monotone under growth."""

    def __init__(self, n: int):
        self.n = n
        self.masks = [1 << i for i in range(n)]

    def snapshot(self) -> list[int]:
        return list(self.masks)

    def tracked(self, i: int) -> set[int]:
        return {v for v in range(self.n) if (self.masks[i] >> v) & 1}


def detect_cycles(path: list[int]) -> dict[int, list[int]]:
    """Positions of every node that appears more than once in ``path``."""
    positions: dict[int, list[int]] = {}
    for idx, node in enumerate(path):
        positions.setdefault(node, []).append(idx)
    return {node: pos for node, pos in positions.items() if len(pos) > 1}


def augment_sets(relax: RelaxationState, path: list[int]) -> list[tuple[int, int]]:
    """Grow masks so every cycle in ``path`` is blocked next iteration.

    For each repeated node ``v`` and each pair of consecutive occurrences,
    ``v`` is added to the mask of every node strictly between them, so the
    memory of ``v`` survives long enough to forbid the revisit.  Returns the
    ``(node, tracked)`` pairs that were actually new; a non-elementary path
    always yields at least one.
    """
    added: list[tuple[int, int]] = []
    for v, positions in detect_cycles(path).items():
        bit = 1 << v
        for p1, p2 in zip(positions, positions[1:]):
            for u in path[p1 + 1 : p2]:
                if not relax.masks[u] & bit:
                    relax.masks[u] |= bit
                    added.append((u, v))
    return added


@dataclass
class IterationReport:
    """Everything one relaxation round produced (kept for tests/telemetry)."""

    iteration: int
    cost: float
    path: list[int]
    elementary: bool
    masks: list[int]  # masks in force during this round
    forward: DirectionRun
    backward: DirectionRun
    join_result: JoinResult


@dataclass
class SolveResult:
    status: str
    cost: float | None
    path: list[int] | None
    iterations: list[IterationReport] = field(default_factory=list)

    @property
    def iterations_used(self) -> int:
        return len(self.iterations)


def solve(
    inst: Instance,
    policy: str = "node",
    split: float = 0.5,
    collector=None,
    single_thread: bool = False,
    label_budget: int = 1_000_000,
    max_iterations: int | None = None,
) -> SolveResult:
    """Exact elementary shortest path under the resource budget.

    ``split`` divides the capacity between the directions: forward labels are
    extended while their consumption is at most ``split * capacity``, backward
    labels up to the remainder (``split = 1.0`` degenerates to a plain
    monodirectional forward run).  ``collector`` may provide per-iteration
    telemetry sinks (see :mod:`labellens.telemetry`); ``None`` solves quietly.
    """
    if not (0 < split <= 1):
        raise ValueError("split fraction must be in (0, 1]")
    reach = Reachability(inst)
    fwd_ctx = DirectionContext(inst, reach, FORWARD)
    bwd_ctx = DirectionContext(inst, reach, BACKWARD)
    threshold_fwd = split * inst.capacity
    threshold_bwd = inst.capacity - threshold_fwd
    relax = RelaxationState(inst.n)
    limit = max_iterations if max_iterations is not None else inst.n * inst.n + 1
    reports: list[IterationReport] = []

    for iteration in range(1, limit + 1):
        fwd_sink, bwd_sink = (None, None) if collector is None else collector.begin_iteration(iteration)
        fwd_run = DirectionRun(
            fwd_ctx, relax.masks, threshold_fwd, policy, fwd_sink, label_budget=label_budget
        )
        bwd_run = DirectionRun(
            bwd_ctx, relax.masks, threshold_bwd, policy, bwd_sink, label_budget=label_budget
        )
        if single_thread:
            fwd_run.run()
            bwd_run.run()
        else:
            # The runs share nothing mutable (masks are only read), so the
            # interleaving cannot affect results -- merely wall time.
            with ThreadPoolExecutor(max_workers=2) as pool:
                fwd_future = pool.submit(fwd_run.run)
                bwd_future = pool.submit(bwd_run.run)
                fwd_future.result()
                bwd_future.result()
        result = join(inst, fwd_run, bwd_run)
        if collector is not None:
            collector.end_iteration(iteration, fwd_run, bwd_run, result)
        if result is None:
            return SolveResult(STATUS_INFEASIBLE, None, None, reports)
        reports.append(
            IterationReport(
                iteration=iteration,
                cost=result.cost,
                path=list(result.path),
                elementary=result.elementary,
                masks=relax.snapshot(),
                forward=fwd_run,
                backward=bwd_run,
                join_result=result,
            )
        )
        if result.elementary:
            return SolveResult(STATUS_OPTIMAL, result.cost, list(result.path), reports)
        if not augment_sets(relax, result.path):
            raise RuntimeError(
                "non-elementary best path produced no mask growth; relaxation cannot progress"
            )
    raise RuntimeError(f"relaxation did not converge within {limit} iterations")
