"""Problem instances for the resource-constrained shortest-path solver.

An instance is a complete directed graph over ``n`` nodes with a cost matrix
(possibly negative off-diagonal entries, zero diagonal), a single monotone
"critical" resource with a capacity budget, and designated source/destination
nodes.  Costs are usually derived from planar coordinates and node prizes:

    cost[i][j] = round_half_up(euclidean(i, j)) - prize[j]

so that collecting a large prize makes an arc profitable (negative cost).

Resource consumption comes in two modes, unified through a single per-arc
"need" value ``need[i][j] = resource[i][j] + demand_term[j]``:

* ``ARC_DISTANCE``  -- the resource matrix holds rounded Euclidean distances
  and the demand term is zero (path length is the budgeted quantity);
* ``NODE_DEMAND``   -- the resource matrix is zero and the demand term is the
  target node's demand (vehicle-routing style load, the default).

Instances travel in a small TSPLIB-flavoured text document::

    NAME        example
    NODES       4
    SOURCE      1
    DEST        4
    CAPACITY    10
    RESOURCE_MODE NODE_DEMAND
    NODE_COORD_SECTION
    1 0 0
    2 4 0
    3 4 3
    4 0 3
    DEMAND_SECTION
    2 3
    3 5
    PRIZE_SECTION
    2 6
    3 2
    EOF

Node ids are 1-based in documents and 0-based everywhere in code.  Headers
``NAME`` and ``RESOURCE_MODE`` are optional (defaults ``unnamed`` and
``NODE_DEMAND``); ``DEMAND_SECTION`` / ``PRIZE_SECTION`` entries default to
zero for missing nodes.  An ``EXPLICIT_COST_SECTION`` of ``i j c`` triples
overrides derived costs pair by pair; when no coordinates are given it must
cover every off-diagonal pair and the mode must be ``NODE_DEMAND``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

ARC_DISTANCE = "ARC_DISTANCE"
NODE_DEMAND = "NODE_DEMAND"
RESOURCE_MODES = (ARC_DISTANCE, NODE_DEMAND)

_HEADER_KEYS = ("NAME", "NODES", "SOURCE", "DEST", "CAPACITY", "RESOURCE_MODE", "COMMENT")
_SECTION_KEYS = (
    "NODE_COORD_SECTION",
    "DEMAND_SECTION",
    "PRIZE_SECTION",
    "EXPLICIT_COST_SECTION",
)


class ParseError(ValueError):
    """Malformed instance document; message carries line/section context."""

    def __init__(self, message: str, line: int | None = None, section: str | None = None):
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if section:
            parts.append(f"section {section}")
        if parts:
            message = f"{message} ({', '.join(parts)})"
        super().__init__(message)
        self.line = line
        self.section = section


def round_half_up(x: float) -> int:
    """Round to nearest integer with ties going up (TSPLIB nint convention)."""
    return int(x + 0.5)


def rounded_distances(coords: list[tuple[float, float]]) -> list[list[float]]:
    """Pairwise half-up-rounded Euclidean distances with a zero diagonal."""
    n = len(coords)
    dist = [[0.0] * n for _ in range(n)]
    for i, (xi, yi) in enumerate(coords):
        row = dist[i]
        for j, (xj, yj) in enumerate(coords):
            if i != j:
                row[j] = float(round_half_up(math.hypot(xi - xj, yi - yj)))
    return dist


def derive_costs(coords: list[tuple[float, float]], prizes: list[float]) -> list[list[float]]:
    """Cost matrix ``round(dist(i, j)) - prize[j]``, zero on the diagonal."""
    if len(prizes) != len(coords):
        raise ValueError(f"{len(coords)} coordinates but {len(prizes)} prizes")
    dist = rounded_distances(coords)
    n = len(coords)
    cost = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                cost[i][j] = dist[i][j] - prizes[j]
    return cost


@dataclass
class Instance:
    """A parsed problem instance.  Treated as immutable after construction.

    ``cost`` and ``resource`` are dense ``n x n`` row-major matrices with zero
    diagonals; ``coords`` is ``None`` for instances defined purely by an
    explicit cost matrix.
    """

    name: str
    n: int
    source: int
    dest: int
    capacity: float
    resource_mode: str
    coords: list[tuple[float, float]] | None
    demand: list[float]
    prize: list[float]
    cost: list[list[float]]
    resource: list[list[float]]

    def demand_term(self) -> list[float]:
        """Per-node consumption added when a node becomes the path head."""
        if self.resource_mode == NODE_DEMAND:
            return self.demand
        return [0.0] * self.n


def validate_instance(inst: Instance) -> None:
    """Raise ``ValueError`` on structurally invalid instances."""
    n = inst.n
    if n < 2:
        raise ValueError("instance needs at least source and destination")
    if not (0 <= inst.source < n and 0 <= inst.dest < n):
        raise ValueError("source/dest out of range")
    if inst.source == inst.dest:
        raise ValueError("source and destination must differ")
    if not (inst.capacity > 0):
        raise ValueError("capacity must be positive")
    if inst.resource_mode not in RESOURCE_MODES:
        raise ValueError(f"unknown resource mode {inst.resource_mode!r}")
    if len(inst.demand) != n or len(inst.prize) != n:
        raise ValueError("demand/prize vectors must have one entry per node")
    if inst.coords is not None and len(inst.coords) != n:
        raise ValueError("coordinate list must have one entry per node")
    for name, mat in (("cost", inst.cost), ("resource", inst.resource)):
        if len(mat) != n or any(len(row) != n for row in mat):
            raise ValueError(f"{name} matrix must be {n}x{n}")
        for i in range(n):
            if mat[i][i] != 0:
                raise ValueError(f"{name} matrix must have a zero diagonal")
            for j in range(n):
                if not math.isfinite(mat[i][j]):
                    raise ValueError(f"{name}[{i}][{j}] is not finite")
    for i in range(n):
        for j in range(n):
            if inst.resource[i][j] < 0:
                raise ValueError("resource entries must be nonnegative")
    if any(d < 0 for d in inst.demand):
        raise ValueError("demands must be nonnegative")
    if any(p < 0 for p in inst.prize):
        raise ValueError("prizes must be nonnegative")


# ---------------------------------------------------------------------------
# document parsing


def _tokenize(text: str):
    """Yield ``(line_no, tokens)`` for non-blank lines, 1-based line numbers."""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line:
            yield line_no, line.split()


def _to_float(token: str, line: int, section: str | None) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"expected a number, got {token!r}", line, section) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {token!r}", line, section)
    return value


def _to_int(token: str, line: int, section: str | None) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected an integer, got {token!r}", line, section) from None


def parse_instance(text: str) -> Instance:
    """Parse an instance document.  Raises :class:`ParseError` on bad input."""
    headers: dict[str, str] = {}
    sections: dict[str, list[tuple[int, list[str]]]] = {}
    current: str | None = None
    saw_eof = False

    for line_no, tokens in _tokenize(text):
        key = tokens[0]
        if key == "EOF":
            saw_eof = True
            break
        if key in _SECTION_KEYS:
            if key in sections:
                raise ParseError(f"duplicate section {key}", line_no)
            sections[key] = []
            current = key
            continue
        if key in _HEADER_KEYS:
            if key != "COMMENT":
                if key in headers:
                    raise ParseError(f"duplicate header {key}", line_no)
                headers[key] = " ".join(tokens[1:])
                if not headers[key]:
                    raise ParseError(f"header {key} has no value", line_no)
            current = None
            continue
        if current is None:
            raise ParseError(f"unexpected token {key!r}", line_no)
        sections[current].append((line_no, tokens))
    if not saw_eof:
        raise ParseError("missing EOF terminator")

    for required in ("NODES", "SOURCE", "DEST", "CAPACITY"):
        if required not in headers:
            raise ParseError(f"missing {required} header")
    n = _to_int(headers["NODES"], 0, None)
    if n < 2:
        raise ParseError("NODES must be at least 2")
    mode = headers.get("RESOURCE_MODE", NODE_DEMAND)
    if mode not in RESOURCE_MODES:
        raise ParseError(f"unknown RESOURCE_MODE {mode!r}")
    capacity = float(headers["CAPACITY"])
    if not (capacity > 0):
        raise ParseError("CAPACITY must be positive")

    def node_id(token: str, line: int, section: str | None) -> int:
        value = _to_int(token, line, section)
        if not (1 <= value <= n):
            raise ParseError(f"node id {value} out of range 1..{n}", line, section)
        return value - 1

    source = node_id(headers["SOURCE"], 0, None)
    dest = node_id(headers["DEST"], 0, None)
    if source == dest:
        raise ParseError("SOURCE and DEST must differ")

    coords: list[tuple[float, float]] | None = None
    if "NODE_COORD_SECTION" in sections:
        seen: dict[int, tuple[float, float]] = {}
        for line_no, tokens in sections["NODE_COORD_SECTION"]:
            if len(tokens) != 3:
                raise ParseError("expected 'id x y'", line_no, "NODE_COORD_SECTION")
            i = node_id(tokens[0], line_no, "NODE_COORD_SECTION")
            if i in seen:
                raise ParseError(f"duplicate coordinates for node {i + 1}", line_no, "NODE_COORD_SECTION")
            seen[i] = (
                _to_float(tokens[1], line_no, "NODE_COORD_SECTION"),
                _to_float(tokens[2], line_no, "NODE_COORD_SECTION"),
            )
        missing = [i + 1 for i in range(n) if i not in seen]
        if missing:
            raise ParseError(f"missing coordinates for node {missing[0]}", section="NODE_COORD_SECTION")
        coords = [seen[i] for i in range(n)]

    def value_section(name: str) -> list[float]:
        values = [0.0] * n
        seen_ids: set[int] = set()
        for line_no, tokens in sections.get(name, []):
            if len(tokens) != 2:
                raise ParseError("expected 'id value'", line_no, name)
            i = node_id(tokens[0], line_no, name)
            if i in seen_ids:
                raise ParseError(f"duplicate entry for node {i + 1}", line_no, name)
            seen_ids.add(i)
            value = _to_float(tokens[1], line_no, name)
            if value < 0:
                raise ParseError(f"negative value for node {i + 1}", line_no, name)
            values[i] = value
        return values

    demand = value_section("DEMAND_SECTION")
    prize = value_section("PRIZE_SECTION")

    explicit: dict[tuple[int, int], float] = {}
    for line_no, tokens in sections.get("EXPLICIT_COST_SECTION", []):
        if len(tokens) != 3:
            raise ParseError("expected 'i j cost'", line_no, "EXPLICIT_COST_SECTION")
        i = node_id(tokens[0], line_no, "EXPLICIT_COST_SECTION")
        j = node_id(tokens[1], line_no, "EXPLICIT_COST_SECTION")
        if i == j:
            raise ParseError("diagonal cost entries are not allowed", line_no, "EXPLICIT_COST_SECTION")
        if (i, j) in explicit:
            raise ParseError(f"duplicate cost entry {i + 1} {j + 1}", line_no, "EXPLICIT_COST_SECTION")
        explicit[(i, j)] = _to_float(tokens[2], line_no, "EXPLICIT_COST_SECTION")

    if coords is not None:
        cost = derive_costs(coords, prize)
    else:
        if mode == ARC_DISTANCE:
            raise ParseError("ARC_DISTANCE requires a NODE_COORD_SECTION")
        cost = [[0.0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if i != j and (i, j) not in explicit:
                    raise ParseError(
                        f"no coordinates and no explicit cost for arc {i + 1} {j + 1}",
                        section="EXPLICIT_COST_SECTION",
                    )
    for (i, j), value in explicit.items():
        cost[i][j] = value

    if mode == ARC_DISTANCE:
        resource = rounded_distances(coords)  # type: ignore[arg-type]  (validated above)
    else:
        resource = [[0.0] * n for _ in range(n)]

    inst = Instance(
        name=headers.get("NAME", "unnamed"),
        n=n,
        source=source,
        dest=dest,
        capacity=capacity,
        resource_mode=mode,
        coords=coords,
        demand=demand,
        prize=prize,
        cost=cost,
        resource=resource,
    )
    validate_instance(inst)
    return inst


def _format_number(x: float) -> str:
    """Integral values print as integers, everything else round-trips via repr."""
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def serialize_instance(inst: Instance) -> str:
    """Render an instance document such that ``parse(serialize(x)) == x``."""
    validate_instance(inst)
    lines = [
        f"NAME {inst.name}",
        f"NODES {inst.n}",
        f"SOURCE {inst.source + 1}",
        f"DEST {inst.dest + 1}",
        f"CAPACITY {_format_number(inst.capacity)}",
        f"RESOURCE_MODE {inst.resource_mode}",
    ]
    if inst.coords is not None:
        lines.append("NODE_COORD_SECTION")
        for i, (x, y) in enumerate(inst.coords):
            lines.append(f"{i + 1} {_format_number(x)} {_format_number(y)}")
    if any(d != 0 for d in inst.demand):
        lines.append("DEMAND_SECTION")
        for i, d in enumerate(inst.demand):
            if d != 0:
                lines.append(f"{i + 1} {_format_number(d)}")
    if any(p != 0 for p in inst.prize):
        lines.append("PRIZE_SECTION")
        for i, p in enumerate(inst.prize):
            if p != 0:
                lines.append(f"{i + 1} {_format_number(p)}")
    derived = derive_costs(inst.coords, inst.prize) if inst.coords is not None else None
    overrides = []
    for i in range(inst.n):
        for j in range(inst.n):
            if i == j:
                continue
            if derived is None or inst.cost[i][j] != derived[i][j]:
                overrides.append(f"{i + 1} {j + 1} {_format_number(inst.cost[i][j])}")
    if overrides:
        lines.append("EXPLICIT_COST_SECTION")
        lines.extend(overrides)
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as handle:
        return parse_instance(handle.read())


def save_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(serialize_instance(inst))


# ---------------------------------------------------------------------------
# reachability preprocessing


class Reachability:
    """Constant-time unreachability predicate used during label extension.

    ``need_forward[i][j]`` is the resource consumed when a forward path headed
    at ``i`` extends to ``j``; ``need_backward[j][i]`` is the mirror quantity
    on the transposed graph (a backward path headed at ``j`` growing along the
    original arc ``i -> j``).  Node ``k`` is unreachable for a label when it is
    already visited or when the remaining budget cannot pay for one extension
    to ``k`` -- the same predicate, applied at the root, yields the initial
    unreachable flags of the preprocessing stage.
    """

    def __init__(self, inst: Instance):
        n = inst.n
        dterm = inst.demand_term()
        res = inst.resource
        self.n = n
        self.capacity = inst.capacity
        self.need_forward = [[res[i][j] + dterm[j] for j in range(n)] for i in range(n)]
        self.need_backward = [[res[i][j] + dterm[i] for i in range(n)] for j in range(n)]
        self.root_consumption = dterm[inst.source], dterm[inst.dest]

    def need(self, head: int, k: int, backward: bool) -> float:
        matrix = self.need_backward if backward else self.need_forward
        return matrix[head][k]

    def is_unreachable(self, head: int, k: int, consumed: float, visited: int, backward: bool = False) -> bool:
        if (visited >> k) & 1:
            return True
        return self.need(head, k, backward) > self.capacity - consumed

    def unreachable_bits(self, head: int, consumed: float, visited: int, backward: bool = False) -> int:
        """Bitset of nodes unreachable from a label with the given state."""
        matrix = self.need_backward if backward else self.need_forward
        row = matrix[head]
        budget = self.capacity - consumed
        bits = visited
        for k in range(self.n):
            if row[k] > budget:
                bits |= 1 << k
        return bits


def preprocess_reachability(inst: Instance) -> tuple[list[bool], Reachability]:
    """Initial per-node unreachable flags from the source, plus the predicate.

    A node is flagged when the first extension out of the source already
    exceeds the remaining budget (e.g. capacity 5 and a need of 6).
    """
    reach = Reachability(inst)
    root_consumed = inst.demand_term()[inst.source]
    bits = reach.unreachable_bits(inst.source, root_consumed, 1 << inst.source)
    return [bool((bits >> k) & 1) for k in range(inst.n)], reach


# ---------------------------------------------------------------------------
# conversion from vehicle-routing documents


def convert_cvrp(text: str, prize_scale: float | None = None, seed: int = 0) -> Instance:
    """Convert a TSPLIB-style CVRP document into a solver instance.

    The depot becomes the source and a copy of it (demand 0) is appended as
    the destination, so every depot-to-depot route maps to a source-dest path.
    When the document has no prize information, integer prizes are synthesized
    for customers from ``Random(seed)`` in ``1..prize_scale`` (default scale:
    the mean rounded inter-node distance), which is what makes arcs profitable
    and the pricing subproblem non-trivial.  Only ``EDGE_WEIGHT_TYPE EUC_2D``
    is supported.
    """
    headers: dict[str, str] = {}
    sections: dict[str, list[tuple[int, list[str]]]] = {}
    current: str | None = None
    for line_no, tokens in _tokenize(text):
        key = tokens[0].rstrip(":")
        if key == "EOF":
            break
        if key in ("NODE_COORD_SECTION", "DEMAND_SECTION", "DEPOT_SECTION"):
            sections[key] = []
            current = key
            continue
        if tokens[0][0].isalpha():
            rest = " ".join(tokens[1:]).lstrip(": ").strip()
            headers[key] = rest
            current = None
            continue
        if current is None:
            raise ParseError(f"unexpected token {tokens[0]!r}", line_no)
        sections[current].append((line_no, tokens))

    for required in ("DIMENSION", "CAPACITY"):
        if required not in headers:
            raise ParseError(f"missing {required} header")
    weight_type = headers.get("EDGE_WEIGHT_TYPE", "EUC_2D")
    if weight_type != "EUC_2D":
        raise ParseError(f"unsupported EDGE_WEIGHT_TYPE {weight_type!r}")
    dim = _to_int(headers["DIMENSION"], 0, None)
    capacity = float(headers["CAPACITY"])

    coord_rows = sections.get("NODE_COORD_SECTION", [])
    if len(coord_rows) != dim:
        raise ParseError(f"expected {dim} coordinate rows, found {len(coord_rows)}")
    base_coords: list[tuple[float, float]] = [(0.0, 0.0)] * dim
    for line_no, tokens in coord_rows:
        if len(tokens) != 3:
            raise ParseError("expected 'id x y'", line_no, "NODE_COORD_SECTION")
        i = _to_int(tokens[0], line_no, "NODE_COORD_SECTION") - 1
        if not (0 <= i < dim):
            raise ParseError(f"node id {i + 1} out of range", line_no, "NODE_COORD_SECTION")
        base_coords[i] = (
            _to_float(tokens[1], line_no, "NODE_COORD_SECTION"),
            _to_float(tokens[2], line_no, "NODE_COORD_SECTION"),
        )

    base_demand = [0.0] * dim
    for line_no, tokens in sections.get("DEMAND_SECTION", []):
        if len(tokens) != 2:
            raise ParseError("expected 'id demand'", line_no, "DEMAND_SECTION")
        i = _to_int(tokens[0], line_no, "DEMAND_SECTION") - 1
        if not (0 <= i < dim):
            raise ParseError(f"node id {i + 1} out of range", line_no, "DEMAND_SECTION")
        base_demand[i] = _to_float(tokens[1], line_no, "DEMAND_SECTION")

    depot = 0
    depot_rows = sections.get("DEPOT_SECTION", [])
    if depot_rows:
        depot = _to_int(depot_rows[0][1][0], depot_rows[0][0], "DEPOT_SECTION") - 1
        if not (0 <= depot < dim):
            raise ParseError("depot id out of range", depot_rows[0][0], "DEPOT_SECTION")

    n = dim + 1
    coords = list(base_coords) + [base_coords[depot]]
    demand = list(base_demand) + [0.0]
    demand[depot] = 0.0

    if prize_scale is None:
        dist = rounded_distances(base_coords)
        total = sum(dist[i][j] for i in range(dim) for j in range(dim) if i != j)
        pairs = dim * (dim - 1)
        prize_scale = max(2.0, float(round_half_up(total / pairs))) if pairs else 2.0
    rng = random.Random(seed)
    prize = [0.0] * n
    for i in range(dim):
        if i != depot:
            prize[i] = float(rng.randint(1, int(prize_scale)))

    inst = Instance(
        name=headers.get("NAME", "converted"),
        n=n,
        source=depot,
        dest=n - 1,
        capacity=capacity,
        resource_mode=NODE_DEMAND,
        coords=coords,
        demand=demand,
        prize=prize,
        cost=derive_costs(coords, prize),
        resource=[[0.0] * n for _ in range(n)],
    )
    validate_instance(inst)
    return inst
