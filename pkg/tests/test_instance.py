"""Document parsing, serialization, cost derivation, reachability, conversion."""

from __future__ import annotations

import pytest

from solverhelpers import explicit_instance
from labellens.instance import (
    ARC_DISTANCE,
    NODE_DEMAND,
    Instance,
    ParseError,
    Reachability,
    convert_cvrp,
    derive_costs,
    parse_instance,
    preprocess_reachability,
    round_half_up,
    rounded_distances,
    serialize_instance,
    validate_instance,
)
from labellens.gen import generate_instance


def test_round_half_up():
    assert round_half_up(2.5) == 3  # ties go up, not to even
    assert round_half_up(1.4142) == 1
    assert round_half_up(0.5) == 1
    assert round_half_up(3.49) == 3
    assert round_half_up(7.0) == 7


def test_rounded_distances_collinear():
    dist = rounded_distances([(0.0, 0.0), (3.0, 0.0), (7.0, 0.0)])
    assert dist[0][2] == 7 and dist[2][0] == 7
    assert dist[0][1] == 3 and dist[1][2] == 4
    assert all(dist[i][i] == 0 for i in range(3))


def test_derive_costs_square(square_doc):
    inst = parse_instance(square_doc)
    # 3-4-5 rectangle: distances 3/4/5; prizes 6 on node 2, 2 on node 3.
    assert inst.cost == [
        [0.0, -3.0, 3.0, 4.0],
        [3.0, 0.0, 2.0, 5.0],
        [5.0, -2.0, 0.0, 3.0],
        [4.0, -1.0, 1.0, 0.0],
    ]
    assert inst.resource == [[0.0] * 4 for _ in range(4)]  # NODE_DEMAND mode
    assert inst.demand == [0.0, 3.0, 5.0, 0.0]
    assert inst.source == 0 and inst.dest == 3


def test_derive_costs_rejects_length_mismatch():
    with pytest.raises(ValueError):
        derive_costs([(0.0, 0.0), (1.0, 0.0)], [0.0])


def test_parse_defaults(square_doc):
    doc = "\n".join(
        line for line in square_doc.splitlines() if not line.startswith(("NAME", "RESOURCE_MODE"))
    )
    inst = parse_instance(doc)
    assert inst.name == "unnamed"
    assert inst.resource_mode == NODE_DEMAND
    assert inst.prize[0] == 0.0  # unlisted entries default to zero


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda d: d.replace("CAPACITY 10\n", ""), "missing CAPACITY"),
        (lambda d: d.replace("1 0 0\n", "1 x 0\n"), "expected a number"),
        (lambda d: d.replace("2 3 0\n", "2 3 0\n2 3 0\n"), "duplicate coordinates"),
        (lambda d: d.replace("2 3\n", "9 3\n"), "out of range"),
        (lambda d: d.replace("DEST 4", "DEST 1"), "must differ"),
        (lambda d: d.replace("EOF", ""), "missing EOF"),
        (lambda d: d.replace("2 3\n", "2 -3\n"), "negative value"),
        (lambda d: d.replace("NODES 4", "NODES 1"), "at least 2"),
        (lambda d: d.replace("CAPACITY 10", "CAPACITY 0"), "must be positive"),
        (lambda d: d.replace("CAPACITY 10\n", "CAPACITY 10\n12 34\n"), "unexpected token"),
        (lambda d: d.replace("RESOURCE_MODE NODE_DEMAND", "RESOURCE_MODE WEIRD"), "RESOURCE_MODE"),
    ],
)
def test_parse_errors(square_doc, mutate, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_instance(mutate(square_doc))


def test_parse_error_reports_line_and_section(square_doc):
    bad = square_doc.replace("1 0 0\n", "1 oops 0\n")
    with pytest.raises(ParseError) as err:
        parse_instance(bad)
    assert "NODE_COORD_SECTION" in str(err.value)
    assert "line" in str(err.value)


def test_explicit_cost_requires_full_matrix_without_coords():
    doc = """
NODES 3
SOURCE 1
DEST 3
CAPACITY 5
EXPLICIT_COST_SECTION
1 2 1.5
1 3 2
2 3 1
EOF
"""
    with pytest.raises(ParseError, match="no explicit cost for arc"):
        parse_instance(doc)


def test_explicit_cost_diagonal_rejected():
    doc = """
NODES 2
SOURCE 1
DEST 2
CAPACITY 5
EXPLICIT_COST_SECTION
1 1 0
1 2 1
2 1 1
EOF
"""
    with pytest.raises(ParseError, match="diagonal"):
        parse_instance(doc)


def test_arc_distance_requires_coords():
    doc = """
NODES 2
SOURCE 1
DEST 2
CAPACITY 5
RESOURCE_MODE ARC_DISTANCE
EXPLICIT_COST_SECTION
1 2 1
2 1 1
EOF
"""
    with pytest.raises(ParseError, match="ARC_DISTANCE requires"):
        parse_instance(doc)


@pytest.mark.parametrize("seed", range(12))
def test_round_trip_generated(seed):
    klass = ("uniform", "cluster", "tight")[seed % 3]
    mode = NODE_DEMAND if seed % 2 == 0 else ARC_DISTANCE
    inst = generate_instance(seed, klass=klass, resource_mode=mode)
    assert parse_instance(serialize_instance(inst)) == inst


def test_round_trip_explicit_costs():
    inst = explicit_instance(
        4, {(0, 1): -2.0, (1, 2): 0.5, (2, 3): -1.25}, [0.0, 1.0, 2.0, 0.0], 5.0
    )
    assert parse_instance(serialize_instance(inst)) == inst


def test_round_trip_fractional_values():
    inst = explicit_instance(3, {(0, 1): 1.0 / 3.0, (1, 2): -0.1}, [0.0, 0.7, 0.0], 2.5)
    again = parse_instance(serialize_instance(inst))
    assert again.cost[0][1] == inst.cost[0][1]  # bit-exact via repr round-trip
    assert again == inst


def test_round_trip_overridden_derived_cost(square_doc):
    inst = parse_instance(square_doc)
    inst.cost[1][2] = -7.5  # manual override on top of derived costs
    again = parse_instance(serialize_instance(inst))
    assert again == inst


def test_preprocess_flags_demand_mode():
    inst = explicit_instance(3, {(0, 1): 1.0, (1, 2): 1.0}, [0.0, 6.0, 0.0], 5.0)
    flags, reach = preprocess_reachability(inst)
    assert flags == [True, True, False]  # source visited; node 1 needs 6 > 5
    assert reach.need_forward[0][1] == 6.0
    assert not reach.is_unreachable(0, 2, 0.0, 1 << 0)


def test_preprocess_flags_arc_distance_mode():
    inst = Instance(
        name="far",
        n=3,
        source=0,
        dest=2,
        capacity=5.0,
        resource_mode=ARC_DISTANCE,
        coords=[(0.0, 0.0), (6.0, 0.0), (4.0, 0.0)],
        demand=[0.0] * 3,
        prize=[0.0] * 3,
        cost=derive_costs([(0.0, 0.0), (6.0, 0.0), (4.0, 0.0)], [0.0] * 3),
        resource=rounded_distances([(0.0, 0.0), (6.0, 0.0), (4.0, 0.0)]),
    )
    flags, _ = preprocess_reachability(inst)
    assert flags == [True, True, False]  # arc need 6 exceeds capacity 5


def test_reachability_orientation():
    inst = explicit_instance(3, {}, [0.0, 4.0, 1.0], 10.0)
    reach = Reachability(inst)
    # forward: extending i -> j consumes demand[j]; backward mirrors it.
    assert reach.need_forward[0][1] == 4.0
    assert reach.need_backward[1][0] == 0.0  # arc 0->1 grown backward adds demand[0]
    assert reach.need_backward[0][1] == 4.0


def test_unreachable_bits_include_visited():
    inst = explicit_instance(3, {}, [0.0, 4.0, 1.0], 5.0)
    reach = Reachability(inst)
    bits = reach.unreachable_bits(0, 2.0, visited=0b101)
    assert bits & 0b101 == 0b101  # visited nodes always unreachable
    assert (bits >> 1) & 1  # remaining budget 3 < demand 4


def test_validate_instance_rejections(square_doc):
    inst = parse_instance(square_doc)
    broken = Instance(**{**inst.__dict__, "resource": [[0.0] * 4] * 3})
    with pytest.raises(ValueError):
        validate_instance(broken)
    negative = Instance(**{**inst.__dict__, "demand": [0.0, -1.0, 0.0, 0.0]})
    with pytest.raises(ValueError):
        validate_instance(negative)


CVRP_DOC = """
NAME : toy
TYPE : CVRP
DIMENSION : 4
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 10
NODE_COORD_SECTION
1 0 0
2 10 0
3 0 10
4 10 10
DEMAND_SECTION
1 0
2 4
3 5
4 6
DEPOT_SECTION
1
-1
EOF
"""


def test_convert_cvrp_structure():
    inst = convert_cvrp(CVRP_DOC, seed=1)
    assert inst.n == 5  # depot copy appended as the destination
    assert inst.source == 0 and inst.dest == 4
    assert inst.coords[4] == inst.coords[0]
    assert inst.demand == [0.0, 4.0, 5.0, 6.0, 0.0]
    assert inst.capacity == 10.0
    assert inst.resource_mode == NODE_DEMAND
    assert inst.prize[0] == 0.0 and inst.prize[4] == 0.0
    assert all(p >= 1 for p in inst.prize[1:4])  # synthesized customer prizes
    validate_instance(inst)


def test_convert_cvrp_prizes_seeded():
    a = convert_cvrp(CVRP_DOC, seed=1)
    b = convert_cvrp(CVRP_DOC, seed=1)
    c = convert_cvrp(CVRP_DOC, seed=2)
    assert a == b
    assert a.prize != c.prize


def test_convert_cvrp_rejects_other_metrics():
    with pytest.raises(ParseError, match="EDGE_WEIGHT_TYPE"):
        convert_cvrp(CVRP_DOC.replace("EUC_2D", "GEO"))


def test_convert_cvrp_explicit_prize_scale():
    inst = convert_cvrp(CVRP_DOC, prize_scale=3, seed=0)
    assert all(1 <= p <= 3 for p in inst.prize[1:4])
