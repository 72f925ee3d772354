"""Shared test fixtures."""

from __future__ import annotations

import pytest

from solverhelpers import explicit_instance


@pytest.fixture
def square_doc() -> str:
    """Four nodes on a 3x4 rectangle; prizes make two arcs negative."""
    return """
NAME square
NODES 4
SOURCE 1
DEST 4
CAPACITY 10
RESOURCE_MODE NODE_DEMAND
NODE_COORD_SECTION
1 0 0
2 3 0
3 3 4
4 0 4
DEMAND_SECTION
2 3
3 5
PRIZE_SECTION
2 6
3 2
EOF
"""
