import os
import sys

import numpy as np
import pytest

# Add the repo root to the path so tests import `src` the way main.py does
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.octree.morton import ROOT  # noqa: E402
from src.octree.tree import Octree  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def corner_tree(depth: int) -> Octree:
    """Refines only the octant at the origin down to `depth`: unbalanced for depth >= 3."""
    leaves = []
    key = ROOT
    for _ in range(depth):
        kids = key.children()
        leaves.extend(kids[1:])
        key = kids[0]
    leaves.append(key)
    return Octree(leaves, max_depth=depth)


@pytest.fixture
def settings():
    from src.harness.config import ArenaSettings
    return ArenaSettings(sample_count=200)


@pytest.fixture
def arena(settings):
    from src.arena import Arena
    return Arena(settings)


def center_tree(depth: int) -> Octree:
    """Refines toward the cube center down to `depth`: violates 2:1 balance for depth >= 3."""
    leaves = []
    key = ROOT
    for level in range(depth):
        kids = key.children()
        pick = 7 if level == 0 else 0
        leaves.extend(k for i, k in enumerate(kids) if i != pick)
        key = kids[pick]
    leaves.append(key)
    return Octree(leaves, max_depth=depth)
