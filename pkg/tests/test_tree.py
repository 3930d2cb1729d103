from itertools import product

import numpy as np
import pytest

from conftest import center_tree, corner_tree
from src.chebyshev.approx import ChebCoeffs, cheb_approx
from src.octree.tree import (
    Octree,
    balance_2to1,
    dump_tree,
    is_complete,
    load_tree,
    refine_adaptive,
    uniform_tree,
)
from src.problems.cases import TestCase, source_function
from src.shared.errors import InvalidArgumentError
from src.shared.types import ToleranceMode


def balance_violations(tree: Octree, periodic: bool) -> int:
    """Touching leaf pairs (images included when periodic) more than one level apart."""
    depth = tree.depth
    scale = np.array([1 << (depth - k.level) for k in tree.leaves])
    lo = np.array([k.anchor for k in tree.leaves]) * scale[:, None]
    hi = lo + scale[:, None]
    levels = np.array([k.level for k in tree.leaves])
    jump = np.abs(levels[:, None] - levels[None, :]) > 1
    shifts = product((-1, 0, 1), repeat=3) if periodic else [(0, 0, 0)]
    bad = 0
    for shift in shifts:
        off = np.asarray(shift) * (1 << depth)
        touch = np.all((lo[:, None, :] <= hi[None, :, :] + off) & (lo[None, :, :] + off <= hi[:, None, :]), axis=2)
        bad += int(np.sum(touch & jump))
    return bad


def test_uniform_tree_partitions_cube():
    tree = uniform_tree(2)
    assert len(tree.leaves) == 64
    assert is_complete(tree)
    assert tree.depth == 2


def test_incomplete_tree_detected():
    tree = uniform_tree(1)
    assert not is_complete(Octree(tree.leaves[1:], max_depth=1))


@pytest.mark.parametrize("periodic", [False, True])
def test_balance_removes_every_level_jump(periodic):
    tree = center_tree(4)
    assert balance_violations(tree, periodic) > 0
    balanced = balance_2to1(tree, periodic)
    assert balanced.balanced
    assert is_complete(balanced)
    assert balance_violations(balanced, periodic) == 0


@pytest.mark.parametrize("periodic", [False, True])
def test_balance_is_idempotent(periodic):
    once = balance_2to1(center_tree(4), periodic)
    twice = balance_2to1(once, periodic)
    assert twice.leaves == once.leaves


@pytest.mark.parametrize("make, periodic", [(center_tree, False), (center_tree, True), (corner_tree, True)])
def test_balance_ripples_through_deep_trees(make, periodic):
    tree = make(6)
    balanced = balance_2to1(tree, periodic)
    assert is_complete(balanced)
    assert balance_violations(balanced, periodic) == 0
    assert balance_2to1(balanced, periodic).leaves == balanced.leaves
    assert len(balanced.leaves) > len(tree.leaves)


def test_periodic_balance_refines_across_the_wrap():
    assert balance_violations(corner_tree(4), periodic=False) == 0
    free = balance_2to1(corner_tree(4), periodic=False)
    wrapped = balance_2to1(corner_tree(4), periodic=True)
    assert len(wrapped.leaves) > len(free.leaves)
    # the far corner touches the refined origin corner through the wrap
    far_corner = wrapped.locate(np.array([[0.99, 0.99, 0.99]]))[0]
    assert far_corner.level >= 2


def test_balance_reapproximates_new_leaves():
    f = lambda p: p[:, 0] + 2.0 * p[:, 1]
    tree = center_tree(4)
    tree = tree.with_payload({k: cheb_approx(f, k, 3) for k in tree.leaves})
    balanced = balance_2to1(tree, False, reapproximate=lambda k: cheb_approx(f, k, 3))
    assert set(balanced.payload) == set(balanced.leaves)
    assert all(isinstance(c, ChebCoeffs) and c.octant == k for k, c in balanced.payload.items())


def test_refine_keeps_polynomials_at_root():
    tree = refine_adaptive(lambda p: 1.0 + p[:, 0] * p[:, 1], q=4, tol=1e-10, max_depth=5)
    assert tree.leaves == uniform_tree(0).leaves
    assert not tree.warnings


def test_refine_follows_a_sharp_feature():
    center = np.array([0.3, 0.3, 0.3])
    f = lambda p: np.exp(-200.0 * np.sum((p - center) ** 2, axis=1))
    tree = refine_adaptive(f, q=4, tol=1e-3, max_depth=4, min_depth=1)
    assert is_complete(tree)
    near = tree.locate(center[None, :])[0]
    far = tree.locate(np.array([[0.95, 0.95, 0.95]]))[0]
    assert near.level > far.level
    assert set(tree.payload) == set(tree.leaves)


@pytest.mark.parametrize("q", [4, 6])
def test_refine_of_a_plane_wave_is_uniform(q):
    tree = refine_adaptive(lambda p: np.sin(2.0 * np.pi * p[:, 0]), q=q, tol=1e-3, max_depth=4)
    assert len({k.level for k in tree.leaves}) == 1
    assert tree.depth >= 1


def test_layer_refines_below_the_uniform_count():
    f = source_function(TestCase.layer(10.0))
    tree = refine_adaptive(f, q=6, tol=1e-3, max_depth=4, min_depth=1)
    assert tree.depth >= 2
    assert len(tree.leaves) < 8 ** tree.depth
    # leaves crossing the layer sit deeper than the corners
    on_layer = tree.locate(np.array([[0.75, 0.5, 0.5]]))[0]
    corner = tree.locate(np.array([[0.02, 0.02, 0.02]]))[0]
    assert on_layer.level > corner.level


def test_refine_warns_when_depth_runs_out():
    f = lambda p: np.exp(-500.0 * np.sum((p - 0.5) ** 2, axis=1))
    tree = refine_adaptive(f, q=3, tol=1e-12, max_depth=1, tol_mode=ToleranceMode.ABSOLUTE)
    assert tree.depth == 1
    assert tree.warnings


@pytest.mark.parametrize("kwargs", [{"q": 1, "tol": 1e-3}, {"q": 4, "tol": 0.0}, {"q": 4, "tol": 1e-3, "min_depth": 5}])
def test_refine_rejects_bad_arguments(kwargs):
    with pytest.raises(InvalidArgumentError):
        refine_adaptive(lambda p: p[:, 0], max_depth=2, **kwargs)


def test_tree_dump_reloads():
    tree = balance_2to1(center_tree(3), periodic=False)
    text = dump_tree(tree)
    assert text.splitlines()[0].split()[0] == str(tree.leaves[0].level)
    assert load_tree(text).leaves == tree.leaves


def test_load_rejects_partial_cover():
    with pytest.raises(InvalidArgumentError):
        load_tree("1 0 0 0\n1 1 0 0\n")


def test_locate_returns_containing_leaf(rng):
    tree = balance_2to1(corner_tree(3), periodic=True)
    points = rng.random((50, 3))
    for point, leaf in zip(points, tree.locate(points)):
        assert leaf.contains_points(point[None, :])[0]
