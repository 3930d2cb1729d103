from itertools import product

import pytest

from conftest import center_tree, corner_tree
from src.octree.lists import ZERO_SHIFT, build_interaction_lists, images_adjacent
from src.octree.morton import ROOT
from src.octree.tree import balance_2to1, uniform_tree
from src.shared.errors import PreconditionError


def test_uniform_periodic_counts():
    tree = balance_2to1(uniform_tree(2), periodic=True)
    lists = build_interaction_lists(tree, periodic=True)
    counts = lists.counts()
    assert counts["n_leaf"] == 64
    assert counts["n_oct"] == 1 + 8 + 64
    assert counts["n_u"] == 27 * 64
    assert all(len(lists.u[leaf]) == 27 for leaf in tree.leaves)
    assert all(len(lists.v[key]) == 189 for key in lists.octants if key.level > 0)
    assert lists.v[ROOT] == []
    assert counts["n_w"] == 0 and counts["n_x"] == 0


def test_uniform_free_space_interior_counts():
    tree = balance_2to1(uniform_tree(3), periodic=False)
    lists = build_interaction_lists(tree, periodic=False)
    interior = [k for k in tree.leaves if all(2 <= c <= 5 for c in k.anchor)]
    assert interior
    assert all(len(lists.u[k]) == 27 for k in interior)
    assert all(len(lists.v[k]) == 189 for k in interior)
    corner = tree.leaves[0]
    assert len(lists.u[corner]) == 8


def test_root_only_tree():
    tree = balance_2to1(uniform_tree(0), periodic=False)
    lists = build_interaction_lists(tree, periodic=False)
    assert lists.u[ROOT] == [(ROOT, ZERO_SHIFT)]
    assert lists.v[ROOT] == [] and lists.w[ROOT] == [] and lists.x[ROOT] == []


def test_unbalanced_tree_rejected():
    with pytest.raises(PreconditionError):
        build_interaction_lists(center_tree(4), periodic=False)


def _ancestors_or_self(key):
    out = [key]
    while key.level > 0:
        key = key.parent()
        out.append(key)
    return out


@pytest.mark.parametrize("periodic,make", [(False, center_tree), (True, center_tree), (True, corner_tree)])
def test_every_source_image_is_counted_once(periodic, make):
    tree = balance_2to1(make(3), periodic)
    lists = build_interaction_lists(tree, periodic)
    assert lists.counts()["n_w"] > 0 and lists.counts()["n_x"] > 0
    u = {k: set(v) for k, v in lists.u.items()}
    v = {k: set(s) for k, s in lists.v.items()}
    w = {k: set(s) for k, s in lists.w.items()}
    x = {k: set(s) for k, s in lists.x.items()}
    shifts = list(product((-1, 0, 1), repeat=3)) if periodic else [ZERO_SHIFT]

    for target in tree.leaves:
        target_chain = _ancestors_or_self(target)
        for source in tree.leaves:
            source_chain = _ancestors_or_self(source)
            for shift in shifts:
                hits = int((source, shift) in u[target])
                hits += sum((c, shift) in w[target] for c in source_chain)
                for t in target_chain:
                    hits += int((source, shift) in x[t])
                    hits += sum((c, shift) in v[t] for c in source_chain)
                assert hits == 1, (target, source, shift, hits)


@pytest.mark.parametrize("periodic", [False, True])
def test_list_geometry(periodic):
    tree = balance_2to1(center_tree(4), periodic)
    lists = build_interaction_lists(tree, periodic)
    for leaf in tree.leaves:
        for source, shift in lists.u[leaf]:
            assert images_adjacent(leaf, ZERO_SHIFT, source, shift)
            assert abs(source.level - leaf.level) <= 1
        for source, shift in lists.w[leaf]:
            assert source.level == leaf.level + 1
            assert not images_adjacent(leaf, ZERO_SHIFT, source, shift)
            assert images_adjacent(leaf, ZERO_SHIFT, source.parent(), shift)
    for key in lists.octants:
        for source, shift in lists.v[key]:
            assert source.level == key.level
            assert not images_adjacent(key, ZERO_SHIFT, source, shift)
        for source, shift in lists.x[key]:
            assert source.level == key.level - 1
            assert tree.is_leaf(source)


def test_lists_are_sorted():
    tree = balance_2to1(center_tree(4), periodic=True)
    lists = build_interaction_lists(tree, periodic=True)
    for table in (lists.u, lists.v, lists.w, lists.x):
        for entries in table.values():
            order = [(k.sort_key, s) for k, s in entries]
            assert order == sorted(order)
