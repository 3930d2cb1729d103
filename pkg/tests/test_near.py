import numpy as np
import pytest

from src.fmm.near import (
    admissible_offsets,
    canonical_classes,
    canonical_offset,
    direct_table,
    precompute_near_tables,
    relative_placement,
)
from src.octree.morton import MortonKey
from src.shared.errors import InvalidArgumentError

Q = 3


@pytest.fixture(scope="module")
def tables():
    return precompute_near_tables(Q)


def test_admissible_offsets():
    assert len(admissible_offsets(0)) == 27
    assert len(admissible_offsets(1)) == 56
    assert len(admissible_offsets(-1)) == 56
    with pytest.raises(InvalidArgumentError):
        admissible_offsets(2)


def test_ten_canonical_classes():
    classes = canonical_classes()
    assert len(classes) == 10
    assert (0, (0, 0, 0)) in classes
    assert (1, (3, 1, 1)) in classes
    assert (-1, (6, 6, 6)) in classes


def test_canonical_offset_sorts_magnitudes():
    canon, flips, perm = canonical_offset((-1, 3, -1))
    assert canon == (3, 1, 1)
    assert flips == (True, False, True)
    assert perm[0] == 1


@pytest.mark.parametrize("level_diff,offset", [
    (0, (0, -4, 4)),
    (0, (-4, 4, -4)),
    (1, (-1, 3, -1)),
    (1, (3, -3, 1)),
    (-1, (2, -6, -2)),
    (-1, (-6, 2, 6)),
])
def test_derived_tables_match_direct_quadrature(tables, level_diff, offset):
    derived = tables.full(level_diff, offset)
    direct = direct_table(Q, level_diff, offset)
    scale = np.abs(direct).max()
    np.testing.assert_allclose(derived, direct, atol=1e-9 * scale)


def test_relative_placement():
    target = MortonKey(2, 1, 1, 1)
    assert relative_placement(target, MortonKey(2, 2, 1, 1)) == (0, (4, 0, 0))
    assert relative_placement(target, MortonKey(3, 1, 2, 4)) == (1, (-3, -1, 3))
    assert relative_placement(target, MortonKey(1, 1, 1, 1)) == (-1, (6, 6, 6))
    assert relative_placement(MortonKey(2, 3, 0, 0), MortonKey(2, 0, 0, 0), (1, 0, 0)) == (0, (4, 0, 0))


def test_apply_scales_with_target_side(tables, rng):
    coeffs = rng.standard_normal(tables.matrix(0, (0, 0, 0)).shape[1])
    small = tables.apply(MortonKey(3, 2, 2, 2), MortonKey(3, 3, 2, 2), (0, 0, 0), coeffs)
    large = tables.apply(MortonKey(1, 0, 0, 0), MortonKey(1, 1, 0, 0), (0, 0, 0), coeffs)
    np.testing.assert_allclose(small, large / 16.0, rtol=1e-13)


def test_disk_cache_round_trip(tmp_path):
    first = precompute_near_tables(Q, cache_dir=str(tmp_path))
    files = list(tmp_path.glob("near_q3_*.npz"))
    assert len(files) == 1
    second = precompute_near_tables(Q, cache_dir=str(tmp_path))
    for key in first.classes:
        np.testing.assert_array_equal(second.full(*key), first.full(*key))


def test_corrupt_cache_is_regenerated(tmp_path):
    precompute_near_tables(2, cache_dir=str(tmp_path))
    path = next(tmp_path.glob("near_q2_*.npz"))
    path.write_bytes(b"not an npz file")
    rebuilt = precompute_near_tables(2, cache_dir=str(tmp_path))
    assert len(rebuilt.classes) == 10
    np.testing.assert_allclose(rebuilt.full(0, (0, 0, 0)), direct_table(2, 0, (0, 0, 0)), rtol=1e-12)


def test_order_below_two_rejected():
    with pytest.raises(InvalidArgumentError):
        precompute_near_tables(1)
