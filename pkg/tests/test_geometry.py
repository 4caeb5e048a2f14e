import numpy as np
import pytest

from hsperc.geometry import (Configuration, Region, as_parts, distance, lex_sort,
                             order_less, reaching, region_volume, ring_region)
from hsperc.sampling import RngStream


def test_configuration_is_a_sorted_set():
    c = Configuration([[1, 0], [0, 2], [0, 1]])
    assert list(c) == [(0.0, 1.0), (0.0, 2.0), (1.0, 0.0)]
    assert (0.0, 2.0) in c and (2.0, 2.0) not in c
    with pytest.raises(ValueError):
        Configuration([[0, 0], [0, 0]])
    with pytest.raises(ValueError):
        Configuration([[0, np.nan]])


def test_set_operations():
    a = Configuration([[0.0], [1.0], [2.0]], dim=1)
    b = Configuration([[1.0], [3.0]], dim=1)
    assert a.union(b) == Configuration([[0.0], [1.0], [2.0], [3.0]], dim=1)
    assert a.intersection(b) == Configuration([[1.0]], dim=1)
    assert a.difference(b) == Configuration([[0.0], [2.0]], dim=1)
    assert a.symmetric_difference(b) == Configuration([[0.0], [2.0], [3.0]], dim=1)
    assert a.intersection(b).issubset(a)
    assert a.difference(b).isdisjoint(b)
    assert len(Configuration.empty(2)) == 0


def test_lexicographic_order():
    assert order_less((0, 5), (1, 0))
    assert order_less((1, 0), (1, 0.5))
    assert not order_less((1, 0), (1, 0))
    pts = np.array([[1.0, 0.0], [0.0, 2.0], [0.0, 1.0]])
    assert lex_sort(pts).tolist() == [[0.0, 1.0], [0.0, 2.0], [1.0, 0.0]]
    assert distance((0, 0), (3, 4)) == 5.0


def test_region_membership_is_closed():
    r = Region.cube(1.0, 2).minus_balls([[0.5, 0.5]], 0.25)
    assert r.contains([[0.0, 0.0], [1.0, 1.0]]).all()
    assert not r.contains([[0.5, 0.75]])[0]  # on the removed sphere
    assert r.contains([[0.5, 0.76]])[0]
    assert not r.contains([[1.01, 0.5]])[0]


def test_restrictions_and_bounding_box():
    r = Region.cube(4.0, 2).restrict_to_balls([[0.0, 0.0], [4.0, 0.0]], 1.0)
    lo, hi = r.bounding_box()
    assert lo.tolist() == [0.0, 0.0] and hi.tolist() == [4.0, 1.0]
    assert r.contains([[0.5, 0.5]])[0] and not r.contains([[2.0, 0.5]])[0]
    assert r.restrict_to_balls(np.empty((0, 2)), 1.0).is_void
    assert Region.empty(3).is_void


def test_clip_lower():
    r = Region.cube(1.0, 2).clip_lower(0, 0.4)
    assert r.lo.tolist() == [0.4, 0.0]
    assert not r.contains([[0.3, 0.5]])[0]


def test_box_volume_exact_and_mc():
    assert region_volume(Region.box([0, 0], [2, 3]), 0, None).mean == 6.0
    disk = Region.cube(2.0, 2, origin=-1.0).restrict_to_balls([[0.0, 0.0]], 1.0)
    est = region_volume(disk, 200_000, RngStream(1))
    assert est.covers(np.pi)
    with pytest.raises(ValueError):
        region_volume(disk, 0, None)


def test_box_distance():
    r = Region.box([0, 0], [1, 1])
    assert r.distance([[2, 1], [0.5, 0.5], [-3, -4]]).tolist() == [1.0, 0.0, 5.0]


def test_ring_region():
    base = Region.box([0.0], [1.0])
    ring = ring_region(base, np.array([[-0.5], [5.0]]), 0.7)
    assert 0.1 in ring and 0.3 not in ring
    assert len(reaching(np.array([[-0.5], [5.0]]), base, 0.7)) == 1
    with pytest.raises(ValueError):
        ring_region(base, np.array([[0.5]]), 0.7)


def test_restrict_configuration():
    c = Configuration([[0.2], [0.8], [1.5]], dim=1)
    parts = as_parts([Region.box([0.0], [0.5]), Region.box([1.0], [2.0])])
    assert c.restrict(parts) == Configuration([[0.2], [1.5]], dim=1)
