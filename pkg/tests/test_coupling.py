import numpy as np
import pytest

from hsperc.coupling import (RecursionCapExceeded, check_coupling, disagreement_connected,
                             read_samples, sample_record, thin_to_hard_sphere, twisted_couple,
                             twisted_zone, write_samples)
from hsperc.geometry import Configuration, Region
from hsperc.hardcore import BoundaryCondition, is_hard_core
from hsperc.partition import count_law_1d
from hsperc.sampling import RngStream
from hsperc.stattests import count_gof

UNIT = Region.box([0.0], [1.0])
SQUARE = Region.cube(1.0, 2)


def cfg(points, dim):
    return Configuration(points, dim=dim) if len(points) else Configuration.empty(dim)


def test_thinning_trivial_cases():
    p = thin_to_hard_sphere(UNIT, None, 0.0, 0.6, rng=RngStream(0))
    assert len(p.kept) == 0 and len(p.dominating) == 0
    rng = RngStream(1)
    for _ in range(20):
        p = thin_to_hard_sphere(SQUARE, None, 3.0, 0.0, rng=rng)
        assert p.kept == p.dominating


def test_thinning_structure_2d():
    rng = RngStream(2)
    c = Configuration([[-0.1, 0.5], [1.2, 0.2]])
    for _ in range(50):
        p = thin_to_hard_sphere(SQUARE, c, 2.0, 0.3, 300, rng)
        assert p.kept.issubset(p.dominating)
        assert is_hard_core(p.kept, c, 0.3)
        assert all(0.0 <= q <= 1.0 for q in p.probabilities)


def test_thinning_law_1d_mc_estimator():
    rng = RngStream(3)
    n = np.array([len(thin_to_hard_sphere(UNIT, None, 2.0, 0.6, 2000, rng).kept)
                  for _ in range(2000)])
    assert count_gof(n, count_law_1d(UNIT, None, 2.0, 0.6)) > 0.001


def test_thinning_with_boundary_exact_1d():
    rng = RngStream(4)
    c = Configuration([[-0.1], [1.25]], dim=1)
    n = np.array([len(thin_to_hard_sphere(UNIT, c, 3.0, 0.3, rng=rng, exact=True).kept)
                  for _ in range(3000)])
    assert count_gof(n, count_law_1d(UNIT, c, 3.0, 0.3)) > 0.001


def test_zone_equal_boundaries():
    c = Configuration([[-0.2, 0.5]])
    rng = RngStream(5)
    for _ in range(20):
        x1, x2, x3 = twisted_zone(SQUARE, c, c, 3.0, 0.3, 200, rng)
        assert len(x1) == 0 and len(x2) == 0
        # Poisson on D0 = the part of the square within R of c
        assert np.all(np.linalg.norm(x3.points - c.points[0], axis=1) <= 0.3)


def test_zone_zero_activity_and_disjointness():
    c1 = Configuration([[-0.2, 0.2]])
    c2 = Configuration([[-0.2, 0.7], [0.5, 1.1]])
    x1, x2, x3 = twisted_zone(SQUARE, c1, c2, 0.0, 0.3, 100, RngStream(6))
    assert len(x1) == len(x2) == len(x3) == 0
    rng = RngStream(7)
    for _ in range(100):
        x1, x2, x3 = twisted_zone(SQUARE, c1, c2, 4.0, 0.3, 200, rng)
        assert x1.isdisjoint(x2)
        assert x1.union(x2).issubset(x3)


def test_zone_requires_disagreement_zone():
    with pytest.raises(ValueError, match="nonempty disagreement zone"):
        twisted_zone(SQUARE, None, Configuration([[5.0, 5.0]]), 1.0, 0.3, 100, RngStream(0))


def test_twisted_equal_boundaries_agree():
    c = Configuration([[-0.1]], dim=1)
    rng = RngStream(8)
    for _ in range(50):
        s = twisted_couple(UNIT, c, c, 2.0, 0.3, rng=rng, exact=True)
        assert s.xi1 == s.xi2
        # one zone step where only the doubly blocked part is non-empty,
        # then the agreeing thinning on the rest
        assert s.trace.depth == 2
        assert s.trace.steps[0].placed["xi1"] == 0 == s.trace.steps[0].placed["xi2"]


def test_twisted_unreachable_boundary():
    far = Configuration([[3.0]], dim=1)
    s = twisted_couple(UNIT, None, far, 2.0, 0.3, rng=RngStream(9), exact=True)
    assert s.xi1 == s.xi2


def test_twisted_assertions_2d():
    rng = RngStream(10)
    c1 = Configuration([[-0.1, 0.2], [0.6, -0.15]])
    c2 = Configuration([[1.1, 0.5], [-0.25, 0.8]])
    for _ in range(100):
        s = twisted_couple(SQUARE, c1, c2, 2.0, 0.3, 300, rng)
        assert all(check_coupling(s, 0.3).values())
        assert s.trace.terminated


def test_ring_restriction_is_bitwise_identical():
    c1 = Configuration([[-0.1, 0.2], [-3.0, 0.0], [5.0, 5.0]])
    c2 = Configuration([[1.2, 0.5], [0.5, 7.0]])
    b1 = BoundaryCondition.of(c1, SQUARE)
    b2 = BoundaryCondition.of(c2, SQUARE)
    for seed in range(5):
        full = twisted_couple(SQUARE, b1, b2, 2.0, 0.3, 200, RngStream(seed))
        ring = twisted_couple(SQUARE, b1.restricted_to_ring(0.3), b2.restricted_to_ring(0.3),
                              2.0, 0.3, 200, RngStream(seed))
        assert (full.xi1, full.xi2, full.xi3) == (ring.xi1, ring.xi2, ring.xi3)


def test_determinism():
    c2 = Configuration([[1.1, 0.5]])
    a = twisted_couple(SQUARE, None, c2, 2.0, 0.3, 200, RngStream(3, 4))
    b = twisted_couple(SQUARE, None, c2, 2.0, 0.3, 200, RngStream(3, 4))
    assert a == b
    assert a.seed == 3 and a.stream_id == 4


def test_depth_within_cap_on_random_instances():
    g = np.random.default_rng(11)
    for k in range(200):
        R = g.uniform(0.1, 0.4)
        c1 = Configuration(np.c_[g.uniform(-R, 0, 2), g.uniform(0, 1, 2)])
        c2 = Configuration(np.c_[g.uniform(1, 1 + R, 3), g.uniform(0, 1, 3)])
        s = twisted_couple(SQUARE, c1, c2, 2.0, R, 100, RngStream(11, k))
        assert s.trace.depth <= s.trace.cap


def test_cap_exceeded_is_reported(monkeypatch):
    import hsperc.coupling as cp
    monkeypatch.setattr(cp, "hs_size_bound", lambda r, R: -1)
    with pytest.raises(RecursionCapExceeded) as err:
        twisted_couple(UNIT, None, Configuration([[-0.1]], dim=1), 3.0, 0.3,
                       rng=RngStream(0), exact=True)
    assert err.value.trace.depth >= 1


def test_disagreement_connected():
    R = 1.0
    c1 = Configuration([[-0.5, 0.0]])
    c2 = Configuration.empty(2)
    chain = Configuration([[0.4, 0.0], [1.3, 0.0]])
    assert disagreement_connected(chain, Configuration.empty(2), c1, c2, R)
    broken = Configuration([[0.4, 0.0], [2.5, 0.0]])
    assert not disagreement_connected(broken, Configuration.empty(2), c1, c2, R)
    assert disagreement_connected(chain, chain, c1, c1, R)


def test_sample_file_round_trip(tmp_path):
    rng = RngStream(12)
    recs = []
    for i in range(3):
        s = twisted_couple(SQUARE, None, Configuration([[1.1, 0.5]]), 3.0, 0.3, 100, rng)
        recs.append(sample_record(i, rng, s.xi1, s.xi2, s.xi3))
    path = tmp_path / "s.jsonl"
    write_samples(path, recs, 2)
    back = read_samples(path)
    assert path.read_text().startswith("# hsperc-samples v1 dim=2")
    for a, b in zip(recs, back):
        assert b["replica"] == a["replica"] and b["seed"] == 12
        for k in ("points1", "points2", "points3"):
            assert b[k] == a[k]
