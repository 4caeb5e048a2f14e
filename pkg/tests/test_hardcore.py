import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hsperc.geometry import Configuration, Region
from hsperc.hardcore import (UNBOUNDED, BoundaryCondition, chain_identity_check, hamiltonian,
                             hs_size_bound, is_hard_core)


def test_strict_inequality():
    assert is_hard_core(Configuration([[0, 0], [1, 0]]), Configuration.empty(2), 0.999) == 1
    # distance exactly R is a conflict
    assert is_hard_core(Configuration([[0, 0], [1, 0]]), Configuration.empty(2), 1.0) == 0
    assert is_hard_core(Configuration([[0, 0], [0.5, 0]]), Configuration.empty(2), 1.0) == 0
    assert is_hard_core(Configuration([[0, 0]]), Configuration([[2, 0]]), 1.0) == 1
    assert is_hard_core(Configuration([[0, 0]]), Configuration([[0.9, 0]]), 1.0) == 0


def test_empty_is_always_hard_core():
    assert is_hard_core(Configuration.empty(2), Configuration([[0, 0]]), 5.0) == 1


def test_overlapping_inputs_rejected():
    with pytest.raises(ValueError, match="disjoint"):
        is_hard_core(Configuration([[0, 0]]), Configuration([[0, 0]]), 1.0)


def test_hamiltonian():
    assert hamiltonian(Configuration([[0.0], [2.0]], dim=1), Configuration.empty(1), 1.0) == 0
    assert hamiltonian(Configuration([[0.0], [0.5]], dim=1), Configuration.empty(1), 1.0) == math.inf


def test_large_configuration_uses_tree_consistently():
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 100, (400, 2))
    c = Configuration(pts)
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    np.fill_diagonal(d, np.inf)
    R = float(d.min()) * 0.999
    assert is_hard_core(c, Configuration.empty(2), R) == 1
    assert is_hard_core(c, Configuration.empty(2), float(d.min())) == 0


pts = st.lists(st.tuples(st.floats(0, 3), st.floats(0, 3)), max_size=6, unique=True)


@settings(max_examples=200, deadline=None)
@given(pts, pts, pts, st.floats(0.05, 1.5))
def test_chain_identity(x, y, z, R):
    x, y, z = set(x), set(y) - set(x), set(z) - set(x) - set(y)
    cfg = [Configuration(sorted(s), dim=2) if s else Configuration.empty(2) for s in (x, y, z)]
    assert chain_identity_check(*cfg, R)


def test_size_bound():
    assert hs_size_bound(Region.box([0.0], [1.0]), 0.6) == 2
    assert hs_size_bound(Region.box([0.0], [1.0]), 0.0) == UNBOUNDED
    assert hs_size_bound(Region.empty(2), 1.0) == 0
    # a packing at spacing just above R fits under the bound
    r = Region.cube(3.0, 2)
    g = np.arange(0, 3.001, 1.001)
    pack = np.array([(a, b) for a in g for b in g])
    assert is_hard_core(Configuration(pack), Configuration.empty(2), 1.0)
    assert len(pack) <= hs_size_bound(r, 1.0)


def test_boundary_condition():
    r = Region.box([0.0], [1.0])
    with pytest.raises(ValueError):
        BoundaryCondition.of([[0.5]], r)
    bc = BoundaryCondition.of([[-0.5], [3.0]], r)
    assert len(bc.restricted_to_ring(1.0)) == 1
