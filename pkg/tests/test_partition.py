import math
import numpy as np
import pytest
from scipy import integrate

from hsperc.estimate import Method
from hsperc.geometry import Configuration, Region
from hsperc.partition import (acceptance_probability, count_law_1d, hard_rod_partition,
                              hard_sphere_count_law_1d, intervals_1d, partition_series_1d,
                              thin_choice, thinning_probability)
from hsperc.sampling import RngStream

UNIT = Region.box([0.0], [1.0])


# -- the hard-rod volume formula, checked by quadrature before use -----------

def test_two_rod_volume_by_quadrature():
    L, R = 1.7, 0.45
    vol, _ = integrate.dblquad(lambda y, x: 1.0, 0, L,
                               lambda x: 0.0, lambda x: max(x - R, 0.0))
    # ordered pairs y < x - R, i.e. half of the unordered volume times 2!/2!
    assert vol == pytest.approx((L - R) ** 2 / 2, rel=1e-9)


def test_three_rod_volume_by_quadrature():
    L, R = 2.0, 0.5
    # ordered triples x < y - R < z - 2R; the unordered volume over 3! equals this
    vol, _ = integrate.tplquad(lambda z, y, x: 1.0, 0, L - 2 * R,
                               lambda x: x + R, lambda x: L - R,
                               lambda x, y: y + R, lambda x, y: L)
    assert vol == pytest.approx((L - 2 * R) ** 3 / 6, rel=1e-9)
    # and the full cube integral of the indicator, by plain Monte Carlo
    u = np.random.default_rng(1).uniform(0, L, (1_000_000, 3))
    d = np.abs(u[:, [0, 0, 1]] - u[:, [1, 2, 2]])
    hit = (d > R).all(axis=1)
    mc = hit.mean() * L ** 3 / 6
    se = hit.std() / 1000 * L ** 3 / 6
    assert abs(mc - (L - 2 * R) ** 3 / 6) < 4 * se


def closed_form(L, lam, R):
    total, n = 0.0, 0
    while n == 0 or L - (n - 1) * R > 0:
        total += lam ** n * max(L - (n - 1) * R, 0) ** n / math.factorial(n)
        n += 1
    return total


@pytest.mark.parametrize("L,lam,R", [(1.0, 2.0, 0.6), (3.7, 1.3, 0.4), (10.0, 2.5, 0.7),
                                     (0.5, 4.0, 1.0)])
def test_series_matches_closed_form(L, lam, R):
    z = partition_series_1d(Region.box([0.0], [L]), None, lam, R)
    assert z.method is Method.SERIES and z.std_error == 0
    assert z.mean == pytest.approx(closed_form(L, lam, R), rel=1e-12)


def test_series_reference_value():
    assert partition_series_1d(UNIT, None, 2.0, 0.6).mean == pytest.approx(3.32, abs=1e-12)
    assert partition_series_1d(UNIT, None, 0.0, 0.6).mean == 1.0


def test_series_boundary_shrinks():
    z0 = partition_series_1d(UNIT, None, 2.0, 0.6).mean
    z1 = partition_series_1d(UNIT, Configuration([[-0.1]], dim=1), 2.0, 0.6).mean
    assert z1 < z0
    assert z1 == pytest.approx(1 + 2 * 0.5)


def test_series_factorises_over_far_intervals():
    a, b = Region.box([0.0], [1.3]), Region.box([2.5], [4.0])
    lam, R = 1.7, 0.8
    z = partition_series_1d([a, b], None, lam, R).mean
    za = partition_series_1d(a, None, lam, R).mean
    zb = partition_series_1d(b, None, lam, R).mean
    assert z == pytest.approx(za * zb, rel=1e-12)


def test_series_on_near_intervals_matches_mc():
    # gap below R: the intervals interact, no product form
    parts = [Region.box([0.0], [1.0]), Region.box([1.3], [2.0])]
    lam, R = 1.5, 0.5
    z = partition_series_1d(parts, None, lam, R).mean
    acc = acceptance_probability(parts, None, lam, R, 200_000, RngStream(2))
    assert acc.covers(z * math.exp(-lam * 1.7), k=4)
    with pytest.raises(ValueError):
        count_law_1d(Region.box([0.0], [2.0]).minus_balls([[1.15]], 0.15), None, lam, R)


def test_domain_monotonicity():
    zs = [partition_series_1d(Region.box([0.0], [L]), None, 1.5, 0.4).mean
          for L in np.linspace(0.1, 3, 15)]
    assert all(b >= a for a, b in zip(zs, zs[1:]))


def test_series_is_1d_only():
    with pytest.raises(ValueError, match="1D only"):
        partition_series_1d(Region.cube(1.0, 2), None, 1.0, 0.5)


def test_intervals_of_carved_region():
    r = Region.box([0.0], [4.0]).minus_balls([[1.0]], 0.5).restrict_to_balls([[2.0]], 1.8)
    assert np.allclose(intervals_1d(r), [(0.2, 0.5), (1.5, 3.8)])


def test_acceptance_probability():
    assert acceptance_probability(UNIT, None, 0.0, 0.6, 10, RngStream(0)).mean == 1.0
    assert acceptance_probability(UNIT, None, 2.0, 0.0, 10, RngStream(0)).mean == 1.0
    with pytest.raises(ValueError):
        acceptance_probability(UNIT, None, 2.0, 0.6, 0, RngStream(0))
    est = acceptance_probability(UNIT, None, 2.0, 0.6, 100_000, RngStream(1))
    assert est.covers(3.32 / math.e ** 2)


def test_boundary_lowers_acceptance_per_draw():
    # paired: same draws, an extra condition point can only reject more
    c = Configuration([[-0.2, 0.5]])
    a0 = acceptance_probability(Region.cube(1.0, 2), None, 2.0, 0.3, 5000, RngStream(6))
    a1 = acceptance_probability(Region.cube(1.0, 2), c, 2.0, 0.3, 5000, RngStream(6))
    assert a1.mean <= a0.mean


def test_thinning_probability_shortcuts():
    c = Configuration([[-0.1]], dim=1)
    assert thinning_probability([0.3], c, None, UNIT.clip_lower(0, 0.3), 2.0, 0.6).mean == 0.0
    p = thinning_probability([0.5], None, None, UNIT.clip_lower(0, 0.5), 2.0, 0.0)
    assert p.mean == 1.0 and p.is_exact


def test_thinning_probability_exact_vs_mc():
    x = 0.5
    rem = UNIT.clip_lower(0, x)
    exact = thinning_probability([x], None, None, rem, 2.0, 0.6, exact=True)
    # numerator: every point of [0.5, 1] is within 0.6 of x, so Z = 1
    assert exact.mean == pytest.approx(1 / (1 + 2 * 0.5))
    mc = thinning_probability([x], None, None, rem, 2.0, 0.6, 50_000, RngStream(3))
    assert mc.method is Method.MC_PAIRED
    assert abs(mc.mean - exact.mean) < 4 * mc.std_error


def test_thinning_probability_2d_in_unit_interval():
    rng = RngStream(9)
    r = Region.cube(1.0, 2)
    for x in np.random.default_rng(0).uniform(0, 1, (10, 2)):
        p = thinning_probability(x, None, None, r.clip_lower(0, x[0]), 3.0, 0.3, 500, rng)
        assert 0.0 <= p.mean <= 1.0


def test_thin_choice():
    assert thin_choice(None, False, 0.0) == 1.0
    assert thin_choice(None, True, 1.0) == 1.0
    assert thin_choice(None, True, 0.3) + thin_choice(None, False, 0.3) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        thin_choice(None, True, 1.5)


def test_count_laws():
    law = hard_sphere_count_law_1d(1.0, 2.0, 0.6)
    assert law == pytest.approx([1 / 3.32, 2 / 3.32, 0.32 / 3.32])
    with_bc = count_law_1d(UNIT, Configuration([[-0.1], [1.2]], dim=1), 2.0, 0.3)
    assert with_bc == pytest.approx(hard_sphere_count_law_1d(0.7, 2.0, 0.3))


def test_ratio_estimator_error_shrinks_with_budget():
    x = 0.2
    rem = UNIT.clip_lower(0, x)
    exact = thinning_probability([x], None, None, rem, 2.0, 0.3, exact=True).mean
    rmse = []
    for n_mc in (1_000, 10_000, 100_000):
        errs = [thinning_probability([x], None, None, rem, 2.0, 0.3, n_mc,
                                     RngStream(n_mc, k)).mean - exact for k in range(20)]
        rmse.append(float(np.sqrt(np.mean(np.square(errs)))))
    assert rmse[0] > rmse[1] > rmse[2]
    assert rmse[2] < 0.01
