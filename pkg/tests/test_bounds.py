import math

import pytest

from hsperc.bounds import (ball_volume_coeff, bounds_table, parse_bounds_csv, render_bounds_csv,
                           render_bounds_text)


def test_ball_volume():
    assert ball_volume_coeff(1) == pytest.approx(2.0)
    assert ball_volume_coeff(2) == pytest.approx(math.pi)
    assert ball_volume_coeff(3) == pytest.approx(4 * math.pi / 3)
    with pytest.raises(ValueError):
        ball_volume_coeff(0)


def rows_by(d, R):
    return {(r.quantity, r.kind): r for r in bounds_table(d, R)}


def test_line():
    t = rows_by(1, 1.0)
    assert t[("critical_intensity", "exact")].lower == math.inf
    assert t[("ce_radius", "exact")].lower == pytest.approx(1 / math.e)


def test_plane():
    t = rows_by(2, 1.0)
    crit = t[("critical_intensity", "rigorous")]
    assert (crit.lower, crit.upper) == (0.174, 0.843)
    assert t[("critical_intensity", "high_confidence")].lower == 0.358
    ce = t[("ce_radius", "rigorous")]
    assert ce.lower == 0.1625 and ce.upper == pytest.approx(0.2342, abs=5e-5)
    # the cluster-expansion window sits below the percolation-based value
    assert ce.upper < t[("critical_intensity", "high_confidence")].lower


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_homogeneity(d):
    a, b = bounds_table(d, 1.0), bounds_table(d, 2.0)
    assert len(a) == len(b)
    for ra, rb in zip(a, b):
        for va, vb in ((ra.lower, rb.lower), (ra.upper, rb.upper)):
            if va is not None and math.isfinite(va):
                assert vb == pytest.approx(va / 2 ** d)


def test_conjecture_is_labelled():
    kinds = {r.kind for r in bounds_table(4, 1.0)}
    assert "conjecture" in kinds and "asymptotic" in kinds


def test_errors():
    with pytest.raises(ValueError):
        bounds_table(0, 1.0)
    with pytest.raises(ValueError):
        bounds_table(2, 0.0)


def test_renderings():
    rows = bounds_table(2, 1.5)
    assert parse_bounds_csv(render_bounds_csv(rows)) == rows
    text = render_bounds_text(rows)
    assert text.splitlines()[0].split() == ["dimension", "quantity", "lower", "upper", "kind"]
