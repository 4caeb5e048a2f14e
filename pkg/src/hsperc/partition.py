"""Partition functions, acceptance probabilities and thinning probabilities.

The thinning probability of a point ``x`` given the points already kept is
the ratio of two partition functions of the unexplored remainder, with and
without ``x`` added to the condition. It is the probability that a hard-sphere
configuration on the remainder leaves the ball around ``x`` empty.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .estimate import Estimate, Method
from .geometry import Region, as_parts, as_point_array, reaching
from .sampling import conflicting_draws, poisson_batch

__all__ = [
    "DEFAULT_N_MC",
    "Estimate",
    "Method",
    "acceptance_probability",
    "count_law_1d",
    "hard_sphere_count_law_1d",
    "hard_rod_partition",
    "intervals_1d",
    "partition_series_1d",
    "thin_choice",
    "thinning_probability",
]

DEFAULT_N_MC = 20_000


# -- 1D interval arithmetic -------------------------------------------------

def _merge(intervals) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for a, b in sorted(intervals):
        if b <= a:
            continue
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def _intersect(xs, ys) -> list[tuple[float, float]]:
    out, i, j = [], 0, 0
    while i < len(xs) and j < len(ys):
        a, b = max(xs[i][0], ys[j][0]), min(xs[i][1], ys[j][1])
        if a < b:
            out.append((a, b))
        if xs[i][1] < ys[j][1]:
            i += 1
        else:
            j += 1
    return out


def _subtract(xs, holes) -> list[tuple[float, float]]:
    out = []
    for a, b in xs:
        cur = a
        for h0, h1 in holes:
            if h1 <= cur or h0 >= b:
                continue
            if h0 > cur:
                out.append((cur, h0))
            cur = max(cur, h1)
            if cur >= b:
                break
        if cur < b:
            out.append((cur, b))
    return out


def _balls_1d(centers: np.ndarray, radii: np.ndarray) -> list[tuple[float, float]]:
    return _merge(zip((centers[:, 0] - radii).tolist(), (centers[:, 0] + radii).tolist()))


def intervals_1d(region: Region | Sequence[Region]) -> list[tuple[float, float]]:
    """A 1D region (or disjoint union of regions) as sorted disjoint intervals.

    Endpoints are not tracked as open or closed; they have measure zero.
    """
    pieces = []
    for part in as_parts(region):
        if part.dim != 1:
            raise ValueError("series oracle is 1D only")
        iv = [(float(part.lo[0]), float(part.hi[0]))]
        iv = _merge(iv)
        for centers, radii in part.restrictions:
            iv = _intersect(iv, _balls_1d(centers, radii))
        if len(part.removed[0]):
            iv = _subtract(iv, _balls_1d(*part.removed))
        pieces.extend(iv)
    return _merge(pieces)


# -- exact 1D hard-rod partition function -----------------------------------

def hard_rod_partition(intervals, lam: float, R: float) -> float:
    """Hard-rod partition function on a finite union of intervals.

    With ``f(t)`` the partition function of ``U ∩ (t, inf)``, splitting off
    the leftmost point gives the delay equation

        f(t) = 1 + lam * ∫_{y > t, y in U} f(y + R) dy,    f = 1 right of U,

    solved backwards with piecewise polynomials on a breakpoint grid closed
    under shifts by ``R``.
    """
    iv = _merge(intervals)
    if not iv or lam == 0.0:
        return 1.0
    if R <= 0.0:
        return math.exp(lam * sum(b - a for a, b in iv))
    bottom, top = iv[0][0], iv[-1][1]
    ends = sorted({e for ab in iv for e in ab})
    bps = []
    for e in ends:
        k_lo = -math.floor((e - bottom) / R)
        k_hi = math.floor((top - e) / R)
        bps.extend(e + k * R for k in range(k_lo, k_hi + 1))
    bps = np.unique(np.clip(bps, bottom, top))
    tol = 1e-12 * max(1.0, abs(bottom), abs(top), R)
    keep = np.concatenate([[True], np.diff(bps) > tol])
    bps = bps[keep]
    bps[-1] = top
    m = len(bps)
    if m < 2:
        return 1.0
    starts = np.array([a for a, _ in iv])
    stops = np.array([b for _, b in iv])

    pieces: list[np.ndarray | None] = [None] * (m - 1)
    f_right = 1.0
    for j in range(m - 2, -1, -1):
        h = bps[j + 1] - bps[j]
        mid = bps[j] + 0.5 * h
        k = np.searchsorted(starts, mid, side="right") - 1
        in_u = k >= 0 and mid < stops[k]
        if not in_u:
            poly = np.array([f_right])
        else:
            shifted = mid + R
            if shifted >= top:
                g = np.array([1.0])
            else:
                seg = int(np.searchsorted(bps, shifted, side="right") - 1)
                g = pieces[seg]
            # antiderivative G with G(0) = 0, in the local variable s
            G = np.concatenate([[0.0], g / np.arange(1, len(g) + 1)])
            G_h = np.polyval(G[::-1], h)
            poly = -lam * G
            poly[0] += f_right + lam * G_h
        pieces[j] = poly
        f_right = float(poly[0])
    return f_right


def _condition_points(c, dim: int) -> np.ndarray:
    if c is None:
        return np.empty((0, dim))
    return as_point_array(c, dim)


def partition_series_1d(interval: Region | Sequence[Region], c, lam: float,
                        R: float) -> Estimate:
    """Exact hard-rod partition function ``Z(interval, c, lam)`` in 1D.

    Equals ``sum_n lam^n / n! * Vol_n`` where ``Vol_n`` is the volume of
    admissible ``n``-point configurations given the boundary condition.
    """
    parts = as_parts(interval)
    if any(p.dim != 1 for p in parts):
        raise ValueError("series oracle is 1D only")
    if lam < 0 or R < 0:
        raise ValueError("activity and radius must be non-negative")
    iv = intervals_1d(parts)
    cp = _condition_points(c, 1)
    if len(cp) and R > 0:
        iv = _subtract(iv, _merge(zip((cp[:, 0] - R).tolist(), (cp[:, 0] + R).tolist())))
    return Estimate(hard_rod_partition(iv, lam, R), 0.0, 0, Method.SERIES)


# -- Monte Carlo estimators -------------------------------------------------

def acceptance_probability(r: Region | Sequence[Region], c, lam: float, R: float,
                           n_mc: int, rng) -> Estimate:
    """Probability that a Poisson draw on ``r`` satisfies ``H(draw | c) = 1``.

    Multiplying by ``exp(lam * |r|)`` gives the partition function.
    """
    if n_mc <= 0:
        raise ValueError("acceptance estimator requires n_mc > 0")
    parts = as_parts(r)
    if lam == 0.0 or R == 0.0:
        return Estimate.exact(1.0)
    pts, ids = poisson_batch(parts, lam, n_mc, rng)
    bad = conflicting_draws(pts, ids, n_mc, R)
    cp = _condition_points(c, parts[0].dim)
    if len(cp) and len(pts):
        d2 = ((pts[:, None, :] - cp[None, :, :]) ** 2).sum(axis=2)
        bad[ids[np.any(d2 <= R * R, axis=1)]] = True
    est = Estimate.binomial(int((~bad).sum()), n_mc)
    return Estimate(est.mean, est.std_error, n_mc, Method.MC_PLAIN)


def _prune(parts: Sequence[Region], cond: np.ndarray, R: float) -> list[Region]:
    """Remove the balls around condition points from each part.

    The partition function is unchanged by this since no admissible point
    may sit in those balls.
    """
    out = []
    for p in parts:
        if p.is_void:
            continue
        near = reaching(cond, p, R)
        out.append(p.minus_balls(near, R) if len(near) else p)
    return out


def thinning_probability(x, c, y_before, remaining: Region | Sequence[Region],
                         lam: float, R: float, n_mc: int = DEFAULT_N_MC, rng=None,
                         *, exact: bool = False) -> Estimate:
    """Probability of keeping Poisson point ``x`` in the dependent thinning.

    ``H({x} | c ∪ y_before) * Z(remaining, c ∪ y_before ∪ {x}) /
    Z(remaining, c ∪ y_before)``.

    Parameters
    ----------
    x : point
        The point being decided.
    c : BoundaryCondition, Configuration or array
        The fixed boundary condition.
    y_before : Configuration or array
        Points already kept, all earlier than ``x`` in the visiting order.
    remaining : Region or sequence of disjoint Regions
        The part of the domain visited after ``x``.
    exact : bool
        Use the exact 1D series for both partition functions instead of the
        paired Monte Carlo estimator.

    Raises
    ------
    RuntimeError
        If every Monte Carlo draw violates the condition; the empty
        configuration is always admissible, so this signals a bug or a
        hopelessly large remainder.
    """
    parts = as_parts(remaining)
    dim = parts[0].dim
    xp = np.asarray(x, dtype=float).reshape(dim)
    cond = np.concatenate([_condition_points(c, dim), _condition_points(y_before, dim)])
    if R > 0 and len(cond) and np.any(((cond - xp) ** 2).sum(axis=1) <= R * R):
        return Estimate.exact(0.0)
    if R == 0.0 or lam == 0.0:
        return Estimate.exact(1.0)
    pruned = _prune(parts, cond, R)
    if exact:
        iv = intervals_1d(pruned) if pruned else []
        z_den = hard_rod_partition(iv, lam, R)
        z_num = hard_rod_partition(_subtract(iv, [(xp[0] - R, xp[0] + R)]), lam, R)
        return Estimate(min(1.0, z_num / z_den), 0.0, 0, Method.SERIES)
    if sum(p.box_volume() for p in pruned) == 0.0:
        return Estimate.exact(1.0)
    if n_mc <= 0:
        raise ValueError("thinning estimator requires n_mc > 0")
    pts, ids = poisson_batch(pruned, lam, n_mc, rng)
    ok = ~conflicting_draws(pts, ids, n_mc, R)
    hit = np.zeros(n_mc, dtype=bool)
    if len(pts):
        hit[ids[((pts - xp) ** 2).sum(axis=1) <= R * R]] = True
    den = int(ok.sum())
    if den == 0:
        raise RuntimeError("condition infeasible: no admissible draw on the remainder")
    num = int((ok & ~hit).sum())
    p = num / den
    return Estimate(min(max(p, 0.0), 1.0), math.sqrt(p * (1.0 - p) / den), n_mc,
                    Method.MC_PAIRED)


def thin_choice(x, kept: bool, p: Estimate | float) -> float:
    """``p`` if the point was kept, else ``1 - p``."""
    pv = float(p)
    if not 0.0 <= pv <= 1.0:
        raise ValueError("thinning probability must lie in [0, 1]")
    return pv if kept else 1.0 - pv


def hard_sphere_count_law_1d(length: float, lam: float, R: float) -> np.ndarray:
    """Count distribution of the hard-rod gas on an interval with no boundary.

    ``P(n) = lam^n (L - (n-1) R)_+^n / n! / Z``.
    """
    terms = []
    n = 0
    while True:
        free = length - (n - 1) * R if n > 0 else length
        if n > 0 and free <= 0:
            break
        terms.append(lam ** n * max(free, 0.0) ** n / math.factorial(n))
        n += 1
        if R == 0 and n > 200:
            break
    w = np.array(terms)
    return w / w.sum()



def count_law_1d(r: Region, c, lam: float, R: float) -> np.ndarray:
    """Exact count distribution of the hard-rod gas on ``r`` given ``c``.

    The admissible set is split into intervals; when consecutive intervals
    are more than ``R`` apart they do not interact and the law is the
    convolution of the single-interval laws.

    Raises
    ------
    ValueError
        If two admissible intervals are within ``R`` of each other.
    """
    iv = intervals_1d(r)
    cp = _condition_points(c, 1)
    if len(cp) and R > 0:
        iv = _subtract(iv, _merge(zip((cp[:, 0] - R).tolist(), (cp[:, 0] + R).tolist())))
    if any(b0 - a1 <= R for (_, a1), (b0, _) in zip(iv, iv[1:])):
        raise ValueError("admissible intervals interact; no product form")
    law = np.array([1.0])
    for a, b in iv:
        law = np.convolve(law, hard_sphere_count_law_1d(b - a, lam, R))
    return law
