"""Gilbert-graph clusters, Boolean-model connection statistics and decay fits."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np
from scipy import stats
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .estimate import Estimate
from .geometry import Configuration, Region
from .sampling import sample_poisson

__all__ = [
    "ClusterPartition",
    "DecayFit",
    "Exterior",
    "SweepRow",
    "cluster_labels",
    "cluster_partition",
    "connection_probability",
    "critical_intensity_sweep",
    "crossing_estimate",
    "fit_decay",
    "parse_sweep_csv",
    "render_sweep_csv",
    "sets_connected",
    "spans",
]

SWEEP_HEADER = "# hsperc-sweep v1"


def cluster_labels(points: np.ndarray, R: float) -> np.ndarray:
    """Component label of each point in the graph joining points at distance ``<= R``.

    Labels are numbered in order of first appearance, so they only depend
    on the order of the input points.
    """
    n = len(points)
    if n == 0:
        return np.empty(0, dtype=np.int64)
    if n == 1 or R < 0:
        return np.arange(n)
    # the tree search is inclusive but not exact at the threshold; recheck
    pairs = cKDTree(points).query_pairs(R * (1 + 1e-9) + 1e-300, output_type="ndarray")
    if len(pairs):
        d2 = ((points[pairs[:, 0]] - points[pairs[:, 1]]) ** 2).sum(axis=1)
        pairs = pairs[d2 <= R * R]
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(g, directed=False)
    return labels.astype(np.int64)


@dataclass(frozen=True)
class ClusterPartition:
    labels: np.ndarray
    n_components: int

    def connected(self, i: int, j: int) -> bool:
        return bool(self.labels[i] == self.labels[j])

    def clusters(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.labels == k) for k in range(self.n_components)]


def cluster_partition(c: Configuration, R: float) -> ClusterPartition:
    """R-clusters of a configuration (indices refer to ``c.points``)."""
    labels = cluster_labels(c.points, R)
    return ClusterPartition(labels, int(labels.max()) + 1 if len(labels) else 0)


# -- connection between sets ------------------------------------------------

@dataclass(frozen=True)
class Exterior:
    """The complement of a box, e.g. the outside of a growing window."""

    box: Region

    def __post_init__(self):
        if not self.box.is_box:
            raise ValueError("exterior is only defined for boxes")


def _box_distance(a: Region, b: Region) -> float:
    gap = np.maximum(0.0, np.maximum(a.lo - b.hi, b.lo - a.hi))
    return float(np.sqrt((gap ** 2).sum()))


def _to_target(target, pts: np.ndarray) -> np.ndarray:
    """Distance from each point to ``target``."""
    if len(pts) == 0:
        return np.empty(0)
    if isinstance(target, Exterior):
        lo, hi = target.box.lo, target.box.hi
        inside = np.all((pts >= lo) & (pts <= hi), axis=1)
        depth = np.minimum(pts - lo, hi - pts).min(axis=1)
        return np.where(inside, depth, 0.0)
    if isinstance(target, Configuration):
        if len(target) == 0:
            return np.full(len(pts), np.inf)
        d, _ = cKDTree(target.points).query(pts, k=1)
        return np.asarray(d, dtype=float)
    return target.distance(pts)


def _set_distance(a, b) -> float:
    if isinstance(b, Configuration):
        a, b = b, a
    if isinstance(a, Configuration):
        return float(_to_target(b, a.points).min()) if len(a) else math.inf
    if isinstance(a, Exterior) and isinstance(b, Exterior):
        return 0.0
    if isinstance(b, Exterior):
        a, b = b, a
    if isinstance(a, Exterior):
        lo, hi = a.box.lo, a.box.hi
        if np.any(b.lo < lo) or np.any(b.hi > hi):
            return 0.0
        return float(np.minimum(b.lo - lo, hi - b.hi).min())
    return _box_distance(a, b)


def sets_connected(a, b, c: Configuration, R: float) -> bool:
    """Whether ``a`` and ``b`` are R-connected through the points of ``c``.

    ``a`` and ``b`` may be box Regions, Configurations or :class:`Exterior`
    sets. Sets within ``R`` of each other count as connected even without
    any point in between.
    """
    if _set_distance(a, b) <= R:
        return True
    if len(c) == 0:
        return False
    pts = c.points
    near_a = _to_target(a, pts) <= R
    near_b = _to_target(b, pts) <= R
    if not near_a.any() or not near_b.any():
        return False
    labels = cluster_labels(pts, R)
    return bool(np.intersect1d(labels[near_a], labels[near_b]).size)


def connection_probability(box: Region, a, b, alpha: float, R: float, replicas: int,
                           rng) -> Estimate:
    """Fraction of Poisson(alpha) draws on ``box`` that connect ``a`` and ``b``."""
    if replicas <= 0:
        raise ValueError("replicas must be positive")
    if _set_distance(a, b) <= R:
        return Estimate.exact(1.0)
    if alpha == 0:
        return Estimate.exact(0.0)
    hits = sum(sets_connected(a, b, sample_poisson(box, alpha, rng), R)
               for _ in range(replicas))
    return Estimate.binomial(hits, replicas)


def spans(c: Configuration, box: Region, R: float, axis: int = 0) -> bool:
    """Whether one R-cluster comes within ``R`` of both faces normal to ``axis``."""
    if len(c) == 0:
        return False
    x = c.points[:, axis]
    left = x - box.lo[axis] <= R
    right = box.hi[axis] - x <= R
    if not left.any() or not right.any():
        return False
    labels = cluster_labels(c.points, R)
    return bool(np.intersect1d(labels[left], labels[right]).size)


# -- sweeps -----------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    dimension: int
    R: float
    intensity: float
    box_side: float
    replicas: int
    statistic: str
    value: float
    std_error: float

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be non-negative")


_SWEEP_FIELDS = [f.name for f in fields(SweepRow)]


def critical_intensity_sweep(d: int, R: float, box_sides: Sequence[float],
                             alpha_grid: Sequence[float], replicas: int,
                             rng) -> list[SweepRow]:
    """Left-right spanning probability on a grid of box sizes and intensities."""
    rows = []
    for side in sorted(box_sides):
        box = Region.cube(side, d)
        for alpha in sorted(alpha_grid):
            hits = sum(spans(sample_poisson(box, alpha, rng), box, R)
                       for _ in range(replicas))
            est = Estimate.binomial(hits, replicas)
            rows.append(SweepRow(d, R, float(alpha), float(side), replicas,
                                 "spanning_probability", est.mean, est.std_error))
    return rows


def crossing_estimate(rows: Sequence[SweepRow], level: float = 0.5) -> float:
    """Intensity where the spanning curve of the largest box crosses ``level``.

    Linear interpolation between the bracketing grid points; ``nan`` if the
    curve never crosses.
    """
    side = max(r.box_side for r in rows)
    curve = sorted((r.intensity, r.value) for r in rows if r.box_side == side)
    for (a0, p0), (a1, p1) in zip(curve, curve[1:]):
        if p0 < level <= p1:
            return a0 + (level - p0) * (a1 - a0) / (p1 - p0)
    return math.nan


def render_sweep_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    buf.write(SWEEP_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_SWEEP_FIELDS)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v
                    for v in (getattr(r, k) for k in _SWEEP_FIELDS)])
    return buf.getvalue()


def parse_sweep_csv(text: str) -> list[SweepRow]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    out = []
    for rec in csv.DictReader(lines):
        out.append(SweepRow(int(rec["dimension"]), float(rec["R"]), float(rec["intensity"]),
                            float(rec["box_side"]), int(rec["replicas"]), rec["statistic"],
                            float(rec["value"]), float(rec["std_error"])))
    return out


# -- exponential decay fits -------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    """``p(t) ≈ K exp(-kappa t)`` fitted on the log scale."""

    K: float
    kappa: float
    kappa_ci: tuple[float, float]
    residual: float
    n_points: int
    weighted: bool

    @property
    def decaying(self) -> bool:
        return bool(self.kappa_ci[0] > 0)

    def __iter__(self):
        return iter((self.K, self.kappa))


def fit_decay(rows: Sequence[tuple[float, Estimate | float]], level: float = 0.95) -> DecayFit:
    """Least-squares fit of ``log p`` against distance.

    Points with zero estimate are dropped. When every remaining point has a
    positive standard error the fit is weighted by ``(p / se)^2`` (delta
    method), and the parameter covariance is inflated by the reduced
    chi-square when that exceeds one.

    Raises
    ------
    ValueError
        If fewer than three usable points remain.
    """
    t, p, se = [], [], []
    for dist, est in rows:
        m = float(est)
        if m <= 0:
            continue
        t.append(float(dist))
        p.append(m)
        se.append(getattr(est, "std_error", 0.0))
    if len(t) < 3:
        raise ValueError("insufficient decay data")
    t, p, se = np.array(t), np.array(p), np.array(se)
    y = np.log(p)
    X = np.column_stack([np.ones_like(t), t])
    n = len(t)
    weighted = bool(np.all(se > 0))
    w = (p / se) ** 2 if weighted else np.ones(n)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    resid = y - X @ coef
    chi2 = float((w * resid ** 2).sum())
    dof = n - 2
    cov = np.linalg.inv(X.T @ (X * w[:, None]))
    if weighted:
        cov = cov * max(1.0, chi2 / dof if dof else 1.0)
        q = stats.norm.ppf(0.5 + level / 2)
    else:
        cov = cov * (chi2 / dof if dof else 0.0)
        q = stats.t.ppf(0.5 + level / 2, dof) if dof else math.inf
    kappa = -float(coef[1])
    half = q * math.sqrt(max(float(cov[1, 1]), 0.0))
    return DecayFit(max(1.0, math.exp(float(coef[0]))), kappa, (kappa - half, kappa + half),
                    float(np.sqrt((resid ** 2).mean())), n, weighted)
