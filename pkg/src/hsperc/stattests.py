"""Goodness-of-fit and two-sample tests on samples of configurations."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree

from .geometry import Configuration, Region

__all__ = ["count_gof", "counts", "mean_nn_distances", "two_sample_counts",
           "two_sample_ecdf"]

MIN_EXPECTED = 5.0


def counts(samples: Sequence[Configuration], window: Region | None = None) -> np.ndarray:
    if window is None:
        return np.array([len(s) for s in samples])
    return np.array([int(window.contains(s.points).sum()) if len(s) else 0 for s in samples])


def _pool_bins(expected: np.ndarray, *observed: np.ndarray):
    """Merge adjacent bins from the top until each expected count is at least 5."""
    e = list(expected)
    obs = [list(o) for o in observed]
    i = len(e) - 1
    while i > 0:
        if e[i] < MIN_EXPECTED:
            e[i - 1] += e[i]
            del e[i]
            for o in obs:
                o[i - 1] += o[i]
                del o[i]
        i -= 1
    # the lowest bin may still be sparse
    while len(e) > 1 and e[0] < MIN_EXPECTED:
        e[1] += e[0]
        del e[0]
        for o in obs:
            o[1] += o[0]
            del o[0]
    return np.array(e), [np.array(o) for o in obs]


def count_gof(n: np.ndarray, probs: np.ndarray) -> float:
    """Chi-square p-value of observed counts ``n`` against a count law."""
    n = np.asarray(n)
    k = max(len(probs), int(n.max()) + 1 if len(n) else 1)
    p = np.zeros(k)
    p[:len(probs)] = probs
    p = p / p.sum()
    hist = np.bincount(n, minlength=k)[:k]
    e, (o,) = _pool_bins(p * len(n), hist)
    if len(e) < 2:
        return 1.0
    return float(stats.chisquare(o, e * o.sum() / e.sum()).pvalue)


def two_sample_counts(a: np.ndarray, b: np.ndarray) -> float:
    """Chi-square homogeneity p-value for two samples of counts."""
    k = int(max(a.max(initial=0), b.max(initial=0))) + 1
    ha = np.bincount(a, minlength=k)
    hb = np.bincount(b, minlength=k)
    total = ha + hb
    # expected count of the smaller sample decides the pooling
    frac = min(len(a), len(b)) / (len(a) + len(b))
    _, (ha, hb) = _pool_bins(total * frac, ha, hb)
    keep = (ha + hb) > 0
    ha, hb = ha[keep], hb[keep]
    if len(ha) < 2:
        return 1.0
    return float(stats.chi2_contingency(np.vstack([ha, hb]), correction=False).pvalue)


def mean_nn_distances(samples: Sequence[Configuration]) -> np.ndarray:
    """Mean nearest-neighbour distance of each configuration with two or more points.

    One value per configuration keeps the values independent across
    replicas.
    """
    out = []
    for s in samples:
        if len(s) < 2:
            continue
        d, _ = cKDTree(s.points).query(s.points, k=2)
        out.append(d[:, 1].mean())
    return np.array(out)


def two_sample_ecdf(a: np.ndarray, b: np.ndarray) -> float:
    """Kolmogorov-Smirnov p-value; 1 when either side is empty."""
    if len(a) == 0 or len(b) == 0:
        return 1.0
    return float(stats.ks_2samp(a, b).pvalue)
