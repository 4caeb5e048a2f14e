"""Seeded random streams, Poisson sampling and the rejection hard-sphere oracle."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .geometry import Configuration, Region, as_parts, as_point_array, reaching

__all__ = [
    "OracleInfeasible",
    "RngStream",
    "conflicting_draws",
    "poisson_batch",
    "sample_hard_sphere_rejection",
    "sample_poisson",
]


class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    Distinct stream ids map to independent PCG64 generators through numpy's
    ``SeedSequence`` spawn keys. Attribute access falls through to the
    underlying :class:`numpy.random.Generator`.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def __getattr__(self, name):
        return getattr(self.generator, name)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


class OracleInfeasible(RuntimeError):
    """The rejection sampler ran out of attempts."""

    def __init__(self, attempts: int, acceptance_rate: float):
        self.attempts = attempts
        self.acceptance_rate = acceptance_rate
        super().__init__(
            f"rejection sampler exhausted {attempts} attempts "
            f"(observed acceptance rate {acceptance_rate:.3g}); "
            "use a smaller lambda * volume"
        )


def _generator(rng) -> np.random.Generator:
    return rng.generator if isinstance(rng, RngStream) else rng


def poisson_batch(region: Region | Sequence[Region], intensity: float, n: int,
                  rng) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` independent Poisson configurations at once.

    Returns the concatenated points and, for each point, the index of the
    draw it belongs to; points are grouped by draw index.
    """
    gen = _generator(rng)
    parts = as_parts(region)
    dim = parts[0].dim
    all_pts, all_ids = [], []
    for part in parts:
        lo, hi = part.bounding_box()
        vol = float(np.prod(np.clip(hi - lo, 0.0, None)))
        if vol == 0.0 or intensity == 0.0:
            continue
        counts = gen.poisson(intensity * vol, size=n)
        total = int(counts.sum())
        if total == 0:
            continue
        pts = gen.uniform(lo, hi, size=(total, dim))
        ids = np.repeat(np.arange(n), counts)
        keep = part.contains(pts)
        all_pts.append(pts[keep])
        all_ids.append(ids[keep])
    if not all_pts:
        return np.empty((0, dim)), np.empty(0, dtype=np.int64)
    pts = np.concatenate(all_pts)
    ids = np.concatenate(all_ids)
    if len(all_pts) > 1:
        order = np.argsort(ids, kind="stable")
        pts, ids = pts[order], ids[order]
    return pts, ids


def conflicting_draws(pts: np.ndarray, ids: np.ndarray, n: int, R: float) -> np.ndarray:
    """Flag the draws of a batch that contain a pair at distance ``<= R``.

    ``ids`` must be grouped (non-decreasing). Pairs are enumerated by index
    offset, so the work is linear in the number of points times the largest
    draw size.
    """
    bad = np.zeros(n, dtype=bool)
    if len(pts) < 2 or R <= 0:
        return bad
    r2 = R * R
    kmax = int(np.bincount(ids, minlength=n).max())
    for j in range(1, kmax):
        same = np.flatnonzero(ids[j:] == ids[:-j])
        if len(same) == 0:
            break
        d = pts[same + j] - pts[same]
        close = (d * d).sum(axis=1) <= r2
        bad[ids[same[close]]] = True
    return bad


def sample_poisson(r: Region | Sequence[Region], alpha: float, rng) -> Configuration:
    """Poisson point process of intensity ``alpha`` restricted to ``r``.

    Points are drawn uniformly on the region's bounding box with a Poisson
    count and filtered by exact membership.
    """
    if alpha < 0 or not math.isfinite(alpha):
        raise ValueError("intensity must be finite and non-negative")
    dim = as_parts(r)[0].dim
    pts, _ = poisson_batch(r, alpha, 1, rng)
    if len(pts) == 0:
        return Configuration.empty(dim)
    return Configuration._trusted(pts)


def sample_hard_sphere_rejection(r: Region, c, lam: float, R: float, rng,
                                 max_attempts: int = 1_000_000) -> Configuration:
    """Exact hard-sphere sample by rejection from Poisson draws.

    The boundary condition is applied by removing the balls around its points
    from the sampling region; a Poisson draw on ``r`` with no point in those
    balls is exactly a Poisson draw on the carved region, so only internal
    conflicts are rejected.

    Raises
    ------
    OracleInfeasible
        When ``max_attempts`` draws have all been rejected.
    """
    if lam < 0 or not math.isfinite(lam):
        raise ValueError("activity must be finite and non-negative")
    cp = as_point_array(c, r.dim) if c is not None else np.empty((0, r.dim))
    region = r.minus_balls(reaching(cp, r, R), R) if R > 0 and len(cp) else r
    if lam == 0 or region.is_void:
        return Configuration.empty(r.dim)
    attempts, batch = 0, 8
    while attempts < max_attempts:
        b = min(batch, max_attempts - attempts)
        pts, ids = poisson_batch(region, lam, b, rng)
        bad = conflicting_draws(pts, ids, b, R)
        good = np.flatnonzero(~bad)
        if len(good):
            first = good[0]
            return Configuration._trusted(pts[ids == first])
        attempts += b
        batch = min(batch * 2, 1 << 14)
    raise OracleInfeasible(attempts, 0.0)
