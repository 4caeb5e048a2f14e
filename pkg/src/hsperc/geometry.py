"""Points, configurations and carved box regions in R^d.

Configurations are finite point sets kept in canonical lexicographic order.
A :class:`Region` is an axis-aligned closed box, intersected with the union of
each group of "restriction" balls and with a set of closed balls removed:

    box  ∩  ⋂_g (⋃ restriction group g)  \\  ⋃ removed balls

All ball membership tests compare squared distances, the same convention the
hard-core constraint uses, so a point removed from a region at distance ``R``
is exactly a point that conflicts at distance ``R``.
"""

from __future__ import annotations

import math
from typing import Iterator, Sequence

import numpy as np

from .estimate import Estimate, Method

__all__ = [
    "Configuration",
    "Region",
    "as_parts",
    "distance",
    "order_less",
    "region_contains",
    "region_volume",
    "ring_region",
]


def _as_point(x) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1 or p.size == 0:
        raise ValueError("a point is a non-empty coordinate vector")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p


def distance(x, y) -> float:
    """Euclidean distance between two points of equal dimension."""
    a, b = _as_point(x), _as_point(y)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    return math.sqrt(float(np.sum((a - b) ** 2)))


def order_less(x, y) -> bool:
    """Strict lexicographic order on coordinates (first coordinate decides)."""
    a, b = _as_point(x), _as_point(y)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    return tuple(a) < tuple(b)


def lex_sort(points: np.ndarray) -> np.ndarray:
    if len(points) < 2:
        return points
    return points[np.lexsort(points.T[::-1])]


class Configuration:
    """A finite set of distinct points, stored sorted in lexicographic order.

    Parameters
    ----------
    points : array_like, shape (n, d)
        Point coordinates. A flat sequence is read as ``n`` points in 1D when
        ``dim == 1``.
    dim : int, optional
        Ambient dimension; required when ``points`` is empty.
    """

    __slots__ = ("_pts",)

    def __init__(self, points=(), dim: int | None = None):
        arr = np.asarray(points, dtype=float)
        if arr.size == 0:
            if dim is None:
                if arr.ndim == 2 and arr.shape[1] > 0:
                    dim = arr.shape[1]
                else:
                    raise ValueError("an empty configuration needs an explicit dim")
            arr = np.empty((0, dim))
        elif arr.ndim == 1:
            if dim == 1:
                arr = arr.reshape(-1, 1)
            else:
                arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise ValueError("points must be a 2D array of shape (n, d)")
        if dim is not None and arr.shape[1] != dim:
            raise ValueError(f"dimension mismatch: got {arr.shape[1]}, expected {dim}")
        if arr.shape[1] < 1:
            raise ValueError("dimension must be at least 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("point coordinates must be finite")
        arr = lex_sort(np.array(arr, dtype=float))
        if len(arr) > 1 and np.any(np.all(arr[1:] == arr[:-1], axis=1)):
            raise ValueError("configuration points must be pairwise distinct")
        arr.flags.writeable = False
        self._pts = arr

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> Configuration:
        """Wrap an array already known to be finite, distinct and 2D."""
        obj = cls.__new__(cls)
        arr = lex_sort(np.array(arr, dtype=float))
        arr.flags.writeable = False
        obj._pts = arr
        return obj

    @classmethod
    def empty(cls, dim: int) -> Configuration:
        return cls((), dim=dim)

    @property
    def points(self) -> np.ndarray:
        return self._pts

    @property
    def dim(self) -> int:
        return self._pts.shape[1]

    def __len__(self) -> int:
        return len(self._pts)

    def __iter__(self) -> Iterator[tuple[float, ...]]:
        return (tuple(p) for p in self._pts)

    def __contains__(self, x) -> bool:
        p = _as_point(x)
        return bool(np.any(np.all(self._pts == p, axis=1)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self._pts.shape == other._pts.shape and np.array_equal(self._pts, other._pts)

    def __hash__(self) -> int:
        return hash((self._pts.shape, self._pts.tobytes()))

    def __repr__(self) -> str:
        return f"Configuration({self._pts.tolist()!r}, dim={self.dim})"

    def _check_dim(self, other: Configuration) -> None:
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def union(self, *others: Configuration) -> Configuration:
        for o in others:
            self._check_dim(o)
        arr = np.concatenate([self._pts] + [o._pts for o in others])
        if len(arr) == 0:
            return Configuration.empty(self.dim)
        return Configuration._trusted(np.unique(arr, axis=0))

    def intersection(self, other: Configuration) -> Configuration:
        self._check_dim(other)
        keep = np.array([p in other for p in self._pts], dtype=bool)
        return Configuration._trusted(self._pts[keep])

    def difference(self, other: Configuration) -> Configuration:
        self._check_dim(other)
        keep = np.array([p not in other for p in self._pts], dtype=bool)
        return Configuration._trusted(self._pts[keep])

    def symmetric_difference(self, other: Configuration) -> Configuration:
        return self.difference(other).union(other.difference(self))

    def issubset(self, other: Configuration) -> bool:
        self._check_dim(other)
        return all(p in other for p in self._pts)

    def isdisjoint(self, other: Configuration) -> bool:
        self._check_dim(other)
        return not any(p in other for p in self._pts)

    def restrict(self, region: Region | Sequence[Region]) -> Configuration:
        """Points lying in ``region`` (a region or a disjoint union of them)."""
        mask = np.zeros(len(self._pts), dtype=bool)
        for part in as_parts(region):
            mask |= part.contains(self._pts)
        return Configuration._trusted(self._pts[mask])


def _ball_arrays(centers, radii, dim: int) -> tuple[np.ndarray, np.ndarray]:
    c = np.asarray(centers, dtype=float).reshape(-1, dim)
    r = np.broadcast_to(np.asarray(radii, dtype=float), (len(c),)).copy()
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise ValueError("ball radii must be finite and non-negative")
    c.flags.writeable = False
    r.flags.writeable = False
    return c, r


def _in_any_ball(points: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    if len(centers) == 0 or len(points) == 0:
        return np.zeros(len(points), dtype=bool)
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.any(d2 <= radii[None, :] ** 2, axis=1)


class Region:
    """A bounded sampling domain: a closed box carved by closed balls.

    Parameters
    ----------
    lo, hi : sequence of float
        Corners of the base box ``[lo_1, hi_1] x ... x [lo_d, hi_d]``. A box
        with ``hi_i < lo_i`` for some axis is empty.
    removed : tuple of (centers, radii), optional
        Closed balls cut out of the region.
    restrictions : sequence of (centers, radii), optional
        Each group's union of closed balls is intersected with the region.
        An empty group makes the region empty.
    """

    __slots__ = ("lo", "hi", "removed", "restrictions")

    def __init__(self, lo, hi, removed=None, restrictions=()):
        lo = np.atleast_1d(np.asarray(lo, dtype=float)).copy()
        hi = np.atleast_1d(np.asarray(hi, dtype=float)).copy()
        if lo.shape != hi.shape or lo.ndim != 1 or lo.size == 0:
            raise ValueError("box corners must be 1D vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box corners must be finite")
        lo.flags.writeable = False
        hi.flags.writeable = False
        self.lo, self.hi = lo, hi
        d = lo.size
        if removed is None:
            removed = (np.empty((0, d)), np.empty(0))
        self.removed = _ball_arrays(*removed, d)
        self.restrictions = tuple(_ball_arrays(c, r, d) for c, r in restrictions)

    @classmethod
    def box(cls, lo, hi) -> Region:
        return cls(lo, hi)

    @classmethod
    def cube(cls, side: float, dim: int, origin: float = 0.0) -> Region:
        return cls([origin] * dim, [origin + side] * dim)

    @classmethod
    def empty(cls, dim: int) -> Region:
        return cls([0.0] * dim, [-1.0] * dim)

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def is_box(self) -> bool:
        return len(self.removed[0]) == 0 and not self.restrictions

    @property
    def is_void(self) -> bool:
        """Structurally empty: empty base box or an empty restriction group."""
        lo, hi = self.bounding_box()
        return bool(np.any(hi < lo))

    def __repr__(self) -> str:
        return (f"Region(lo={self.lo.tolist()}, hi={self.hi.tolist()}, "
                f"removed={len(self.removed[0])}, "
                f"restrictions={[len(c) for c, _ in self.restrictions]})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Region):
            return NotImplemented
        if not (np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)):
            return False
        if not all(np.array_equal(a, b) for a, b in zip(self.removed, other.removed)):
            return False
        if len(self.restrictions) != len(other.restrictions):
            return False
        return all(np.array_equal(a, b) and np.array_equal(c, d)
                   for (a, c), (b, d) in zip(self.restrictions, other.restrictions))

    __hash__ = None

    def contains(self, points) -> np.ndarray:
        """Vectorised membership for an ``(n, d)`` array of points."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        inside = np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        for centers, radii in self.restrictions:
            if not inside.any():
                break
            idx = np.flatnonzero(inside)
            inside[idx] = _in_any_ball(pts[idx], centers, radii)
        if len(self.removed[0]) and inside.any():
            idx = np.flatnonzero(inside)
            inside[idx] = ~_in_any_ball(pts[idx], *self.removed)
        return inside

    def __contains__(self, x) -> bool:
        return bool(self.contains(_as_point(x))[0])

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """The base box tightened to the bounding box of each restriction group."""
        lo, hi = self.lo.copy(), self.hi.copy()
        for centers, radii in self.restrictions:
            if len(centers) == 0:
                return lo, lo - 1.0
            lo = np.maximum(lo, (centers - radii[:, None]).min(axis=0))
            hi = np.minimum(hi, (centers + radii[:, None]).max(axis=0))
        return lo, hi

    def box_volume(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.prod(np.clip(hi - lo, 0.0, None)))

    def minus_balls(self, centers, radius) -> Region:
        c, r = _ball_arrays(centers, radius, self.dim)
        if len(c) == 0:
            return self
        rc, rr = self.removed
        return Region(self.lo, self.hi,
                      (np.concatenate([rc, c]), np.concatenate([rr, r])),
                      self.restrictions)

    def restrict_to_balls(self, centers, radius) -> Region:
        group = _ball_arrays(centers, radius, self.dim)
        return Region(self.lo, self.hi, self.removed, self.restrictions + (group,))

    def clip_lower(self, axis: int, value: float) -> Region:
        """Intersection with the half-space ``x[axis] >= value``."""
        lo = self.lo.copy()
        lo[axis] = max(lo[axis], value)
        return Region(lo, self.hi, self.removed, self.restrictions)

    def box_distance(self, points) -> np.ndarray:
        """Distance from each point to the (tightened) bounding box."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        lo, hi = self.bounding_box()
        gap = np.maximum(np.maximum(lo - pts, pts - hi), 0.0)
        return np.sqrt((gap ** 2).sum(axis=1))

    def distance(self, points) -> np.ndarray:
        """Exact distance from each point to a pure box region."""
        if not self.is_box:
            raise NotImplementedError("exact distances are only defined for pure boxes")
        return self.box_distance(points)


def as_parts(region: Region | Sequence[Region]) -> tuple[Region, ...]:
    """Normalise a region or a disjoint union of regions to a tuple of parts."""
    if isinstance(region, Region):
        return (region,)
    parts = tuple(region)
    if not all(isinstance(p, Region) for p in parts):
        raise TypeError("expected a Region or a sequence of Regions")
    return parts


def region_contains(r: Region, x) -> bool:
    p = _as_point(x)
    if p.size != r.dim:
        raise ValueError(f"dimension mismatch: {p.size} vs {r.dim}")
    return p in r


def region_volume(r: Region | Sequence[Region], mc_samples: int, rng) -> Estimate:
    """Lebesgue measure of a region: exact for boxes, hit-or-miss otherwise.

    ``rng`` is an :class:`~hsperc.sampling.RngStream` or numpy ``Generator``;
    it is only consumed for carved regions.
    """
    parts = as_parts(r)
    if all(p.is_box or p.is_void for p in parts):
        return Estimate.exact(sum(p.box_volume() for p in parts))
    if mc_samples <= 0:
        raise ValueError("volume estimator requires samples")
    mean, var = 0.0, 0.0
    for part in parts:
        vbox = part.box_volume()
        if vbox == 0.0:
            continue
        if part.is_box:
            mean += vbox
            continue
        lo, hi = part.bounding_box()
        hits = 0
        chunk = 1 << 16
        for start in range(0, mc_samples, chunk):
            m = min(chunk, mc_samples - start)
            pts = rng.uniform(lo, hi, size=(m, part.dim))
            hits += int(part.contains(pts).sum())
        frac = hits / mc_samples
        mean += vbox * frac
        var += vbox ** 2 * frac * (1.0 - frac) / mc_samples
    return Estimate(mean, math.sqrt(var), mc_samples, Method.MC_PLAIN)


def as_point_array(c, dim: int) -> np.ndarray:
    """Coordinates of a Configuration, BoundaryCondition or raw point list."""
    pts = getattr(c, "points", c)
    if isinstance(pts, Configuration):
        return pts.points
    return np.asarray(pts, dtype=float).reshape(-1, dim)


def reaching(points: np.ndarray, region: Region, R: float) -> np.ndarray:
    """The subset of ``points`` within distance ``R`` of the region's bounding box."""
    if len(points) == 0:
        return points
    return points[region.box_distance(points) <= R]


def ring_region(base: Region, c, R: float) -> Region:
    """Part of ``base`` covered by the closed balls of radius ``R`` around ``c``.

    Points of ``c`` farther than ``R`` from the base's bounding box are
    dropped, so the result depends on ``c`` only through its points in range.
    """
    pts = as_point_array(c, base.dim)
    if len(pts) and np.any(base.contains(pts)):
        raise ValueError("boundary condition must lie outside the region")
    near = reaching(pts, base, R)
    return base.restrict_to_balls(near, R)

