"""The conditional hard-core constraint and related quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import Configuration, Region, as_point_array, reaching

__all__ = [
    "UNBOUNDED",
    "BoundaryCondition",
    "chain_identity_check",
    "hamiltonian",
    "hs_size_bound",
    "is_hard_core",
]

UNBOUNDED = math.inf

# Above this size the pairwise check goes through a k-d tree.
_BRUTE_FORCE_LIMIT = 200


@dataclass(frozen=True)
class BoundaryCondition:
    """A fixed configuration living outside ``region_of_validity``."""

    points: Configuration
    region_of_validity: Region

    def __post_init__(self):
        if self.points.dim != self.region_of_validity.dim:
            raise ValueError("boundary condition and region differ in dimension")
        if len(self.points) and np.any(self.region_of_validity.contains(self.points.points)):
            raise ValueError("boundary points must lie outside the region of validity")

    @classmethod
    def empty(cls, region: Region) -> BoundaryCondition:
        return cls(Configuration.empty(region.dim), region)

    @classmethod
    def of(cls, points, region: Region) -> BoundaryCondition:
        if isinstance(points, Configuration):
            return cls(points, region)
        return cls(Configuration(np.asarray(points, dtype=float).reshape(-1, region.dim)), region)

    def restricted_to_ring(self, R: float) -> BoundaryCondition:
        """Only the points within ``R`` of the region's bounding box."""
        near = reaching(self.points.points, self.region_of_validity, R)
        return BoundaryCondition(Configuration._trusted(near), self.region_of_validity)

    def __len__(self) -> int:
        return len(self.points)


def has_internal_conflict(pts: np.ndarray, R: float) -> bool:
    """Whether two of the points are at distance ``<= R``."""
    n = len(pts)
    if n < 2:
        return False
    r2 = R * R
    if n <= _BRUTE_FORCE_LIMIT:
        diff = pts[:, None, :] - pts[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        iu = np.triu_indices(n, 1)
        return bool(np.any(d2[iu] <= r2))
    # k-d tree candidates, then the exact squared comparison
    pairs = cKDTree(pts).query_pairs(R * (1 + 1e-9) + 1e-300, output_type="ndarray")
    if len(pairs) == 0:
        return False
    d2 = ((pts[pairs[:, 0]] - pts[pairs[:, 1]]) ** 2).sum(axis=1)
    return bool(np.any(d2 <= r2))


def has_cross_conflict(pts: np.ndarray, others: np.ndarray, R: float) -> bool:
    """Whether some point of ``pts`` is within ``R`` of some point of ``others``."""
    if len(pts) == 0 or len(others) == 0:
        return False
    r2 = R * R
    if len(pts) * len(others) <= _BRUTE_FORCE_LIMIT ** 2:
        d2 = ((pts[:, None, :] - others[None, :, :]) ** 2).sum(axis=2)
        return bool(np.any(d2 <= r2))
    tree = cKDTree(others)
    dist, idx = tree.query(pts, k=1)
    d2 = ((pts - others[idx]) ** 2).sum(axis=1)
    return bool(np.any(d2 <= r2))


def hard_core_arrays(y: np.ndarray, c: np.ndarray, R: float) -> int:
    """Unchecked hard-core indicator on raw coordinate arrays."""
    if has_internal_conflict(y, R) or has_cross_conflict(y, c, R):
        return 0
    return 1


def _coords(cfg, dim: int | None = None) -> np.ndarray:
    if isinstance(cfg, BoundaryCondition):
        return cfg.points.points
    if isinstance(cfg, Configuration):
        return cfg.points
    arr = np.asarray(cfg, dtype=float)
    if dim is not None:
        arr = arr.reshape(-1, dim)
    return arr


def _check_disjoint(a: np.ndarray, b: np.ndarray) -> None:
    if len(a) == 0 or len(b) == 0:
        return
    if a.shape[1] != b.shape[1]:
        raise ValueError("dimension mismatch between configurations")
    common = np.intersect1d(
        np.ascontiguousarray(a).view([("", a.dtype)] * a.shape[1]),
        np.ascontiguousarray(b).view([("", b.dtype)] * b.shape[1]),
    )
    if len(common):
        raise ValueError("configurations must be disjoint")


def is_hard_core(y, c, R: float) -> int:
    """Conditional hard-core indicator ``H(y | c)``.

    Returns 1 iff every pair inside ``y`` and every pair in ``y x c`` is at
    distance strictly greater than ``R``.

    Raises
    ------
    ValueError
        If ``y`` and ``c`` share a point.
    """
    yp = _coords(y)
    cp = _coords(c, yp.shape[1] if yp.ndim == 2 else None)
    if yp.ndim == 2 and cp.ndim == 2 and len(cp):
        cp = cp.reshape(-1, yp.shape[1])
    _check_disjoint(yp, cp)
    return hard_core_arrays(yp, cp, R)


def chain_identity_check(x, y, z, R: float) -> bool:
    """Whether ``H(x ∪ y | z) == H(x | y ∪ z) * H(y | z)``."""
    xp, yp, zp = _coords(x), _coords(y), _coords(z)
    _check_disjoint(xp, yp)
    _check_disjoint(xp, zp)
    _check_disjoint(yp, zp)
    xy = np.concatenate([xp, yp])
    yz = np.concatenate([yp, zp])
    lhs = hard_core_arrays(xy, zp, R)
    rhs = hard_core_arrays(xp, yz, R) * hard_core_arrays(yp, zp, R)
    return lhs == rhs


def hamiltonian(x, c, R: float) -> float:
    """Hard-sphere energy: 0 for admissible configurations, +inf otherwise."""
    return 0.0 if is_hard_core(x, c, R) else math.inf


def hs_size_bound(r: Region, R: float) -> float:
    """Upper bound on the size of any hard-core configuration inside ``r``.

    Counts the cells of a grid with side ``R / sqrt(d)`` anchored at the
    bounding box corner; a cell has diameter ``R`` so it holds at most one
    point of a hard-core configuration. Returns :data:`UNBOUNDED` when
    ``R == 0`` and the region is non-empty.
    """
    if r.is_void:
        return 0
    if R <= 0:
        return UNBOUNDED
    lo, hi = r.bounding_box()
    side = R / math.sqrt(r.dim)
    cells = 1
    for length in (hi - lo):
        cells *= max(1, math.ceil(length / side))
    return cells
