"""Dependent thinning and the recursive twisted disagreement coupling.

The dependent thinning draws a Poisson configuration and visits its points in
order, keeping each with the thinning probability given the points kept so
far. The kept points are an exact hard-sphere sample (up to the error of the
Monte Carlo ratio estimator) and a subset of the Poisson draw.

The twisted coupling splits the region into the zone within reach of either
boundary condition and the rest. On the zone, the part blocked only by the
second condition hosts the first hard-sphere process, the part blocked only
by the first hosts the second, and the doubly blocked part hosts plain
Poisson points. Points placed in the zone become the boundary conditions for
the rest of the region, and the construction recurses.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .geometry import Configuration, Region, as_parts, as_point_array, reaching
from .hardcore import BoundaryCondition, hard_core_arrays, hs_size_bound
from .partition import DEFAULT_N_MC, thinning_probability
from .percolation import cluster_labels
from .sampling import RngStream, sample_poisson

__all__ = [
    "CouplingSample",
    "RecursionCapExceeded",
    "RecursionTrace",
    "ThinnedPair",
    "TraceStep",
    "disagreement_connected",
    "read_samples",
    "thin_to_hard_sphere",
    "twisted_couple",
    "twisted_zone",
    "write_samples",
]

SAMPLES_HEADER = "# hsperc-samples v1"


@dataclass(frozen=True)
class ThinnedPair:
    """A hard-sphere configuration and the Poisson configuration it was thinned from."""

    kept: Configuration
    dominating: Configuration
    probabilities: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.kept.issubset(self.dominating):
            raise AssertionError("kept points must be a subset of the dominating points")


@dataclass(frozen=True)
class TraceStep:
    depth: int
    zone: tuple[Region, Region, Region] | None
    placed: dict
    remaining: Region


@dataclass
class RecursionTrace:
    steps: list[TraceStep] = field(default_factory=list)
    cap: float = 0
    terminated: bool = False

    @property
    def depth(self) -> int:
        return len(self.steps)


class RecursionCapExceeded(RuntimeError):
    def __init__(self, trace: RecursionTrace):
        self.trace = trace
        super().__init__(f"twisted recursion exceeded its depth cap {trace.cap}")


@dataclass(frozen=True)
class CouplingSample:
    xi1: Configuration
    xi2: Configuration
    xi3: Configuration
    region: Region
    c1: BoundaryCondition
    c2: BoundaryCondition
    seed: int | None = None
    stream_id: int | None = None
    trace: RecursionTrace | None = field(default=None, compare=False)


def _points(c, dim: int) -> np.ndarray:
    if c is None:
        return np.empty((0, dim))
    return as_point_array(c, dim)


def _boundary(c, region: Region) -> BoundaryCondition:
    if isinstance(c, BoundaryCondition):
        return c
    if c is None:
        return BoundaryCondition.empty(region)
    return BoundaryCondition.of(c, region)


def _config(arrs: Sequence[np.ndarray], dim: int) -> Configuration:
    arrs = [a for a in arrs if len(a)]
    if not arrs:
        return Configuration.empty(dim)
    return Configuration._trusted(np.concatenate(arrs))


def thin_to_hard_sphere(r: Region | Sequence[Region], c, lam: float, R: float,
                        n_mc: int = DEFAULT_N_MC, rng=None, *, exact: bool = False,
                        tail: Sequence[Region] = ()) -> ThinnedPair:
    """Dependent thinning of a Poisson draw on ``r`` to a hard-sphere sample.

    Parts of ``r`` are visited in the given order, points within a part in
    lexicographic order. ``tail`` lists further parts of the hard-sphere
    domain that come after ``r`` in the visiting order but are not sampled;
    the kept points are then distributed as the restriction to ``r`` of the
    hard-sphere model on ``r ∪ tail``.
    """
    parts = [p for p in as_parts(r) if not p.is_void]
    dim = as_parts(r)[0].dim
    cp = _points(c, dim)
    tail = [t for t in tail if not t.is_void]
    kept: list[np.ndarray] = []
    dominating: list[np.ndarray] = []
    probs: list[float] = []
    for i, part in enumerate(parts):
        xi2 = sample_poisson(part, lam, rng).points
        dominating.append(xi2)
        later = parts[i + 1:] + tail
        for x in xi2:
            remaining = [part.clip_lower(0, x[0])] + later
            y = np.array(kept).reshape(-1, dim)
            p = thinning_probability(x, cp, y, remaining, lam, R, n_mc, rng,
                                     exact=exact).mean
            probs.append(p)
            if rng.random() < p:
                kept.append(x)
    kept_arr = np.array(kept).reshape(-1, dim)
    return ThinnedPair(_config([kept_arr], dim), _config(dominating, dim), tuple(probs))


def _zone_parts(B: Region, n1: np.ndarray, n2: np.ndarray, R: float):
    d1 = B.restrict_to_balls(n2, R).minus_balls(n1, R)
    d2 = B.restrict_to_balls(n1, R).minus_balls(n2, R)
    d0 = B.restrict_to_balls(n1, R).restrict_to_balls(n2, R)
    rest = B.minus_balls(np.concatenate([n1, n2]), R)
    return d0, d1, d2, rest


def _zone_sample(B, n1, n2, lam, R, n_mc, rng, exact):
    d0, d1, d2, rest = _zone_parts(B, n1, n2, R)
    dim = B.dim
    z0 = sample_poisson(d0, lam, rng).points if not d0.is_void else np.empty((0, dim))
    t1 = thin_to_hard_sphere(d1, n1, lam, R, n_mc, rng, exact=exact, tail=[rest, d0, d2])
    t2 = thin_to_hard_sphere(d2, n2, lam, R, n_mc, rng, exact=exact, tail=[rest, d0, d1])
    return (d0, d1, d2, rest), z0, t1, t2


def twisted_zone(r: Region, c1, c2, lam: float, R: float, n_mc: int = DEFAULT_N_MC,
                 rng=None, *, exact: bool = False):
    """One zone step of the twisted coupling.

    Returns ``(xi1, xi2, xi3)`` on the zone of disagreement ``D``: ``xi1``
    lives in the part blocked only by ``c2``, ``xi2`` in the part blocked
    only by ``c1``, and ``xi3`` is Poisson on all of ``D`` and contains both.

    Raises
    ------
    ValueError
        If neither boundary condition reaches the region.
    """
    dim = r.dim
    n1 = reaching(_points(c1, dim), r, R)
    n2 = reaching(_points(c2, dim), r, R)
    if R <= 0 or len(n1) + len(n2) == 0:
        raise ValueError("zone coupling requires nonempty disagreement zone")
    _, z0, t1, t2 = _zone_sample(r, n1, n2, lam, R, n_mc, rng, exact)
    return (t1.kept, t2.kept,
            _config([z0, t1.dominating.points, t2.dominating.points], dim))


def twisted_couple(r: Region, c1, c2, lam: float, R: float, n_mc: int = DEFAULT_N_MC,
                   rng=None, *, exact: bool = False) -> CouplingSample:
    """Sample the twisted disagreement coupling on ``r``.

    Returns a :class:`CouplingSample` whose ``xi1`` and ``xi2`` are hard-sphere
    samples under ``c1`` and ``c2``, ``xi3`` is Poisson and contains both,
    and every disagreement point is connected to the boundary disagreement.
    """
    dim = r.dim
    bc1, bc2 = _boundary(c1, r), _boundary(c2, r)
    C1, C2 = bc1.points.points, bc2.points.points
    bound = hs_size_bound(r, R)
    trace = RecursionTrace(cap=2 * bound + 2)
    xi1: list[np.ndarray] = []
    xi2: list[np.ndarray] = []
    xi3: list[np.ndarray] = []
    B = r
    screened = np.empty((0, dim))
    depth = 0
    while True:
        n1 = reaching(C1, B, R) if R > 0 else C1[:0]
        n2 = reaching(C2, B, R) if R > 0 else C2[:0]
        if len(n1) + len(n2) == 0:
            pair = thin_to_hard_sphere(B, None, lam, R, n_mc, rng, exact=exact)
            _check_screened(pair.dominating.points, screened, R)
            xi1.append(pair.kept.points)
            xi2.append(pair.kept.points)
            xi3.append(pair.dominating.points)
            trace.steps.append(TraceStep(depth, None, {"xi1": len(pair.kept),
                                                       "xi2": len(pair.kept),
                                                       "xi3": len(pair.dominating)}, B))
            trace.terminated = True
            break
        (d0, d1, d2, rest), z0, t1, t2 = _zone_sample(B, n1, n2, lam, R, n_mc, rng, exact)
        placed = _config([z0, t1.dominating.points, t2.dominating.points], dim).points
        _check_screened(placed, screened, R)
        xi1.append(t1.kept.points)
        xi2.append(t2.kept.points)
        xi3.append(placed)
        trace.steps.append(TraceStep(depth, (d0, d1, d2),
                                     {"xi1": len(t1.kept), "xi2": len(t2.kept),
                                      "xi3": len(placed)}, rest))
        # the conditions of this level cannot reach the rest of the region
        screened = np.concatenate([n1, n2])
        B, C1, C2 = rest, t1.kept.points, t2.kept.points
        depth += 1
        if depth > trace.cap:
            raise RecursionCapExceeded(trace)
    return CouplingSample(_config(xi1, dim), _config(xi2, dim), _config(xi3, dim), r,
                          bc1, bc2,
                          getattr(rng, "seed", None), getattr(rng, "stream_id", None),
                          trace)


def _check_screened(points: np.ndarray, screened: np.ndarray, R: float) -> None:
    if len(points) == 0 or len(screened) == 0:
        return
    d2 = ((points[:, None, :] - screened[None, :, :]) ** 2).sum(axis=2)
    if np.any(d2 <= R * R):
        raise AssertionError("a point of the recursion remainder lies within R "
                             "of a dropped boundary condition")


def disagreement_connected(xi1: Configuration, xi2: Configuration, c1, c2,
                           R: float) -> bool:
    """Whether every point of ``xi1 △ xi2`` is R-connected within ``xi1 △ xi2``
    to a point of ``c1 △ c2``."""
    dim = xi1.dim
    dis = xi1.symmetric_difference(xi2).points
    if len(dis) == 0:
        return True
    b1 = Configuration._trusted(_points(c1, dim))
    b2 = Configuration._trusted(_points(c2, dim))
    bdis = b1.symmetric_difference(b2).points
    if len(bdis) == 0:
        return False
    labels = cluster_labels(np.concatenate([dis, bdis]), R)
    anchored = set(labels[len(dis):].tolist())
    return all(lab in anchored for lab in labels[:len(dis)].tolist())


def check_coupling(sample: CouplingSample, R: float) -> dict[str, bool]:
    """Evaluate the structural properties of one coupling sample."""
    c1, c2 = sample.c1.points.points, sample.c2.points.points
    union = sample.xi1.union(sample.xi2)
    return {
        "union_dominated": union.issubset(sample.xi3),
        "hard_core_1": bool(hard_core_arrays(sample.xi1.points, c1, R)),
        "hard_core_2": bool(hard_core_arrays(sample.xi2.points, c2, R)),
        "disagreement_connected": disagreement_connected(sample.xi1, sample.xi2,
                                                         sample.c1, sample.c2, R),
        "depth_within_cap": sample.trace is None or sample.trace.depth <= sample.trace.cap,
    }


# -- line-delimited sample records ------------------------------------------

_TUPLE = re.compile(r"\(([^()]*)\)")


def format_points(c: Configuration) -> str:
    return ",".join("(" + ",".join(repr(float(v)) for v in p) + ")" for p in c.points)


def parse_points(text: str, dim: int) -> Configuration:
    rows = [[float(v) for v in m.group(1).split(",")] for m in _TUPLE.finditer(text)]
    if not rows:
        return Configuration.empty(dim)
    return Configuration(rows, dim=dim)


def write_samples(path, records: Iterable[dict], dim: int) -> None:
    """Write records with keys ``replica``, ``seed`` and ``points1..3``.

    Each ``points*`` value is a :class:`Configuration` (or ``None``).
    """
    with open(path, "w") as fh:
        fh.write(f"{SAMPLES_HEADER} dim={dim}\n")
        for rec in records:
            out = {"replica": rec["replica"], "seed": rec["seed"]}
            for key in ("points1", "points2", "points3"):
                cfg = rec.get(key)
                out[key] = "" if cfg is None else format_points(cfg)
            fh.write(json.dumps(out) + "\n")


def read_samples(path) -> list[dict]:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith(SAMPLES_HEADER):
            raise ValueError(f"not a sample file: {header!r}")
        dim = int(header.split("dim=")[1])
        out = []
        for line in fh:
            if not line.strip() or line.startswith("#"):
                continue
            rec = json.loads(line)
            for key in ("points1", "points2", "points3"):
                rec[key] = parse_points(rec[key], dim)
            out.append(rec)
    return out


def sample_record(replica: int, rng: RngStream, *configs: Configuration) -> dict:
    rec = {"replica": replica, "seed": rng.seed}
    for i, cfg in enumerate(configs, start=1):
        rec[f"points{i}"] = cfg
    return rec
