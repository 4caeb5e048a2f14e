"""Experiment drivers checking the coupling constructions numerically.

Every driver takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentReport`. Random numbers come from per-replica streams
(see :mod:`.replicate`), so a report depends only on the config.
"""

from __future__ import annotations

import math
import time

import numpy as np
from scipy import stats

from ..bounds import ball_volume_coeff
from ..coupling import check_coupling, thin_to_hard_sphere, twisted_couple
from ..estimate import Estimate, Method
from ..geometry import Configuration, Region
from ..hardcore import hard_core_arrays
from ..partition import acceptance_probability, count_law_1d, partition_series_1d
from ..percolation import Exterior, connection_probability, fit_decay
from ..sampling import OracleInfeasible, sample_hard_sphere_rejection
from ..stattests import (count_gof, counts, mean_nn_distances, two_sample_counts,
                         two_sample_ecdf)
from .config import ConfigError, ExperimentConfig
from .replicate import map_replicas, stream
from .report import ExperimentReport, Verdict

__all__ = [
    "EXPERIMENTS",
    "run_disagreement_bound_test",
    "run_experiment",
    "run_marginal_test",
    "run_sensitivity_decay",
    "run_uniqueness_sweep",
    "subcritical_limit",
]

# roles for stream ids
COUPLED, ORACLE1, ORACLE2, BOOLEAN, PILOT = range(5)

# total rejection attempts allowed per oracle row in the uniqueness sweep
ORACLE_BUDGET = 400_000


def subcritical_limit(d: int, R: float) -> float:
    """Intensity below which the drivers treat the Boolean model as subcritical.

    ``inf`` in one dimension. In the plane, the tabulated high-confidence
    threshold. Otherwise the branching bound ``1 / (v_d R^d)``: below it the
    mean number of neighbours is less than one.
    """
    if d == 1:
        return math.inf
    if d == 2:
        return 0.358 / R ** 2
    return 1.0 / (ball_volume_coeff(d) * R ** d)


def _oracle_samples(cfg: ExperimentConfig, c: Configuration, role: int,
                    region: Region | None = None):
    r = cfg.region() if region is None else region

    def one(i):
        return sample_hard_sphere_rejection(r, c, cfg.lam, cfg.radius,
                                            stream(cfg.seed, role, i))
    return map_replicas(one, cfg.replicas, cfg.threads)


def _void(samples, window: Region) -> Estimate:
    hits = sum(1 for s in samples if len(s) == 0 or not window.contains(s.points).any())
    return Estimate.binomial(hits, len(samples))


def _mean(values) -> Estimate:
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
    return Estimate(float(v.mean()) if len(v) else 0.0, se, len(v), Method.MC_PLAIN)


def _half_box(cfg: ExperimentConfig) -> Region:
    hi = np.full(cfg.dim, cfg.box)
    hi[0] = cfg.box / 2
    return Region.box(np.zeros(cfg.dim), hi)


def _battery(name, coupled, oracle, c, cfg, report, exact_law):
    sub = cfg.window_region() or _half_box(cfg)
    n_c, n_o = counts(coupled), counts(oracle)
    tests = {
        "count": two_sample_counts(n_c, n_o),
        "subbox_count": two_sample_counts(counts(coupled, sub), counts(oracle, sub)),
        "nn_ecdf": two_sample_ecdf(mean_nn_distances(coupled), mean_nn_distances(oracle)),
    }
    if exact_law:
        try:
            law = count_law_1d(cfg.region(), c, cfg.lam, cfg.radius)
        except ValueError:
            law = None
        if law is not None:
            report.statistics[f"{name}.exact_count_law"] = law.tolist()
            tests["count_exact_law"] = count_gof(n_c, law)
    report.statistics[f"{name}.mean_count"] = _mean(n_c)
    report.statistics[f"{name}.oracle_mean_count"] = _mean(n_o)
    report.statistics[f"{name}.count_histogram"] = np.bincount(n_c).tolist()
    report.statistics[f"{name}.oracle_count_histogram"] = np.bincount(n_o).tolist()
    for test, p in tests.items():
        report.statistics[f"{name}.p_{test}"] = p
        report.verdicts.append(Verdict(f"{name}.{test}", "hard-sphere marginal",
                                       p > cfg.significance, p,
                                       f"p > {cfg.significance}"))


def _poisson_check(name, dominating, cfg, report):
    mu = cfg.lam * cfg.region().box_volume()
    n = counts(dominating)
    k = int(n.max(initial=0)) + 1
    law = stats.poisson.pmf(np.arange(k + 1), mu)
    law[-1] += stats.poisson.sf(k, mu)
    p = count_gof(n, law) if mu > 0 else float(np.all(n == 0))
    report.statistics[f"{name}.p_poisson_count"] = p
    report.verdicts.append(Verdict(f"{name}.poisson_count", "dominating Poisson marginal",
                                   p > cfg.significance, p, f"p > {cfg.significance}"))


def run_marginal_test(cfg: ExperimentConfig) -> ExperimentReport:
    """Compare coupled hard-sphere samples with the rejection oracle.

    ``cfg.sampler`` is ``thinning`` (boundary ``boundary1``) or ``twisted``
    (both boundaries; each marginal is compared with its own oracle).

    Raises
    ------
    OracleInfeasible
        When the rejection oracle cannot produce samples; use a smaller
        ``lambda * volume``.
    """
    t0 = time.perf_counter()
    report = ExperimentReport("marginal", cfg.echo())
    r, R, lam = cfg.region(), cfg.radius, cfg.lam
    exact = cfg.exact and cfg.dim == 1
    c1, c2 = cfg.boundary(1), cfg.boundary(2)
    if cfg.sampler == "thinning":
        def coupled(i):
            p = thin_to_hard_sphere(r, c1, lam, R, cfg.n_mc, stream(cfg.seed, COUPLED, i),
                                    exact=exact)
            return p.kept, p.dominating
        pairs = map_replicas(coupled, cfg.replicas, cfg.threads)
        kept, dom = [p[0] for p in pairs], [p[1] for p in pairs]
        bad = sum(not k.issubset(d) or not hard_core_arrays(k.points, c1.points, R)
                  for k, d in pairs)
        report.verdicts.append(Verdict("thinning.structure", "kept within dominating, hard core",
                                       bad == 0, bad, "0 violations"))
        t1 = time.perf_counter()
        _battery("xi1", kept, _oracle_samples(cfg, c1, ORACLE1), c1, cfg, report, exact)
        _poisson_check("dominating", dom, cfg, report)
    elif cfg.sampler == "twisted":
        def coupled(i):
            return twisted_couple(r, c1, c2, lam, R, cfg.n_mc, stream(cfg.seed, COUPLED, i),
                                  exact=exact)
        samples = map_replicas(coupled, cfg.replicas, cfg.threads)
        bad = sum(not all(check_coupling(s, R).values()) for s in samples)
        report.verdicts.append(Verdict("twisted.structure", "coupling assertions",
                                       bad == 0, bad, "0 violations"))
        t1 = time.perf_counter()
        _battery("xi1", [s.xi1 for s in samples], _oracle_samples(cfg, c1, ORACLE1), c1,
                 cfg, report, exact)
        _battery("xi2", [s.xi2 for s in samples], _oracle_samples(cfg, c2, ORACLE2), c2,
                 cfg, report, exact)
        _poisson_check("xi3", [s.xi3 for s in samples], cfg, report)
    else:
        raise ConfigError(f"unknown sampler {cfg.sampler!r}")
    t2 = time.perf_counter()
    report.timing = {"coupled_seconds": t1 - t0, "oracle_seconds": t2 - t1,
                     "replicas_per_second": cfg.replicas / max(t1 - t0, 1e-9)}
    return report


def _combined(*se: float) -> float:
    return math.sqrt(sum(s * s for s in se))


def run_disagreement_bound_test(cfg: ExperimentConfig) -> ExperimentReport:
    """Void-probability difference under two boundaries vs the connection bound.

    The left side is ``|P1(no point in A) - P2(no point in A)|`` from two
    rejection-oracle runs; the right side is the probability that a
    Poisson(alpha) draw on the region connects ``A`` to the boundary
    disagreement ``c1 △ c2``.
    """
    t0 = time.perf_counter()
    A = cfg.window_region()
    if A is None:
        raise ConfigError("disagreement bound needs a window")
    report = ExperimentReport("disagreement-bound", cfg.echo())
    c1, c2 = cfg.boundary(1), cfg.boundary(2)
    v1 = _void(_oracle_samples(cfg, c1, ORACLE1), A)
    v2 = _void(_oracle_samples(cfg, c2, ORACLE2), A)
    lhs = Estimate(abs(v1.mean - v2.mean), _combined(v1.std_error, v2.std_error),
                   v1.n_samples + v2.n_samples, v1.method)
    dis = c1.symmetric_difference(c2)
    rhs = connection_probability(cfg.region(), A, dis, cfg.intensity, cfg.radius,
                                 cfg.replicas, stream(cfg.seed, BOOLEAN))
    tol = cfg.sigmas * _combined(lhs.std_error, rhs.std_error)
    report.statistics.update({"void1": v1, "void2": v2, "lhs": lhs, "rhs": rhs})
    report.verdicts.append(Verdict("bound", "disagreement bounded by connection",
                                   lhs.mean <= rhs.mean + tol, lhs.mean - rhs.mean,
                                   f"lhs - rhs <= {cfg.sigmas} combined se = {tol:.4g}"))
    report.timing = {"seconds": time.perf_counter() - t0}
    return report


def _check_subcritical(cfg: ExperimentConfig) -> None:
    limit = subcritical_limit(cfg.dim, cfg.radius)
    if cfg.intensity >= limit:
        raise ConfigError(f"intensity {cfg.intensity} is not below the subcritical limit "
                          f"{limit:.4g}; refusing to fit a decay rate")


def _void_exact_1d(B: Region, A_hi: float, c, lam: float, R: float) -> float:
    outside = Region.box([A_hi], B.hi)
    return (partition_series_1d(outside, c, lam, R).mean
            / partition_series_1d(B, c, lam, R).mean)


def run_sensitivity_decay(cfg: ExperimentConfig) -> ExperimentReport:
    """Decay of the influence of one boundary point on a void probability (1D).

    Window ``A = [0, w]``; for each distance ``t`` the region is
    ``[0, w + t - R/2]`` and the extra boundary point sits at ``w + t``.
    The influence ``|P(no point in A) - P(no point in A | extra point)|`` and
    the Boolean connection probability from ``A`` to the point are both
    fitted to ``K exp(-kappa t)``; the two rates must have overlapping
    confidence intervals.
    """
    _check_subcritical(cfg)
    if cfg.dim != 1:
        raise ConfigError("sensitivity decay is implemented in one dimension")
    t0 = time.perf_counter()
    R, lam = cfg.radius, cfg.lam
    w = cfg.window[1][0] if cfg.window else R
    dists = cfg.distances or tuple(R * k for k in (1, 1.5, 2, 2.5, 3, 3.5, 4))
    if min(dists) <= R / 2:
        raise ConfigError("distances must exceed R/2")
    A = Region.box([0.0], [w])
    report = ExperimentReport("sensitivity-decay", cfg.echo())
    diff_rows, conn_rows = [], []
    for k, t in enumerate(dists):
        B = Region.box([0.0], [w + t - R / 2])
        x = Configuration([[w + t]], dim=1)
        if cfg.exact:
            d = abs(_void_exact_1d(B, w, None, lam, R) - _void_exact_1d(B, w, x, lam, R))
            diff = Estimate(d, 0.0, 0, Method.SERIES)
        else:
            v0 = _void(_oracle_samples(cfg, Configuration.empty(1), ORACLE1, B), A)
            v1 = _void(_oracle_samples(cfg, x, ORACLE2, B), A)
            diff = Estimate(abs(v0.mean - v1.mean), _combined(v0.std_error, v1.std_error),
                            v0.n_samples, v0.method)
        conn = connection_probability(B, A, x, cfg.intensity, R, cfg.replicas,
                                      stream(cfg.seed, BOOLEAN, k))
        diff_rows.append((t, diff))
        conn_rows.append((t, conn))
        tol = cfg.sigmas * _combined(diff.std_error, conn.std_error)
        report.verdicts.append(Verdict(f"bound.t={t:g}", "influence bounded by connection",
                                       diff.mean <= conn.mean + tol, diff.mean - conn.mean,
                                       f"<= {cfg.sigmas} combined se"))
    report.statistics["influence"] = [[t, e] for t, e in diff_rows]
    report.statistics["connection"] = [[t, e] for t, e in conn_rows]
    if all(e.mean == 0 for _, e in diff_rows):
        report.verdicts.append(Verdict("influence.zero", "no influence at zero activity",
                                       True, 0.0, "all differences zero"))
    else:
        f_inf = fit_decay(diff_rows)
        f_con = fit_decay(conn_rows)
        report.statistics["influence_fit"] = vars_fit(f_inf)
        report.statistics["connection_fit"] = vars_fit(f_con)
        overlap = f_inf.kappa_ci[0] <= f_con.kappa_ci[1] and f_con.kappa_ci[0] <= f_inf.kappa_ci[1]
        report.verdicts.append(Verdict("influence.decaying", "influence decays exponentially",
                                       f_inf.decaying, f_inf.kappa, "kappa CI above 0"))
        report.verdicts.append(Verdict("connection.decaying", "connection decays exponentially",
                                       f_con.decaying, f_con.kappa, "kappa CI above 0"))
        report.verdicts.append(Verdict("rates.agree", "same decay rate", overlap,
                                       f_inf.kappa - f_con.kappa, "95% CIs overlap"))
    report.timing = {"seconds": time.perf_counter() - t0}
    return report


def vars_fit(f) -> dict:
    return {"K": f.K, "kappa": f.kappa, "kappa_ci": list(f.kappa_ci),
            "residual": f.residual, "n_points": f.n_points, "weighted": f.weighted}


def ring_packing(box: Region, R: float, spacing: float | None = None) -> Configuration:
    """Grid points outside ``box`` and within ``R`` of it, spaced just above ``R``."""
    h = 1.01 * R if spacing is None else spacing
    lo, hi = box.lo - R, box.hi + R
    axes = [np.arange(l, u + 1e-12, h) for l, u in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, box.dim)
    d = box.box_distance(grid)
    return Configuration(grid[(d > 0) & (d <= R)], dim=box.dim)


def run_uniqueness_sweep(cfg: ExperimentConfig) -> ExperimentReport:
    """Influence of the boundary on a central window as the box grows.

    For each side length a centred box gets two boundaries: empty and a
    grid packing on its ring. The void-probability difference on the window
    is estimated with the rejection oracle where that is feasible; the
    probability that a Poisson draw connects the window to the outside of
    the box is estimated for every size and must fall off.
    """
    _check_subcritical(cfg)
    t0 = time.perf_counter()
    R, d = cfg.radius, cfg.dim
    sides = cfg.box_sides or tuple(R * k for k in (4, 6, 8, 10, 12, 14, 16))
    w = (cfg.window[1][0] - cfg.window[0][0]) if cfg.window else R
    A = Region.box(np.full(d, -w / 2), np.full(d, w / 2))
    report = ExperimentReport("uniqueness", cfg.echo())
    rows = []
    for k, s in enumerate(sorted(sides)):
        B = Region.box(np.full(d, -s / 2), np.full(d, s / 2))
        ring = ring_packing(B, R)
        conn = connection_probability(B, A, Exterior(B), cfg.intensity, R, cfg.replicas,
                                      stream(cfg.seed, BOOLEAN, k))
        row = {"side": s, "ring_points": len(ring), "connection": conn, "influence": None}
        worst = min(acceptance_probability(B, None, cfg.lam, R, 2000,
                                           stream(cfg.seed, PILOT, k)).mean, 1.0) \
            if cfg.lam > 0 else 1.0
        row["oracle_acceptance"] = worst
        if worst * ORACLE_BUDGET >= 20 * cfg.replicas:
            try:
                v0 = _void(_oracle_samples(cfg, Configuration.empty(d), ORACLE1, B), A)
                v1 = _void(_oracle_samples(cfg, ring, ORACLE2, B), A)
                row["influence"] = Estimate(abs(v0.mean - v1.mean),
                                            _combined(v0.std_error, v1.std_error),
                                            v0.n_samples, v0.method)
            except OracleInfeasible:
                pass
        rows.append(row)
    report.statistics["rows"] = rows
    cvals = [r["connection"] for r in rows]
    first, last = cvals[0].mean, cvals[-1].mean
    report.verdicts.append(Verdict("connection.shrinks", "connection to the outside vanishes",
                                   last < first / 3 or first == 0, last,
                                   "final < first / 3"))
    ups = [b.mean - a.mean - cfg.sigmas * _combined(a.std_error, b.std_error)
           for a, b in zip(cvals, cvals[1:])]
    report.verdicts.append(Verdict("connection.monotone", "connection to the outside vanishes",
                                   all(u <= 0 for u in ups), max(ups, default=0.0),
                                   f"no increase beyond {cfg.sigmas} se"))
    for r in rows:
        inf, con = r["influence"], r["connection"]
        if inf is None:
            continue
        tol = cfg.sigmas * _combined(inf.std_error, con.std_error)
        report.verdicts.append(Verdict(f"bound.side={r['side']:g}",
                                       "influence bounded by connection",
                                       inf.mean <= con.mean + tol, inf.mean - con.mean,
                                       f"<= {cfg.sigmas} combined se"))
    report.statistics["infeasible_sides"] = [r["side"] for r in rows if r["influence"] is None]
    report.timing = {"seconds": time.perf_counter() - t0}
    return report


EXPERIMENTS = {
    "marginal": run_marginal_test,
    "disagreement-bound": run_disagreement_bound_test,
    "sensitivity-decay": run_sensitivity_decay,
    "uniqueness": run_uniqueness_sweep,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    try:
        fn = EXPERIMENTS[cfg.experiment]
    except KeyError:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; "
                          f"choose from {', '.join(EXPERIMENTS)}") from None
    return fn(cfg)
