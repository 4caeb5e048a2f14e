"""Command line entry point.

Exit codes: 0 on success or passing verdicts, 1 when a verdict fails, 2 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..bounds import bounds_table, render_bounds_csv, render_bounds_text
from ..coupling import sample_record, thin_to_hard_sphere, twisted_couple, write_samples
from ..percolation import (SweepRow, critical_intensity_sweep, crossing_estimate,
                           fit_decay, render_sweep_csv, spans)
from ..estimate import Estimate, Method
from ..geometry import Region
from ..sampling import OracleInfeasible, sample_hard_sphere_rejection, sample_poisson
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import EXPERIMENTS, run_experiment
from .replicate import map_replicas, stream

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--dim", type=int)
    p.add_argument("--radius", type=float)
    p.add_argument("--lambda", dest="lam", type=float, help="hard-sphere activity")
    p.add_argument("--alpha", type=float, help="Poisson intensity (default: lambda)")
    p.add_argument("--box", type=float, help="side of the cube [0, box]^dim")
    p.add_argument("--seed", type=int)
    p.add_argument("--replicas", type=int)
    p.add_argument("--n-mc", dest="n_mc", type=int)
    p.add_argument("--out")
    p.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hsperc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="draw point configurations")
    s.add_argument("kind", choices=["poisson", "hs-rejection", "hs-thinning"])
    _common(s)

    c = sub.add_parser("couple", help="sample a disagreement coupling")
    c.add_argument("kind", choices=["twisted"])
    _common(c)

    p = sub.add_parser("percolation", help="Boolean-model spanning sweep")
    p.add_argument("kind", choices=["sweep"])
    _common(p)

    d = sub.add_parser("decay", help="fit the decay of the spanning probability in length")
    d.add_argument("kind", choices=["fit"])
    _common(d)

    b = sub.add_parser("bounds", help="known bounds on critical intensities")
    b.add_argument("kind", choices=["table"])
    b.add_argument("--format", choices=["csv", "text"], default="csv")
    _common(b)

    v = sub.add_parser("verify", help="run an experiment and report verdicts")
    v.add_argument("experiment", choices=sorted(EXPERIMENTS))
    _common(v)
    return parser


_FLAG_KEYS = ("dim", "radius", "lam", "alpha", "box", "seed", "replicas", "n_mc", "out",
              "threads")


def config_from_args(args, **defaults) -> ExperimentConfig:
    overrides = {k: getattr(args, k) for k in _FLAG_KEYS}
    overrides.update({k: v for k, v in defaults.items() if v is not None})
    if args.config:
        return load_config(args.config, overrides)
    return parse_config("", overrides)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_sample(args, cfg: ExperimentConfig) -> int:
    r = cfg.region()
    c = cfg.boundary(1)

    def one(i):
        rng = stream(cfg.seed, 0, i)
        if args.kind == "poisson":
            return sample_record(i, rng, sample_poisson(r, cfg.intensity, rng))
        if args.kind == "hs-rejection":
            return sample_record(i, rng, sample_hard_sphere_rejection(r, c, cfg.lam,
                                                                      cfg.radius, rng))
        pair = thin_to_hard_sphere(r, c, cfg.lam, cfg.radius, cfg.n_mc, rng,
                                   exact=cfg.exact and cfg.dim == 1)
        return sample_record(i, rng, pair.kept, pair.dominating)

    records = map_replicas(one, cfg.replicas, cfg.threads)
    write_samples(cfg.out or "/dev/stdout", records, cfg.dim)
    return EXIT_OK


def _cmd_couple(args, cfg: ExperimentConfig) -> int:
    r = cfg.region()

    def one(i):
        rng = stream(cfg.seed, 0, i)
        s = twisted_couple(r, cfg.boundary(1), cfg.boundary(2), cfg.lam, cfg.radius,
                           cfg.n_mc, rng, exact=cfg.exact and cfg.dim == 1)
        return sample_record(i, rng, s.xi1, s.xi2, s.xi3)

    records = map_replicas(one, cfg.replicas, cfg.threads)
    write_samples(cfg.out or "/dev/stdout", records, cfg.dim)
    return EXIT_OK


def _cmd_sweep(args, cfg: ExperimentConfig) -> int:
    sides = cfg.box_sides or (cfg.box,)
    alphas = cfg.alpha_grid or (cfg.intensity,)
    grid = [(s, a) for s in sorted(sides) for a in sorted(alphas)]

    def one(k):
        s, a = grid[k]
        return critical_intensity_sweep(cfg.dim, cfg.radius, [s], [a], cfg.replicas,
                                        stream(cfg.seed, 0, k))[0]

    rows = map_replicas(one, len(grid), cfg.threads)
    _emit(render_sweep_csv(rows), cfg.out)
    if cfg.out:
        a = crossing_estimate(rows)
        print(json.dumps({"crossing_estimate": None if a != a else a}))
    return EXIT_OK


def _cmd_decay(args, cfg: ExperimentConfig) -> int:
    lengths = cfg.distances or tuple(cfg.radius * k for k in range(1, 7))

    def one(k):
        t = lengths[k]
        hi = [t] + [cfg.box] * (cfg.dim - 1)
        box = Region.box([0.0] * cfg.dim, hi)
        rng = stream(cfg.seed, 0, k)
        hits = sum(spans(sample_poisson(box, cfg.intensity, rng), box, cfg.radius)
                   for _ in range(cfg.replicas))
        e = Estimate.binomial(hits, cfg.replicas)
        return SweepRow(cfg.dim, cfg.radius, cfg.intensity, t, cfg.replicas,
                        "spanning_probability", e.mean, e.std_error)

    rows = map_replicas(one, len(lengths), cfg.threads)
    _emit(render_sweep_csv(rows), cfg.out)
    try:
        fit = fit_decay([(r.box_side, Estimate(r.value, r.std_error, r.replicas,
                                               Method.MC_PLAIN)) for r in rows])
    except ValueError as exc:
        print(f"decay fit: {exc}", file=sys.stderr)
        return EXIT_FAIL
    summary = {"K": fit.K, "kappa": fit.kappa, "kappa_ci": list(fit.kappa_ci),
               "decaying": fit.decaying}
    print(json.dumps(summary), file=sys.stderr if not cfg.out else sys.stdout)
    return EXIT_OK if fit.decaying else EXIT_FAIL


def _cmd_bounds(args, cfg: ExperimentConfig) -> int:
    rows = [row for d in range(1, cfg.dim + 1) for row in bounds_table(d, cfg.radius)]
    text = render_bounds_csv(rows) if args.format == "csv" else render_bounds_text(rows)
    _emit(text, cfg.out)
    return EXIT_OK


def _cmd_verify(args, cfg: ExperimentConfig) -> int:
    report = run_experiment(cfg)
    _emit(report.to_json() + "\n", cfg.out)
    for v in report.verdicts:
        print(f"{'PASS' if v.passed else 'FAIL'} {v.name}: {v.value} ({v.tolerance})",
              file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def cli_dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            cfg = config_from_args(args, experiment=args.experiment)
        else:
            cfg = config_from_args(args)
        handler = {"sample": _cmd_sample, "couple": _cmd_couple,
                   "percolation": _cmd_sweep, "decay": _cmd_decay,
                   "bounds": _cmd_bounds, "verify": _cmd_verify}[args.command]
        return handler(args, cfg)
    except (ConfigError, OracleInfeasible, OSError) as exc:
        print(f"hsperc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_dispatch())
