"""Experiment configuration: a flat ``key = value`` file overridden by CLI flags.

Format::

    # comment
    experiment = marginal
    dim = 1
    radius = 0.6
    lambda = 2
    box = 1                       # cube [0, box]^dim
    boundary1 = (-0.1)            # points as (x,...) tuples, comma separated
    window = (0.5),(1)            # a box given by its lower and upper corner
    distances = 0.5, 1, 1.5       # plain lists are comma separated
    exact = true

Unknown keys are an error. Keys may use ``-`` or ``_``.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..geometry import Configuration, Region

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config"]

_TUPLE = re.compile(r"\(([^()]*)\)")


class ConfigError(ValueError):
    pass


def _tuples(text: str) -> list[list[float]]:
    return [[float(v) for v in m.group(1).split(",") if v.strip()]
            for m in _TUPLE.finditer(text)]


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "marginal"
    dim: int = 1
    radius: float = 1.0
    lam: float = 1.0
    alpha: float | None = None
    box: float = 1.0
    boundary1: tuple[tuple[float, ...], ...] = ()
    boundary2: tuple[tuple[float, ...], ...] = ()
    window: tuple[tuple[float, ...], ...] = ()
    sampler: str = "thinning"
    replicas: int = 1000
    n_mc: int = 20_000
    seed: int = 0
    exact: bool = False
    distances: tuple[float, ...] = ()
    box_sides: tuple[float, ...] = ()
    alpha_grid: tuple[float, ...] = ()
    significance: float = 0.01
    sigmas: float = 3.0
    threads: int = 1
    out: str | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.replicas < 1:
            raise ConfigError("replicas must be at least 1")
        if self.dim < 1:
            raise ConfigError("dim must be at least 1")
        if self.radius < 0 or self.lam < 0 or (self.alpha is not None and self.alpha < 0):
            raise ConfigError("radius and intensities must be non-negative")
        for name in ("boundary1", "boundary2", "window"):
            for p in getattr(self, name):
                if len(p) != self.dim:
                    raise ConfigError(f"{name}: point {p} does not have dimension {self.dim}")
        if self.window and len(self.window) != 2:
            raise ConfigError("window needs a lower and an upper corner")
        r = self.region()
        for name in ("boundary1", "boundary2"):
            pts = getattr(self, name)
            if pts and np.any(r.contains(np.array(pts))):
                raise ConfigError(f"{name} has points inside the region")

    @property
    def intensity(self) -> float:
        """Poisson intensity; defaults to the activity."""
        return self.lam if self.alpha is None else self.alpha

    def region(self) -> Region:
        return Region.cube(self.box, self.dim)

    def boundary(self, which: int) -> Configuration:
        pts = self.boundary1 if which == 1 else self.boundary2
        if not pts:
            return Configuration.empty(self.dim)
        return Configuration(np.array(pts, dtype=float), dim=self.dim)

    def window_region(self) -> Region | None:
        if not self.window:
            return None
        return Region.box(self.window[0], self.window[1])

    def echo(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d.pop("extra")
        d.pop("threads")
        d.pop("out")
        return {k: list(map(list, v)) if k in ("boundary1", "boundary2", "window") else
                (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}

    def replace(self, **kw) -> ExperimentConfig:
        return dataclasses.replace(self, **kw)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_ALIASES = {"lambda": "lam", "n-mc": "n_mc", "nmc": "n_mc"}


def _convert(key: str, value: str) -> Any:
    if key in ("boundary1", "boundary2", "window"):
        return tuple(tuple(p) for p in _tuples(value))
    if key in ("distances", "box_sides", "alpha_grid"):
        return _floats(value)
    if key == "exact":
        return _bool(value)
    if key in ("dim", "replicas", "n_mc", "seed", "threads"):
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {value!r}") from None
    if key in ("radius", "lam", "alpha", "box", "significance", "sigmas"):
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {value!r}") from None
    return value.strip()


def _normalise_key(key: str) -> str:
    key = key.strip().lower()
    key = _ALIASES.get(key, key).replace("-", "_")
    if key not in _FIELDS or key == "extra":
        raise ConfigError(f"unknown config key {key!r}")
    return key


def parse_config(text: str, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        k, v = line.split("=", 1)
        key = _normalise_key(k)
        values[key] = _convert(key, v)
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        key = _normalise_key(k)
        values[key] = _convert(key, v) if isinstance(v, str) else v
    return ExperimentConfig(**values)


def load_config(path, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read(), overrides)
