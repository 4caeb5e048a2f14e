"""Experiment reports: config echo, statistics, verdicts and timing."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

from ..estimate import Estimate

REPORT_VERSION = "hsperc-report v1"


@dataclass(frozen=True)
class Verdict:
    name: str
    check: str  # the property or acceptance criterion under test
    passed: bool
    value: float | None
    tolerance: str
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))


def _plain(v: Any) -> Any:
    if isinstance(v, Estimate):
        return {"mean": v.mean, "std_error": v.std_error, "n_samples": v.n_samples,
                "method": v.method.value}
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return _plain(v.item())
    return v


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    statistics: dict = field(default_factory=dict)
    verdicts: list[Verdict] = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def verdict(self, name: str) -> Verdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def to_dict(self, timing: bool = True) -> dict:
        out = {"version": REPORT_VERSION, "experiment": self.experiment,
               "config": _plain(self.config), "statistics": _plain(self.statistics),
               "verdicts": [_plain(asdict(v)) for v in self.verdicts],
               "passed": self.passed}
        if timing:
            out["timing"] = _plain(self.timing)
        return out

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True)
