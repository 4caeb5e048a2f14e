"""Known critical-intensity bounds and cluster-expansion radii for hard spheres.

All finite values scale as ``R**-d``. The constants for the plane are
rounded literature values, stored at unit radius.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

__all__ = ["BoundsRow", "ball_volume_coeff", "bounds_table", "render_bounds_csv",
           "render_bounds_text", "parse_bounds_csv"]

BOUNDS_HEADER = "# hsperc-bounds v1"

# planar constants at R = 1
PLANE_CRITICAL_RIGOROUS = (0.174, 0.843)
PLANE_CRITICAL_HIGH_CONFIDENCE = 0.358
PLANE_CE_LOWER = 0.1625


@dataclass(frozen=True)
class BoundsRow:
    dimension: int
    quantity: str
    lower: float | None
    upper: float | None
    kind: str

    def __post_init__(self):
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")


def ball_volume_coeff(d: int) -> float:
    """Volume of the unit ball in ``d`` dimensions."""
    if d < 1:
        raise ValueError("dimension must be at least 1")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def bounds_table(d: int, R: float) -> list[BoundsRow]:
    """Bounds on the Boolean critical intensity and on the cluster-expansion radius.

    ``critical_intensity`` rows bound the percolation threshold of the
    Boolean model with connection distance ``R``; ``ce_radius`` rows bound the
    radius of convergence of the hard-sphere cluster expansion in the
    activity. ``kind`` says where a row comes from: ``exact``, ``rigorous``,
    ``high_confidence`` (simulation), ``general`` (valid in every
    dimension), ``asymptotic`` (the leading behaviour as ``d`` grows, not a
    bound) or ``conjecture`` (a conjectured asymptotic).
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    if R <= 0:
        raise ValueError("radius must be positive")
    s = R ** -d
    v = ball_volume_coeff(d)
    rows: list[BoundsRow] = []
    if d == 1:
        rows.append(BoundsRow(1, "critical_intensity", math.inf, math.inf, "exact"))
        rows.append(BoundsRow(1, "ce_radius", 1 / (math.e * R), 1 / (math.e * R), "exact"))
    elif d == 2:
        lo, hi = PLANE_CRITICAL_RIGOROUS
        rows.append(BoundsRow(2, "critical_intensity", lo * s, hi * s, "rigorous"))
        rows.append(BoundsRow(2, "critical_intensity", PLANE_CRITICAL_HIGH_CONFIDENCE * s,
                              None, "high_confidence"))
        rows.append(BoundsRow(2, "ce_radius", PLANE_CE_LOWER * s, 2 / (math.e * math.pi) * s,
                              "rigorous"))
    rows.append(BoundsRow(d, "ce_radius", 1 / (math.e * v) * s, 2 / v * s, "general"))
    # large-d behaviour: the value is asymptotic to these, not bounded by them
    rows.append(BoundsRow(d, "critical_intensity", 1 / v * s, 1 / v * s, "asymptotic"))
    rows.append(BoundsRow(d, "ce_radius", 1 / (math.e * v) * s, 1 / (math.e * v) * s,
                          "conjecture"))
    return rows


_FIELDS = ["dimension", "quantity", "lower", "upper", "kind"]


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def render_bounds_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(BOUNDS_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_FIELDS)
    for r in rows:
        w.writerow([r.dimension, r.quantity, _fmt(r.lower), _fmt(r.upper), r.kind])
    return buf.getvalue()


def parse_bounds_csv(text: str) -> list[BoundsRow]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return [BoundsRow(int(r["dimension"]), r["quantity"],
                      float(r["lower"]) if r["lower"] else None,
                      float(r["upper"]) if r["upper"] else None, r["kind"])
            for r in csv.DictReader(lines)]


def render_bounds_text(rows) -> str:
    def g(v):
        return "-" if v is None else f"{v:.6g}"
    body = [[str(r.dimension), r.quantity, g(r.lower), g(r.upper), r.kind] for r in rows]
    table = [_FIELDS] + body
    widths = [max(len(row[i]) for row in table) for i in range(len(_FIELDS))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
                     for row in table) + "\n"
