"""Pivot point: the middle control point of the initial quadratic curve.

The ODE is enforced at both boundary points. For a quadratic Bezier curve the
endpoint slopes are the slopes of the segments towards the middle control
point, so the pivot is the intersection of the two boundary tangent lines
whose slopes solve G(x_end, y_end, s) = 0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError, NoCandidate, NoRealSlopes
from .problems import BvpProblem

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScanConfig:
    slope_min: float = -1e4
    slope_max: float = 1e4
    scan_samples: int = 20001
    refine_tolerance: float = 1e-12
    max_refine_iterations: int = 200

    def __post_init__(self):
        if not self.slope_min < self.slope_max:
            raise ValueError("slope_min must be smaller than slope_max")
        if self.scan_samples < 2:
            raise ValueError("scan_samples must be at least 2")
        if self.refine_tolerance <= 0:
            raise ValueError("refine_tolerance must be positive")


@dataclass(frozen=True)
class Candidate:
    slope_a: float
    slope_b: float
    p: float
    q: float
    distance: float


@dataclass(frozen=True)
class PivotResult:
    pivot: tuple[float, float]
    slopes_a: list[float]
    slopes_b: list[float]
    candidates: list[Candidate] = field(default_factory=list)
    chosen_index: int = 0
    parallel_pairs: list[tuple[float, float]] = field(default_factory=list)

    @property
    def chosen(self) -> Candidate:
        return self.candidates[self.chosen_index]


def _bisect(g, lo: float, hi: float, glo: float, cfg: ScanConfig) -> float:
    for _ in range(cfg.max_refine_iterations):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo <= cfg.refine_tolerance * max(1.0, abs(mid)):
            break
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm < 0.0) == (glo < 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def endpoint_slopes(problem: BvpProblem, end: str, cfg: ScanConfig | None = None) -> list[float]:
    """All real roots s of G(x_end, y_end, s) = 0 inside the scan range, ascending.

    ``end`` is ``"lower"`` (x = a) or ``"upper"`` (x = b). An empty list means
    the slope equation has no real solution in range.
    """
    cfg = cfg or ScanConfig()
    if end == "lower":
        x, y = problem.a, problem.y_a
    elif end == "upper":
        x, y = problem.b, problem.y_b
    else:
        raise ValueError(f"end must be 'lower' or 'upper', got {end!r}")

    def g(s: float) -> float:
        return problem.residual_eval(x, y, s)

    grid = np.linspace(cfg.slope_min, cfg.slope_max, cfg.scan_samples)
    values = np.empty_like(grid)
    for k, s in enumerate(grid):
        try:
            values[k] = g(float(s))
        except EvaluationError:
            values[k] = math.nan

    roots: list[float] = []
    for k in range(len(grid)):
        gk = values[k]
        if gk == 0.0:
            roots.append(float(grid[k]))
        elif k + 1 < len(grid) and np.isfinite(gk) and np.isfinite(values[k + 1]) \
                and values[k + 1] != 0.0 and (gk < 0.0) != (values[k + 1] < 0.0):
            roots.append(_bisect(g, float(grid[k]), float(grid[k + 1]), float(gk), cfg))

    unique: list[float] = []
    for r in sorted(roots):
        if not unique or abs(r - unique[-1]) > 1e-8:
            unique.append(r)
    log.debug("slopes at %s end (x=%g, y=%g): %s", end, x, y, unique)
    return unique


def tangent_intersection(pt0: tuple[float, float, float],
                         pt1: tuple[float, float, float]) -> tuple[float, float] | None:
    """Intersect the lines through (x0, y0) with slope s0 and (x1, y1) with slope s1.

    Returns None when the lines are parallel.
    """
    x0, y0, s0 = pt0
    x1, y1, s1 = pt1
    if abs(s0 - s1) < 1e-12 * max(1.0, abs(s0), abs(s1)):
        return None
    p = (y1 - y0 + s0 * x0 - s1 * x1) / (s0 - s1)
    q = y0 + s0 * (p - x0)
    return p, q


def compute_pivot(problem: BvpProblem, cfg: ScanConfig | None = None) -> PivotResult:
    """Pair every lower slope with every upper slope, intersect the tangents and
    keep the intersection whose abscissa is nearest the interval midpoint.

    Raises:
        NoRealSlopes: either boundary has no real slope.
        NoCandidate: every tangent pair is parallel.
    """
    cfg = cfg or ScanConfig()
    slopes_a = endpoint_slopes(problem, "lower", cfg)
    if not slopes_a:
        raise NoRealSlopes("lower")
    slopes_b = endpoint_slopes(problem, "upper", cfg)
    if not slopes_b:
        raise NoRealSlopes("upper")

    mid = problem.midpoint
    candidates: list[Candidate] = []
    parallel: list[tuple[float, float]] = []
    for s0 in slopes_a:
        for s1 in slopes_b:
            hit = tangent_intersection((problem.a, problem.y_a, s0), (problem.b, problem.y_b, s1))
            if hit is None:
                parallel.append((s0, s1))
                continue
            p, q = hit
            candidates.append(Candidate(s0, s1, p, q, abs(p - mid)))
    if not candidates:
        raise NoCandidate(f"all {len(parallel)} boundary tangent pairs are parallel")

    best = min(range(len(candidates)), key=lambda k: (candidates[k].distance, candidates[k].p))
    chosen = candidates[best]
    log.info("pivot (%g, %g) from slopes %g, %g", chosen.p, chosen.q, chosen.slope_a, chosen.slope_b)
    return PivotResult((chosen.p, chosen.q), slopes_a, slopes_b, candidates, best, parallel)
