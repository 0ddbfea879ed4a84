"""Bernstein basis, Bezier curves and their parametric derivatives.

Curves are evaluated with de Casteljau's recursive interpolation; the direct
basis sum (:func:`basis_row` dotted with the control points) is kept as an
independent route for cross-checks.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import SingularParametrization

MAX_DEGREE = 60


@dataclass(frozen=True)
class CurvePoint:
    t: float
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class ControlPolygon:
    """Ordered control points, each tagged with the parameter that produced it.

    Boundary points carry tags 0 and 1 and stay first and last. Points
    inserted by the solver carry the parameter value at which they were
    generated; :meth:`insert` places them either by tag or by abscissa.
    """

    points: np.ndarray
    tags: tuple[float, ...]

    def __init__(self, points, tags: Sequence[float] | None = None):
        pts = np.array(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"control points must have shape (n, 2), got {pts.shape}")
        if len(pts) < 2:
            raise ValueError("a control polygon needs at least two points")
        if len(pts) - 1 > MAX_DEGREE:
            raise ValueError(f"degree {len(pts) - 1} exceeds the supported maximum {MAX_DEGREE}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("control points must be finite")
        if tags is None:
            n = len(pts) - 1
            tags = [i / n for i in range(n + 1)]
        tags = tuple(float(v) for v in tags)
        if len(tags) != len(pts):
            raise ValueError("tags and points differ in length")
        if tags[0] != 0.0 or tags[-1] != 1.0:
            raise ValueError("first tag must be 0 and last tag must be 1")
        if len(set(tags)) != len(tags):
            raise ValueError(f"tags must be distinct: {tags}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "tags", tags)

    @classmethod
    def initial(cls, a: tuple[float, float], pivot: tuple[float, float],
                b: tuple[float, float]) -> ControlPolygon:
        """Three-point polygon {(a, y_a), pivot, (b, y_b)} tagged {0, 0.5, 1}."""
        return cls([a, pivot, b], (0.0, 0.5, 1.0))

    @property
    def degree(self) -> int:
        return len(self.points) - 1

    def __len__(self) -> int:
        return len(self.points)

    def insert(self, point: tuple[float, float], tag: float, by: str = "tag") -> ControlPolygon:
        """Return a new polygon with ``point`` added between the boundary points.

        ``by="tag"`` keeps the tags ascending (the polygon must already be
        sorted by tag); ``by="abscissa"`` places the point after every interior
        point whose x does not exceed its own. The boundary points never move.
        """
        if tag in self.tags:
            raise ValueError(f"tag {tag} is already present")
        if not 0.0 < tag < 1.0:
            raise ValueError(f"inserted tag must lie in (0, 1), got {tag}")
        if by == "tag":
            if any(b <= a for a, b in zip(self.tags, self.tags[1:])):
                raise ValueError("tag placement needs a polygon sorted by tag")
            k = bisect.bisect_left(self.tags, tag)
        elif by == "abscissa":
            k = 1 + int(np.sum(self.points[1:-1, 0] <= point[0]))
        else:
            raise ValueError(f"unknown placement {by!r}")
        pts = np.insert(np.asarray(self.points), k, point, axis=0)
        tags = self.tags[:k] + (float(tag),) + self.tags[k:]
        return ControlPolygon(pts, tags)

    def __repr__(self) -> str:
        body = ", ".join(f"({x:g}, {y:g})@{t:g}" for (x, y), t in zip(self.points, self.tags))
        return f"ControlPolygon([{body}])"


def _as_points(polygon) -> np.ndarray:
    if isinstance(polygon, ControlPolygon):
        return polygon.points
    pts = np.asarray(polygon, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return pts


def binomial(n: int, i: int) -> float:
    """C(n, i) as a float via the multiplicative recurrence."""
    if n < 0 or n > MAX_DEGREE:
        raise ValueError(f"degree {n} outside [0, {MAX_DEGREE}]")
    if i < 0 or i > n:
        raise ValueError(f"index {i} outside [0, {n}]")
    i = min(i, n - i)
    c = 1.0
    for k in range(1, i + 1):
        c = c * (n - i + k) / k
    return c


def basis(n: int, i: int, t: float) -> float:
    """Bernstein basis polynomial C(n,i) t^i (1-t)^(n-i)."""
    if not 0 <= i <= n:
        raise ValueError(f"basis index {i} outside [0, {n}]")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"parameter t={t} outside [0, 1]")
    return binomial(n, i) * t**i * (1.0 - t) ** (n - i)


def basis_row(n: int, t: float) -> np.ndarray:
    """All n+1 basis values at ``t``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"parameter t={t} outside [0, 1]")
    return np.array([basis(n, i, t) for i in range(n + 1)])


def de_casteljau(points, t: float) -> np.ndarray:
    """Evaluate the Bezier curve of ``points`` (shape (n+1, d)) at ``t``."""
    b = np.array(_as_points(points), dtype=float)
    u = 1.0 - t
    for r in range(len(b) - 1, 0, -1):
        b[:r] = u * b[:r] + t * b[1 : r + 1]
    return b[0]


def direct_sum(points, t: float) -> np.ndarray:
    """Evaluate Sum_i B_{n,i}(t) P_i literally; reference route for tests."""
    pts = _as_points(points)
    return basis_row(len(pts) - 1, t) @ pts


def curve_eval(polygon, t: float) -> CurvePoint:
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"parameter t={t} outside [0, 1]")
    pts = _as_points(polygon)
    if t == 0.0:
        x, y = pts[0]
    elif t == 1.0:
        x, y = pts[-1]
    else:
        x, y = de_casteljau(pts, t)
    return CurvePoint(float(t), float(x), float(y))


def derivative_polygon(polygon) -> np.ndarray:
    """Hodograph control points n (P_{i+1} - P_i)."""
    pts = _as_points(polygon)
    if len(pts) < 2:
        raise ValueError("need at least two control points")
    n = len(pts) - 1
    return n * np.diff(pts, axis=0)


def derivative_eval(polygon, t: float) -> tuple[float, float]:
    """(dx/dt, dy/dt) at ``t``."""
    dx, dy = de_casteljau(derivative_polygon(polygon), t)
    return float(dx), float(dy)


def default_slope_tol(polygon) -> float:
    hodo = derivative_polygon(polygon)
    return 1e-12 * max(1.0, float(np.max(np.abs(hodo[:, 0]))))


def slope(polygon, t: float, tol: float | None = None) -> float:
    """dy/dx of the curve at parameter ``t``.

    Raises:
        SingularParametrization: if |dx/dt| < tol.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"parameter t={t} outside [0, 1]")
    if tol is None:
        tol = default_slope_tol(polygon)
    dx, dy = derivative_eval(polygon, t)
    if abs(dx) < tol:
        raise SingularParametrization(t, dx)
    return dy / dx


def bernstein_approximation(samples: Sequence[float], n: int | None = None) -> ControlPolygon:
    """Polygon (i/n, f(i/n)) whose curve is the degree-n Bernstein approximant of f."""
    ys = np.asarray(samples, dtype=float)
    if n is None:
        n = len(ys) - 1
    if n < 1:
        raise ValueError("degree must be at least 1")
    if len(ys) != n + 1:
        raise ValueError(f"expected {n + 1} samples, got {len(ys)}")
    if not np.all(np.isfinite(ys)):
        raise ValueError("samples must be finite")
    xs = np.arange(n + 1) / n
    return ControlPolygon(np.column_stack([xs, ys]), xs)


def approximate(f: Callable[[float], float], n: int) -> ControlPolygon:
    """Sample ``f`` at i/n and build its Bernstein approximation polygon."""
    return bernstein_approximation([f(i / n) for i in range(n + 1)], n)
