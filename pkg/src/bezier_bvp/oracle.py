"""Reference IVP integrator (Dormand-Prince 5(4)) and single shooting.

Used to validate Bezier solutions independently: integrate y' = g(x, y)
from the left boundary value and compare with the far boundary condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BlowUp, EvaluationError

Rhs = Callable[[float, float], float]

# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

BLOWUP_LIMIT = 1e12


@dataclass(frozen=True)
class IvpSpec:
    rhs: Rhs
    x0: float
    y0: float
    x_end: float
    rel_tol: float = 1e-9
    abs_tol: float = 1e-9

    def __post_init__(self):
        if self.x0 == self.x_end:
            raise ValueError("x0 and x_end must differ")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")


class Trajectory:
    """Accepted integration nodes with cubic Hermite dense output."""

    def __init__(self, xs, ys, fs):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self.fs = np.asarray(fs, dtype=float)
        order = slice(None) if self.xs[-1] > self.xs[0] else slice(None, None, -1)
        self._sx, self._sy, self._sf = self.xs[order], self.ys[order], self.fs[order]

    def __len__(self) -> int:
        return len(self.xs)

    @property
    def y_end(self) -> float:
        return float(self.ys[-1])

    def __call__(self, x: float) -> float:
        xs = self._sx
        lo, hi = xs[0], xs[-1]
        if not lo - 1e-12 * max(1.0, abs(lo)) <= x <= hi + 1e-12 * max(1.0, abs(hi)):
            raise ValueError(f"x={x} outside trajectory range [{lo}, {hi}]")
        j = min(max(int(np.searchsorted(xs, x)), 1), len(xs) - 1)
        i = j - 1
        x0, x1 = xs[i], xs[j]
        ys, fs = self._sy, self._sf
        if x == x0:
            return float(ys[i])
        if x == x1:
            return float(ys[j])
        h = x1 - x0
        u = (x - x0) / h
        h00 = (1 + 2 * u) * (1 - u) ** 2
        h10 = u * (1 - u) ** 2
        h01 = u * u * (3 - 2 * u)
        h11 = u * u * (u - 1)
        return float(h00 * ys[i] + h10 * h * fs[i] + h01 * ys[j] + h11 * h * fs[j])


def _f(rhs: Rhs, x: float, y: float) -> float:
    try:
        v = float(rhs(x, y))
    except (EvaluationError, OverflowError, ZeroDivisionError, ValueError):
        return math.nan
    return v


def _initial_step(rhs, x0, y0, f0, direction, spec, span):
    scale = spec.abs_tol + spec.rel_tol * abs(y0)
    d0 = abs(y0) / scale
    d1 = abs(f0) / scale
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + direction * h0 * f0
    f1 = _f(rhs, x0 + direction * h0, y1)
    d2 = abs(f1 - f0) / scale / h0 if math.isfinite(f1) else math.inf
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def integrate(spec: IvpSpec, max_steps: int = 1_000_000) -> Trajectory:
    """Adaptive Dormand-Prince integration from x0 to x_end.

    Raises:
        BlowUp: |y| exceeds 1e12, the right-hand side becomes non-finite, or
            the step size underflows before x_end.
    """
    rhs = spec.rhs
    x, y = float(spec.x0), float(spec.y0)
    direction = 1.0 if spec.x_end > spec.x0 else -1.0
    span = abs(spec.x_end - spec.x0)
    f = _f(rhs, x, y)
    if not math.isfinite(f):
        raise BlowUp(x, y, "right-hand side is not finite at the initial point")
    xs, ys, fs = [x], [y], [f]
    h = _initial_step(rhs, x, y, f, direction, spec, span)
    for _ in range(max_steps):
        remaining = abs(spec.x_end - x)
        if remaining <= 4 * np.finfo(float).eps * max(1.0, abs(spec.x_end)):
            break
        h = min(h, remaining)
        if h <= 1e-14 * max(1.0, abs(x)):
            raise BlowUp(x, y, "step size underflow")
        hs = direction * h
        k = [f]
        for stage in range(1, 7):
            yi = y + hs * sum(a * kk for a, kk in zip(_A[stage], k))
            k.append(_f(rhs, x + _C[stage] * hs, yi))
        y_new = y + hs * sum(b * kk for b, kk in zip(_B5, k))
        err_est = hs * sum(e * kk for e, kk in zip(_E, k))
        if not (math.isfinite(y_new) and math.isfinite(err_est) and math.isfinite(k[6])):
            h *= 0.2
            continue
        scale = spec.abs_tol + spec.rel_tol * max(abs(y), abs(y_new))
        err = abs(err_est) / scale
        if err <= 1.0:
            x = spec.x_end if h == remaining else x + hs
            y = y_new
            f = k[6]
            if abs(y) > BLOWUP_LIMIT:
                raise BlowUp(xs[-1], ys[-1], f"|y| exceeded {BLOWUP_LIMIT:g}")
            xs.append(x)
            ys.append(y)
            fs.append(f)
            factor = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        else:
            factor = max(0.2, 0.9 * err ** -0.2)
        h *= factor
    else:
        raise BlowUp(x, y, f"exceeded {max_steps} steps")
    return Trajectory(xs, ys, fs)


@dataclass(frozen=True)
class ShootReport:
    y_end: float
    target: float
    deviation: float
    relative_deviation: float
    trajectory: Trajectory


def shoot(rhs: Rhs, a: float, y_a: float, b: float, y_b_target: float,
          rel_tol: float = 1e-9, abs_tol: float = 1e-9) -> ShootReport:
    """Integrate from (a, y_a) to b and report the mismatch with ``y_b_target``."""
    traj = integrate(IvpSpec(rhs, a, y_a, b, rel_tol, abs_tol))
    dev = traj.y_end - y_b_target
    rel = abs(dev) / abs(y_b_target) if y_b_target != 0 else abs(dev)
    return ShootReport(traj.y_end, y_b_target, dev, rel, traj)
