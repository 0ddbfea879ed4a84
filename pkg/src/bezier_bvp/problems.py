"""First-order two-point BVPs in implicit residual form G(x, y, dy/dx) = 0."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .errors import EvaluationError, NotFound
from .expr import compile_residual, evaluate, parse, variables

Residual = Callable[[float, float, float], float]


@dataclass(frozen=True)
class BvpProblem:
    """G(x, y, s) = 0 on [a, b] with y(a) = y_a and y(b) = y_b.

    ``dres_dy`` is the partial derivative of G with respect to y; when absent
    it is estimated by a central difference. ``solved_form`` is the equation
    solved for the ordinate, y = F(x, s); when present the solver measures
    local errors as F - y instead of taking a Newton step on G.
    ``exact`` is an optional closed-form solution and ``rhs`` an optional
    explicit form y' = g(x, y) used only by the reference integrator.
    ``preferred_correction`` names the insertion correction ("mean" or
    "pointwise") used when the solver configuration leaves it open.
    """

    residual: Residual
    a: float
    b: float
    y_a: float
    y_b: float
    name: str = "custom"
    dres_dy: Residual | None = None
    exact: Callable[[float], float] | None = None
    exact_derivative: Callable[[float], float] | None = None
    rhs: Callable[[float, float], float] | None = None
    source: str | None = None
    solved_form: Callable[[float, float], float] | None = None
    preferred_correction: str | None = None
    derivative_order: int = field(default=1)

    def __post_init__(self):
        if self.derivative_order != 1:
            raise ValueError("only first-order equations are supported")
        for label in ("a", "b", "y_a", "y_b"):
            if not math.isfinite(getattr(self, label)):
                raise ValueError(f"{label} must be finite")
        if self.preferred_correction not in (None, "mean", "pointwise"):
            raise ValueError(f"unknown correction {self.preferred_correction!r}")
        if not self.a < self.b:
            raise ValueError(f"interval requires a < b, got a={self.a}, b={self.b}")
        if self.exact is not None:
            for x, y in ((self.a, self.y_a), (self.b, self.y_b)):
                if abs(self.exact(x) - y) > 1e-9 * max(1.0, abs(y)):
                    raise ValueError(f"exact solution misses boundary value y({x}) = {y}")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def residual_eval(self, x: float, y: float, s: float) -> float:
        try:
            g = self.residual(x, y, s)
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise EvaluationError(f"residual failed at x={x}, y={y}, s={s}: {exc}") from None
        if not math.isfinite(g):
            raise EvaluationError(f"residual is {g!r} at x={x}, y={y}, s={s}")
        return float(g)

    def solved_eval(self, x: float, s: float) -> float:
        """F(x, s) of the solved form y = F(x, s)."""
        if self.solved_form is None:
            raise ValueError(f"{self.name} has no solved form")
        try:
            v = self.solved_form(x, s)
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise EvaluationError(f"solved form failed at x={x}, s={s}: {exc}") from None
        if not math.isfinite(v):
            raise EvaluationError(f"solved form is {v!r} at x={x}, s={s}")
        return float(v)

    def residual_dy(self, x: float, y: float, s: float) -> float:
        """dG/dy at (x, y, s)."""
        if self.dres_dy is not None:
            return float(self.dres_dy(x, y, s))
        h = 1e-6 * max(1.0, abs(y))
        return (self.residual_eval(x, y + h, s) - self.residual_eval(x, y - h, s)) / (2 * h)


def residual_eval(problem: BvpProblem, x: float, y: float, s: float) -> float:
    return problem.residual_eval(x, y, s)


def _minus_one(x, y, s):
    return -1.0


E2 = math.exp(2.0)

LINEAR_EXP = BvpProblem(
    residual=lambda x, y, s: s - y,
    a=0.0,
    b=2.0,
    y_a=1.0,
    y_b=E2,
    name="LINEAR_EXP",
    dres_dy=_minus_one,
    exact=math.exp,
    exact_derivative=math.exp,
    rhs=lambda x, y: y,
    source="dy - y",
    solved_form=lambda x, s: s,
    preferred_correction="mean",
)

PARABOLA = BvpProblem(
    residual=lambda x, y, s: -0.25 * s * s + 4.0 - y,
    a=-1.0,
    b=3.0,
    y_a=3.0,
    y_b=-5.0,
    name="PARABOLA",
    dres_dy=_minus_one,
    exact=lambda x: 4.0 - x * x,
    exact_derivative=lambda x: -2.0 * x,
    # branch y' = -2x of the implicit equation, for validation only
    rhs=lambda x, y: -2.0 * x,
    source="-(1/4)*dy^2 + 4 - y",
    solved_form=lambda x, s: -0.25 * s * s + 4.0,
    preferred_correction="mean",
)

RICCATI = BvpProblem(
    residual=lambda x, y, s: s - x - y * y,
    a=0.0,
    b=0.9,
    y_a=1.0,
    y_b=32.725,
    name="RICCATI",
    dres_dy=lambda x, y, s: -2.0 * y,
    rhs=lambda x, y: x + y * y,
    source="dy - x - y^2",
    # positive branch: the solution stays above 1 on the interval
    solved_form=lambda x, s: math.sqrt(s - x),
    preferred_correction="pointwise",
)

BUILTINS = {p.name: p for p in (LINEAR_EXP, PARABOLA, RICCATI)}

# CLI-friendly aliases
_ALIASES = {"linear": "LINEAR_EXP", "exp": "LINEAR_EXP", "parabola": "PARABOLA", "riccati": "RICCATI"}


def builtin(name: str) -> BvpProblem:
    key = name.strip()
    key = _ALIASES.get(key.lower(), key.upper())
    try:
        return BUILTINS[key]
    except KeyError:
        raise NotFound(f"unknown problem {name!r}; choose from {sorted(BUILTINS)}") from None


def from_expression(text: str, a: float, b: float, y_a: float, y_b: float,
                    name: str | None = None, rhs_text: str | None = None,
                    solved_text: str | None = None) -> BvpProblem:
    """Build a problem from a residual expression in x, y and dy.

    ``rhs_text``, if given, is an explicit expression for y' in x and y; it
    only feeds the reference integrator. ``solved_text`` is the solved form
    y = F(x, dy) as an expression in x and dy.
    """
    residual = compile_residual(text)
    solved = None
    if solved_text is not None:
        solved_tree = parse(solved_text)
        if "y" in variables(solved_tree):
            raise ValueError("the solved form may use only x and dy")

        def solved(x, s):
            return evaluate(solved_tree, x=x, dy=s)

    rhs = None
    if rhs_text is not None:
        rhs_tree = parse(rhs_text)

        def rhs(x, y):
            return evaluate(rhs_tree, x=x, y=y)

    return BvpProblem(residual=residual, a=float(a), b=float(b), y_a=float(y_a), y_b=float(y_b),
                      name=name or text, rhs=rhs, source=text, solved_form=solved)
