"""Exception hierarchy shared by all solver modules."""


class BezierBvpError(Exception):
    """Base class for every error raised by this package."""


class SingularParametrization(BezierBvpError):
    """Raised when dx/dt vanishes, so dy/dx = (dy/dt)/(dx/dt) is undefined."""

    def __init__(self, t: float, dxdt: float):
        super().__init__(f"dx/dt = {dxdt!r} is (numerically) zero at t = {t!r}")
        self.t = t
        self.dxdt = dxdt


class EvaluationError(BezierBvpError, ArithmeticError):
    """A residual or expression produced a non-finite or undefined value."""

    def __init__(self, message: str, subexpression: str | None = None):
        super().__init__(message)
        self.subexpression = subexpression


class NotFound(BezierBvpError, LookupError):
    """Unknown built-in problem name."""


class PivotFailure(BezierBvpError):
    """The pivot point cannot be computed, so the iteration cannot start."""


class NoRealSlopes(PivotFailure):
    """The boundary slope equation has no real root at one of the endpoints."""

    def __init__(self, end: str):
        super().__init__(f"no real slope satisfies the ODE at the {end} boundary")
        self.end = end


class NoCandidate(PivotFailure):
    """Every pair of boundary tangents is parallel."""


class BlowUp(BezierBvpError):
    """The IVP solution diverged (or the step size collapsed) before x_end."""

    def __init__(self, last_x: float, last_y: float, message: str):
        super().__init__(f"{message} (last reliable point x={last_x!r}, y={last_y!r})")
        self.last_x = last_x
        self.last_y = last_y


class ExprSyntaxError(BezierBvpError, ValueError):
    """Malformed expression text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifier(ExprSyntaxError):
    """An identifier that is neither a permitted variable nor a known function."""

    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name
