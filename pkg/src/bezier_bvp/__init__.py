"""Two-point BVP solver building Bezier curves from inserted control points."""

__version__ = "0.1.0"

from .bernstein import (
    ControlPolygon,
    CurvePoint,
    basis,
    basis_row,
    bernstein_approximation,
    curve_eval,
    derivative_polygon,
    slope,
)
from .engine import (
    Correction,
    Criterion,
    IterationRecord,
    NonMonotoneWarning,
    Placement,
    SampleRow,
    SolveResult,
    SolverConfig,
    StopReason,
    local_error,
    sample,
    solve,
    step,
)
from .errors import (
    BezierBvpError,
    BlowUp,
    EvaluationError,
    ExprSyntaxError,
    NoCandidate,
    NoRealSlopes,
    NotFound,
    PivotFailure,
    SingularParametrization,
    UnknownIdentifier,
)
from .oracle import IvpSpec, Trajectory, integrate, shoot
from .pivot import PivotResult, ScanConfig, compute_pivot, endpoint_slopes, tangent_intersection
from .problems import LINEAR_EXP, PARABOLA, RICCATI, BvpProblem, builtin, from_expression
