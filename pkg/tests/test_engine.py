import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bezier_bvp.bernstein import ControlPolygon, derivative_polygon, direct_sum
from dataclasses import replace

from bezier_bvp.engine import (
    Correction,
    Criterion,
    NonMonotoneWarning,
    Placement,
    SolverConfig,
    StopReason,
    local_error,
    uniform_grid,
    sample,
    solve,
    step,
)
from bezier_bvp.errors import SingularParametrization
from bezier_bvp.pivot import compute_pivot
from bezier_bvp.problems import LINEAR_EXP, PARABOLA, RICCATI, BvpProblem

E2 = math.exp(2.0)
PARABOLA_POLY = ControlPolygon([(-1, 3), (1, 7), (3, -5)], (0, 0.5, 1))
CHORD = ControlPolygon([(0, 1), (2, E2)])

# approximate and exact columns of the published exponential table
EXP_TABLE_APPROX = [1.0, 1.17821, 1.38942, 1.75235, 2.35041, 3.18769,
                    4.17184, 5.14898, 5.98714, 6.67677, 7.38906]
EXP_TABLE_EXACT = [1.0, 1.19321, 1.42075, 1.77812, 2.34651, 3.15902,
                   4.14995, 5.14912, 5.99204, 6.67179, 7.38906]
# abscissa and ordinate columns of the published Riccati table
RIC_TABLE_X = [0.0, 0.13872, 0.276777, 0.418191, 0.554867, 0.674855,
               0.768333, 0.831326, 0.867159, 0.885645, 0.9]
RIC_TABLE_Y = [1.0, 1.87331, 2.77787, 3.77639, 4.80733, 5.94924,
               7.55906, 10.2845, 14.9504, 22.3191, 32.725]

# y' - y = 0.7 along the line y = x on [0, 1]
OFFSET = BvpProblem(lambda x, y, s: s - y + x - 0.3, 0.0, 1.0, 0.0, 1.0,
                    dres_dy=lambda x, y, s: -1.0)
LINE = ControlPolygon([(0, 0), (0.5, 0.5), (1, 1)], (0, 0.5, 1))


def _independent_error(problem, polygon, t):
    """F(dy/dx, x) - y for residuals written as F - y, via the basis sum."""
    x, y = direct_sum(polygon.points, t)
    dx, dy = direct_sum(derivative_polygon(polygon), t)
    return problem.residual(x, y, dy / dx)


def test_local_error_vanishes_on_exact_quadratic():
    for t in np.arange(1, 10) / 10:
        assert abs(local_error(PARABOLA, PARABOLA_POLY, t)) <= 1e-10


def test_local_error_on_chord():
    assert local_error(LINEAR_EXP, CHORD, 0.5) == pytest.approx(-1.0, abs=1e-14)


def test_local_error_singular():
    with pytest.raises(SingularParametrization):
        local_error(LINEAR_EXP, ControlPolygon([(0, 0), (0, 1)]), 0.5)


def test_local_error_newton_scaling():
    # without a solved form: dG/dy = -2y, so e = G / (2y)
    implicit = replace(RICCATI, solved_form=None)
    poly = ControlPolygon([(0, 1), (0.5, 2), (0.9, 3)])
    t = 0.3
    x, y = direct_sum(poly.points, t)
    dx, dy = direct_sum(derivative_polygon(poly), t)
    g = RICCATI.residual(x, y, dy / dx)
    assert local_error(implicit, poly, t) == pytest.approx(g / (2 * y), rel=1e-12)


def test_local_error_solved_form():
    poly = ControlPolygon([(0, 1), (0.5, 2), (0.9, 3)])
    t = 0.3
    x, y = direct_sum(poly.points, t)
    dx, dy = direct_sum(derivative_polygon(poly), t)
    assert local_error(RICCATI, poly, t) == pytest.approx(math.sqrt(dy / dx - x) - y, rel=1e-12)


def test_solved_form_agrees_with_newton_when_linear_in_y():
    poly = ControlPolygon([(-1, 3), (0.2, 5.5), (1.4, 6.0), (3, -5)])
    for problem in (LINEAR_EXP, PARABOLA):
        implicit = replace(problem, solved_form=None)
        for t in (0.2, 0.5, 0.7):
            assert local_error(problem, poly, t) == pytest.approx(local_error(implicit, poly, t), abs=1e-12)


def test_first_step_always_accepts():
    for criterion in Criterion:
        out = step(OFFSET, LINE, 1, 0.1, math.inf, SolverConfig(criterion=criterion))
        assert out.accepted and len(out.polygon) == 5


def test_exact_quadratic_step():
    out = step(PARABOLA, PARABOLA_POLY, 1, 0.1, math.inf)
    assert out.accepted
    rec = out.record
    assert abs(rec.e0) <= 1e-12 and abs(rec.e1) <= 1e-12
    for x, y in out.polygon.points[[1, 3]]:
        assert y == pytest.approx(4 - x * x, abs=1e-12)
    assert out.polygon.tags == pytest.approx((0, 0.1, 0.5, 0.9, 1))


@pytest.mark.parametrize("criterion", list(Criterion))
def test_growing_error_stops(criterion):
    cfg = SolverConfig(criterion=criterion)
    first = step(OFFSET, LINE, 1, 0.1, math.inf, cfg)
    assert abs(first.record.s) == pytest.approx(0.7)
    # previous accepted value smaller than the one now measured
    s_old = 0.5 if criterion is Criterion.CURRENT else 0.5 * abs(first.record.criterion_value)
    out = step(OFFSET, LINE, 1, 0.1, s_old, cfg)
    assert out.stop is StopReason.ERROR_NON_DECREASING
    assert out.polygon is LINE
    assert not out.record.accepted


def test_singular_step_is_pivot_failure():
    # psi'(0.25) = 2 * (0.75 * 1 + 0.25 * (-3)) = 0
    poly = ControlPolygon([(0, 1), (1, 2), (-2, 3)])
    out = step(LINEAR_EXP, poly, 1, 0.25, math.inf)
    assert out.stop is StopReason.PIVOT_FAILURE and out.record is None


@pytest.mark.parametrize("correction", list(Correction))
def test_inserted_ordinate_recomputed(correction):
    cfg = SolverConfig(correction=correction)
    poly = ControlPolygon.initial((0.0, 1.0), (1.3130352854989968, 2.313035285498997), (2.0, E2))
    out = step(LINEAR_EXP, poly, 1, 0.1, math.inf, cfg)
    e0, e1 = (_independent_error(LINEAR_EXP, poly, t) for t in (0.1, 0.9))
    y0, y1 = direct_sum(poly.points, 0.1)[1], direct_sum(poly.points, 0.9)[1]
    c0, c1 = ((e0 + e1) / 2,) * 2 if correction is Correction.MEAN else (e0, e1)
    assert out.record.inserted0 == pytest.approx(y0 + c0, abs=1e-12)
    assert out.record.inserted1 == pytest.approx(y1 + c1, abs=1e-12)
    assert out.polygon.points[1, 1] == out.record.inserted0
    assert out.polygon.points[3, 1] == out.record.inserted1


def test_undefined_local_error_stops_cleanly():
    # slope below x makes sqrt(y' - x) undefined for the Riccati solved form
    poly = ControlPolygon([(0, 1), (0.5, 1.0), (0.9, 1.0)])
    out = step(RICCATI, poly, 1, 0.1, math.inf)
    assert out.stop is StopReason.PIVOT_FAILURE and out.polygon is poly
    assert "solved form" in out.message


def test_config_validation():
    for dt in (0.0, 0.5, -0.1):
        with pytest.raises(ValueError):
            SolverConfig(dt=dt)
    with pytest.raises(ValueError):
        SolverConfig(max_iterations=0)
    assert SolverConfig(correction="pointwise").correction is Correction.POINTWISE


def test_max_iterations_guard():
    res = solve(LINEAR_EXP, SolverConfig(max_iterations=1))
    assert res.stop_reason is StopReason.MAX_ITERATIONS
    assert res.accepted_iterations == 1 and len(res.final_polygon) == 5


def test_half_interval_guard_evaluates_midpoint_once():
    res = solve(LINEAR_EXP, SolverConfig(dt=0.25))
    assert res.stop_reason is StopReason.HALF_INTERVAL_REACHED
    last = res.records[-1]
    assert last.t0 == last.t1 == 0.5 and not last.accepted
    assert len(res.records) == 2 and res.accepted_iterations == 1


def test_half_interval_guard_strict():
    res = solve(PARABOLA, SolverConfig(dt=0.3, criterion="current"))
    assert all(r.m * 0.3 <= 0.5 + 1e-12 for r in res.records)
    assert res.stop_reason in (StopReason.HALF_INTERVAL_REACHED, StopReason.ERROR_NON_DECREASING)


def test_exponential_table_golden():
    res = solve(LINEAR_EXP)
    assert res.stop_reason is StopReason.ERROR_NON_DECREASING
    assert res.accepted_iterations == 3 and res.degree == 8
    rows = sample(res, uniform_grid())
    assert [r.y for r in rows] == pytest.approx(EXP_TABLE_APPROX, abs=5e-6)
    assert [r.ref for r in rows] == pytest.approx(EXP_TABLE_EXACT, abs=5e-6)


def test_riccati_table_golden():
    res = solve(RICCATI, SolverConfig(dt=0.15))
    assert res.config.correction is Correction.POINTWISE
    assert res.accepted_iterations == 2 and len(res.final_polygon) == 7
    for row, x, y in zip(sample(res, uniform_grid()), RIC_TABLE_X, RIC_TABLE_Y):
        # one unit in the sixth significant digit
        assert abs(row.x - x) <= 10 ** (math.floor(math.log10(abs(x))) - 5) if x else row.x == 0.0
        assert abs(row.y - y) <= 10 ** (math.floor(math.log10(abs(y))) - 5)


def test_correction_follows_problem_preference():
    assert solve(LINEAR_EXP).config.correction is Correction.MEAN
    assert solve(RICCATI, SolverConfig(dt=0.15)).config.correction is Correction.POINTWISE
    forced = solve(RICCATI, SolverConfig(dt=0.15, correction="mean"))
    assert forced.config.correction is Correction.MEAN


def test_abscissa_placement_orders_interior_by_x():
    res = solve(RICCATI, SolverConfig(dt=0.15))
    xs = res.final_polygon.points[:, 0]
    assert np.all(np.diff(xs) > 0)
    with pytest.warns(NonMonotoneWarning):
        by_tag = solve(RICCATI, SolverConfig(dt=0.15, placement="tag"))
    assert list(by_tag.final_polygon.tags) == sorted(by_tag.final_polygon.tags)


def test_exponential_last_insertion_matches_reported_point():
    # the published "(0.56344, 1.68501)" is the control point inserted at t = 0.3
    res = solve(LINEAR_EXP)
    k = res.final_polygon.tags.index(res.records[2].t0)
    assert res.final_polygon.points[k] == pytest.approx([0.56344, 1.68501], abs=5e-6)


def test_literal_rule_regressions():
    cur = SolverConfig(criterion="current", correction="pointwise")
    assert solve(PARABOLA, cur).accepted_iterations == 1
    assert solve(LINEAR_EXP, cur).accepted_iterations == 1


def test_monotone_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error", NonMonotoneWarning)
        for problem, dt in ((LINEAR_EXP, 0.1), (PARABOLA, 0.1), (RICCATI, 0.15)):
            solve(problem, SolverConfig(dt=dt))
    # ordering by generating parameter leaves the abscissae out of order here
    with pytest.warns(NonMonotoneWarning):
        solve(RICCATI, SolverConfig(dt=0.15, placement="tag"))


def test_sample_rows():
    res = solve(PARABOLA)
    rows = sample(res, uniform_grid())
    assert len(rows) == 11
    assert (rows[0].x, rows[0].y, rows[0].dev) == (-1.0, 3.0, 0.0)
    assert (rows[-1].x, rows[-1].y) == (3.0, -5.0)
    assert all(r.dev == pytest.approx(r.y - (4 - r.x**2)) for r in rows)
    plain = sample(res.final_polygon, [0.0, 0.5])
    assert plain[0].ref is None and plain[1].dev is None
    assert res(0.0) == (-1.0, 3.0)


def test_uniform_grid():
    assert uniform_grid() == [i / 10 for i in range(11)]
    with pytest.raises(ValueError):
        uniform_grid(1)


_problems = st.sampled_from([LINEAR_EXP, PARABOLA, RICCATI])
_PIVOTS = {}


def _pivot(problem):
    if problem.name not in _PIVOTS:
        _PIVOTS[problem.name] = compute_pivot(problem)
    return _PIVOTS[problem.name]


@settings(max_examples=100, deadline=None)
@given(_problems, st.floats(0.02, 0.45), st.sampled_from([None, *Correction]),
       st.sampled_from(list(Criterion)), st.sampled_from(list(Placement)), st.integers(1, 50))
def test_solve_invariants(problem, dt, correction, criterion, placement, max_iter):
    cfg = SolverConfig(dt=dt, correction=correction, criterion=criterion,
                       placement=placement, max_iterations=max_iter)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonMonotoneWarning)
        res = solve(problem, cfg, pivot=_pivot(problem))
    poly = res.final_polygon
    assert len(poly) == 3 + 2 * res.accepted_iterations
    assert res.degree == len(poly) - 1
    assert poly.tags[0] == 0.0 and poly.tags[-1] == 1.0
    assert len(set(poly.tags)) == len(poly.tags)
    if placement is Placement.TAG:
        assert all(a < b for a, b in zip(poly.tags, poly.tags[1:]))
    else:
        assert np.all(np.diff(poly.points[1:-1, 0]) >= 0)
    assert res(0.0) == (problem.a, problem.y_a)
    assert res(1.0) == (problem.b, problem.y_b)
    crit = [abs(r.criterion_value) for r in res.records if r.accepted]
    assert all(a > b for a, b in zip(crit, crit[1:]))
    assert len(res.records) <= min(max_iter, math.floor(0.5 / dt + 1e-9))
    for r in res.records:
        assert r.t0 == pytest.approx(r.m * dt) and r.t1 == pytest.approx(1 - r.m * dt)
        assert r.s == pytest.approx(0.5 * (r.e0 + r.e1))
    assert all(r.accepted for r in res.records[:-1])
