"""
Heat trace evaluation, the small-time expansion and the invariant fit.

To run:
    pytest tests/test_heat_trace.py -v
"""
import math

import numpy as np
import pytest

from app.errors import ConvergenceError, InvalidShapeError, PreconditionError
from app.models import HeatInvariants
from app.services import fem, heat_trace
from app.services import polygon as geometry
from app.services.exact_spectra import rectangle_spectrum


@pytest.fixture(scope="module")
def square_spectrum():
    return rectangle_spectrum(1.0, 1.0, ceiling=2e4)


def test_corner_terms():
    assert heat_trace.corner_term(math.pi / 2) == pytest.approx(1 / 16)
    assert heat_trace.corner_term(math.pi) == pytest.approx(0.0)
    with pytest.raises(InvalidShapeError):
        heat_trace.corner_term(0.0)


def test_geometric_invariants(unit_square, worked_parallelogram, worked_trapezoid):
    square = heat_trace.geometric_heat_invariants(unit_square)
    assert (square.area, square.perimeter, square.a0) == pytest.approx((1.0, 4.0, 0.25))

    par = heat_trace.geometric_heat_invariants(geometry.make_parallelogram(worked_parallelogram))
    assert par.area == pytest.approx(math.sqrt(3))
    assert par.perimeter == pytest.approx(6.0)
    assert par.a0 == pytest.approx(7 / 24)
    assert heat_trace.parallelogram_a0(math.pi / 3) == pytest.approx(7 / 24)

    trap = heat_trace.geometric_heat_invariants(geometry.make_trapezoid(worked_trapezoid))
    assert trap.a0 == pytest.approx(heat_trace.trapezoid_a0(math.pi / 5, math.pi / 10))


def test_heat_invariants_validation():
    with pytest.raises(InvalidShapeError, match="isoperimetric"):
        HeatInvariants(area=2.0, perimeter=4.0, a0=0.25)
    with pytest.raises(InvalidShapeError):
        HeatInvariants(area=-1.0, perimeter=4.0, a0=0.25)


@pytest.mark.parametrize("t", [3e-3, 1e-2, 2e-2])
def test_square_trace_matches_expansion(square_spectrum, unit_square, t):
    # for the square the expansion is exact up to terms of order exp(-1/t)
    inv = heat_trace.geometric_heat_invariants(unit_square)
    value, tail = heat_trace.truncated_heat_trace(square_spectrum, t)
    assert value == pytest.approx(heat_trace.heat_trace_expansion(inv, t), rel=1e-9)
    assert tail < 1e-9 * value


def test_trace_table(square_spectrum):
    rows = heat_trace.trace_table(square_spectrum, [0.01, 0.1])
    assert [r.t for r in rows] == [0.01, 0.1]
    assert rows[0].trace > rows[1].trace > 0


def test_default_window_respects_both_bounds(square_spectrum):
    window = heat_trace.default_t_window(square_spectrum, points=20)
    assert len(window.t_grid) == 20
    assert window.t_grid[0] == pytest.approx(max(window.headroom_t, window.tail_t))
    assert window.t_grid[-1] / window.t_grid[0] == pytest.approx(100.0)


def test_fit_recovers_square_invariants(square_spectrum, unit_square):
    window = heat_trace.default_t_window(square_spectrum)
    fit = heat_trace.fit_heat_invariants(square_spectrum, window.t_grid, polygon=unit_square)
    inv = fit.invariants
    assert inv.area == pytest.approx(1.0, rel=1e-4)
    assert inv.perimeter == pytest.approx(4.0, rel=1e-3)
    assert inv.a0 == pytest.approx(0.25, abs=1e-3)
    assert not fit.outside_hypothesis
    assert fit.points == 20


@pytest.mark.slow
@pytest.mark.parametrize("length, width", [(1.0, 1.0), (1.0, 2.0)])
def test_fit_on_exact_rectangle_spectra_to_a_million(length, width):
    s = rectangle_spectrum(length, width, ceiling=1e6)
    inv = heat_trace.fit_heat_invariants(s, np.logspace(-4, -2, 20)).invariants
    assert inv.area == pytest.approx(length * width, rel=0.01)
    assert inv.perimeter == pytest.approx(2 * (length + width), rel=0.02)
    assert inv.a0 == pytest.approx(0.25, abs=0.05)


def test_fem_spectrum_is_too_short_to_fit(unit_square):
    s = fem.dirichlet_eigenvalues(unit_square, count=50, level=4).spectrum
    grid = np.logspace(-4, -2, 20)
    with pytest.raises(PreconditionError, match="too short"):
        heat_trace.fit_heat_invariants(s, grid)

    # forced past the tail and conditioning guards, the fit is far off
    try:
        inv = heat_trace.fit_heat_invariants(s, grid, tail_ratio=math.inf, max_condition=math.inf).invariants
    except ConvergenceError:
        return
    within = (
        abs(inv.area - 1.0) <= 0.01 and abs(inv.perimeter - 4.0) <= 0.08 and abs(inv.a0 - 0.25) <= 0.05
    )
    assert not within, inv


def test_fit_rejects_short_spectrum():
    s = rectangle_spectrum(1.0, 1.0, count=10)
    with pytest.raises(PreconditionError, match="tail"):
        heat_trace.fit_heat_invariants(s, np.logspace(-4, -2, 10))


@pytest.mark.parametrize(
    "grid, message",
    [
        ([0.01, 0.1], "at least 3"),
        ([0.01, 0.012, 0.014], "decade"),
        ([-0.01, 0.1, 1.0], "positive"),
    ],
)
def test_fit_window_preconditions(square_spectrum, grid, message):
    with pytest.raises(PreconditionError, match=message):
        heat_trace.fit_heat_invariants(square_spectrum, grid)


def test_reflex_corners_flagged(square_spectrum, gww):
    assert heat_trace.has_reflex_corner(gww[0])
    window = heat_trace.default_t_window(square_spectrum)
    fit = heat_trace.fit_heat_invariants(square_spectrum, window.t_grid, polygon=gww[0])
    assert fit.outside_hypothesis
