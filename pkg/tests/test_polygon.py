"""
Polygon construction, measurements, extents and congruence.

To run:
    pytest tests/test_polygon.py -v
"""
import math

import numpy as np
import pytest

from app.errors import InvalidShapeError
from app.models import ParallelogramParams, Polygon, TrapezoidParams
from app.services import polygon as geometry


def test_square_measurements(unit_square):
    m = geometry.measurements(unit_square)
    assert m.area == pytest.approx(1.0)
    assert m.perimeter == pytest.approx(4.0)
    assert np.allclose(m.angles, math.pi / 2)


def test_clockwise_input_is_reoriented():
    p = Polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
    assert geometry.signed_area(p.vertices) == pytest.approx(1.0), "Vertices should be stored counter-clockwise"


@pytest.mark.parametrize(
    "points, message",
    [
        ([(0, 0), (1, 0)], "at least 3"),
        ([(0, 0), (1, 0), (1, 0), (0, 1)], "Duplicate"),
        ([(0, 0), (1, 0), (2, 0), (1, 1)], "collinear"),
        ([(0, 0), (1, 1), (1, 0), (0, 1)], "intersects"),
        ([(0, 0), (1, 0), (float("nan"), 1)], "finite"),
    ],
)
def test_invalid_polygons_rejected(points, message):
    with pytest.raises(InvalidShapeError, match=message):
        Polygon(points)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 8])
def test_regular_ngon_attains_shape_functional_bound(n):
    p = geometry.make_regular_ngon(n, side=1.7)
    assert geometry.shape_functional(p) == pytest.approx(geometry.regular_shape_functional(n), rel=1e-12)
    assert np.allclose(geometry.edge_lengths(p), 1.7)


def test_regular_shape_functional_increases_with_n():
    f = [geometry.shape_functional(geometry.make_regular_ngon(n)) for n in range(3, 65)]
    assert np.all(np.diff(f) > 0)
    assert f[-1] < 1 / (4 * math.pi)


def test_shape_functional_is_scale_and_motion_invariant():
    p = geometry.random_convex_polygon(7, np.random.default_rng(3))
    f = geometry.shape_functional(p)
    assert geometry.shape_functional(geometry.scale(p, 3.5)) == pytest.approx(f, rel=1e-12)
    moved = geometry.transform(p, angle=1.1, shift=(4.0, -2.0), reflect=True)
    assert geometry.shape_functional(moved) == pytest.approx(f, rel=1e-12)


def test_random_convex_polygon_is_seeded_and_convex():
    a = geometry.random_convex_polygon(9, np.random.default_rng(11))
    b = geometry.random_convex_polygon(9, np.random.default_rng(11))
    assert np.array_equal(a.vertices, b.vertices), "Same seed must give the same polygon"
    assert geometry.is_convex(a)
    assert a.n == 9


def test_gww_pair_shares_area_and_perimeter(gww):
    first, second = gww
    for p in (first, second):
        m = geometry.measurements(p)
        assert m.area == pytest.approx(3.5)
        assert m.perimeter == pytest.approx(6 + 3 * math.sqrt(2))
        assert not geometry.is_convex(p)
        assert np.sum(m.angles) == pytest.approx((p.n - 2) * math.pi)
    assert not geometry.congruent(first, second), "The isospectral drums are not congruent"


def test_constructed_families(worked_parallelogram, worked_trapezoid):
    par = geometry.make_parallelogram(worked_parallelogram)
    assert geometry.measurements(par).area == pytest.approx(math.sqrt(3))
    assert geometry.measurements(par).perimeter == pytest.approx(6.0)
    assert min(geometry.interior_angles(par)) == pytest.approx(math.pi / 3)

    trap = geometry.make_trapezoid(worked_trapezoid)
    angles = geometry.interior_angles(trap)
    assert angles[0] == pytest.approx(math.pi / 5)
    assert angles[1] == pytest.approx(math.pi / 10)
    assert geometry.measurements(trap).area == pytest.approx(worked_trapezoid.area)
    assert geometry.measurements(trap).perimeter == pytest.approx(worked_trapezoid.perimeter)
    assert worked_trapezoid.is_acute


def test_parameter_validation():
    with pytest.raises(InvalidShapeError):
        ParallelogramParams(L=1.0, W=2.0, alpha=1.0)
    with pytest.raises(InvalidShapeError):
        TrapezoidParams.from_base_angles(B=1.0, h=1.0, alpha=math.pi / 2, beta=0.3)
    with pytest.raises(InvalidShapeError):
        # legs meet below the top: b would be negative
        TrapezoidParams.from_base_angles(B=1.0, h=1.0, alpha=0.3, beta=0.3)


@pytest.mark.parametrize(
    "p, diameter, inradius, width",
    [
        (geometry.make_rectangle(1.0, 1.0), math.sqrt(2), 0.5, 1.0),
        (geometry.make_rectangle(3.0, 1.0), math.sqrt(10), 0.5, 1.0),
        (geometry.make_regular_ngon(6, 1.0), 2.0, math.sqrt(3) / 2, math.sqrt(3)),
    ],
)
def test_extents(p, diameter, inradius, width):
    ext = geometry.extents(p)
    assert ext.diameter == pytest.approx(diameter)
    assert ext.inradius == pytest.approx(inradius, rel=1e-8)
    assert ext.width == pytest.approx(width)


def test_extents_chain_on_random_convex_polygons():
    rng = np.random.default_rng(41)
    eps = 1e-9
    for _ in range(1000):
        p = geometry.random_convex_polygon(int(rng.integers(3, 13)), rng)
        ext = geometry.extents(p)
        assert ext.width / 3 - eps <= ext.inradius <= ext.width / 2 + eps, ext
        assert ext.width <= ext.diameter + eps, ext


def test_extents_need_convexity(gww):
    with pytest.raises(InvalidShapeError, match="convex"):
        geometry.width(gww[0])


def test_congruence_under_rigid_motion_and_reflection():
    p = geometry.random_convex_polygon(6, np.random.default_rng(5))
    q = geometry.transform(p, angle=2.3, shift=(-7.0, 0.5), reflect=True)
    assert geometry.congruent(p, q)
    assert geometry.congruence_signature(p) == geometry.congruence_signature(q)


def test_congruence_distinguishes_shapes():
    assert geometry.congruent(geometry.make_rectangle(1.0, 2.0), geometry.make_rectangle(2.0, 1.0))
    assert not geometry.congruent(geometry.make_rectangle(1.0, 2.0), geometry.make_rectangle(1.0, 2.1))
    assert not geometry.congruent(geometry.make_rectangle(1.0, 1.0), geometry.make_regular_ngon(5))
