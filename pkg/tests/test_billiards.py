"""
Closed billiard geodesics in acute trapezoids.

To run:
    pytest tests/test_billiards.py -v
"""
import math

import numpy as np
import pytest

from app.errors import InvalidShapeError
from app.models import OrbitKind, ParallelogramParams, TrapezoidParams
from app.services import billiards


def test_bouncing_ball_of_worked_trapezoid(worked_trapezoid):
    cert = billiards.bouncing_ball_orbit(worked_trapezoid)
    assert cert.kind is OrbitKind.BOUNCING_BALL
    assert cert.length == pytest.approx(2.0)
    (x0, y0), (x1, y1) = cert.bounce_points
    top_mid = 0.5 * (1 / math.tan(math.pi / 5) + 6 - 1 / math.tan(math.pi / 10))
    assert x0 == x1 == pytest.approx(top_mid)
    assert (y0, y1) == pytest.approx((0.0, 1.0))
    assert cert.reflection_defects == (0.0, 0.0)


def test_shortest_geodesic_is_twice_the_height(worked_trapezoid):
    length, cert = billiards.shortest_closed_geodesic(worked_trapezoid)
    assert length == pytest.approx(2 * worked_trapezoid.h)
    assert cert.kind is OrbitKind.BOUNCING_BALL


def test_triangular_candidates_are_never_shorter(worked_trapezoid):
    rival = billiards.search_triangular_orbits(worked_trapezoid, resolution=48)
    if rival is not None:
        assert rival.length >= 2 * worked_trapezoid.h
        assert max(rival.reflection_defects) < 1e-6
        assert len(rival.bounce_points) == 3


def test_geodesic_scales_with_the_trapezoid(worked_trapezoid):
    length, _ = billiards.shortest_closed_geodesic(worked_trapezoid.scaled(2.5))
    assert length == pytest.approx(5.0)


def test_non_acute_trapezoid_rejected():
    wide = TrapezoidParams.from_base_angles(B=6.0, h=1.0, alpha=1.4, beta=1.0)
    assert not wide.is_acute
    with pytest.raises(InvalidShapeError, match="acute"):
        billiards.bouncing_ball_orbit(wide)
    with pytest.raises(InvalidShapeError, match="acute"):
        billiards.shortest_closed_geodesic(wide)


def test_search_needs_resolution(worked_trapezoid):
    with pytest.raises(InvalidShapeError, match="resolution"):
        billiards.search_triangular_orbits(worked_trapezoid, resolution=8)


def test_only_trapezoids_accepted():
    with pytest.raises(InvalidShapeError, match="trapezoid"):
        billiards.bouncing_ball_orbit(ParallelogramParams(L=2.0, W=1.0, alpha=1.0))


@pytest.mark.slow
def test_no_triangular_orbit_beats_the_bouncing_ball_on_random_acute_trapezoids():
    rng = np.random.default_rng(53)
    for _ in range(200):
        beta = rng.uniform(0.15, 0.6)
        alpha = rng.uniform(beta + 0.01, math.pi / 2 - 0.05 - beta)
        B = rng.uniform(1.0, 4.0)
        h = rng.uniform(0.2, 0.8) * B / (1 / math.tan(alpha) + 1 / math.tan(beta))
        t = TrapezoidParams.from_base_angles(B=B, h=h, alpha=alpha, beta=beta)
        assert t.is_acute
        rival = billiards.search_triangular_orbits(t)
        if rival is not None:
            assert rival.length >= 2 * h * (1 - 1e-12), (t, rival)
        length, cert = billiards.shortest_closed_geodesic(t)
        assert length == pytest.approx(2 * h)
        assert cert.kind is OrbitKind.BOUNCING_BALL
