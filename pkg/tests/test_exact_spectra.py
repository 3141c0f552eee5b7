"""
Closed-form spectra and the Spectrum type.

To run:
    pytest tests/test_exact_spectra.py -v
"""
import math

import numpy as np
import pytest

from app.errors import InvalidShapeError, PreconditionError
from app.models import Provenance, Spectrum
from app.services import exact_spectra
from app.services import polygon as geometry

PI2 = math.pi ** 2


def test_string_spectrum_and_length():
    s = exact_spectra.string_spectrum(2.0, 4)
    assert np.allclose(s.eigenvalues, PI2 * np.array([1, 4, 9, 16]) / 4)
    assert s.provenance is Provenance.EXACT
    assert np.all(s.error_estimates == 0)
    assert exact_spectra.string_length(s) == pytest.approx(2.0)


def test_unit_square_spectrum():
    s = exact_spectra.rectangle_spectrum(1.0, 1.0, count=6)
    assert np.allclose(s.eigenvalues, PI2 * np.array([2, 5, 5, 8, 10, 10]))


def test_rectangle_ceiling_keeps_everything_below():
    s = exact_spectra.rectangle_spectrum(1.0, 1.0, ceiling=5 * PI2 + 1e-9)
    assert s.count == 3
    assert s.ceiling == pytest.approx(5 * PI2)
    assert s.complete_through == pytest.approx(5 * PI2)


def test_square_eigenvalues_dominate_the_enclosing_rectangle():
    square = exact_spectra.rectangle_spectrum(1.0, 1.0, count=50).eigenvalues
    rectangle = exact_spectra.rectangle_spectrum(1.0, 2.0, count=50).eigenvalues
    assert np.all(square >= rectangle)


def test_rectangle_is_heard_from_its_sides():
    s = exact_spectra.rectangle_spectrum(3.0, 1.0, count=5)
    expected = sorted(PI2 * (m * m / 9 + n * n) for m in range(1, 10) for n in range(1, 4))[:5]
    assert np.allclose(s.eigenvalues, expected)


def test_count_or_ceiling_exclusive():
    with pytest.raises(InvalidShapeError, match="exactly one"):
        exact_spectra.rectangle_spectrum(1.0, 1.0, count=3, ceiling=50.0)
    with pytest.raises(InvalidShapeError, match="exactly one"):
        exact_spectra.disk_spectrum(1.0)


def test_bessel_zeros():
    assert exact_spectra.bessel_zero(0, 1) == pytest.approx(2.404825557695773, rel=1e-12)
    assert exact_spectra.bessel_zero(1, 1) == pytest.approx(3.831705970207512, rel=1e-12)
    zeros = exact_spectra.bessel_zeros(0, count=3)
    assert np.allclose(zeros, [2.404825557695773, 5.520078110286311, 8.653727912911013])


def test_disk_spectrum_multiplicities():
    s = exact_spectra.disk_spectrum(1.0, count=4)
    j01, j11, j21 = 2.404825557695773, 3.831705970207512, 5.135622301840683
    assert np.allclose(s.eigenvalues, [j01 ** 2, j11 ** 2, j11 ** 2, j21 ** 2])
    half = exact_spectra.disk_spectrum(2.0, count=4)
    assert np.allclose(half.eigenvalues, s.eigenvalues / 4)


def test_weyl_count_tracks_rectangle_spectrum():
    s = exact_spectra.rectangle_spectrum(1.0, 1.0, ceiling=1e5)
    estimate = exact_spectra.weyl_count(1.0, 4.0, 1e5)
    assert abs(s.count - estimate) / estimate < 0.01
    assert exact_spectra.weyl_ratio(s, 1e5) == pytest.approx(1 / (4 * math.pi), rel=0.02)


def test_weyl_ratio_needs_a_complete_spectrum():
    s = exact_spectra.rectangle_spectrum(1.0, 1.0, count=10)
    with pytest.raises(PreconditionError):
        exact_spectra.weyl_ratio(s, 2 * float(s.eigenvalues[-1]))


def test_first_eigenvalue_bounds_bracket_the_square(unit_square):
    lower, upper = exact_spectra.first_eigenvalue_bounds(unit_square)
    assert lower == pytest.approx(PI2)
    assert upper == pytest.approx(2.404825557695773 ** 2 / 0.25)
    assert lower < 2 * PI2 < upper


def test_spectrum_scaling():
    s = exact_spectra.rectangle_spectrum(1.0, 2.0, count=5)
    assert np.allclose(s.scaled(2.0).eigenvalues, exact_spectra.rectangle_spectrum(2.0, 4.0, count=5).eigenvalues)


@pytest.mark.parametrize(
    "values, errors, provenance",
    [
        ([3.0, 2.0], [0.0, 0.0], Provenance.EXACT),
        ([2.0, 2.0], [0.0, 0.0], Provenance.EXACT),
        ([-1.0, 2.0], [0.0, 0.0], Provenance.EXACT),
        ([1.0, 2.0], [0.1, 0.0], Provenance.EXACT),
        ([1.0, 2.0], [0.0], Provenance.FEM),
    ],
)
def test_spectrum_invariants(values, errors, provenance):
    with pytest.raises(InvalidShapeError):
        Spectrum(eigenvalues=values, error_estimates=errors, provenance=provenance)


def test_spectrum_is_immutable():
    s = exact_spectra.string_spectrum(1.0, 3)
    with pytest.raises(ValueError):
        s.eigenvalues[0] = 0.0


def test_regular_polygon_bounds_are_ordered():
    lower, upper = exact_spectra.first_eigenvalue_bounds(geometry.make_regular_ngon(6))
    assert lower == pytest.approx(PI2 / 3)
    assert upper == pytest.approx(2.404825557695773 ** 2 / 0.75)
