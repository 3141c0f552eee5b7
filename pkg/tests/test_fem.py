"""
P1 finite-element Dirichlet eigenvalues.

To run:
    pytest tests/test_fem.py -v
    pytest tests/test_fem.py -v -m "not slow"   # skip the fine-mesh acceptance runs
"""
import math

import numpy as np
import pytest

from app.config import settings
from app.errors import InvalidShapeError, PreconditionError
from app.models import Provenance
from app.services import fem
from app.services import mesh as meshing
from app.services import polygon as geometry
from app.services.exact_spectra import bessel_zero, first_eigenvalue_bounds, rectangle_spectrum

PI2 = math.pi ** 2


def test_assembly_is_symmetric_and_consistent(unit_square):
    mesh = meshing.triangulate(unit_square, 2)
    K, M = fem.stiffness_and_mass(mesh)
    assert abs(K - K.T).max() < 1e-12
    assert abs(M - M.T).max() < 1e-12
    ones = np.ones(len(mesh.nodes))
    assert np.allclose(K @ ones, 0), "Constants lie in the kernel of the stiffness matrix"
    assert ones @ (M @ ones) == pytest.approx(1.0), "Mass matrix integrates 1 to the area"


def test_square_first_eigenvalue_within_half_percent(unit_square):
    result = fem.dirichlet_eigenvalues(unit_square, count=10, level=4)
    assert result.spectrum.provenance is Provenance.FEM
    assert result.extrapolated
    assert result.levels == (3, 4)
    assert abs(result.spectrum.eigenvalues[0] - 2 * PI2) / (2 * PI2) < 0.005


def test_raw_values_are_upper_bounds_and_decrease(unit_square):
    result = fem.dirichlet_eigenvalues(unit_square, count=6, level=4, start_level=2)
    exact = rectangle_spectrum(1.0, 1.0, count=6).eigenvalues
    assert result.levels == (2, 3, 4)
    assert np.all(result.history >= exact * (1 - 1e-12)), "Conforming P1 eigenvalues bound from above"
    assert np.all(np.diff(result.history, axis=0) <= 1e-12), "Refinement never raises a raw eigenvalue"


@pytest.mark.slow
def test_square_spectrum_with_extrapolation(unit_square):
    result = fem.dirichlet_eigenvalues(unit_square, count=10, level=5)
    exact = rectangle_spectrum(1.0, 1.0, count=10).eigenvalues
    assert np.all(np.abs(result.spectrum.eigenvalues - exact) / exact < 0.01)
    raw_error = np.abs(result.history[-1] - exact)
    assert np.all(np.abs(result.spectrum.eigenvalues - exact) < raw_error), "Extrapolation should help"


def test_no_extrapolation_reports_finest_values(unit_square):
    result = fem.dirichlet_eigenvalues(unit_square, count=3, level=2, extrapolate=False)
    assert np.allclose(result.spectrum.eigenvalues, result.history[-1])
    assert np.allclose(result.spectrum.error_estimates, np.abs(result.history[-1] - result.history[-2]))


def test_richardson():
    assert fem.richardson(np.array([4.0]), np.array([2.0]))[0] == pytest.approx(4 / 3)


def test_scaling_and_rigid_motion():
    p = geometry.random_convex_polygon(5, np.random.default_rng(2))
    base = fem.dirichlet_eigenvalues(p, count=3, level=2, extrapolate=False).spectrum.eigenvalues
    doubled = fem.dirichlet_eigenvalues(geometry.scale(p, 2.0), count=3, level=2, extrapolate=False)
    assert np.allclose(doubled.spectrum.eigenvalues, base / 4, rtol=1e-9)
    moved = geometry.transform(p, angle=0.7, shift=(3.0, 1.0))
    assert np.allclose(
        fem.dirichlet_eigenvalues(moved, count=3, level=2, extrapolate=False).spectrum.eigenvalues, base, rtol=1e-8
    )


def test_first_eigenvalue_inside_domain_monotonicity_bracket():
    for p in (geometry.make_regular_ngon(6), geometry.random_convex_polygon(6, np.random.default_rng(8))):
        lower, upper = first_eigenvalue_bounds(p)
        lam1 = fem.dirichlet_eigenvalues(p, count=1, level=4).spectrum.eigenvalues[0]
        assert lower < lam1 < upper


def test_sparse_and_dense_solvers_agree(unit_square, monkeypatch):
    mesh = meshing.triangulate(unit_square, 3)
    dense = fem.lowest_eigenvalues(mesh, 5)
    monkeypatch.setattr(settings, "dense_max_nodes", 10)
    sparse = fem.lowest_eigenvalues(mesh, 5)
    assert np.allclose(dense, sparse, rtol=1e-8)


def test_rayleigh_quotient(unit_square):
    mesh = meshing.triangulate(unit_square, 4)
    v = meshing.interpolate(mesh, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
    v[mesh.boundary] = 0.0
    rq = fem.rayleigh_quotient(mesh, v)
    lam1 = fem.lowest_eigenvalues(mesh, 1)[0]
    assert rq >= lam1 * (1 - 1e-12), "No nodal vector beats the discrete minimum"
    assert rq == pytest.approx(2 * PI2, rel=0.05)


def test_rayleigh_quotient_rejects_bad_vectors(unit_square):
    mesh = meshing.triangulate(unit_square, 1)
    with pytest.raises(InvalidShapeError):
        fem.rayleigh_quotient(mesh, np.zeros(len(mesh.nodes)))
    with pytest.raises(PreconditionError):
        fem.rayleigh_quotient(mesh, np.ones(len(mesh.nodes)))


def test_too_coarse_mesh(unit_square):
    with pytest.raises(PreconditionError, match="interior nodes"):
        fem.lowest_eigenvalues(meshing.triangulate(unit_square, 0), 2)
    with pytest.raises(PreconditionError):
        fem.dirichlet_eigenvalues(unit_square, count=2, level=0)


def test_dense_solver_resolves_as_many_eigenvalues_as_interior_nodes(unit_square, monkeypatch):
    mesh = meshing.triangulate(unit_square, 1)
    n = mesh.interior.size
    values = fem.lowest_eigenvalues(mesh, n)
    assert len(values) == n
    assert np.all(np.diff(values) >= 0)
    monkeypatch.setattr(settings, "dense_max_nodes", 0)
    with pytest.raises(PreconditionError, match=f"at least {n + 1}"):
        fem.lowest_eigenvalues(mesh, n)


def test_extrapolation_needs_a_coarser_start_level(unit_square):
    with pytest.raises(PreconditionError, match="start level 2"):
        fem.dirichlet_eigenvalues(unit_square, count=1, level=2, start_level=2)
    result = fem.dirichlet_eigenvalues(unit_square, count=1, level=2, start_level=2, extrapolate=False)
    assert result.levels == (2,)
    assert result.spectrum.eigenvalues[0] > 2 * PI2


def test_fundamental_gap_of_square(unit_square):
    assert fem.fundamental_gap(unit_square, level=4) == pytest.approx(3 * PI2, rel=0.02)


@pytest.mark.slow
def test_gww_pair_is_isospectral_at_discretisation_accuracy(gww):
    first, second = (fem.dirichlet_eigenvalues(p, count=10, level=5).spectrum.eigenvalues for p in gww)
    rel = np.abs(first - second) / np.maximum(first, second)
    assert np.all(rel < 0.01), f"Relative differences {rel}"


@pytest.mark.slow
def test_inscribed_64gon_approaches_the_disk():
    p = geometry.make_regular_ngon(64, side=2 * math.sin(math.pi / 64))
    lam1 = fem.dirichlet_eigenvalues(p, count=1, level=4).spectrum.eigenvalues[0]
    j01 = bessel_zero(0, 1)
    assert lam1 == pytest.approx(j01 ** 2, rel=0.015)
