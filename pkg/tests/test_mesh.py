"""
Triangulation and uniform refinement.

To run:
    pytest tests/test_mesh.py -v
"""
import numpy as np
import pytest
from shapely.geometry import Point
from shapely.geometry import Polygon as ShapelyPolygon

from app.errors import InvalidShapeError
from app.services import mesh as meshing
from app.services import polygon as geometry


def test_square_base_mesh_is_a_centroid_fan(unit_square):
    mesh = meshing.triangulate(unit_square, 0)
    assert mesh.triangles.shape == (4, 3)
    assert len(mesh.nodes) == 5
    assert mesh.interior.tolist() == [4]
    assert np.allclose(mesh.nodes[4], [0.5, 0.5])


def test_triangle_is_its_own_base_mesh():
    mesh = meshing.triangulate(geometry.thin_triangle(1.0, 8.0), 0)
    assert mesh.triangles.shape == (1, 3)
    assert mesh.interior.size == 0


@pytest.mark.parametrize("level", [1, 2, 3])
def test_refinement_counts_and_areas(unit_square, level):
    mesh = meshing.triangulate(unit_square, level)
    areas = meshing.triangle_areas(mesh)
    assert len(mesh.triangles) == 4 * 4 ** level
    assert np.all(areas > 0), "Refinement must keep every triangle counter-clockwise"
    assert areas.sum() == pytest.approx(1.0)
    # Euler: V - E + F = 1 with E = (3F + boundary edges) / 2
    boundary_edges = 4 * 2 ** level
    edges = (3 * len(mesh.triangles) + boundary_edges) // 2
    assert len(mesh.nodes) == 1 + edges - len(mesh.triangles)


def test_mesh_size_halves_per_level(unit_square):
    sizes = [meshing.max_diameter(meshing.triangulate(unit_square, k)) for k in range(4)]
    assert np.allclose(np.array(sizes[1:]) / np.array(sizes[:-1]), 0.5)


def test_boundary_nodes_lie_on_the_boundary(unit_square):
    mesh = meshing.triangulate(unit_square, 3)
    x, y = mesh.nodes[mesh.boundary].T
    on_edge = np.isclose(x, 0) | np.isclose(x, 1) | np.isclose(y, 0) | np.isclose(y, 1)
    assert np.all(on_edge)
    xi, yi = mesh.nodes[mesh.interior].T
    assert np.all((xi > 0) & (xi < 1) & (yi > 0) & (yi < 1))
    assert mesh.boundary_nodes.size == 4 * 2 ** 3


@pytest.mark.parametrize("which", [0, 1])
def test_gww_ear_clipping(gww, which):
    p = gww[which]
    mesh = meshing.triangulate(p, 0)
    assert mesh.triangles.shape == (p.n - 2, 3)
    assert np.all(meshing.triangle_areas(mesh) > 0)
    assert meshing.triangle_areas(mesh).sum() == pytest.approx(3.5)

    fine = meshing.triangulate(p, 2)
    shape = ShapelyPolygon(p.vertices)
    inside = [shape.contains(Point(x, y)) for x, y in fine.nodes[fine.interior]]
    assert all(inside), "Interior nodes must be strictly inside the polygon"


def test_ear_clip_is_deterministic(gww):
    first = meshing.ear_clip(gww[1].vertices)
    second = meshing.ear_clip(gww[1].vertices)
    assert first == second


def test_negative_level_rejected(unit_square):
    with pytest.raises(InvalidShapeError):
        meshing.triangulate(unit_square, -1)


def test_interpolate(unit_square):
    mesh = meshing.triangulate(unit_square, 1)
    values = meshing.interpolate(mesh, lambda x, y: x + 2 * y)
    assert np.allclose(values, mesh.nodes[:, 0] + 2 * mesh.nodes[:, 1])
