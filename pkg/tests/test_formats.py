"""
Reading and writing the CSV, mesh and JSON documents of a run.

To run:
    pytest tests/test_formats.py -v
"""
import numpy as np
import pytest

from app.errors import InvalidShapeError
from app.models import Provenance
from app.services import fem, formats
from app.services import mesh as meshing
from app.services.exact_spectra import rectangle_spectrum


def test_spectrum_csv_reads_back(unit_square):
    s = rectangle_spectrum(2.0, 1.0, count=6)
    text = formats.spectrum_csv(s)
    assert text.splitlines()[0] == "index,eigenvalue,error_estimate"
    back = formats.read_spectrum_csv(text)
    assert back.provenance is Provenance.EXACT
    assert np.array_equal(back.eigenvalues, s.eigenvalues), "17 significant digits survive the round trip"

    fem_result = fem.dirichlet_eigenvalues(unit_square, count=3, level=2)
    assert formats.read_spectrum_csv(formats.spectrum_csv(fem_result.spectrum)).provenance is Provenance.FEM


@pytest.mark.parametrize(
    "text, message",
    [
        ("k,lambda\n1,2\n", "header"),
        ("index,eigenvalue,error_estimate\n1,2\n", "fields"),
        ("index,eigenvalue,error_estimate\n1,abc,0\n", "line 2"),
    ],
)
def test_bad_spectrum_csv(text, message):
    with pytest.raises(InvalidShapeError, match=message):
        formats.read_spectrum_csv(text)


def test_history_table(unit_square):
    result = fem.dirichlet_eigenvalues(unit_square, count=2, level=3)
    lines = formats.history_csv(result).splitlines()
    assert lines[0] == "level,index,eigenvalue"
    assert len(lines) == 1 + 2 * len(result.levels)


def test_trace_table_is_tab_separated():
    rows = [type("Row", (), {"t": 0.1, "trace": 2.0, "tail_bound": 0.0})()]
    assert formats.trace_tsv(rows).splitlines() == ["t\ttrace\ttail_bound", "0.10000000000000001\t2\t0"]


def test_read_polygon(write_json):
    p = formats.read_polygon(write_json("tri.json", {"vertices": [[0, 0], [1, 0], [0, 1]]}))
    assert p.n == 3
    with pytest.raises(InvalidShapeError, match="not a polygon document"):
        formats.read_polygon(write_json("short.json", {"vertices": [[0, 0], [1, 0]]}))
    with pytest.raises(InvalidShapeError, match="not a polygon document"):
        formats.read_polygon(write_json("broken.json", "{"))
    with pytest.raises(InvalidShapeError, match="intersects"):
        formats.read_polygon(write_json("bowtie.json", {"vertices": [[0, 0], [1, 1], [1, 0], [0, 1]]}))


def test_read_heat_invariants(write_json):
    inv, geodesic = formats.read_heat_invariants(write_json("inv.json", {"area": 1.0, "perimeter": 4.0, "a0": 0.25}))
    assert (inv.area, inv.perimeter, inv.a0, geodesic) == (1.0, 4.0, 0.25, None)
    with pytest.raises(InvalidShapeError, match="heat-invariants"):
        formats.read_heat_invariants(write_json("bad.json", {"area": 1.0}))


def test_mesh_text(unit_square):
    mesh = meshing.triangulate(unit_square, 1)
    nodes, triangles = formats.mesh_text(mesh)
    assert len(nodes.splitlines()) == len(mesh.nodes)
    assert len(triangles.splitlines()) == len(mesh.triangles)
    assert all(0 <= int(i) < len(mesh.nodes) for line in triangles.splitlines() for i in line.split())


def test_json_is_stable():
    assert formats.dumps({"b": 1, "a": [1.5]}) == '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}\n'
