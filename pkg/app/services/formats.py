"""
Plain-text tables and JSON documents written and read by the CLI.

Floats are written with 17 significant digits so that a run can be
reproduced byte for byte and read back without loss.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from app.errors import InvalidShapeError
from app.models import FemResult, HeatInvariants, Mesh, OptimizationResult, Polygon, Provenance, Spectrum
from app.schemas import HeatInvariantsFile, PolygonFile

SPECTRUM_HEADER = ["index", "eigenvalue", "error_estimate"]


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def table(rows, header, delimiter=",") -> str:
    output = io.StringIO()
    writer = csv.writer(output, delimiter=delimiter, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return output.getvalue()


def spectrum_csv(s: Spectrum) -> str:
    rows = ((k, float(lam), float(err)) for k, (lam, err) in enumerate(zip(s.eigenvalues, s.error_estimates), 1))
    return table(rows, SPECTRUM_HEADER)


def read_spectrum_csv(text: str, provenance: Provenance | None = None) -> Spectrum:
    """
    Parse a spectrum table. Without an explicit provenance, a table whose
    error estimates are all zero is taken as exact, anything else as FEM.
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != SPECTRUM_HEADER:
        raise InvalidShapeError(f"Spectrum CSV must start with the header {','.join(SPECTRUM_HEADER)}.")
    values, errors = [], []
    for line_no, row in enumerate(reader, 2):
        if not row:
            continue
        if len(row) != 3:
            raise InvalidShapeError(f"Spectrum CSV line {line_no} has {len(row)} fields, expected 3.")
        try:
            values.append(float(row[1]))
            errors.append(float(row[2]))
        except ValueError as e:
            raise InvalidShapeError(f"Spectrum CSV line {line_no}: {e}") from e
    if provenance is None:
        provenance = Provenance.EXACT if not any(errors) else Provenance.FEM
    return Spectrum(eigenvalues=values, error_estimates=errors, provenance=provenance)


def history_csv(result: FemResult) -> str:
    rows = []
    for level, values in zip(result.levels, result.history):
        rows.extend((level, k, float(v)) for k, v in enumerate(values, 1))
    return table(rows, ["level", "index", "eigenvalue"])


def comparison_csv(a: Spectrum, b: Spectrum) -> str:
    count = min(a.count, b.count)
    rows = []
    for k in range(count):
        x, y = float(a.eigenvalues[k]), float(b.eigenvalues[k])
        rows.append((k + 1, x, y, abs(x - y) / max(abs(x), abs(y))))
    return table(rows, ["index", "eigenvalue_a", "eigenvalue_b", "relative_difference"])


def trace_tsv(rows) -> str:
    return table(((r.t, r.trace, r.tail_bound) for r in rows), ["t", "trace", "tail_bound"], delimiter="\t")


def trajectory_csv(result: OptimizationResult) -> str:
    return table(((i, float(f), float(r)) for i, f, r in result.trajectory), ["iteration", "f", "stationarity_residual"])


def mesh_text(mesh: Mesh) -> tuple[str, str]:
    """(nodes, triangles): one `x y` per line and one 0-based `i j k` per line."""
    nodes = "".join(f"{fmt(x)} {fmt(y)}\n" for x, y in mesh.nodes)
    triangles = "".join(f"{i} {j} {k}\n" for i, j, k in mesh.triangles)
    return nodes, triangles


def write_mesh(mesh: Mesh, prefix: Path) -> list[Path]:
    nodes, triangles = mesh_text(mesh)
    paths = [prefix.with_suffix(".nodes"), prefix.with_suffix(".tri")]
    paths[0].write_text(nodes)
    paths[1].write_text(triangles)
    return paths


def dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_json(path: Path, payload) -> Path:
    path.write_text(dumps(payload))
    return path


def polygon_payload(p: Polygon) -> dict:
    return {"vertices": p.to_list()}


def read_polygon(path: Path) -> Polygon:
    try:
        doc = PolygonFile.model_validate_json(Path(path).read_text())
    except ValidationError as e:
        raise InvalidShapeError(f"{path}: not a polygon document: {e.errors()[0]['msg']}") from e
    return Polygon(doc.vertices)


def read_heat_invariants(path: Path) -> tuple[HeatInvariants, float | None]:
    """Heat invariants document with an optional shortest geodesic."""
    try:
        doc = HeatInvariantsFile.model_validate_json(Path(path).read_text())
    except ValidationError as e:
        raise InvalidShapeError(f"{path}: not a heat-invariants document: {e.errors()[0]['msg']}") from e
    return HeatInvariants(area=doc.area, perimeter=doc.perimeter, a0=doc.a0), doc.geodesic
