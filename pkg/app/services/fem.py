"""
Piecewise-linear finite elements for the Dirichlet Laplacian.

Element stiffness and mass matrices are integrated in closed form, boundary
nodes are eliminated, and the generalized eigenproblem K u = lambda M u is
solved densely for small meshes and by shift-invert Lanczos above
settings.dense_max_nodes. Every raw eigenvalue is an upper bound of the true
one; Richardson-extrapolated values are not.
"""
from __future__ import annotations

import logging

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from app.config import settings
from app.errors import ConvergenceError, InvalidShapeError, PreconditionError
from app.models import FemResult, Mesh, Polygon, Provenance, Spectrum
from app.services import mesh as meshing
from app.services import polygon as geometry

logger = logging.getLogger(__name__)

_MASS_PATTERN = (np.ones((3, 3)) + np.eye(3)) / 12.0


def element_gradients(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Triangle areas and the constant gradients of the three hat functions."""
    p = mesh.nodes[mesh.triangles]
    x, y = p[:, :, 0], p[:, :, 1]
    area = meshing.triangle_areas(mesh)
    if np.any(area <= 0):
        raise InvalidShapeError("Mesh contains a degenerate or clockwise triangle.")
    # grad phi_i = (y_j - y_k, x_k - x_j) / (2 area) for (i, j, k) cyclic
    gx = np.roll(y, -1, axis=1) - np.roll(y, -2, axis=1)
    gy = np.roll(x, -2, axis=1) - np.roll(x, -1, axis=1)
    grads = np.stack([gx, gy], axis=2) / (2 * area)[:, None, None]
    return area, grads


def stiffness_and_mass(mesh: Mesh) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    area, grads = element_gradients(mesh)
    k_local = area[:, None, None] * np.einsum("tik,tjk->tij", grads, grads)
    m_local = area[:, None, None] * _MASS_PATTERN[None, :, :]

    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = len(mesh.nodes)
    # coo -> csr sums duplicates in input order, so assembly is deterministic
    K = sp.coo_matrix((k_local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((m_local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return K, M


def _interior_block(A: sp.csr_matrix, interior: np.ndarray) -> sp.csr_matrix:
    return A[interior][:, interior]


def lowest_eigenvalues(mesh: Mesh, count: int) -> np.ndarray:
    """Lowest `count` raw eigenvalues on one mesh, sorted."""
    interior = mesh.interior
    dense = interior.size <= settings.dense_max_nodes
    # Lanczos needs k < n, the dense solver only k <= n.
    needed = count if dense else count + 1
    if interior.size < needed:
        raise PreconditionError(
            f"Mesh level {mesh.level} has {interior.size} interior nodes; "
            f"need at least {needed} to resolve {count} eigenvalues. Refine further."
        )
    K, M = stiffness_and_mass(mesh)
    Kii = _interior_block(K, interior)
    Mii = _interior_block(M, interior)

    if dense:
        logger.debug("Dense eigensolve on %d interior nodes", interior.size)
        try:
            values = scipy.linalg.eigh(
                Kii.toarray(), Mii.toarray(), eigvals_only=True, subset_by_index=[0, count - 1]
            )
        except np.linalg.LinAlgError as e:
            raise ConvergenceError(f"Dense eigensolver failed: {e}") from e
    else:
        logger.debug("Shift-invert Lanczos on %d interior nodes", interior.size)
        try:
            values = eigsh(
                Kii.tocsc(),
                k=count,
                M=Mii.tocsc(),
                sigma=0.0,
                which="LM",
                v0=np.ones(interior.size),
                return_eigenvectors=False,
            )
        except (ArpackNoConvergence, ArpackError) as e:
            raise ConvergenceError(f"Sparse eigensolver did not converge: {e}") from e
    return np.sort(np.asarray(values, dtype=float))


def richardson(coarse: np.ndarray, fine: np.ndarray) -> np.ndarray:
    """Cancel the O(h^2) term between two consecutive levels."""
    return (4.0 * np.asarray(fine) - np.asarray(coarse)) / 3.0


def dirichlet_eigenvalues(
    p: Polygon,
    count: int | None = None,
    level: int | None = None,
    extrapolate: bool = True,
    start_level: int | None = None,
) -> FemResult:
    """
    Lowest Dirichlet eigenvalues of a polygon.

    Raw eigenvalues are computed on every level from `start_level` to `level`
    (by default just the last two) and kept as the convergence history. With
    `extrapolate`, the reported values are Richardson-extrapolated from the
    last two levels and the error estimate is a third of their difference;
    otherwise the finest raw values are reported with the full difference.
    """
    count = settings.default_count if count is None else count
    level = settings.default_level if level is None else level
    if count < 1:
        raise InvalidShapeError(f"Count must be at least 1, got {count}.")
    if level < 0:
        raise InvalidShapeError(f"Refinement level must be nonnegative, got {level}.")
    if extrapolate and level < 1:
        raise PreconditionError("Extrapolation needs level >= 1 (two consecutive levels).")
    if start_level is None:
        start_level = max(level - 1, 0)
    if not 0 <= start_level <= level:
        raise InvalidShapeError(f"Start level must lie in [0, {level}], got {start_level}.")
    if extrapolate and start_level > level - 1:
        raise PreconditionError(
            f"Extrapolation needs two levels; start level {start_level} must be below level {level}."
        )

    mesh = meshing.triangulate(p, start_level)
    levels, history = [], []
    while True:
        history.append(lowest_eigenvalues(mesh, count))
        levels.append(mesh.level)
        logger.info(
            "FEM level %d: %d nodes, %d interior, lambda_1 = %.10g",
            mesh.level, len(mesh.nodes), mesh.interior.size, history[-1][0],
        )
        if mesh.level == level:
            break
        mesh = meshing.refine(mesh)

    fine = history[-1]
    if len(history) > 1:
        diff = np.abs(fine - history[-2])
    else:
        diff = np.abs(fine)  # a single level carries no convergence information
    if extrapolate:
        values = richardson(history[-2], fine)
        errors = diff / 3.0
    else:
        values, errors = fine, diff

    order = np.argsort(values, kind="stable")
    spectrum = Spectrum(eigenvalues=values[order], error_estimates=errors[order], provenance=Provenance.FEM)
    return FemResult(
        spectrum=spectrum,
        level=level,
        extrapolated=extrapolate,
        levels=tuple(levels),
        history=np.vstack(history),
        interior_nodes=int(mesh.interior.size),
    )


def rayleigh_quotient(mesh: Mesh, nodal_values) -> float:
    """v^T K v / v^T M v for a nodal vector vanishing on the boundary."""
    v = np.asarray(nodal_values, dtype=float).ravel()
    if v.shape != (len(mesh.nodes),):
        raise InvalidShapeError(f"Expected {len(mesh.nodes)} nodal values, got {v.size}.")
    scale = float(np.abs(v).max()) if v.size else 0.0
    if scale == 0.0:
        raise InvalidShapeError("Rayleigh quotient of the zero vector is undefined.")
    if np.any(np.abs(v[mesh.boundary]) > 1e-12 * scale):
        raise PreconditionError("Nodal values must vanish on boundary nodes.")
    K, M = stiffness_and_mass(mesh)
    return float(v @ (K @ v)) / float(v @ (M @ v))


def fundamental_gap(p: Polygon, level: int | None = None) -> float:
    """lambda_2 - lambda_1 from extrapolated values."""
    if not geometry.is_convex(p):
        logger.warning("Fundamental gap of a non-convex polygon; gap bounds do not apply")
    result = dirichlet_eigenvalues(p, count=2, level=level)
    lam = result.spectrum.eigenvalues
    return float(lam[1] - lam[0])
