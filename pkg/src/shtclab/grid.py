"""Periodic staggered Cartesian mesh and the mimetic derivative operators.

Vertex (i, j) sits at the bottom-left corner of cell (i, j); both index sets
wrap periodically, so a mesh has nx*ny cells and nx*ny vertices. Fields are
stored row-major (flat index i + nx*j) as arrays of shape (ny, nx) for
scalars or (ny, nx, 3) for vectors, components last.

The operators are direct 4-point stencils obtained from the corner-normal
sums with l*n = (+-dy/2, +-dx/2, 0). Normals seen from a vertex are the
negatives of those seen from the cell, which is what makes the cell->vertex
and vertex->cell operator pairs summation-by-parts duals and makes the
curl(grad) and div(curl) compositions vanish up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StaggeredMesh:
    nx: int
    ny: int
    x0: float = 0.0
    x1: float = 1.0
    y0: float = 0.0
    y1: float = 1.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("mesh needs at least one cell per direction")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("degenerate domain extents")

    @property
    def dx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def dy(self) -> float:
        return (self.y1 - self.y0) / self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def cell_centers(self):
        """Coordinate arrays (x, y), each of shape (ny, nx)."""
        x = self.x0 + (np.arange(self.nx) + 0.5) * self.dx
        y = self.y0 + (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y)

    def vertex_coords(self):
        """Coordinate arrays (x, y) of the nx*ny periodic vertices."""
        x = self.x0 + np.arange(self.nx) * self.dx
        y = self.y0 + np.arange(self.ny) * self.dy
        return np.meshgrid(x, y)


def _check_scalar(mesh, f):
    if f.shape != (mesh.ny, mesh.nx):
        raise ValueError(f"expected scalar field {(mesh.ny, mesh.nx)}, got {f.shape}")


def _check_vector(mesh, f):
    if f.shape != (mesh.ny, mesh.nx, 3):
        raise ValueError(
            f"expected vector field {(mesh.ny, mesh.nx, 3)}, got {f.shape}"
        )


# ---------------------------------------------------------------------------
# scalar stencils; suffix cp = cell value from vertex data, pc = vertex value
# from cell data. Rolls wrap periodically by construction.
# ---------------------------------------------------------------------------


def _dx_cp(mesh, f):
    e = np.roll(f, -1, axis=1)
    n = np.roll(f, -1, axis=0)
    ne = np.roll(e, -1, axis=0)
    return (e + ne - f - n) / (2.0 * mesh.dx)


def _dy_cp(mesh, f):
    e = np.roll(f, -1, axis=1)
    n = np.roll(f, -1, axis=0)
    ne = np.roll(e, -1, axis=0)
    return (n + ne - f - e) / (2.0 * mesh.dy)


def _dx_pc(mesh, f):
    w = np.roll(f, 1, axis=1)
    s = np.roll(f, 1, axis=0)
    sw = np.roll(w, 1, axis=0)
    return (f + s - w - sw) / (2.0 * mesh.dx)


def _dy_pc(mesh, f):
    w = np.roll(f, 1, axis=1)
    s = np.roll(f, 1, axis=0)
    sw = np.roll(w, 1, axis=0)
    return (f + w - s - sw) / (2.0 * mesh.dy)


# ---------------------------------------------------------------------------
# mimetic operators
# ---------------------------------------------------------------------------


def grad_cp(mesh, phi_p):
    """Cell-centered gradient of a vertex scalar; third component is 0."""
    _check_scalar(mesh, phi_p)
    out = np.zeros((mesh.ny, mesh.nx, 3))
    out[..., 0] = _dx_cp(mesh, phi_p)
    out[..., 1] = _dy_cp(mesh, phi_p)
    return out


def grad_pc(mesh, phi_c):
    """Vertex gradient of a cell scalar; third component is 0."""
    _check_scalar(mesh, phi_c)
    out = np.zeros((mesh.ny, mesh.nx, 3))
    out[..., 0] = _dx_pc(mesh, phi_c)
    out[..., 1] = _dy_pc(mesh, phi_c)
    return out


def div_cp(mesh, a_p):
    """Cell-centered divergence of a vertex vector (in-plane components only)."""
    _check_vector(mesh, a_p)
    return _dx_cp(mesh, a_p[..., 0]) + _dy_cp(mesh, a_p[..., 1])


def div_pc(mesh, a_c):
    """Vertex divergence of a cell vector (in-plane components only)."""
    _check_vector(mesh, a_c)
    return _dx_pc(mesh, a_c[..., 0]) + _dy_pc(mesh, a_c[..., 1])


def curl_cp(mesh, a_p):
    """Cell-centered curl of a vertex vector.

    With in-plane normals the first two output components involve only a3
    and the third only (a1, a2).
    """
    _check_vector(mesh, a_p)
    out = np.empty((mesh.ny, mesh.nx, 3))
    out[..., 0] = _dy_cp(mesh, a_p[..., 2])
    out[..., 1] = -_dx_cp(mesh, a_p[..., 2])
    out[..., 2] = _dx_cp(mesh, a_p[..., 1]) - _dy_cp(mesh, a_p[..., 0])
    return out


def curl_pc(mesh, a_c):
    """Vertex curl of a cell vector."""
    _check_vector(mesh, a_c)
    out = np.empty((mesh.ny, mesh.nx, 3))
    out[..., 0] = _dy_pc(mesh, a_c[..., 2])
    out[..., 1] = -_dx_pc(mesh, a_c[..., 2])
    out[..., 2] = _dx_pc(mesh, a_c[..., 1]) - _dy_pc(mesh, a_c[..., 0])
    return out


def identity_suite(mesh, n_fields: int = 1, seed: int = 0) -> dict:
    """Max residuals of the four vanishing operator compositions.

    Evaluates curl(grad) and div(curl) in both staggering directions on
    random fields and returns the four maxima. All four are zero up to
    floating-point cancellation on any mesh.

    Returns:
        dict with keys curl_grad_at_cells, curl_grad_at_vertices,
        div_curl_at_cells, div_curl_at_vertices.
    """
    rng = np.random.default_rng(seed)
    out = {
        "curl_grad_at_cells": 0.0,
        "curl_grad_at_vertices": 0.0,
        "div_curl_at_cells": 0.0,
        "div_curl_at_vertices": 0.0,
    }
    for _ in range(n_fields):
        phi_c = rng.standard_normal((mesh.ny, mesh.nx))
        phi_p = rng.standard_normal((mesh.ny, mesh.nx))
        a_c = rng.standard_normal((mesh.ny, mesh.nx, 3))
        a_p = rng.standard_normal((mesh.ny, mesh.nx, 3))
        out["curl_grad_at_cells"] = max(
            out["curl_grad_at_cells"], np.max(np.abs(curl_cp(mesh, grad_pc(mesh, phi_c))))
        )
        out["curl_grad_at_vertices"] = max(
            out["curl_grad_at_vertices"],
            np.max(np.abs(curl_pc(mesh, grad_cp(mesh, phi_p)))),
        )
        out["div_curl_at_cells"] = max(
            out["div_curl_at_cells"], np.max(np.abs(div_cp(mesh, curl_pc(mesh, a_c))))
        )
        out["div_curl_at_vertices"] = max(
            out["div_curl_at_vertices"], np.max(np.abs(div_pc(mesh, curl_cp(mesh, a_p))))
        )
    return out
