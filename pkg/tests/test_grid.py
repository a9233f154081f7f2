import numpy as np
import pytest

from shtclab.grid import (
    StaggeredMesh,
    curl_cp,
    curl_pc,
    div_cp,
    div_pc,
    grad_cp,
    grad_pc,
    identity_suite,
)

# Affine fields are reproduced exactly away from the periodic seam; the cp
# stencils wrap in the last row/column of cells, the pc stencils in the
# first row/column of vertices.
CP_INTERIOR = np.s_[:-1, :-1]
PC_INTERIOR = np.s_[1:, 1:]


def unit_mesh(n=8):
    return StaggeredMesh(nx=n, ny=n)


def test_mesh_geometry():
    mesh = StaggeredMesh(nx=10, ny=4, x0=-1.0, x1=1.0, y0=0.0, y1=1.0)
    assert mesh.dx == 0.2
    assert mesh.dy == 0.25
    assert mesh.cell_area == 0.05
    xc, yc = mesh.cell_centers()
    assert xc.shape == yc.shape == (4, 10)
    assert xc[0, 0] == -0.9 and yc[0, 0] == 0.125
    xp, yp = mesh.vertex_coords()
    assert xp[0, 0] == -1.0 and yp[2, 3] == 0.5


def test_bad_mesh_rejected():
    with pytest.raises(ValueError):
        StaggeredMesh(nx=0, ny=4)
    with pytest.raises(ValueError):
        StaggeredMesh(nx=4, ny=4, x0=1.0, x1=1.0)


def test_constant_fields_annihilated():
    mesh = unit_mesh()
    ones = np.ones((8, 8))
    vec = np.ones((8, 8, 3))
    assert not np.any(grad_cp(mesh, ones))
    assert not np.any(grad_pc(mesh, ones))
    assert not np.any(div_cp(mesh, vec))
    assert not np.any(div_pc(mesh, vec))
    assert not np.any(curl_cp(mesh, vec))
    assert not np.any(curl_pc(mesh, vec))


def test_gradient_of_linear_fields():
    mesh = unit_mesh()
    xp, yp = mesh.vertex_coords()
    g = grad_cp(mesh, xp)
    assert np.array_equal(g[CP_INTERIOR], np.broadcast_to([1.0, 0.0, 0.0], (7, 7, 3)))
    g = grad_cp(mesh, xp + 2.0 * yp)
    assert np.array_equal(g[CP_INTERIOR], np.broadcast_to([1.0, 2.0, 0.0], (7, 7, 3)))
    xc, yc = mesh.cell_centers()
    g = grad_pc(mesh, xc + 2.0 * yc)
    assert np.array_equal(g[PC_INTERIOR], np.broadcast_to([1.0, 2.0, 0.0], (7, 7, 3)))


def test_divergence_of_linear_fields():
    mesh = unit_mesh()
    xc, yc = mesh.cell_centers()
    a = np.stack([xc, -yc, np.zeros_like(xc)], axis=-1)
    assert not np.any(div_pc(mesh, a)[PC_INTERIOR])
    a = np.stack([xc, yc, 5.0 * np.ones_like(xc)], axis=-1)
    assert np.array_equal(div_pc(mesh, a)[PC_INTERIOR], np.full((7, 7), 2.0))
    xp, yp = mesh.vertex_coords()
    a = np.stack([xp, yp, np.zeros_like(xp)], axis=-1)
    assert np.array_equal(div_cp(mesh, a)[CP_INTERIOR], np.full((7, 7), 2.0))


def test_curl_of_linear_fields():
    mesh = unit_mesh()
    xp, yp = mesh.vertex_coords()
    a = np.stack([-yp, xp, np.zeros_like(xp)], axis=-1)
    c = curl_cp(mesh, a)
    assert np.array_equal(c[CP_INTERIOR], np.broadcast_to([0.0, 0.0, 2.0], (7, 7, 3)))
    xc, yc = mesh.cell_centers()
    a = np.stack([-yc, xc, np.zeros_like(xc)], axis=-1)
    c = curl_pc(mesh, a)
    assert np.array_equal(c[PC_INTERIOR], np.broadcast_to([0.0, 0.0, 2.0], (7, 7, 3)))


def test_curl_uses_only_matching_components():
    # in-plane curl components come from a3 alone, the third from (a1, a2)
    mesh = unit_mesh()
    rng = np.random.default_rng(2)
    a = rng.standard_normal((8, 8, 3))
    planar = a.copy()
    planar[..., 2] = 0.0
    c = curl_cp(mesh, planar)
    assert not np.any(c[..., :2])
    vertical = np.zeros_like(a)
    vertical[..., 2] = a[..., 2]
    c = curl_cp(mesh, vertical)
    assert not np.any(c[..., 2])


def test_composition_identities_random_fields():
    # curl grad = 0 and div curl = 0 in both staggerings, to cancellation
    rng = np.random.default_rng(4)
    for nx, ny in ((16, 16), (13, 7)):
        mesh = StaggeredMesh(nx=nx, ny=ny)
        h = min(mesh.dx, mesh.dy)
        for _ in range(20):
            phi_c = rng.standard_normal((ny, nx))
            phi_p = rng.standard_normal((ny, nx))
            a_c = rng.standard_normal((ny, nx, 3))
            a_p = rng.standard_normal((ny, nx, 3))
            tol = lambda f: 1e-13 * np.max(np.abs(f)) / h
            assert np.max(np.abs(curl_cp(mesh, grad_pc(mesh, phi_c)))) <= tol(phi_c)
            assert np.max(np.abs(curl_pc(mesh, grad_cp(mesh, phi_p)))) <= tol(phi_p)
            assert np.max(np.abs(div_cp(mesh, curl_pc(mesh, a_c)))) <= tol(a_c)
            assert np.max(np.abs(div_pc(mesh, curl_cp(mesh, a_p)))) <= tol(a_p)


def test_identity_suite_bounds():
    mesh = StaggeredMesh(nx=16, ny=16)
    res = identity_suite(mesh, n_fields=20, seed=1)
    assert set(res) == {
        "curl_grad_at_cells",
        "curl_grad_at_vertices",
        "div_curl_at_cells",
        "div_curl_at_vertices",
    }
    # standard normal fields, so 4.0 bounds the field max comfortably
    assert max(res.values()) <= 1e-13 * 4.0 / min(mesh.dx, mesh.dy)


def test_identities_exact_on_degenerate_mesh():
    # 1x1 periodic mesh: every stencil difference wraps onto itself
    mesh = StaggeredMesh(nx=1, ny=1)
    res = identity_suite(mesh, n_fields=5, seed=0)
    assert all(v == 0.0 for v in res.values())
    assert not np.any(grad_cp(mesh, np.array([[3.7]])))


def test_summation_by_parts():
    # grad/div pairs are anti-adjoint, the curl pair is adjoint, in the
    # volume-weighted inner product (cells and vertices share |Omega|)
    rng = np.random.default_rng(12)
    mesh = StaggeredMesh(nx=24, ny=17, x0=0.0, x1=3.0, y0=-1.0, y1=1.0)
    shape = (17, 24)
    for _ in range(10):
        phi_c = rng.standard_normal(shape)
        phi_p = rng.standard_normal(shape)
        a_c = rng.standard_normal(shape + (3,))
        a_p = rng.standard_normal(shape + (3,))
        scale = float(np.sum(np.abs(a_c))) / min(mesh.dx, mesh.dy)
        assert abs(
            np.sum(a_c * grad_cp(mesh, phi_p)) + np.sum(phi_p * div_pc(mesh, a_c))
        ) <= 1e-13 * scale
        assert abs(
            np.sum(a_p * grad_pc(mesh, phi_c)) + np.sum(phi_c * div_cp(mesh, a_p))
        ) <= 1e-13 * scale
        assert abs(
            np.sum(a_c * curl_cp(mesh, a_p)) - np.sum(a_p * curl_pc(mesh, a_c))
        ) <= 1e-13 * scale


def test_shape_mismatch_rejected():
    mesh = unit_mesh()
    with pytest.raises(ValueError, match="scalar field"):
        grad_cp(mesh, np.zeros((8, 9)))
    with pytest.raises(ValueError, match="vector field"):
        div_pc(mesh, np.zeros((8, 8)))
    with pytest.raises(ValueError, match="vector field"):
        curl_cp(mesh, np.zeros((8, 8, 2)))
