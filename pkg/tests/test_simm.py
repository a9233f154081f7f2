import numpy as np
import pytest

from shtclab.grid import StaggeredMesh, curl_cp, curl_pc, div_pc
from shtclab.simm import (
    PathQuadrature,
    PicardConfig,
    SolverError,
    StaggeredFields,
    apply_system_operator,
    coupling,
    involution_report,
    path_average_dual,
    path_hessian,
    picard_step,
    staggered_total_energy,
)
from shtclab.systems import EnergyParams, make_system

ALL_KINDS = ("acoustics", "maxwell", "maxwell_glm")


def random_blocks(system, mesh, rng, amp=0.5):
    qc = amp * rng.uniform(-1.0, 1.0, (mesh.ny, mesh.nx, system.cell_dim))
    qp = amp * rng.uniform(-1.0, 1.0, (mesh.ny, mesh.nx, system.vertex_dim))
    if system.kind.value == "acoustics":
        qp[..., 0] = rng.uniform(0.5, 2.0, (mesh.ny, mesh.nx))
    return qc, qp


# -- quadrature ---------------------------------------------------------------


def test_gauss_rule_basics():
    quad = PathQuadrature.gauss()
    assert quad.n_points == 3
    assert abs(float(np.sum(quad.weights)) - 1.0) <= 1e-15
    assert np.all((quad.nodes > 0.0) & (quad.nodes < 1.0))
    # degree-3 exactness of the 2-point rule: integral of s^3 over [0,1]
    q2 = PathQuadrature.gauss(2)
    assert abs(float(np.sum(q2.weights * q2.nodes**3)) - 0.25) <= 1e-15
    with pytest.raises(ValueError):
        PathQuadrature.gauss(0)


# -- path integrals -----------------------------------------------------------


def test_constant_path_returns_dual():
    rng = np.random.default_rng(23)
    quad = PathQuadrature.gauss(3)
    for name in ALL_KINDS:
        system = make_system(name)
        mesh = StaggeredMesh(nx=5, ny=4)
        qc, qp = random_blocks(system, mesh, rng)
        pt = path_average_dual(system, qc, qc, quad, "cell")
        assert np.max(np.abs(pt - system.cell_dual(qc))) <= 1e-15
        pt = path_average_dual(system, qp, qp, quad, "vertex")
        assert np.max(np.abs(pt - system.vertex_dual(qp))) <= 1e-14


def test_quadratic_energy_midpoint_average():
    system = make_system("maxwell", EnergyParams(maxwell_eps=0.0))
    rng = np.random.default_rng(24)
    qa = rng.standard_normal((4, 5, 6))
    qb = rng.standard_normal((4, 5, 6))
    quad = PathQuadrature.gauss(3)
    pt = path_average_dual(system, qa, qb, quad, "full")
    assert np.max(np.abs(pt - 0.5 * (system.dual(qa) + system.dual(qb)))) <= 1e-14
    m = path_hessian(system, qa, qb, quad, "full")
    assert np.max(np.abs(m - 2.0 * np.eye(6))) <= 1e-14


def test_chain_rule_and_roe_exact_for_polynomial_energies():
    # quartic energies have degree-3 integrands: the 3-point rule is exact,
    # leaving pure round-off of p . dq (hence the 1 + |dE| scaling)
    rng = np.random.default_rng(25)
    quad = PathQuadrature.gauss(3)
    for name in ("maxwell", "maxwell_glm"):
        system = make_system(name)
        qa = rng.uniform(-0.5, 0.5, (100, system.dim))
        qb = rng.uniform(-0.5, 0.5, (100, system.dim))
        pt = path_average_dual(system, qa, qb, quad, "full")
        de = system.energy(qb) - system.energy(qa)
        chain = np.abs(np.sum(pt * (qb - qa), axis=-1) - de)
        assert np.all(chain <= 1e-15 * (1.0 + np.abs(de)))
        m = path_hessian(system, qa, qb, quad, "full")
        dp = system.dual(qb) - system.dual(qa)
        roe = np.abs(np.einsum("nij,nj->ni", m, qb - qa) - dp)
        assert np.all(roe <= 1e-15 * (1.0 + np.abs(dp)))


def test_acoustic_density_path_hessian_value():
    # integral of (1 + s)^(gamma - 1) over the unit path from rho=1 to rho=2
    system = make_system("acoustics")
    r1 = np.full((1, 1, 1), 1.0)
    r2 = np.full((1, 1, 1), 2.0)
    exact = 1.1707255868184203  # (2**1.4 - 1) / 1.4
    m3 = float(path_hessian(system, r1, r2, PathQuadrature.gauss(3), "vertex")[0, 0, 0, 0])
    assert abs(m3 - exact) <= 1e-4
    m5 = float(path_hessian(system, r1, r2, PathQuadrature.gauss(5), "vertex")[0, 0, 0, 0])
    assert abs(m5 - exact) <= 1e-8
    assert abs(m5 - exact) < abs(m3 - exact)


def test_path_must_stay_admissible():
    system = make_system("acoustics")
    quad = PathQuadrature.gauss(3)
    r1 = np.full((2, 2, 1), 1.0)
    r2 = np.full((2, 2, 1), -1.0)
    with pytest.raises(SolverError, match="admissible"):
        path_average_dual(system, r1, r2, quad, "vertex")
    with pytest.raises(SolverError, match="admissible"):
        path_hessian(system, r1, r2, quad, "vertex")


def test_unknown_block_name_rejected():
    system = make_system("maxwell")
    with pytest.raises(ValueError, match="where"):
        path_average_dual(system, np.zeros(3), np.zeros(3), PathQuadrature.gauss(), "edge")


# -- spatial coupling ----------------------------------------------------------


def test_coupling_skew_adjoint():
    # p . K(p) sums to zero over the mesh: the conservation mechanism
    rng = np.random.default_rng(31)
    mesh = StaggeredMesh(nx=12, ny=9, x1=2.0)
    for name in ALL_KINDS:
        system = make_system(name)
        pc = rng.standard_normal((9, 12, system.cell_dim))
        pp = rng.standard_normal((9, 12, system.vertex_dim))
        gc, gp = coupling(system, mesh, pc, pp)
        total = float(np.sum(pc * gc)) + float(np.sum(pp * gp))
        scale = float(np.sum(np.abs(pc * gc))) + float(np.sum(np.abs(pp * gp)))
        assert abs(total) <= 1e-13 * scale


def test_glm_coupling_rows():
    # the cleaning fields enter as gradients of the opposite-location duals
    # and divergences of the vector duals
    rng = np.random.default_rng(32)
    mesh = StaggeredMesh(nx=8, ny=8)
    system = make_system("maxwell_glm")
    pc = rng.standard_normal((8, 8, 4))
    pp = rng.standard_normal((8, 8, 4))
    gc, gp = coupling(system, mesh, pc, pp)
    from shtclab.grid import div_cp, grad_cp, grad_pc

    assert np.array_equal(
        gc[..., :3], curl_cp(mesh, pp[..., :3]) + grad_cp(mesh, pp[..., 3])
    )
    assert np.array_equal(gc[..., 3], div_cp(mesh, pp[..., :3]))
    assert np.array_equal(
        gp[..., :3], -curl_pc(mesh, pc[..., :3]) + grad_pc(mesh, pc[..., 3])
    )
    assert np.array_equal(gp[..., 3], div_pc(mesh, pc[..., :3]))


def test_apply_system_operator_limits():
    rng = np.random.default_rng(33)
    mesh = StaggeredMesh(nx=6, ny=6)
    system = make_system("maxwell")
    blocks_c = np.tile(np.eye(3) * 2.0, (6, 6, 1, 1))
    blocks_p = np.tile(np.eye(3) * 0.5, (6, 6, 1, 1))
    pc = rng.standard_normal((6, 6, 3))
    pp = rng.standard_normal((6, 6, 3))
    rc, rp = apply_system_operator(system, mesh, blocks_c, blocks_p, pc, pp, 0.0)
    assert np.array_equal(rc, 2.0 * pc)
    assert np.array_equal(rp, 0.5 * pp)
    zc = np.zeros_like(pc)
    zp = np.zeros_like(pp)
    rc, rp = apply_system_operator(system, mesh, blocks_c, blocks_p, zc, zp, 0.1)
    assert not np.any(rc) and not np.any(rp)


# -- the implicit step ----------------------------------------------------------


def test_zero_fields_converge_immediately():
    system = make_system("maxwell")
    mesh = StaggeredMesh(nx=8, ny=8)
    fields = StaggeredFields(qc=np.zeros((8, 8, 3)), qp=np.zeros((8, 8, 3)))
    out, stats = picard_step(system, mesh, fields, 1e-3)
    assert stats.iterations == 1
    assert stats.krylov_iters == 0
    assert np.array_equal(out.qc, fields.qc) and np.array_equal(out.qp, fields.qp)
    assert out.time == 1e-3


def test_quadratic_energy_converges_in_two_iterations():
    system = make_system("maxwell", EnergyParams(maxwell_eps=0.0))
    mesh = StaggeredMesh(nx=16, ny=16)
    rng = np.random.default_rng(41)
    state = StaggeredFields(
        qc=0.01 * rng.standard_normal((16, 16, 3)),
        qp=0.01 * rng.standard_normal((16, 16, 3)),
    )
    for _ in range(10):
        state, stats = picard_step(system, mesh, state, 1e-3)
        assert stats.iterations <= 2


def test_short_run_conserves_energy():
    rng = np.random.default_rng(42)
    mesh = StaggeredMesh(nx=16, ny=16, x0=-1.0, x1=1.0, y0=-1.0, y1=1.0)
    for name, dt in (("maxwell", 1e-3), ("maxwell_glm", 5e-4), ("acoustics", 1e-3)):
        system = make_system(name)
        qc, qp = random_blocks(system, mesh, rng, amp=0.1)
        if name == "acoustics":
            qc *= 0.0
        state = StaggeredFields(qc=qc, qp=qp)
        e0 = staggered_total_energy(system, mesh, state.qc, state.qp)
        for _ in range(20):
            state, stats = picard_step(system, mesh, state, dt)
            assert abs(stats.energy / e0 - 1.0) <= 5e-12


def test_maxwell_involutions_preserved():
    # start from curls, so both divergences vanish discretely, and check the
    # step keeps them at the composition-identity level
    rng = np.random.default_rng(43)
    mesh = StaggeredMesh(nx=16, ny=16)
    system = make_system("maxwell")
    state = StaggeredFields(
        qc=0.1 * curl_cp(mesh, rng.standard_normal((16, 16, 3))),
        qp=0.1 * curl_pc(mesh, rng.standard_normal((16, 16, 3))),
    )
    tol = 1e-12 * 0.1 / mesh.dx
    for _ in range(15):
        state, _ = picard_step(system, mesh, state, 1e-3)
        report = involution_report(system, mesh, state)
        assert report["div_B_max"] <= tol
        assert report["div_D_max"] <= tol


def test_acoustic_curl_preserved_from_rest():
    rng = np.random.default_rng(44)
    mesh = StaggeredMesh(nx=16, ny=16, x0=-0.5, x1=0.5, y0=-0.5, y1=0.5)
    system = make_system("acoustics")
    state = StaggeredFields(
        qc=np.zeros((16, 16, 3)),
        qp=1.0 + 0.2 * rng.random((16, 16, 1)),
    )
    for _ in range(15):
        state, _ = picard_step(system, mesh, state, 1e-3)
        vmax = float(np.max(np.abs(state.qc)))
        report = involution_report(system, mesh, state)
        assert report["curl_v_max"] <= 1e-12 * (vmax / mesh.dx + 1e-16)


def test_involution_report_on_constructed_fields():
    rng = np.random.default_rng(45)
    mesh = StaggeredMesh(nx=12, ny=12)
    system = make_system("maxwell")
    a_p = rng.standard_normal((12, 12, 3))
    state = StaggeredFields(qc=curl_cp(mesh, a_p), qp=np.zeros((12, 12, 3)))
    report = involution_report(system, mesh, state)
    assert report["div_B_max"] <= 1e-13 * np.max(np.abs(a_p)) / mesh.dx**2
    assert report["div_D_max"] == 0.0
    ac = make_system("acoustics")
    from shtclab.grid import grad_cp

    state = StaggeredFields(
        qc=grad_cp(mesh, rng.standard_normal((12, 12))),
        qp=np.ones((12, 12, 1)),
    )
    assert involution_report(ac, mesh, state)["curl_v_max"] <= 1e-13 / mesh.dx**2


def test_picard_rejects_bad_arguments():
    system = make_system("maxwell")
    mesh = StaggeredMesh(nx=4, ny=4)
    fields = StaggeredFields(qc=np.zeros((4, 4, 3)), qp=np.zeros((4, 4, 3)))
    with pytest.raises(ValueError, match="dt"):
        picard_step(system, mesh, fields, 0.0)
    with pytest.raises(ValueError, match="max_iters"):
        picard_step(system, mesh, fields, 1e-3, config=PicardConfig(max_iters=0))
    with pytest.raises(ValueError, match="tol"):
        PicardConfig(tol=0.0)


def test_picard_reports_nonconvergence():
    # this acoustic state needs around eight iterations at dt=1e-2
    rng = np.random.default_rng(51)
    system = make_system("acoustics")
    mesh = StaggeredMesh(nx=8, ny=8)
    fields = StaggeredFields(
        qc=rng.uniform(-1.0, 1.0, (8, 8, 3)),
        qp=1.0 + rng.random((8, 8, 1)),
    )
    with pytest.raises(SolverError, match="did not converge"):
        picard_step(system, mesh, fields, 1e-2, config=PicardConfig(max_iters=2))


def test_picard_aborts_outside_convexity():
    system = make_system("maxwell")
    mesh = StaggeredMesh(nx=4, ny=4)
    qc = np.zeros((4, 4, 3))
    qc[..., 0] = -200.0  # indefinite Hessian for the default eps
    fields = StaggeredFields(qc=qc, qp=np.zeros((4, 4, 3)))
    with pytest.raises(SolverError, match="positive definite"):
        picard_step(system, mesh, fields, 1e-3)


def test_picard_aborts_on_density_loss():
    system = make_system("acoustics")
    mesh = StaggeredMesh(nx=8, ny=8)
    rng = np.random.default_rng(52)
    fields = StaggeredFields(
        qc=rng.uniform(-1.0, 1.0, (8, 8, 3)),
        qp=np.full((8, 8, 1), 1e-6),
    )
    with pytest.raises(SolverError):
        picard_step(system, mesh, fields, 0.5)


def test_step_stats_are_consistent():
    rng = np.random.default_rng(53)
    system = make_system("maxwell_glm")
    mesh = StaggeredMesh(nx=12, ny=12)
    qc, qp = random_blocks(system, mesh, rng, amp=0.3)
    state = StaggeredFields(qc=qc, qp=qp)
    out, stats = picard_step(system, mesh, state, 5e-4)
    assert stats.energy == staggered_total_energy(system, mesh, out.qc, out.qp)
    assert stats.iterations >= 1 and stats.krylov_iters >= 1
    assert stats.roe_residual <= 1e-15 * (1.0 + stats.roe_scale)
    assert stats.chain_residual <= 1e-15 * (1.0 + stats.chain_scale)


def test_acoustic_recovery_is_admissible():
    # after convergence the density is refined to match its dual exactly
    rng = np.random.default_rng(54)
    system = make_system("acoustics")
    mesh = StaggeredMesh(nx=16, ny=16)
    state = StaggeredFields(
        qc=np.zeros((16, 16, 3)),
        qp=2.0 + rng.random((16, 16, 1)),
    )
    for _ in range(5):
        state, _ = picard_step(system, mesh, state, 1e-3)
    rho = state.qp[..., 0]
    assert np.all(rho > 0.0)
    g = system.params.gamma
    s = system.vertex_dual(state.qp)[..., 0]
    assert np.max(np.abs(rho**g / g - s)) <= 1e-14 * np.max(np.abs(s))
