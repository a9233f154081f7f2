"""Staggered semi-implicit scheme that conserves total energy to round-off.

One half of the state lives at cell centers, the other half at vertices
(see each system's `cell_indices`/`vertex_indices`). The update is written
entirely in the dual variables: the time derivative of the state is
expressed through path integrals of the dual map and of the energy Hessian
along the straight segment between the old and the new state,

    q_new - q_old = M_path (p_new - p_old),      p_tilde = avg of dual on path,

and the spatial coupling applies the mimetic operators to the path-averaged
duals. Because the coupling is skew-adjoint under the mesh inner product and
the path averages reproduce exact differences (Roe property), the fully
discrete total energy is conserved up to quadrature and round-off.

The nonlinear per-step system is solved by Picard iteration; each iteration
freezes the path quantities, solves one linear system with GMRES, and
recovers the state from the dual increment. Iteration stops when the total
energy of successive iterates agrees to an absolute tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .grid import curl_cp, curl_pc, div_cp, div_pc, grad_cp, grad_pc
from .systems import SystemKind

_GMRES_RESTART = 30


class SolverError(RuntimeError):
    """Picard or Krylov failure, or loss of admissibility/convexity."""


@dataclass
class StaggeredFields:
    """State blocks on the staggered mesh: qc at cells, qp at vertices."""

    qc: np.ndarray
    qp: np.ndarray
    time: float = 0.0


@dataclass(frozen=True)
class PathQuadrature:
    """Quadrature rule on the unit interval used for the path integrals."""

    n_points: int
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def gauss(cls, n_points: int = 3) -> "PathQuadrature":
        if n_points < 1:
            raise ValueError("quadrature needs at least one point")
        x, w = np.polynomial.legendre.leggauss(n_points)
        return cls(n_points=n_points, nodes=0.5 * (x + 1.0), weights=0.5 * w)


@dataclass(frozen=True)
class PicardConfig:
    tol: float = 1e-15            # absolute stop on |E_new - E_prev| between iterates
    max_iters: int = 50
    krylov_tol: float = 1e-13     # relative GMRES residual per linear solve
    krylov_max_iters: int = 500   # inner-iteration budget per linear solve

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")


@dataclass(frozen=True)
class PicardStats:
    iterations: int
    krylov_iters: int             # matrix applications summed over the step
    energy: float
    roe_residual: float
    roe_scale: float
    chain_residual: float
    chain_scale: float


# ---------------------------------------------------------------------------
# path integrals of the dual map and of the energy Hessian
# ---------------------------------------------------------------------------


def _block_fns(system, where):
    try:
        return {
            "cell": (system.cell_dual, system.cell_hessian),
            "vertex": (system.vertex_dual, system.vertex_hessian),
            "full": (system.dual, system.hessian),
        }[where]
    except KeyError:
        raise ValueError(f"where must be 'cell', 'vertex' or 'full', got {where!r}")


def _check_path_admissible(system, q_node, where):
    if system.kind is not SystemKind.ACOUSTICS:
        return
    if where == "vertex":
        rho = q_node[..., 0]
    elif where == "full":
        rho = q_node[..., 3]
    else:
        return
    if np.any(rho <= 0.0):
        raise SolverError("integration path leaves the admissible set (rho <= 0)")


def path_average_dual(system, q_from, q_to, quadrature, where="full"):
    """Quadrature approximation of the dual variable averaged along the
    straight path from q_from to q_to."""
    dual_fn, _ = _block_fns(system, where)
    dq = q_to - q_from
    out = None
    for s, w in zip(quadrature.nodes, quadrature.weights):
        q_node = q_from + s * dq
        _check_path_admissible(system, q_node, where)
        val = w * dual_fn(q_node)
        out = val if out is None else out + val
    return out


def path_hessian(system, q_from, q_to, quadrature, where="full"):
    """Path average of the energy Hessian; exact differences of the dual
    satisfy hess_avg (q_to - q_from) = p(q_to) - p(q_from) up to quadrature
    error (exactly for polynomial energies once the rule's degree covers
    them)."""
    _, hess_fn = _block_fns(system, where)
    dq = q_to - q_from
    out = None
    for s, w in zip(quadrature.nodes, quadrature.weights):
        q_node = q_from + s * dq
        _check_path_admissible(system, q_node, where)
        val = w * hess_fn(q_node)
        out = val if out is None else out + val
    return out


# ---------------------------------------------------------------------------
# spatial coupling and the per-iteration linear operator
# ---------------------------------------------------------------------------


def coupling(system, mesh, pc, pp):
    """Mimetic coupling K applied to dual blocks (pc at cells, pp at
    vertices); returns the contribution to (d qc/dt, d qp/dt) with the sign
    convention dq/dt + K(p) = 0. K is skew-adjoint in the mesh inner
    product, which is what makes the scheme conservative."""
    kind = system.kind
    if kind is SystemKind.ACOUSTICS:
        # cells carry velocity (dual u), the vertex scalar is density (dual s)
        return grad_cp(mesh, pp[..., 0]), div_pc(mesh, pc)[..., None]
    if kind is SystemKind.MAXWELL:
        # cells carry B (dual H), vertices carry D (dual E)
        return curl_cp(mesh, pp), -curl_pc(mesh, pc)
    # cells carry (B, psi) with duals (H, eta); vertices (D, phi) with (E, xi)
    h, eta = pc[..., :3], pc[..., 3]
    e, xi = pp[..., :3], pp[..., 3]
    gc = np.concatenate(
        [curl_cp(mesh, e) + grad_cp(mesh, xi), div_cp(mesh, e)[..., None]], axis=-1
    )
    gp = np.concatenate(
        [-curl_pc(mesh, h) + grad_pc(mesh, eta), div_pc(mesh, h)[..., None]], axis=-1
    )
    return gc, gp


def apply_system_operator(system, mesh, blocks_c, blocks_p, pc, pp, dt):
    """Apply the per-iteration operator B p + (dt/2) K p to dual blocks,
    where B is a pointwise block matrix field (the Picard driver passes the
    inverted path Hessians)."""
    gc, gp = coupling(system, mesh, pc, pp)
    rc = np.einsum("yxij,yxj->yxi", blocks_c, pc) + 0.5 * dt * gc
    rp = np.einsum("yxij,yxj->yxi", blocks_p, pp) + 0.5 * dt * gp
    return rc, rp


def staggered_total_energy(system, mesh, qc, qp) -> float:
    """Volume-weighted total energy; summation order is fixed so repeated
    evaluation is bit-identical."""
    return mesh.cell_area * float(np.sum(system.cell_energy(qc))) + mesh.cell_area * float(
        np.sum(system.vertex_energy(qp))
    )


def involution_report(system, mesh, fields: StaggeredFields) -> dict:
    """Max-norm of the discrete involutions relevant to the system.

    Maxwell: div B (at vertices) and div D (at cells) are preserved to
    round-off. Acoustics: curl v at vertices. The hyperbolized variant
    reports both divergences for monitoring; they are sourced by the
    cleaning fields and are not expected to vanish.
    """
    kind = system.kind
    if kind is SystemKind.ACOUSTICS:
        return {"curl_v_max": float(np.max(np.abs(curl_pc(mesh, fields.qc))))}
    report = {
        "div_B_max": float(np.max(np.abs(div_pc(mesh, fields.qc[..., :3])))),
        "div_D_max": float(np.max(np.abs(div_cp(mesh, fields.qp[..., :3])))),
    }
    return report


# ---------------------------------------------------------------------------
# Picard iteration
# ---------------------------------------------------------------------------


def _inverted_blocks(m_blocks, what):
    try:
        np.linalg.cholesky(m_blocks)
    except np.linalg.LinAlgError:
        raise SolverError(f"path Hessian at {what} is not positive definite")
    return np.linalg.inv(m_blocks)


def _refine_density(rho, s_target, gamma):
    """Guarded Newton solve of rho^gamma / gamma = s_target, vectorized.

    Started from the recovered density the iteration lands at round-off in
    one or two steps; the guard halves the step whenever it would cross zero.
    """
    if np.any(s_target <= 0.0):
        raise SolverError("entropy dual lost positivity during recovery")
    r = rho.copy()
    tol = 1e-15 * np.maximum(1.0, np.abs(s_target))
    for _ in range(12):
        f = r**gamma / gamma - s_target
        if np.all(np.abs(f) <= tol):
            break
        cand = r - f / r ** (gamma - 1.0)
        r = np.where(cand > 0.0, cand, 0.5 * r)
    return r


def picard_step(system, mesh, fields: StaggeredFields, dt: float,
                quadrature: PathQuadrature | None = None,
                config: PicardConfig | None = None):
    """Advance the staggered state by one step of size dt.

    Returns (new_fields, PicardStats). Raises SolverError on Picard or
    Krylov non-convergence, loss of convexity along a path, or loss of
    admissibility of a recovered acoustic state.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    quadrature = quadrature or PathQuadrature.gauss()
    config = config or PicardConfig()
    if config.max_iters < 1:
        raise ValueError("max_iters must be at least 1")

    qc_n, qp_n = fields.qc, fields.qp
    pc_n = system.cell_dual(qc_n)
    pp_n = system.vertex_dual(qp_n)
    shape_c, shape_p = pc_n.shape, pp_n.shape
    size_c = pc_n.size
    n_total = pc_n.size + pp_n.size

    qc_m, qp_m = qc_n, qp_n
    pc_m, pp_m = pc_n, pp_n
    energy_prev = staggered_total_energy(system, mesh, qc_n, qp_n)

    matvecs = [0]
    iterations = 0
    converged = False

    for _ in range(config.max_iters):
        pt_c = path_average_dual(system, qc_n, qc_m, quadrature, "cell")
        pt_p = path_average_dual(system, qp_n, qp_m, quadrature, "vertex")
        lc = _inverted_blocks(path_hessian(system, qc_n, qc_m, quadrature, "cell"), "cells")
        lp = _inverted_blocks(path_hessian(system, qp_n, qp_m, quadrature, "vertex"), "vertices")

        # right-hand side B p_n + (dt/2) K p_m - dt K pt_m of the frozen system
        gc_m, gp_m = coupling(system, mesh, pc_m, pp_m)
        gt_c, gt_p = coupling(system, mesh, pt_c, pt_p)
        bc = np.einsum("yxij,yxj->yxi", lc, pc_n) + 0.5 * dt * gc_m - dt * gt_c
        bp = np.einsum("yxij,yxj->yxi", lp, pp_n) + 0.5 * dt * gp_m - dt * gt_p

        ac, ap = apply_system_operator(system, mesh, lc, lp, pc_m, pp_m, dt)
        res = np.concatenate([(bc - ac).ravel(), (bp - ap).ravel()])

        if np.any(res != 0.0):
            def matvec(x, lc=lc, lp=lp):
                matvecs[0] += 1
                vc = x[:size_c].reshape(shape_c)
                vp = x[size_c:].reshape(shape_p)
                rc, rp = apply_system_operator(system, mesh, lc, lp, vc, vp, dt)
                return np.concatenate([rc.ravel(), rp.ravel()])

            op = LinearOperator((n_total, n_total), matvec=matvec, dtype=float)
            # solving for the increment keeps the Krylov tolerance relative to
            # the defect, not to the full solution; the absolute floor stops
            # the solve once the defect sits below round-off of the rhs
            floor = np.finfo(float).eps * float(
                np.linalg.norm(np.concatenate([bc.ravel(), bp.ravel()]))
            )
            delta, info = gmres(
                op,
                res,
                rtol=config.krylov_tol,
                atol=floor,
                restart=_GMRES_RESTART,
                maxiter=max(1, -(-config.krylov_max_iters // _GMRES_RESTART)),
            )
            if info != 0:
                raise SolverError(f"GMRES did not converge (info={info})")
            pc_m = pc_m + delta[:size_c].reshape(shape_c)
            pp_m = pp_m + delta[size_c:].reshape(shape_p)

        qc_m = qc_n + np.einsum("yxij,yxj->yxi", lc, pc_m - pc_n)
        qp_m = qp_n + np.einsum("yxij,yxj->yxi", lp, pp_m - pp_n)
        if system.kind is SystemKind.ACOUSTICS and np.any(qp_m[..., 0] <= 0.0):
            raise SolverError("recovered acoustic density lost positivity")

        iterations += 1
        energy = staggered_total_energy(system, mesh, qc_m, qp_m)
        delta_energy = abs(energy - energy_prev)
        if delta_energy < config.tol:
            converged = True
            break
        energy_prev = energy

    if not converged:
        raise SolverError(
            f"Picard iteration did not converge in {config.max_iters} iterations "
            f"(last energy delta {delta_energy:.3e})"
        )

    if system.kind is SystemKind.ACOUSTICS:
        rho = _refine_density(qp_m[..., 0], pp_m[..., 0], system.params.gamma)
        qp_m = rho[..., None]
        energy = staggered_total_energy(system, mesh, qc_m, qp_m)

    stats = _step_stats(system, mesh, qc_n, qp_n, qc_m, qp_m, quadrature,
                        iterations, matvecs[0], energy)
    return StaggeredFields(qc=qc_m, qp=qp_m, time=fields.time + dt), stats


def _step_stats(system, mesh, qc_n, qp_n, qc_m, qp_m, quadrature,
                iterations, matvecs, energy) -> PicardStats:
    # residuals of the two path-integral identities, recomputed on the final
    # path so they measure the converged step rather than an iterate
    roe = 0.0
    roe_scale = 0.0
    chain = 0.0
    chain_scale = 0.0
    for where, q_old, q_new, dual_fn, energy_fn in (
        ("cell", qc_n, qc_m, system.cell_dual, system.cell_energy),
        ("vertex", qp_n, qp_m, system.vertex_dual, system.vertex_energy),
    ):
        dq = q_new - q_old
        dp = dual_fn(q_new) - dual_fn(q_old)
        de = energy_fn(q_new) - energy_fn(q_old)
        m_avg = path_hessian(system, q_old, q_new, quadrature, where)
        p_avg = path_average_dual(system, q_old, q_new, quadrature, where)
        roe = max(roe, float(np.max(np.abs(np.einsum("yxij,yxj->yxi", m_avg, dq) - dp))))
        roe_scale = max(roe_scale, float(np.max(np.abs(dp))))
        chain = max(chain, float(np.max(np.abs(np.sum(p_avg * dq, axis=-1) - de))))
        chain_scale = max(chain_scale, float(np.max(np.abs(de))))
    return PicardStats(
        iterations=iterations,
        krylov_iters=matvecs,
        energy=energy,
        roe_residual=roe,
        roe_scale=roe_scale,
        chain_residual=chain,
        chain_scale=chain_scale,
    )
