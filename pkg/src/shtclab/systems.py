"""The three SHTC model systems: energies, dual variables, fluxes.

Each system is exposed through one model contract built by :func:`make_system`:
state vector q, total energy E(q), dual variables p = dE/dq, energy Hessian,
physical flux f_k(q), energy flux F_k(q), and the constant symmetric matrices
H_k of the symmetrized form in dual variables.

State orderings (fixed, they match the H_k row layout):

* acoustics   q = (v1, v2, v3, rho),          p = (u1, u2, u3, s)
* maxwell     q = (B1, B2, B3, D1, D2, D3),   p = (H1, H2, H3, E1, E2, E3)
* maxwell_glm q = (B, phi, D, psi),           p = (H, xi, E, eta)

Fields keep three components but only the in-plane flux directions are
exposed (2.5D convention: d/dx3 terms are dropped everywhere).

All operations are pure and vectorized over any number of leading axes, so a
whole mesh of states can be evaluated in one call.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class SystemKind(enum.Enum):
    ACOUSTICS = "acoustics"
    MAXWELL = "maxwell"
    MAXWELL_GLM = "maxwell_glm"


@dataclass(frozen=True)
class EnergyParams:
    """Free constants of the three energy potentials.

    Attributes:
        gamma: acoustic pressure-law exponent (> 0).
        maxwell_eps: coefficient of the cubic terms in the Maxwell energy.
        mu0: linear coefficient of the B and D blocks in the GLM energy (> 0).
    """

    gamma: float = 1.4
    maxwell_eps: float = 0.01
    mu0: float = 1.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.mu0 <= 0:
            raise ValueError(f"mu0 must be positive, got {self.mu0}")


def _cross_matrix(k: int) -> np.ndarray:
    """Matrix X with X v = e_k x v for the k-th unit vector."""
    e = np.zeros(3)
    e[k] = 1.0
    return np.array(
        [
            [0.0, -e[2], e[1]],
            [e[2], 0.0, -e[0]],
            [-e[1], e[0], 0.0],
        ]
    )


def _check_axis(axis: int) -> None:
    if axis not in (0, 1):
        raise ValueError(f"flux direction must be 0 or 1, got {axis}")


class SystemModel:
    """Common contract of the three systems.

    Subclasses provide the separable energy blocks (cell block / vertex
    block in the staggered-scheme sense); the full-state operations are
    assembled from them so there is a single source of truth for each
    energy. Cross-Hessian blocks between the two groups vanish for all
    shipped energies.
    """

    kind: SystemKind
    dim: int
    # index arrays mapping the block layouts into the full state vector
    cell_indices: np.ndarray
    vertex_indices: np.ndarray

    def __init__(self, params: EnergyParams):
        self.params = params

    # -- separable blocks, implemented per system --------------------------

    def cell_energy(self, qc: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def vertex_energy(self, qp: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def cell_dual(self, qc: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def vertex_dual(self, qp: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def cell_hessian(self, qc: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def vertex_hessian(self, qp: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def validate(self, q: np.ndarray) -> None:
        """Raise ValueError if q has the wrong width or leaves the admissible set."""
        if q.shape[-1] != self.dim:
            raise ValueError(
                f"{self.kind.value} state has dimension {self.dim}, "
                f"got array of width {q.shape[-1]}"
            )

    # -- full-state operations ---------------------------------------------

    @property
    def cell_dim(self) -> int:
        return len(self.cell_indices)

    @property
    def vertex_dim(self) -> int:
        return len(self.vertex_indices)

    def energy(self, q: np.ndarray) -> np.ndarray:
        """Total energy density E(q).

        Args:
            q: state array of shape (..., dim).

        Returns:
            Array of shape (...).
        """
        q = np.asarray(q, dtype=float)
        self.validate(q)
        return self.cell_energy(q[..., self.cell_indices]) + self.vertex_energy(
            q[..., self.vertex_indices]
        )

    def dual(self, q: np.ndarray) -> np.ndarray:
        """Dual variables p = dE/dq, same shape as q."""
        q = np.asarray(q, dtype=float)
        self.validate(q)
        p = np.zeros_like(q)
        p[..., self.cell_indices] = self.cell_dual(q[..., self.cell_indices])
        p[..., self.vertex_indices] = self.vertex_dual(q[..., self.vertex_indices])
        return p

    def hessian(self, q: np.ndarray) -> np.ndarray:
        """Energy Hessian E_qq(q), shape (..., dim, dim).

        The two variable groups never couple, so the result is block
        diagonal up to the index permutation between layouts.
        """
        q = np.asarray(q, dtype=float)
        self.validate(q)
        out = np.zeros(q.shape + (self.dim,))
        ci, vi = self.cell_indices, self.vertex_indices
        out[..., ci[:, None], ci[None, :]] = self.cell_hessian(q[..., ci])
        out[..., vi[:, None], vi[None, :]] = self.vertex_hessian(q[..., vi])
        return out

    def positive_definite(self, q: np.ndarray) -> np.ndarray:
        """Queryable convexity flag: True where E_qq(q) is positive definite."""
        return np.linalg.eigvalsh(self.hessian(q))[..., 0] > 0.0

    def flux(self, q: np.ndarray, axis: int) -> np.ndarray:
        """Physical flux f_axis(q) of the conservative form, axis in {0, 1}."""
        raise NotImplementedError

    def energy_flux(self, q: np.ndarray, axis: int) -> np.ndarray:
        """Energy flux F_axis(q), axis in {0, 1}."""
        raise NotImplementedError

    def max_signal_speed(self, q: np.ndarray) -> np.ndarray:
        """Signal-speed bound sqrt(spectral radius of E_qq).

        Valid because all H_k here have unit spectral norm. Raises on an
        indefinite Hessian.
        """
        eigs = np.linalg.eigvalsh(self.hessian(q))
        if np.any(eigs[..., 0] <= 0.0):
            raise ValueError(f"indefinite energy Hessian for {self.kind.value}")
        return np.sqrt(eigs[..., -1])

    def h_matrix(self, axis: int) -> np.ndarray:
        """Constant symmetric matrix H_axis of the symmetrized form, axis in {0, 1, 2}."""
        if axis not in (0, 1, 2):
            raise ValueError(f"H matrix direction must be 0, 1 or 2, got {axis}")
        return self._h_matrices[axis]


class AcousticsModel(SystemModel):
    """Nonlinear acoustics: E = |v|^2/2 + rho^(gamma+1)/(gamma (gamma+1))."""

    kind = SystemKind.ACOUSTICS
    dim = 4
    cell_indices = np.array([0, 1, 2])  # v
    vertex_indices = np.array([3])  # rho

    def __init__(self, params: EnergyParams):
        super().__init__(params)
        h = np.zeros((3, 4, 4))
        for k in range(3):
            h[k, k, 3] = h[k, 3, k] = 1.0
        self._h_matrices = h

    def validate(self, q: np.ndarray) -> None:
        super().validate(q)
        if np.any(q[..., 3] <= 0.0):
            raise ValueError("acoustic density must stay positive")

    def cell_energy(self, v):
        return 0.5 * np.sum(v * v, axis=-1)

    def vertex_energy(self, rho):
        g = self.params.gamma
        return rho[..., 0] ** (g + 1.0) / (g * (g + 1.0))

    def cell_dual(self, v):
        return v.copy()

    def vertex_dual(self, rho):
        g = self.params.gamma
        return rho**g / g

    def cell_hessian(self, v):
        out = np.zeros(v.shape + (3,))
        out[..., 0, 0] = out[..., 1, 1] = out[..., 2, 2] = 1.0
        return out

    def vertex_hessian(self, rho):
        return rho[..., None] ** (self.params.gamma - 1.0)

    def flux(self, q, axis):
        _check_axis(axis)
        q = np.asarray(q, dtype=float)
        self.validate(q)
        s = self.vertex_dual(q[..., 3:4])[..., 0]
        f = np.zeros_like(q)
        f[..., axis] = s
        f[..., 3] = q[..., axis]  # u = v
        return f

    def energy_flux(self, q, axis):
        _check_axis(axis)
        q = np.asarray(q, dtype=float)
        self.validate(q)
        s = self.vertex_dual(q[..., 3:4])[..., 0]
        return q[..., axis] * s


class MaxwellModel(SystemModel):
    """Nonlinear Maxwell: E = B^2 + D^2 + eps (B1 B^2 + D1 D^2).

    Note the quadratic part carries no 1/2, so E_qq = 2 I at eps = 0; the
    energy is only locally convex for eps > 0.
    """

    kind = SystemKind.MAXWELL
    dim = 6
    cell_indices = np.array([0, 1, 2])  # B
    vertex_indices = np.array([3, 4, 5])  # D

    def __init__(self, params: EnergyParams):
        super().__init__(params)
        h = np.zeros((3, 6, 6))
        for k in range(3):
            x = _cross_matrix(k)
            h[k, :3, 3:] = x
            h[k, 3:, :3] = x.T
        self._h_matrices = h

    def _block_energy(self, w):
        eps = self.params.maxwell_eps
        wsq = np.sum(w * w, axis=-1)
        return wsq + eps * w[..., 0] * wsq

    def _block_dual(self, w):
        eps = self.params.maxwell_eps
        wsq = np.sum(w * w, axis=-1, keepdims=True)
        out = 2.0 * w + 2.0 * eps * w[..., 0:1] * w
        out[..., 0:1] += eps * wsq
        return out

    def _block_hessian(self, w):
        eps = self.params.maxwell_eps
        out = np.zeros(w.shape + (3,))
        idx = np.arange(3)
        out[..., idx, idx] = 2.0 + 2.0 * eps * w[..., 0:1]
        out[..., 0, :] += 2.0 * eps * w
        out[..., :, 0] += 2.0 * eps * w
        return out

    cell_energy = _block_energy
    vertex_energy = _block_energy
    cell_dual = _block_dual
    vertex_dual = _block_dual
    cell_hessian = _block_hessian
    vertex_hessian = _block_hessian

    def flux(self, q, axis):
        _check_axis(axis)
        q = np.asarray(q, dtype=float)
        self.validate(q)
        h = self.cell_dual(q[..., :3])
        e = self.vertex_dual(q[..., 3:])
        ek = np.zeros(3)
        ek[axis] = 1.0
        return np.concatenate([np.cross(ek, e), -np.cross(ek, h)], axis=-1)

    def energy_flux(self, q, axis):
        _check_axis(axis)
        q = np.asarray(q, dtype=float)
        self.validate(q)
        h = self.cell_dual(q[..., :3])
        e = self.vertex_dual(q[..., 3:])
        return np.cross(e, h)[..., axis]


class MaxwellGLMModel(SystemModel):
    """Maxwell with GLM cleaning fields phi, psi and quartic energy terms.

    E = mu0 (B^2 + D^2)/2 + (phi^2 + psi^2)/2
      + (B1^4 + B3^4 + D1^4 + D3^4)/8 + (B1^2 B3^2 + D1^2 D3^2)/4

    so H = mu0 B + ((B1^2 + B3^2)/2) diag(1,0,1) B and analogously E(D),
    while xi = phi and eta = psi. In the staggered scheme the cell group is
    (B, psi) and the vertex group (D, phi); the energy separates accordingly.
    """

    kind = SystemKind.MAXWELL_GLM
    dim = 8
    cell_indices = np.array([0, 1, 2, 7])  # (B, psi)
    vertex_indices = np.array([4, 5, 6, 3])  # (D, phi)

    def __init__(self, params: EnergyParams):
        super().__init__(params)
        h = np.zeros((3, 8, 8))
        for k in range(3):
            e = np.zeros(3)
            e[k] = 1.0
            x = _cross_matrix(k)
            h[k, 0:3, 4:7] = x
            h[k, 0:3, 3] = e
            h[k, 3, 0:3] = e
            h[k, 4:7, 0:3] = x.T
            h[k, 4:7, 7] = e
            h[k, 7, 4:7] = e
        self._h_matrices = h

    def _block_energy(self, w):
        # w = (vector field, cleanup scalar)
        mu0 = self.params.mu0
        f, z = w[..., :3], w[..., 3]
        f1, f3 = w[..., 0], w[..., 2]
        return (
            0.5 * mu0 * np.sum(f * f, axis=-1)
            + 0.5 * z * z
            + 0.125 * (f1**4 + f3**4)
            + 0.25 * f1**2 * f3**2
        )

    def _block_dual(self, w):
        mu0 = self.params.mu0
        out = np.empty_like(w)
        f1, f3 = w[..., 0], w[..., 2]
        fac = 0.5 * (f1**2 + f3**2)
        out[..., 0] = mu0 * w[..., 0] + fac * f1
        out[..., 1] = mu0 * w[..., 1]
        out[..., 2] = mu0 * w[..., 2] + fac * f3
        out[..., 3] = w[..., 3]
        return out

    def _block_hessian(self, w):
        mu0 = self.params.mu0
        out = np.zeros(w.shape + (4,))
        f1, f3 = w[..., 0], w[..., 2]
        out[..., 0, 0] = mu0 + 1.5 * f1**2 + 0.5 * f3**2
        out[..., 1, 1] = mu0
        out[..., 2, 2] = mu0 + 1.5 * f3**2 + 0.5 * f1**2
        out[..., 0, 2] = out[..., 2, 0] = f1 * f3
        out[..., 3, 3] = 1.0
        return out

    cell_energy = _block_energy
    vertex_energy = _block_energy
    cell_dual = _block_dual
    vertex_dual = _block_dual
    cell_hessian = _block_hessian
    vertex_hessian = _block_hessian

    def flux(self, q, axis):
        _check_axis(axis)
        q = np.asarray(q, dtype=float)
        self.validate(q)
        hx = self.cell_dual(q[..., self.cell_indices])
        ex = self.vertex_dual(q[..., self.vertex_indices])
        h, eta = hx[..., :3], hx[..., 3:]
        e, xi = ex[..., :3], ex[..., 3:]
        ek = np.zeros(3)
        ek[axis] = 1.0
        return np.concatenate(
            [
                np.cross(ek, e) + xi * ek,
                h[..., axis : axis + 1],
                -np.cross(ek, h) + eta * ek,
                e[..., axis : axis + 1],
            ],
            axis=-1,
        )

    def energy_flux(self, q, axis):
        _check_axis(axis)
        q = np.asarray(q, dtype=float)
        self.validate(q)
        hx = self.cell_dual(q[..., self.cell_indices])
        ex = self.vertex_dual(q[..., self.vertex_indices])
        h, eta = hx[..., :3], hx[..., 3]
        e, xi = ex[..., :3], ex[..., 3]
        return np.cross(e, h)[..., axis] + eta * e[..., axis] + xi * h[..., axis]


_MODELS = {
    SystemKind.ACOUSTICS: AcousticsModel,
    SystemKind.MAXWELL: MaxwellModel,
    SystemKind.MAXWELL_GLM: MaxwellGLMModel,
}


def make_system(kind, params: EnergyParams | None = None) -> SystemModel:
    """Build the model for a system kind.

    Args:
        kind: a :class:`SystemKind` or its string value.
        params: energy constants; defaults are the reference values.

    Returns:
        A :class:`SystemModel` instance.
    """
    if isinstance(kind, str):
        kind = SystemKind(kind)
    if params is None:
        params = EnergyParams()
    return _MODELS[kind](params)
