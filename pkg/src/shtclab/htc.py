"""Collocated compatible finite-volume scheme with explicit Runge-Kutta.

The numerical flux is a central flux plus a scalar correction in the jump of
the dual variables, with the correction factor chosen so that the discrete
counterpart of the flux compatibility identity holds face by face. The
semi-discrete scheme is then exactly energy conservative; all energy drift
of a run is temporal and scales with the Runge-Kutta order.

States live at cell centers of the primal mesh as arrays (ny, nx, dim).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PositivityError(RuntimeError):
    """Acoustic density lost positivity during a Runge-Kutta stage."""


# ---------------------------------------------------------------------------
# Butcher tableaux
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ButcherTableau:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    order: int

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        c = np.asarray(self.c, dtype=float)
        s = len(b)
        if a.shape != (s, s) or c.shape != (s,):
            raise ValueError("inconsistent tableau shapes")
        if abs(np.sum(b) - 1.0) > 1e-12:
            raise ValueError("tableau weights must sum to 1")
        if np.any(np.abs(np.triu(a)) > 0.0):
            raise ValueError("tableau must be explicit (strictly lower triangular)")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def stages(self) -> int:
        return len(self.b)


RK1 = ButcherTableau(a=np.zeros((1, 1)), b=np.ones(1), c=np.zeros(1), order=1)

RK4 = ButcherTableau(
    a=np.array(
        [
            [0.0, 0.0, 0.0, 0.0],
            [0.5, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ]
    ),
    b=np.array([1.0, 2.0, 2.0, 1.0]) / 6.0,
    c=np.array([0.0, 0.5, 0.5, 1.0]),
    order=4,
)


def load_tableau(path) -> ButcherTableau:
    """Read a tableau from a plain-text file.

    Format: first line "s order", then s lines with the s entries of each
    a-row (zeros included), one line of b weights, one line of c nodes.
    """
    with open(path) as fh:
        tokens = [line.split() for line in fh if line.strip()]
    s, order = int(tokens[0][0]), int(tokens[0][1])
    if len(tokens) != s + 3:
        raise ValueError(f"expected {s + 3} nonempty lines, got {len(tokens)}")
    a = np.array([[float(v) for v in tokens[1 + i]] for i in range(s)])
    b = np.array([float(v) for v in tokens[1 + s]])
    c = np.array([float(v) for v in tokens[2 + s]])
    return ButcherTableau(a=a, b=b, c=c, order=order)


# ---------------------------------------------------------------------------
# compatible flux and right-hand side
# ---------------------------------------------------------------------------


def _parse_normal(normal):
    n = np.asarray(normal, dtype=float)
    if n.shape not in ((2,), (3,)):
        raise ValueError("normal must have 2 or 3 components")
    if n.shape == (2,):
        n = np.append(n, 0.0)
    axis = int(np.argmax(np.abs(n)))
    sign = float(np.sign(n[axis]))
    expected = np.zeros(3)
    expected[axis] = sign
    if axis > 1 or not np.array_equal(n, expected):
        raise ValueError("normal must be an axis-aligned in-plane unit vector")
    return axis, sign


def abgrall_flux(system, q_l, q_r, normal) -> np.ndarray:
    """Compatible two-point flux through a face with unit normal `normal`.

    The correction factor is dropped (set to zero) when the squared dual
    jump falls below 1e-12 * max(1, |p_l|^2, |p_r|^2); at that point the
    numerator vanishes at the same order, so the central flux is already
    compatible to round-off.
    """
    axis, sign = _parse_normal(normal)
    q_l = np.asarray(q_l, dtype=float)
    q_r = np.asarray(q_r, dtype=float)
    f_l = sign * system.flux(q_l, axis)
    f_r = sign * system.flux(q_r, axis)
    cap_l = sign * system.energy_flux(q_l, axis)
    cap_r = sign * system.energy_flux(q_r, axis)
    p_l = system.dual(q_l)
    p_r = system.dual(q_r)

    dp = p_r - p_l
    dp2 = np.sum(dp * dp, axis=-1)
    guard = 1e-12 * np.maximum(
        1.0, np.maximum(np.sum(p_l * p_l, axis=-1), np.sum(p_r * p_r, axis=-1))
    )
    num = (cap_r - cap_l) + 0.5 * np.sum((p_l + p_r) * (f_l - f_r), axis=-1)
    safe = dp2 >= guard
    alpha = np.where(safe, num, 0.0) / np.where(safe, dp2, 1.0)
    return 0.5 * (f_l + f_r) - alpha[..., None] * dp


def rhs(system, mesh, q: np.ndarray) -> np.ndarray:
    """Semi-discrete right-hand side dq/dt on the periodic mesh.

    Each of the two face families is evaluated once per face and the flux is
    applied to both adjacent cells with opposite signs, so the update is
    conservative regardless of rounding.
    """
    if q.shape != (mesh.ny, mesh.nx, system.dim):
        raise ValueError(
            f"state shape {(mesh.ny, mesh.nx, system.dim)} expected, got {q.shape}"
        )
    out = np.zeros_like(q)
    for axis, np_axis, h in ((0, 1, mesh.dx), (1, 0, mesh.dy)):
        normal = np.zeros(3)
        normal[axis] = 1.0
        q_r = np.roll(q, -1, axis=np_axis)
        face = abgrall_flux(system, q, q_r, normal)  # face between cell and +axis neighbor
        out -= (face - np.roll(face, 1, axis=np_axis)) / h
    return out


def rk_step(system, mesh, q, tableau: ButcherTableau, dt: float, time: float = 0.0):
    """One explicit Runge-Kutta step; returns the new cell-state array.

    Raises PositivityError if an acoustic stage state loses rho > 0.
    """

    def check(stage_q, stage):
        if system.kind.value == "acoustics" and np.any(stage_q[..., 3] <= 0.0):
            raise PositivityError(
                f"rho <= 0 in stage {stage} at t={time + dt:.6g} (dt={dt:.3g}); "
                f"min rho = {np.min(stage_q[..., 3]):.3e}"
            )

    k = []
    for i in range(tableau.stages):
        stage_q = q
        for j in range(i):
            if tableau.a[i, j] != 0.0:
                stage_q = stage_q + dt * tableau.a[i, j] * k[j]
        check(stage_q, i)
        k.append(rhs(system, mesh, stage_q))
    q_new = q
    for i in range(tableau.stages):
        if tableau.b[i] != 0.0:
            q_new = q_new + dt * tableau.b[i] * k[i]
    check(q_new, tableau.stages)
    return q_new


def cfl_dt(system, mesh, q, cfl: float) -> float:
    """Time step from the CFL condition dt = cfl / (smax (1/dx + 1/dy))."""
    if not 0.0 < cfl <= 1.0:
        raise ValueError(f"cfl must be in (0, 1], got {cfl}")
    smax = float(np.max(system.max_signal_speed(q)))
    if smax == 0.0:
        raise ValueError("zero signal speed, CFL step undefined")
    return cfl / (smax * (1.0 / mesh.dx + 1.0 / mesh.dy))
