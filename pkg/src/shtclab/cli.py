"""Experiment driver: configs, presets, time loop, series/snapshot output.

Run configurations are flat JSON objects. A configuration names one of the
built-in initial-data presets and may override its grid, domain, time
stepping, solver knobs and output options; unknown keys are rejected rather
than ignored. The same validation path backs the `run` and `preset`
commands, so a preset invocation is exactly a shorthand for a config file.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics, htc, simm
from .grid import (StaggeredMesh, curl_cp, curl_pc, div_cp, div_pc, grad_cp,
                   grad_pc, identity_suite)
from .systems import SystemKind, make_system

_PRESETS = {
    "maxwell_gaussian": dict(
        system="maxwell",
        domain=(-1.0, 1.0, -1.0, 1.0),
        nx=100, ny=100, dt=1e-3, t_end=1.0,
        sigma=0.1,
    ),
    "acoustic_gaussian": dict(
        system="acoustics",
        domain=(-0.5, 0.5, -0.5, 0.5),
        nx=64, ny=64, dt=1e-3, t_end=1.0,
        sigma=0.05, background=4.0,
    ),
    "glm_planar": dict(
        system="maxwell_glm",
        domain=(0.0, 1.0, 0.0, 1.0),
        nx=64, ny=64, dt=5e-4, t_end=0.5,
    ),
}

_SCHEMES = ("simm", "htc")

# keys accepted in a config document; value = (type coercion, which scheme
# may set it explicitly, None = both)
_CONFIG_KEYS = {
    "preset": (str, None),
    "system": (str, None),
    "scheme": (str, None),
    "nx": (int, None),
    "ny": (int, None),
    "x0": (float, None),
    "x1": (float, None),
    "y0": (float, None),
    "y1": (float, None),
    "t_end": (float, None),
    "dt": (float, None),
    "cfl": (float, "htc"),
    "rk_order": (int, "htc"),
    "tableau": (str, "htc"),
    "gauss_points": (int, "simm"),
    "picard_tol": (float, "simm"),
    "picard_max_iters": (int, "simm"),
    "krylov_tol": (float, "simm"),
    "krylov_max_iters": (int, "simm"),
    "sigma": (float, None),
    "background": (float, None),
    "out_dir": (str, None),
    "stride": (int, None),
    "snapshot_times": (None, None),
}


@dataclass(frozen=True)
class RunConfig:
    preset: str
    system: str
    scheme: str
    nx: int
    ny: int
    x0: float
    x1: float
    y0: float
    y1: float
    t_end: float
    dt: float | None
    cfl: float | None
    rk_order: int
    tableau: str | None
    gauss_points: int
    picard_tol: float
    picard_max_iters: int
    krylov_tol: float
    krylov_max_iters: int
    sigma: float | None
    background: float | None
    out_dir: str
    stride: int
    snapshot_times: tuple[float, ...]


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return build_config(data)


def build_config(data: dict) -> RunConfig:
    unknown = sorted(set(data) - set(_CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    missing = [k for k in ("preset", "scheme") if k not in data]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")

    def take(key, default=None):
        if key not in data:
            return default
        caster, _ = _CONFIG_KEYS[key]
        value = data[key]
        if caster is float and isinstance(value, bool):
            raise ConfigError(f"key {key!r} must be a number")
        try:
            return caster(value) if caster else value
        except (TypeError, ValueError):
            raise ConfigError(f"key {key!r} has invalid value {value!r}")

    preset = take("preset")
    if preset not in _PRESETS:
        raise ConfigError(f"unknown preset {preset!r} (choose from {', '.join(_PRESETS)})")
    defaults = _PRESETS[preset]

    scheme = take("scheme")
    if scheme not in _SCHEMES:
        raise ConfigError(f"scheme must be one of {_SCHEMES}, got {scheme!r}")
    for key, (_, only) in _CONFIG_KEYS.items():
        if only and key in data and scheme != only:
            raise ConfigError(f"key {key!r} applies to scheme {only!r} only")

    system = take("system", defaults["system"])
    if system != defaults["system"]:
        raise ConfigError(f"preset {preset!r} is an initial datum of system {defaults['system']!r}")

    nx = take("nx", defaults["nx"])
    ny = take("ny", defaults["ny"])
    if nx < 1 or ny < 1:
        raise ConfigError("nx and ny must be positive")
    dom = defaults["domain"]
    x0, x1 = take("x0", dom[0]), take("x1", dom[1])
    y0, y1 = take("y0", dom[2]), take("y1", dom[3])
    if not (x1 > x0 and y1 > y0):
        raise ConfigError("domain extents are degenerate")

    t_end = take("t_end", defaults["t_end"])
    if t_end < 0.0:
        raise ConfigError("t_end must be nonnegative")

    dt = take("dt")
    cfl = take("cfl")
    if dt is not None and cfl is not None:
        raise ConfigError("set exactly one of dt and cfl")
    if scheme == "simm" and dt is None:
        dt = defaults["dt"]
    if dt is None and cfl is None:
        raise ConfigError("scheme htc needs dt or cfl")
    if dt is not None and dt <= 0.0:
        raise ConfigError("dt must be positive")
    if cfl is not None and not 0.0 < cfl <= 1.0:
        raise ConfigError("cfl must be in (0, 1]")

    rk_order = take("rk_order", 4)
    tableau = take("tableau")
    if tableau is None and rk_order not in (1, 4):
        raise ConfigError("built-in tableaux have order 1 or 4; pass 'tableau' for others")

    sigma = take("sigma", defaults.get("sigma"))
    background = take("background", defaults.get("background"))
    if "sigma" in data and "sigma" not in defaults:
        raise ConfigError(f"preset {preset!r} takes no sigma")
    if "background" in data and "background" not in defaults:
        raise ConfigError(f"preset {preset!r} takes no background")
    if sigma is not None and sigma <= 0.0:
        raise ConfigError("sigma must be positive")

    stride = take("stride", 1 if scheme == "simm" else 10)
    if stride < 1:
        raise ConfigError("stride must be at least 1")

    raw_times = data.get("snapshot_times", [0.0, t_end])
    if not isinstance(raw_times, (list, tuple)):
        raise ConfigError("snapshot_times must be a list of times")
    times = []
    for tau in raw_times:
        if isinstance(tau, bool) or not isinstance(tau, (int, float)):
            raise ConfigError("snapshot_times must be a list of times")
        if not 0.0 <= float(tau) <= t_end:
            raise ConfigError(f"snapshot time {tau} outside [0, {t_end}]")
        times.append(float(tau))
    snapshot_times = tuple(sorted(dict.fromkeys(times)))

    return RunConfig(
        preset=preset,
        system=system,
        scheme=scheme,
        nx=nx,
        ny=ny,
        x0=x0,
        x1=x1,
        y0=y0,
        y1=y1,
        t_end=t_end,
        dt=dt,
        cfl=cfl,
        rk_order=rk_order,
        tableau=tableau,
        gauss_points=take("gauss_points", 3),
        picard_tol=take("picard_tol", 1e-15),
        picard_max_iters=take("picard_max_iters", 50),
        krylov_tol=take("krylov_tol", 1e-13),
        krylov_max_iters=take("krylov_max_iters", 500),
        sigma=sigma,
        background=background,
        out_dir=take("out_dir", "."),
        stride=stride,
        snapshot_times=snapshot_times,
    )


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------


def _check_profile_periodic(config: RunConfig) -> None:
    if config.preset == "glm_planar":
        for lo, hi, label in ((config.x0, config.x1, "x"), (config.y0, config.y1, "y")):
            extent = hi - lo
            if abs(extent - round(extent)) > 1e-12:
                raise ConfigError(
                    f"sin(2 pi (x+y)) is not periodic on a {label}-extent of {extent}"
                )
        return
    # Gaussian presets: require the bump to have decayed at the boundary so
    # the periodic wrap is below round-off of the initial datum
    inside = config.x0 < 0.0 < config.x1 and config.y0 < 0.0 < config.y1
    d = min(config.x1, -config.x0, config.y1, -config.y0) if inside else 0.0
    if np.exp(-0.5 * d * d / config.sigma**2) > 1e-12:
        raise ConfigError(
            f"Gaussian with sigma={config.sigma} does not decay on "
            f"[{config.x0},{config.x1}]x[{config.y0},{config.y1}]; "
            "enlarge the domain or shrink sigma"
        )


def _profile(config: RunConfig, x, y):
    if config.preset == "glm_planar":
        return np.sin(2.0 * np.pi * (x + y))
    return np.exp(-0.5 * (x * x + y * y) / config.sigma**2)


def initialize(config: RunConfig, mesh: StaggeredMesh):
    """Initial state: StaggeredFields for simm, one cell-centered array for
    htc. Vertex quantities are sampled at vertices, cell quantities at cell
    centers; the collocated scheme samples everything at cell centers."""
    _check_profile_periodic(config)
    system = make_system(config.system)
    xc, yc = mesh.cell_centers()
    xp, yp = mesh.vertex_coords()
    gc = _profile(config, xc, yc)
    gp = _profile(config, xp, yp)

    kind = system.kind
    if kind is SystemKind.ACOUSTICS:
        # velocity zero, density = Gaussian bump on a constant background
        qc = np.zeros((mesh.ny, mesh.nx, 3))
        qp = (config.background + gp)[..., None]
        full = np.zeros((mesh.ny, mesh.nx, 4))
        full[..., 3] = config.background + gc
    elif kind is SystemKind.MAXWELL:
        amp = 1e-2
        qc = np.zeros((mesh.ny, mesh.nx, 3))
        qp = np.zeros((mesh.ny, mesh.nx, 3))
        qc[..., 2] = amp * gc  # B at cells
        qp[..., 2] = amp * gp  # D at vertices
        full = np.zeros((mesh.ny, mesh.nx, 6))
        full[..., 2] = amp * gc
        full[..., 5] = amp * gc
    else:
        b0 = np.array([0.125, 0.0, 0.5])
        d0 = np.array([0.25, 0.5, 0.0])
        phi_amp, psi_amp = 0.125, 0.25
        qc = np.concatenate([gc[..., None] * b0, (psi_amp * gc)[..., None]], axis=-1)
        qp = np.concatenate([gp[..., None] * d0, (phi_amp * gp)[..., None]], axis=-1)
        full = np.concatenate(
            [
                gc[..., None] * b0,
                (phi_amp * gc)[..., None],
                gc[..., None] * d0,
                (psi_amp * gc)[..., None],
            ],
            axis=-1,
        )
    if config.scheme == "simm":
        return simm.StaggeredFields(qc=qc, qp=qp, time=0.0)
    return full


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

_BLOCK_NAMES = {
    SystemKind.ACOUSTICS: (("v1", "v2", "v3"), ("rho",)),
    SystemKind.MAXWELL: (("B1", "B2", "B3"), ("D1", "D2", "D3")),
    SystemKind.MAXWELL_GLM: (("B1", "B2", "B3", "psi"), ("D1", "D2", "D3", "phi")),
}


def _full_names(system):
    cell_names, vertex_names = _BLOCK_NAMES[system.kind]
    names = [""] * system.dim
    for name, idx in zip(cell_names, system.cell_indices):
        names[int(idx)] = name
    for name, idx in zip(vertex_names, system.vertex_indices):
        names[int(idx)] = name
    return names


def write_snapshot(path, system, mesh, state, time) -> None:
    """Plain-text structured VTK file with every state component at its
    native location; vertex fields repeat the periodic first row/column so
    the lattice covers the full domain."""
    lines = [
        "# vtk DataFile Version 3.0",
        f"{system.kind.value} state at t={time:g}",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {mesh.nx + 1} {mesh.ny + 1} 1",
        f"ORIGIN {mesh.x0:.17g} {mesh.y0:.17g} 0",
        f"SPACING {mesh.dx:.17g} {mesh.dy:.17g} 1",
    ]

    def scalars(name, values):
        lines.append(f"SCALARS {name} double")
        lines.append("LOOKUP_TABLE default")
        lines.extend(f"{v:.17g}" for v in values)

    cell_names, vertex_names = _BLOCK_NAMES[system.kind]
    if isinstance(state, simm.StaggeredFields):
        lines.append(f"POINT_DATA {(mesh.nx + 1) * (mesh.ny + 1)}")
        for k, name in enumerate(vertex_names):
            f = state.qp[..., k]
            f = np.concatenate([f, f[:, :1]], axis=1)
            f = np.concatenate([f, f[:1, :]], axis=0)
            scalars(name, f.ravel())
        lines.append(f"CELL_DATA {mesh.nx * mesh.ny}")
        for k, name in enumerate(cell_names):
            scalars(name, state.qc[..., k].ravel())
    else:
        lines.append(f"CELL_DATA {mesh.nx * mesh.ny}")
        for idx, name in enumerate(_full_names(system)):
            scalars(name, state[..., idx].ravel())
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# time loop
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    config: RunConfig
    records: list
    steps: int
    picard_total: int
    krylov_total: int
    max_picard_iters: int
    max_roe_residual: float
    max_roe_scale: float
    max_chain_residual: float
    max_chain_scale: float
    series_path: str
    snapshot_paths: list
    final_state: object


def _finished(t: float, t_end: float) -> bool:
    return t_end - t <= 1e-12 * max(1.0, t_end)


def run_experiment(config: RunConfig) -> RunResult:
    """Execute the time loop, writing series.csv and requested snapshots."""
    system = make_system(config.system)
    mesh = StaggeredMesh(nx=config.nx, ny=config.ny, x0=config.x0, x1=config.x1,
                         y0=config.y0, y1=config.y1)
    state = initialize(config, mesh)
    staggered = config.scheme == "simm"
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if staggered:
        quad = simm.PathQuadrature.gauss(config.gauss_points)
        picard_cfg = simm.PicardConfig(
            tol=config.picard_tol,
            max_iters=config.picard_max_iters,
            krylov_tol=config.krylov_tol,
            krylov_max_iters=config.krylov_max_iters,
        )
    else:
        tableau = htc.load_tableau(config.tableau) if config.tableau else \
            {1: htc.RK1, 4: htc.RK4}[config.rk_order]

    energy0 = diagnostics.total_energy(system, mesh, state)
    records = [
        diagnostics.make_record(
            0.0, energy0, energy0,
            involutions=simm.involution_report(system, mesh, state) if staggered else None,
        )
    ]

    pending = list(config.snapshot_times)
    snapshots = []

    def flush_snapshots(t_now):
        while pending and t_now >= pending[0] - 1e-12 * max(1.0, pending[0]):
            tau = pending.pop(0)
            path = out_dir / f"snapshot_{tau:g}.vtk"
            write_snapshot(path, system, mesh, state, tau)
            snapshots.append(str(path))

    flush_snapshots(0.0)

    t = 0.0
    steps = 0
    picard_total = krylov_total = max_picard = 0
    max_roe = max_roe_scale = max_chain = max_chain_scale = 0.0

    while not _finished(t, config.t_end):
        remaining = config.t_end - t
        try:
            if staggered:
                dt_n = min(config.dt, remaining)
                state, stats = simm.picard_step(system, mesh, state, dt_n, quad, picard_cfg)
                t = state.time
                picard_total += stats.iterations
                krylov_total += stats.krylov_iters
                max_picard = max(max_picard, stats.iterations)
                max_roe = max(max_roe, stats.roe_residual)
                max_roe_scale = max(max_roe_scale, stats.roe_scale)
                max_chain = max(max_chain, stats.chain_residual)
                max_chain_scale = max(max_chain_scale, stats.chain_scale)
            else:
                dt_n = config.dt if config.dt is not None else htc.cfl_dt(
                    system, mesh, state, config.cfl)
                dt_n = min(dt_n, remaining)
                state = htc.rk_step(system, mesh, state, tableau, dt_n, time=t)
                t += dt_n
                stats = None
        except (simm.SolverError, htc.PositivityError) as exc:
            raise type(exc)(f"step {steps + 1} at t={t:.9g}: {exc}") from exc
        steps += 1
        if _finished(t, config.t_end):
            t = config.t_end
        if steps % config.stride == 0 or t == config.t_end:
            energy = diagnostics.total_energy(system, mesh, state)
            records.append(
                diagnostics.make_record(
                    t, energy, energy0,
                    involutions=simm.involution_report(system, mesh, state)
                    if staggered else None,
                    picard_iters=stats.iterations if staggered else None,
                    krylov_iters=stats.krylov_iters if staggered else None,
                )
            )
        flush_snapshots(t)

    series_path = out_dir / "series.csv"
    diagnostics.write_series(series_path, records)
    return RunResult(
        config=config,
        records=records,
        steps=steps,
        picard_total=picard_total,
        krylov_total=krylov_total,
        max_picard_iters=max_picard,
        max_roe_residual=max_roe,
        max_roe_scale=max_roe_scale,
        max_chain_residual=max_chain,
        max_chain_scale=max_chain_scale,
        series_path=str(series_path),
        snapshot_paths=snapshots,
        final_state=state,
    )


def _series_max(records, name):
    values = [getattr(r, name) for r in records if getattr(r, name) is not None]
    return max(values) if values else None


def run(config: RunConfig) -> int:
    """Run one experiment; prints a one-line summary, returns exit status."""
    try:
        result = run_experiment(config)
    except (simm.SolverError, htc.PositivityError, ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    parts = [
        f"steps={result.steps}",
        f"final_rel_energy_error={result.records[-1].rel_energy_error:.3e}",
    ]
    for column, label in (
        ("div_B_max", "max_div_B"),
        ("div_D_max", "max_div_D"),
        ("curl_v_max", "max_curl_v"),
    ):
        value = _series_max(result.records, column)
        if value is not None:
            parts.append(f"{label}={value:.3e}")
    if result.config.scheme == "simm":
        parts.append(f"picard_total={result.picard_total}")
        parts.append(f"krylov_total={result.krylov_total}")
    print("run complete: " + " ".join(parts))
    return 0


# ---------------------------------------------------------------------------
# verify: fast self-checks of the discrete structure
# ---------------------------------------------------------------------------


def _verify_checks():
    rng = np.random.default_rng(7)

    # operator identities on three mesh shapes
    worst = 0.0
    for nx, ny in ((8, 8), (17, 23), (64, 64)):
        mesh = StaggeredMesh(nx=nx, ny=ny)
        res = identity_suite(mesh, n_fields=20, seed=3)
        scale = 1.0 / min(mesh.dx, mesh.dy)
        worst = max(worst, max(res.values()) / scale)
    yield "mimetic identities (curl grad, div curl)", worst <= 1e-13, f"max {worst:.2e} of 1e-13"

    # summation by parts: grad/div anti-adjoint, curl/curl adjoint
    mesh = StaggeredMesh(nx=24, ny=17)
    a_c = rng.standard_normal((17, 24, 3))
    a_p = rng.standard_normal((17, 24, 3))
    phi_c = rng.standard_normal((17, 24))
    phi_p = rng.standard_normal((17, 24))
    pairs = [
        np.sum(a_c * grad_cp(mesh, phi_p)) + np.sum(phi_p * div_pc(mesh, a_c)),
        np.sum(a_p * grad_pc(mesh, phi_c)) + np.sum(phi_c * div_cp(mesh, a_p)),
        np.sum(a_c * curl_cp(mesh, a_p)) - np.sum(a_p * curl_pc(mesh, a_c)),
    ]
    scale = np.sum(np.abs(a_c)) / mesh.dx
    worst = max(abs(v) for v in pairs) / scale
    yield "summation by parts", worst <= 1e-13, f"max {worst:.2e} of 1e-13"

    # two-point flux compatibility across the jump
    worst = 0.0
    for name in ("acoustics", "maxwell", "maxwell_glm"):
        system = make_system(name)
        q_l = rng.uniform(-0.5, 0.5, (200, system.dim))
        q_r = rng.uniform(-0.5, 0.5, (200, system.dim))
        if name == "acoustics":
            q_l[:, 3] = rng.uniform(0.5, 2.0, 200)
            q_r[:, 3] = rng.uniform(0.5, 2.0, 200)
        for axis in (0, 1):
            normal = np.zeros(3)
            normal[axis] = 1.0
            fnum = htc.abgrall_flux(system, q_l, q_r, normal)
            p_l, p_r = system.dual(q_l), system.dual(q_r)
            f_l, f_r = system.flux(q_l, axis), system.flux(q_r, axis)
            cap = system.energy_flux(q_r, axis) - system.energy_flux(q_l, axis)
            res = np.sum((p_r - p_l) * fnum, axis=-1) - (
                np.sum(p_r * f_r, axis=-1) - np.sum(p_l * f_l, axis=-1)
            ) + cap
            scale = np.maximum(1.0, np.max(np.abs(p_r * f_r)))
            worst = max(worst, float(np.max(np.abs(res)) / scale))
    yield "flux compatibility at jumps", worst <= 1e-12, f"max {worst:.2e} of 1e-12"

    # quasilinear form: flux and energy flux through the constant symmetric matrices
    worst = 0.0
    for name in ("acoustics", "maxwell", "maxwell_glm"):
        system = make_system(name)
        q = rng.uniform(-0.5, 0.5, (100, system.dim))
        if name == "acoustics":
            q[:, 3] = rng.uniform(0.5, 2.0, 100)
        p = system.dual(q)
        for axis in (0, 1):
            h = system.h_matrix(axis)
            df = np.max(np.abs(system.flux(q, axis) - p @ h.T))
            dcap = np.max(np.abs(system.energy_flux(q, axis) - 0.5 * np.sum(p * (p @ h.T), axis=-1)))
            scale = max(1.0, float(np.max(np.abs(p))))
            worst = max(worst, float(max(df, dcap)) / scale)
    yield "quasilinear flux form", worst <= 1e-14, f"max {worst:.2e} of 1e-14"

    # dual variables against finite differences of the energy
    worst = 0.0
    step = 1e-5
    for name in ("acoustics", "maxwell", "maxwell_glm"):
        system = make_system(name)
        q = rng.uniform(-0.5, 0.5, (20, system.dim))
        if name == "acoustics":
            q[:, 3] = rng.uniform(0.5, 2.0, 20)
        p = system.dual(q)
        for i in range(system.dim):
            dq = np.zeros(system.dim)
            dq[i] = step
            fd = (system.energy(q + dq) - system.energy(q - dq)) / (2 * step)
            worst = max(worst, float(np.max(np.abs(fd - p[:, i]))))
    yield "dual consistency (finite differences)", worst <= 1e-6, f"max {worst:.2e} of 1e-6"

    # path-integral identities of the implicit scheme
    worst_poly = 0.0
    worst_ac = 0.0
    for name, quad, is_poly in (
        ("maxwell", simm.PathQuadrature.gauss(3), True),
        ("maxwell_glm", simm.PathQuadrature.gauss(3), True),
        ("acoustics", simm.PathQuadrature.gauss(5), False),
    ):
        system = make_system(name)
        shape = (4, 5)
        q_a = rng.uniform(-0.5, 0.5, shape + (system.dim,))
        q_b = rng.uniform(-0.5, 0.5, shape + (system.dim,))
        if name == "acoustics":
            q_a[..., 3] = rng.uniform(0.5, 2.0, shape)
            q_b[..., 3] = rng.uniform(0.5, 2.0, shape)
        m = simm.path_hessian(system, q_a, q_b, quad, "full")
        pt = simm.path_average_dual(system, q_a, q_b, quad, "full")
        dq = q_b - q_a
        dp = system.dual(q_b) - system.dual(q_a)
        de = system.energy(q_b) - system.energy(q_a)
        roe = np.max(np.abs(np.einsum("yxij,yxj->yxi", m, dq) - dp)) / max(1.0, np.max(np.abs(dp)))
        chain = np.max(np.abs(np.sum(pt * dq, axis=-1) - de)) / max(1.0, np.max(np.abs(de)))
        if is_poly:
            worst_poly = max(worst_poly, float(max(roe, chain)))
        else:
            worst_ac = max(worst_ac, float(max(roe, chain)))
    ok = worst_poly <= 1e-14 and worst_ac <= 1e-6
    yield "path integral identities", ok, (
        f"polynomial {worst_poly:.2e} of 1e-14, acoustic {worst_ac:.2e} of 1e-6"
    )

    # short conservation run
    config = build_config({
        "preset": "maxwell_gaussian",
        "scheme": "simm",
        "nx": 16,
        "ny": 16,
        "t_end": 0.02,
        "snapshot_times": [],
    })
    system = make_system(config.system)
    mesh = StaggeredMesh(nx=16, ny=16, x0=-1.0, x1=1.0, y0=-1.0, y1=1.0)
    state = initialize(config, mesh)
    energy0 = diagnostics.total_energy(system, mesh, state)
    worst = 0.0
    worst_div = 0.0
    for _ in range(20):
        state, _stats = simm.picard_step(system, mesh, state, 1e-3)
        energy = diagnostics.total_energy(system, mesh, state)
        worst = max(worst, abs(energy / energy0 - 1.0))
        report = simm.involution_report(system, mesh, state)
        div_scale = max(np.max(np.abs(state.qc)), np.max(np.abs(state.qp))) / mesh.dx
        worst_div = max(worst_div, max(report.values()) / div_scale)
    ok = worst <= 5e-12 and worst_div <= 1e-12
    yield "energy and involution conservation (short run)", ok, (
        f"energy {worst:.2e} of 5e-12, involutions {worst_div:.2e} of 1e-12"
    )


def verify() -> int:
    status = 0
    for name, ok, detail in _verify_checks():
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        if not ok:
            status = 1
    return status


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="shtclab",
        description="Energy-conservative solvers for first-order hyperbolic systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config file")
    p_run.add_argument("config", help="path to the config file")

    p_preset = sub.add_parser("preset", help="run a built-in experiment")
    p_preset.add_argument("name", choices=sorted(_PRESETS))
    p_preset.add_argument("--nx", type=int)
    p_preset.add_argument("--ny", type=int)
    p_preset.add_argument("--dt", type=float)
    p_preset.add_argument("--cfl", type=float, help="selects the explicit collocated scheme")
    p_preset.add_argument("--tend", type=float)
    p_preset.add_argument("--out", default=".")

    sub.add_parser("verify", help="run the discrete-structure self checks")

    args = parser.parse_args(argv)

    if args.command == "verify":
        return verify()

    try:
        if args.command == "run":
            config = parse_config(Path(args.config).read_text())
        else:
            data = {"preset": args.name, "out_dir": args.out}
            if args.dt is not None and args.cfl is not None:
                print("error: set exactly one of --dt and --cfl", file=sys.stderr)
                return 1
            data["scheme"] = "htc" if args.cfl is not None else "simm"
            if args.cfl is not None:
                data["cfl"] = args.cfl
            if args.dt is not None:
                data["dt"] = args.dt
            if args.nx is not None:
                data["nx"] = args.nx
            if args.ny is not None:
                data["ny"] = args.ny
            if args.tend is not None:
                data["t_end"] = args.tend
            config = build_config(data)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
