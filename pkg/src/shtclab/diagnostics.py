"""Per-step run diagnostics and the CSV series they are stored in.

All runs share one CSV schema regardless of system and scheme; quantities
that do not apply (involutions of the collocated scheme, Picard counters of
the explicit one) stay empty. Floats are written with 17 significant digits
so a written series parses back bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import simm

CSV_HEADER = (
    "time,total_energy,rel_energy_error,div_B_max,div_D_max,curl_v_max,"
    "picard_iters,krylov_iters"
)

_COLUMNS = CSV_HEADER.split(",")
_INT_COLUMNS = ("picard_iters", "krylov_iters")


@dataclass(frozen=True)
class DiagnosticRecord:
    time: float
    total_energy: float
    rel_energy_error: float
    div_B_max: float | None = None
    div_D_max: float | None = None
    curl_v_max: float | None = None
    picard_iters: int | None = None
    krylov_iters: int | None = None


def total_energy(system, mesh, fields) -> float:
    """Volume-weighted total energy of a collocated state array or of
    staggered fields, summed in fixed index order (bit-reproducible)."""
    if isinstance(fields, simm.StaggeredFields):
        return simm.staggered_total_energy(system, mesh, fields.qc, fields.qp)
    return mesh.cell_area * float(np.sum(system.energy(fields)))


def relative_energy_error(energy: float, reference: float) -> float:
    """(E - E_ref)/E_ref; the record at t=0 compares the reference with
    itself and is exactly 0. A zero reference falls back to the absolute
    difference."""
    if reference == 0.0:
        return energy - reference
    return (energy - reference) / reference


def make_record(time, energy, reference_energy, involutions=None,
                picard_iters=None, krylov_iters=None) -> DiagnosticRecord:
    involutions = involutions or {}
    return DiagnosticRecord(
        time=float(time),
        total_energy=float(energy),
        rel_energy_error=relative_energy_error(float(energy), float(reference_energy)),
        div_B_max=involutions.get("div_B_max"),
        div_D_max=involutions.get("div_D_max"),
        curl_v_max=involutions.get("curl_v_max"),
        picard_iters=picard_iters,
        krylov_iters=krylov_iters,
    )


def _format_cell(name: str, value) -> str:
    if value is None:
        return ""
    if name in _INT_COLUMNS:
        return str(int(value))
    return f"{value:.17g}"


def write_series(path, records) -> None:
    lines = [CSV_HEADER]
    for rec in records:
        lines.append(",".join(_format_cell(c, getattr(rec, c)) for c in _COLUMNS))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_series(path) -> list[DiagnosticRecord]:
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"series header does not match the fixed schema: {lines[:1]}")
    records = []
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != len(_COLUMNS):
            raise ValueError(f"malformed series row: {line!r}")
        kwargs = {}
        for name, cell in zip(_COLUMNS, cells):
            if cell == "":
                kwargs[name] = None
            elif name in _INT_COLUMNS:
                kwargs[name] = int(cell)
            else:
                kwargs[name] = float(cell)
        records.append(DiagnosticRecord(**kwargs))
    return records
