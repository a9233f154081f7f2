import numpy as np
import pytest

from shtclab.diagnostics import (
    CSV_HEADER,
    DiagnosticRecord,
    make_record,
    read_series,
    relative_energy_error,
    total_energy,
    write_series,
)
from shtclab.grid import StaggeredMesh
from shtclab.simm import StaggeredFields
from shtclab.systems import make_system


def test_relative_energy_error():
    assert relative_energy_error(2.0, 2.0) == 0.0
    assert relative_energy_error(2.2, 2.0) == (2.2 - 2.0) / 2.0
    # a zero reference degrades to the absolute difference
    assert relative_energy_error(3.0, 0.0) == 3.0


def test_initial_record_is_exact():
    rec = make_record(0.0, 1.2345e-3, 1.2345e-3)
    assert rec.rel_energy_error == 0.0
    assert rec.div_B_max is None and rec.picard_iters is None


def test_make_record_takes_involutions():
    rec = make_record(
        0.5, 1.0, 2.0,
        involutions={"div_B_max": 1e-14, "div_D_max": 2e-14},
        picard_iters=4, krylov_iters=17,
    )
    assert rec.rel_energy_error == -0.5
    assert rec.div_B_max == 1e-14
    assert rec.curl_v_max is None
    assert rec.krylov_iters == 17


def test_series_roundtrip(tmp_path):
    records = [
        make_record(0.0, 0.1 + 0.2, 0.1 + 0.2),
        make_record(
            1e-3, 0.30000000000000004, 0.3,
            involutions={"curl_v_max": 7.077e-17},
            picard_iters=5, krylov_iters=23,
        ),
        DiagnosticRecord(time=2e-3, total_energy=-1.5e8, rel_energy_error=3.3e-16),
    ]
    path = tmp_path / "series.csv"
    write_series(path, records)
    text = path.read_text()
    assert text.startswith(CSV_HEADER + "\n")
    assert text.endswith("\n")
    back = read_series(path)
    assert back == records


def test_series_empty_cells_stay_none(tmp_path):
    path = tmp_path / "series.csv"
    write_series(path, [make_record(0.0, 1.0, 1.0)])
    line = path.read_text().splitlines()[1]
    assert line == "0,1,0,,,,,"
    assert read_series(path)[0].div_D_max is None


def test_series_header_is_enforced(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,total_energy\n0,1\n")
    with pytest.raises(ValueError, match="header"):
        read_series(path)


def test_series_rejects_malformed_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(CSV_HEADER + "\n0,1,0\n")
    with pytest.raises(ValueError, match="malformed"):
        read_series(path)


def test_total_energy_collocated_uniform():
    system = make_system("maxwell")
    mesh = StaggeredMesh(nx=10, ny=5, x1=2.0)
    q = np.zeros((5, 10, 6))
    q[..., 0] = 1.0
    # 50 cells of area 0.04 at unit energy density 1.01 each
    assert total_energy(system, mesh, q) == 50 * 0.04 * 1.01


def test_total_energy_staggered_matches_block_sum():
    rng = np.random.default_rng(61)
    system = make_system("maxwell_glm")
    mesh = StaggeredMesh(nx=7, ny=6)
    fields = StaggeredFields(
        qc=rng.standard_normal((6, 7, 4)),
        qp=rng.standard_normal((6, 7, 4)),
    )
    expected = mesh.cell_area * (
        float(np.sum(system.cell_energy(fields.qc)))
        + float(np.sum(system.vertex_energy(fields.qp)))
    )
    assert total_energy(system, mesh, fields) == pytest.approx(expected, rel=1e-15)


def test_total_energy_zero_fields():
    system = make_system("maxwell")
    mesh = StaggeredMesh(nx=4, ny=4)
    assert total_energy(system, mesh, np.zeros((4, 4, 6))) == 0.0
    fields = StaggeredFields(qc=np.zeros((4, 4, 3)), qp=np.zeros((4, 4, 3)))
    assert total_energy(system, mesh, fields) == 0.0
