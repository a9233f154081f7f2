"""Reader for the solver's series.csv diagnostic tables.

The producing CLI writes one fixed schema for every system and scheme and
leaves inapplicable columns empty, so a single parser serves all figures.
"""

from dataclasses import dataclass
from pathlib import Path

HEADER = (
    "time,total_energy,rel_energy_error,div_B_max,div_D_max,"
    "curl_v_max,picard_iters,krylov_iters"
)
COLUMNS = tuple(HEADER.split(","))
INVOLUTIONS = ("div_B_max", "div_D_max", "curl_v_max")

# every row carries these regardless of system or scheme
_REQUIRED = ("time", "total_energy", "rel_energy_error")


class SeriesError(ValueError):
    """A series file is unreadable or violates the fixed schema."""


@dataclass
class SeriesTable:
    path: str
    columns: dict

    @property
    def time(self) -> list:
        return self.columns["time"]

    def involution_points(self) -> dict:
        """(time, value) pairs per involution column, empty columns dropped."""
        out = {}
        for name in INVOLUTIONS:
            pts = [(t, v) for t, v in zip(self.time, self.columns[name]) if v is not None]
            if pts:
                out[name] = pts
        return out


def load_series(path) -> SeriesTable:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SeriesError(f"cannot read {path}: {exc}") from exc
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != HEADER:
        raise SeriesError(f"{path}: header does not match the fixed series schema")
    if len(lines) == 1:
        raise SeriesError(f"{path}: series has no rows")

    columns = {name: [] for name in COLUMNS}
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != len(COLUMNS):
            raise SeriesError(f"{path}: malformed row {line!r}")
        for name, cell in zip(COLUMNS, cells):
            if cell == "":
                if name in _REQUIRED:
                    raise SeriesError(f"{path}: row {line!r} is missing {name}")
                columns[name].append(None)
            else:
                try:
                    columns[name].append(float(cell))
                except ValueError as exc:
                    raise SeriesError(f"{path}: malformed row {line!r}") from exc

    time = columns["time"]
    if any(b <= a for a, b in zip(time, time[1:])):
        raise SeriesError(f"{path}: time column is not strictly increasing")
    return SeriesTable(path=str(path), columns=columns)
