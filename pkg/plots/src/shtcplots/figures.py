"""The two diagnostic figures: energy drift and involution errors.

Rendering goes through the object-oriented Agg path (no pyplot state) with
pinned figure geometry, so rerunning on the same inputs reproduces the file.
"""

from pathlib import Path

from matplotlib.figure import Figure

from .series import INVOLUTIONS, SeriesError, load_series

LOG_FLOOR = 1e-17  # machine-zero columns must survive the log axis

_INVOLUTION_LABELS = {
    "div_B_max": "max |div B|",
    "div_D_max": "max |div D|",
    "curl_v_max": "max |curl v|",
}


def floor_for_log(values, floor=LOG_FLOOR):
    """Absolute values clamped away from zero for log-scale plotting."""
    return [max(abs(v), floor) for v in values]


def default_label(path) -> str:
    # a run directory names its series file just "series.csv"; the directory
    # is the distinguishing part
    p = Path(path)
    if p.stem == "series" and p.parent.name:
        return p.parent.name
    return p.stem


def _log_axes(ylabel):
    fig = Figure(figsize=(6.4, 4.0), dpi=140)
    ax = fig.add_subplot()
    ax.set_xlabel("time")
    ax.set_ylabel(ylabel)
    ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def plot_energy(series_paths, out_image, labels=None) -> list:
    """Overlay |E^n/E^0 - 1| curves from one or more series files.

    Returns the legend labels in plot order.
    """
    paths = list(series_paths)
    if not paths:
        raise SeriesError("need at least one series file")
    if labels is None:
        labels = [default_label(p) for p in paths]
    labels = list(labels)
    if len(labels) != len(paths):
        raise SeriesError(f"got {len(labels)} labels for {len(paths)} series files")

    fig, ax = _log_axes("|relative energy error|")
    for path, label in zip(paths, labels):
        table = load_series(path)
        y = floor_for_log(table.columns["rel_energy_error"])
        style = {"marker": "o"} if len(y) == 1 else {}
        ax.plot(table.time, y, label=label, **style)
    ax.legend()
    fig.savefig(out_image)
    return labels


def plot_involutions(series_path, out_image) -> tuple:
    """Plot the divergence/curl error columns of one series file.

    Empty columns are skipped; returns the names of the columns plotted.
    """
    table = load_series(series_path)
    points = table.involution_points()
    if not points:
        raise SeriesError(
            f"{series_path}: no involution data; columns "
            f"{', '.join(INVOLUTIONS)} are all empty"
        )

    fig, ax = _log_axes("involution error")
    for name, pts in points.items():
        y = floor_for_log([v for _, v in pts])
        style = {"marker": "o"} if len(y) == 1 else {}
        ax.plot([t for t, _ in pts], y, label=_INVOLUTION_LABELS[name], **style)
    ax.legend()
    fig.savefig(out_image)
    return tuple(points)
