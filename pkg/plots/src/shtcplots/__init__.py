"""Figures for the solver's series.csv diagnostics: energy drift on a log
axis and the involution-error time series."""

from .figures import LOG_FLOOR, default_label, floor_for_log, plot_energy, plot_involutions
from .series import COLUMNS, HEADER, INVOLUTIONS, SeriesError, SeriesTable, load_series

__version__ = "0.1.0"

__all__ = [
    "COLUMNS",
    "HEADER",
    "INVOLUTIONS",
    "LOG_FLOOR",
    "SeriesError",
    "SeriesTable",
    "default_label",
    "floor_for_log",
    "load_series",
    "plot_energy",
    "plot_involutions",
]
