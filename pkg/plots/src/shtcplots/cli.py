"""Console entry points wrapping the two figure writers."""

import argparse
import sys

from .figures import plot_energy, plot_involutions
from .series import SeriesError


def main_energy(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-energy",
        description="Overlay relative-energy-error time series from series.csv files.",
    )
    parser.add_argument("series", nargs="+", help="series.csv files, one curve each")
    parser.add_argument("-o", "--out", required=True, help="output image path")
    parser.add_argument("--labels", nargs="+", help="legend labels, one per series")
    args = parser.parse_args(argv)
    try:
        plot_energy(args.series, args.out, labels=args.labels)
    except (SeriesError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main_involutions(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-involutions",
        description="Plot divergence/curl error time series from a series.csv file.",
    )
    parser.add_argument("series", help="series.csv file")
    parser.add_argument("-o", "--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        plot_involutions(args.series, args.out)
    except (SeriesError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
