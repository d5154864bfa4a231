#!/usr/bin/env python3
"""Offline plots from simulation CSV output.

Reads the trace files written by the ``cubli`` CLI and turns them into static
images.  Three kinds:

* ``timeseries``: selected columns against time, one shared axis;
* ``com3d``: center-of-mass path in 3D;
* ``poinsot``: angular-momentum traces of a torque-free family over the
  reference surface (sphere for a constant-H family, prolate spheroid for a
  constant-T family).

The tool consumes CSV columns verbatim and never recomputes any physics; the
reference surface for the poinsot kind is reconstructed from the trace data
itself.  Output is deterministic for identical input (fixed figure geometry,
no timestamps).

Usage::

    plot_cubli.py --kind timeseries --in trace.csv --cols E,T,V --out energy.png
    plot_cubli.py --kind com3d --in trace.csv --out com.png
    plot_cubli.py --kind poinsot --in member_*_H.csv --out poinsot.png
"""

import argparse
import sys
from dataclasses import dataclass, field
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGSIZE = (8.0, 6.0)
DPI = 100
LEVEL_RTOL = 1e-9


@dataclass(frozen=True)
class PlotSpec:
    inputs: List[str]
    kind: str                       # timeseries | com3d | poinsot
    cols: List[str] = field(default_factory=list)
    out: str = "plot.png"


class PlotError(ValueError):
    pass


def read_csv(path):
    """Column-name -> array mapping from a headered CSV file."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    # Every trace format starts with a time column; its absence means the
    # file has no usable header line.
    if data.dtype.names is None or "t" not in data.dtype.names:
        raise PlotError(f"{path}: missing CSV header")
    if data.ndim == 0:  # single data row
        data = data.reshape(1)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}


def _require_columns(table, cols, path):
    missing = [c for c in cols if c not in table]
    if missing:
        raise PlotError(f"{path}: missing column(s) {', '.join(missing)}")


def plot_timeseries(spec: PlotSpec):
    if len(spec.inputs) != 1:
        raise PlotError("timeseries takes exactly one input CSV")
    if not spec.cols:
        raise PlotError("timeseries requires --cols")
    table = read_csv(spec.inputs[0])
    _require_columns(table, ["t"] + spec.cols, spec.inputs[0])
    fig, ax = plt.subplots(figsize=FIGSIZE)
    marker = "o" if len(table["t"]) == 1 else None
    for col in spec.cols:
        ax.plot(table["t"], table[col], label=col, marker=marker)
    ax.set_xlabel("t [s]")
    ax.legend()
    ax.grid(True)
    return fig


def plot_com3d(spec: PlotSpec):
    if len(spec.inputs) != 1:
        raise PlotError("com3d takes exactly one input CSV")
    cols = spec.cols or ["comx", "comy", "comz"]
    if len(cols) != 3:
        raise PlotError("com3d needs exactly three columns")
    table = read_csv(spec.inputs[0])
    _require_columns(table, cols, spec.inputs[0])
    x, y, z = (table[c] for c in cols)
    fig = plt.figure(figsize=FIGSIZE)
    ax = fig.add_subplot(projection="3d")
    if len(x) == 1:
        ax.scatter(x, y, z)
    else:
        ax.plot(x, y, z)
    ax.set_xlabel(cols[0])
    ax.set_ylabel(cols[1])
    ax.set_zlabel(cols[2])
    return fig


def _family_levels(tables, paths):
    """Shared (H, T) levels of a poinsot family; rejects mixed levels."""
    H_levels, T_levels = [], []
    for table, path in zip(tables, paths):
        for col, acc in (("H", H_levels), ("T", T_levels)):
            vals = table[col]
            if np.abs(vals - vals[0]).max() > LEVEL_RTOL * abs(vals[0]):
                raise PlotError(f"{path}: column {col} is not constant")
            acc.append(float(vals[0]))
    H_shared = max(H_levels) - min(H_levels) <= LEVEL_RTOL * max(H_levels)
    T_shared = max(T_levels) - min(T_levels) <= LEVEL_RTOL * max(T_levels)
    if not (H_shared or T_shared):
        raise PlotError("inconsistent family: neither H nor T level is "
                        "shared across the input CSVs")
    return ("H", H_levels[0]) if H_shared else ("T", T_levels[0])


def _sphere_wireframe(ax, radius):
    u = np.linspace(0.0, 2.0 * np.pi, 25)
    v = np.linspace(0.0, np.pi, 13)
    x = radius * np.outer(np.cos(u), np.sin(v))
    y = radius * np.outer(np.sin(u), np.sin(v))
    z = radius * np.outer(np.ones_like(u), np.cos(v))
    ax.plot_wireframe(x, y, z, color="0.8", linewidth=0.5)


def _spheroid_wireframe(ax, tables):
    # Fit H1^2 + H2^2 = b - a*H3^2 across all samples; the surface is then
    # the spheroid with transverse semi-axis sqrt(b) and polar sqrt(b/a).
    h3sq = np.concatenate([t["H3"] ** 2 for t in tables])
    perp = np.concatenate([t["H1"] ** 2 + t["H2"] ** 2 for t in tables])
    a, b = np.polyfit(h3sq, perp, 1)
    a = -a
    if a <= 0.0 or b <= 0.0:
        raise PlotError("degenerate family: cannot fit the energy spheroid")
    r_perp, r_polar = np.sqrt(b), np.sqrt(b / a)
    u = np.linspace(0.0, 2.0 * np.pi, 25)
    v = np.linspace(0.0, np.pi, 13)
    x = r_perp * np.outer(np.cos(u), np.sin(v))
    y = r_perp * np.outer(np.sin(u), np.sin(v))
    z = r_polar * np.outer(np.ones_like(u), np.cos(v))
    ax.plot_wireframe(x, y, z, color="0.8", linewidth=0.5)


def plot_poinsot(spec: PlotSpec):
    if not spec.inputs:
        raise PlotError("poinsot needs at least one input CSV")
    tables = []
    for path in spec.inputs:
        table = read_csv(path)
        _require_columns(table, ["t", "H1", "H2", "H3", "H", "T"], path)
        tables.append(table)
    mode, level = _family_levels(tables, spec.inputs)

    fig = plt.figure(figsize=FIGSIZE)
    ax = fig.add_subplot(projection="3d")
    if mode == "H":
        _sphere_wireframe(ax, level)
    elif len(tables) > 1:
        _spheroid_wireframe(ax, tables)
    for table in tables:
        if len(table["t"]) == 1:
            ax.scatter(table["H1"], table["H2"], table["H3"])
        else:
            ax.plot(table["H1"], table["H2"], table["H3"])
    ax.set_xlabel("H1")
    ax.set_ylabel("H2")
    ax.set_zlabel("H3")
    ax.set_box_aspect((1, 1, 1))
    return fig


_KINDS = {
    "timeseries": plot_timeseries,
    "com3d": plot_com3d,
    "poinsot": plot_poinsot,
}


def make_plot(spec: PlotSpec):
    if spec.kind not in _KINDS:
        raise PlotError(f"unknown plot kind {spec.kind!r}")
    return _KINDS[spec.kind](spec)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Plot simulation CSV traces")
    parser.add_argument("--kind", required=True, choices=sorted(_KINDS))
    parser.add_argument("--in", dest="inputs", required=True, nargs="+",
                        metavar="CSV")
    parser.add_argument("--cols", default="",
                        help="comma-separated column names")
    parser.add_argument("--out", required=True, metavar="PNG")
    args = parser.parse_args(argv)
    cols = [c for c in args.cols.split(",") if c]
    spec = PlotSpec(inputs=args.inputs, kind=args.kind, cols=cols,
                    out=args.out)
    try:
        fig = make_plot(spec)
    except (PlotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    fig.savefig(spec.out, dpi=DPI)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    sys.exit(main())
