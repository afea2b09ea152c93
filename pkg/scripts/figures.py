#!/usr/bin/env python3
"""Render the comparison figures from simulation CSV logs.

Reads the simulator's CSV log format (one header row; per-vehicle column
blocks suffixed _1.._N) and produces one vector image per figure:

    F3 / F8   consensus tracking error norms, one panel per vehicle
    F4 / F9   velocity tracking errors z_i, one panel per vehicle
    F5        control inputs tau1..tau3 of vehicle 1
    F6        velocity commands of vehicle 1 with the configured bounds
    F7 / F10  virtual-gain evolution, one panel per vehicle

Several input CSVs overlay as labeled curves (labels from the file
stems). The velocity-command bounds come from the scenario file's
[optimizer] rho_lo/rho_hi (--scenario) or from an explicit --bounds.

Usage:
    figures.py --fig F3 --in log_nboc.csv [log_boc.csv ...] --out fig3.svg
    figures.py --fig F6 --in log_nboc.csv --scenario paper_sv.toml --out fig6.svg
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "uuv-figures"  # reproducible ids

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

FIGURE_IDS = ("F3", "F4", "F5", "F6", "F7", "F8", "F9", "F10")


class SchemaMismatch(Exception):
    """A log is missing columns the requested figure needs."""


def load_log(path):
    path = Path(path)
    df = pd.read_csv(path)
    if "t" not in df.columns:
        raise SchemaMismatch(f"{path}: missing column 't'")
    return path.stem, df


def vehicle_count(df) -> int:
    n = 0
    while f"enorm_{n + 1}" in df.columns:
        n += 1
    return n


def require(df, label, cols):
    missing = [c for c in cols if c not in df.columns]
    if missing:
        raise SchemaMismatch(f"{label}: missing columns {', '.join(missing)}")


def _per_vehicle_overlay(logs, base, ylabel, title):
    """One panel per vehicle, one labeled curve per input log."""
    n = max(vehicle_count(df) for _, df in logs)
    if n == 0:
        raise SchemaMismatch("no per-vehicle columns found")
    fig, axes = plt.subplots(n, 1, figsize=(7, 2.2 * n), sharex=True)
    axes = [axes] if n == 1 else list(axes)
    for label, df in logs:
        require(df, label, [f"{base}_{i + 1}" for i in range(n)])
        for i in range(n):
            axes[i].plot(df["t"], df[f"{base}_{i + 1}"], label=label, lw=1.0)
    for i, ax in enumerate(axes):
        ax.set_ylabel(f"{ylabel} (vehicle {i + 1})")
        ax.grid(True, alpha=0.3)
    axes[0].set_title(title)
    axes[0].legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("time (s)")
    fig.tight_layout()
    return fig


def fig_error_norms(logs, **_):
    return _per_vehicle_overlay(logs, "enorm", "|e|",
                                "consensus formation tracking errors")


def fig_velocity_errors(logs, **_):
    return _per_vehicle_overlay(logs, "znorm", "z",
                                "velocity tracking errors")


def fig_control_inputs(logs, **_):
    cols = ("tau1_1", "tau2_1", "tau3_1")
    names = ("surge force tau1 (N)", "pitch torque tau2 (N m)",
             "yaw torque tau3 (N m)")
    fig, axes = plt.subplots(3, 1, figsize=(7, 6.5), sharex=True)
    for label, df in logs:
        require(df, label, cols)
        for ax, col in zip(axes, cols):
            ax.plot(df["t"], df[col], label=label, lw=1.0)
    for ax, name in zip(axes, names):
        ax.set_ylabel(name)
        ax.grid(True, alpha=0.3)
    axes[0].set_title("control inputs of vehicle 1")
    axes[0].legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("time (s)")
    fig.tight_layout()
    return fig


def fig_velocity_commands(logs, bounds=None, **_):
    if bounds is None:
        raise SchemaMismatch(
            "F6 needs the velocity box: pass --scenario or --bounds")
    lo, hi = bounds
    cols = ("rhox_1", "rhoy_1", "rhoz_1")
    names = ("x command (m/s)", "y command (m/s)", "z command (m/s)")
    fig, axes = plt.subplots(3, 1, figsize=(7, 6.5), sharex=True)
    for label, df in logs:
        require(df, label, cols)
        for ax, col in zip(axes, cols):
            ax.plot(df["t"], df[col], label=label, lw=1.0)
    for j, (ax, name) in enumerate(zip(axes, names)):
        ax.axhline(lo[j], color="k", ls="--", lw=0.8, label="bound")
        ax.axhline(hi[j], color="k", ls="--", lw=0.8)
        ax.set_ylabel(name)
        ax.grid(True, alpha=0.3)
    axes[0].set_title("velocity commands of vehicle 1 (bounds dashed)")
    axes[0].legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("time (s)")
    fig.tight_layout()
    return fig


def fig_gain_evolution(logs, **_):
    n = max(vehicle_count(df) for _, df in logs)
    if n == 0:
        raise SchemaMismatch("no per-vehicle columns found")
    fig, axes = plt.subplots(n, 1, figsize=(7, 2.2 * n), sharex=True)
    axes = [axes] if n == 1 else list(axes)
    for label, df in logs:
        require(df, label,
                [f"{a}_{i + 1}" for i in range(n) for a in ("kx", "ky", "kz")])
        for i in range(n):
            for axis_name in ("kx", "ky", "kz"):
                curve = f"{label}:{axis_name}" if len(logs) > 1 else axis_name
                axes[i].plot(df["t"], df[f"{axis_name}_{i + 1}"],
                             label=curve, lw=1.0)
    for i, ax in enumerate(axes):
        ax.set_ylabel(f"gains (vehicle {i + 1})")
        ax.grid(True, alpha=0.3)
    axes[0].set_title("virtual control gain evolution")
    axes[0].legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("time (s)")
    fig.tight_layout()
    return fig


BUILDERS = {
    "F3": fig_error_norms,
    "F4": fig_velocity_errors,
    "F5": fig_control_inputs,
    "F6": fig_velocity_commands,
    "F7": fig_gain_evolution,
    "F8": fig_error_norms,
    "F9": fig_velocity_errors,
    "F10": fig_gain_evolution,
}


def bounds_from_scenario(path):
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    opt = doc.get("optimizer", {})
    lo = tuple(float(x) for x in opt.get("rho_lo", (-1.5, -1.5, -1.5)))
    hi = tuple(float(x) for x in opt.get("rho_hi", (1.5, 1.5, 1.5)))
    return lo, hi


def parse_bounds(text):
    vals = [float(x) for x in text.split(",")]
    if len(vals) == 2:
        return (vals[0],) * 3, (vals[1],) * 3
    if len(vals) == 6:
        return tuple(vals[:3]), tuple(vals[3:])
    raise ValueError("--bounds expects 'lo,hi' or six comma-separated values")


def build_figure(fig_id, inputs, bounds=None):
    if fig_id not in BUILDERS:
        raise SchemaMismatch(
            f"unknown figure id {fig_id!r}; expected one of {FIGURE_IDS}")
    logs = [load_log(p) for p in inputs]
    return BUILDERS[fig_id](logs, bounds=bounds)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render comparison figures from simulation CSV logs.")
    parser.add_argument("--fig", required=True, help="figure id, F3..F10")
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV log(s), one per controller variant")
    parser.add_argument("--out", required=True, help="output image path (SVG)")
    parser.add_argument("--scenario", default=None,
                        help="scenario TOML supplying the velocity bounds (F6)")
    parser.add_argument("--bounds", default=None,
                        help="explicit bounds 'lo,hi' or 'lx,ly,lz,hx,hy,hz'")
    args = parser.parse_args(argv)

    bounds = None
    try:
        if args.bounds:
            bounds = parse_bounds(args.bounds)
        elif args.scenario:
            bounds = bounds_from_scenario(args.scenario)
        fig = build_figure(args.fig.upper(), args.inputs, bounds=bounds)
    except (SchemaMismatch, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    fig.savefig(args.out, format="svg", metadata={"Date": None})
    plt.close(fig)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
