"""Figure rendering for the CLI report path.

Each report-producing subcommand can drop a PNG next to its delimited
output; the CSV/JSON stays the canonical artifact and the figures are a
quick-look convenience.  Uses the Agg backend so headless runs work.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_FIG_SIZE = (7.0, 4.2)
_DPI = 150


def figure_path(output_path: str | Path) -> Path:
    return Path(output_path).with_suffix(".png")


def _finish(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def plot_time_series(table: list[dict], path: str | Path, title: str = "") -> Path:
    """Line plot of every numeric column against the 'time' column."""
    times = [row["time"] for row in table]
    fig, ax = plt.subplots(figsize=_FIG_SIZE)
    for key in table[0]:
        if key == "time":
            continue
        values = [row.get(key) for row in table]
        if all(isinstance(v, (int, float)) for v in values):
            style = "--" if key.startswith("eff_") else "-"
            ax.plot(times, values, style, label=key, linewidth=1.2)
    ax.set_xlabel("time")
    ax.set_ylabel("observable")
    if title:
        ax.set_title(title)
    if len(table[0]) <= 13:
        ax.legend(fontsize=8, ncol=2)
    return _finish(fig, figure_path(path))


def plot_fidelity_table(table: list[dict], path: str | Path) -> Path:
    durations = [row["duration"] for row in table]
    fidelities = [row["fidelity"] for row in table]
    fig, ax = plt.subplots(figsize=_FIG_SIZE)
    ax.plot(durations, fidelities, "o-")
    ax.set_xlabel("sweep duration")
    ax.set_ylabel("target fidelity")
    ax.set_xscale("log")
    ax.set_ylim(min(fidelities) - 0.02, 1.005)
    ax.set_title("adiabatic preparation")
    return _finish(fig, figure_path(path))


def plot_ground_state(table: list[dict], path: str | Path) -> Path:
    mags = [(row["index"], row["value"]) for row in table if row.get("record") == "magnetization"]
    energies = [row["value"] for row in table if row.get("record") == "energy"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=_FIG_SIZE)
    if mags:
        sites, values = zip(*mags)
        ax1.bar(sites, values, color="#4878a8")
    ax1.set_xlabel("site")
    ax1.set_ylabel(r"$\langle S^z \rangle$")
    ax1.set_title("magnetization")
    ax2.plot(range(len(energies)), energies, "s", color="#a84848")
    ax2.set_xlabel("level")
    ax2.set_ylabel("energy")
    ax2.set_title("low spectrum")
    return _finish(fig, figure_path(path))


def plot_sweep(table: list[dict], parameter: str, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=_FIG_SIZE)
    xs = [row[parameter] for row in table]
    plotted = 0
    for key in table[0]:
        if key == parameter or plotted >= 8:
            continue
        values = [row.get(key) for row in table]
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            ax.plot(xs, values, "o-", label=key, linewidth=1.0, markersize=3)
            plotted += 1
    ax.set_xlabel(parameter)
    ax.legend(fontsize=8)
    ax.set_title("parameter sweep")
    return _finish(fig, figure_path(path))
