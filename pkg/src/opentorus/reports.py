"""Deterministic CSV, JSON, and SVG artifact writers.

Floats are written with repr so equal inputs give byte-identical files.
SVG output pins the matplotlib hash salt and drops the date metadata for
the same reason.  All writing happens in the caller's process: worker
pools compute, a single writer persists.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from . import __version__  # noqa: E402
from .config import ExperimentConfig, serialize_config  # noqa: E402

plt.rcParams["svg.hashsalt"] = "opentorus"


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str, header, rows) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def config_echo(cfg: ExperimentConfig) -> dict:
    echo = asdict(cfg)
    echo["matrix"] = [list(row) for row in echo["matrix"]]
    for key in ("hole_center", "radius_list", "base_point", "scale_list"):
        echo[key] = list(echo[key])
    return echo


def write_json(path: str, report_name: str, payload: dict,
               cfg: ExperimentConfig) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    doc = {"report": report_name, "version": __version__,
           "config": config_echo(cfg)}
    doc.update(payload)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def save_svg(fig, path: str) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def loglog_figure(curves, xlabel: str, ylabel: str, title: str):
    """curves: list of (label, x array, y array, style dict or None)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for label, x, y, style in curves:
        ax.loglog(x, y, label=label, **(style or {"marker": "o", "ms": 3}))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def semilogy_figure(curves, xlabel: str, ylabel: str, title: str):
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for label, x, y, style in curves:
        ax.semilogy(x, y, label=label, **(style or {"marker": "o", "ms": 3}))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig
