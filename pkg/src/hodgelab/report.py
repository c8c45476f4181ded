"""Report emission: machine JSON, plot-ready CSV, and rendered figures.

A scenario run produces one JSON report (schema_version, scenario, params,
checks, data_refs) plus one CSV per data series; series with numeric
columns are also rendered to PNG alongside the delimited output.  Reports
are byte-identical across reruns with the same config and seed; the
timestamp is isolated in its own top-level field.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .errors import IoError

__all__ = ["Check", "DataSeries", "emit_report", "report_json"]

SCHEMA_VERSION = 1


@dataclass
class Check:
    """One acceptance line: expected vs actual at a tolerance."""

    name: str
    expected: object
    actual: object
    tol: object
    passed: bool

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "expected": self.expected,
            "actual": self.actual,
            "tol": self.tol,
            "pass": bool(self.passed),
        }


@dataclass
class DataSeries:
    """Tabular data: written as CSV, rendered as a figure when plottable.

    ``plot`` picks the figure style: "line" (col 0 on x, the rest as
    lines), "loglog", "semilogy" or None to skip rendering.
    """

    name: str
    columns: Sequence[str]
    rows: Sequence[Sequence[float]]
    plot: Optional[str] = "line"
    xlabel: Optional[str] = None
    ylabel: Optional[str] = None


def _json_default(x):
    try:
        return float(x)
    except Exception:
        return str(x)


def report_json(
    scenario: str, params: dict, checks: Sequence[Check], data_refs: Sequence[str],
    timestamp: Optional[str] = None,
) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario,
        "params": params,
        "checks": [c.as_dict() for c in checks],
        "data_refs": sorted(data_refs),
        "all_pass": all(c.passed for c in checks),
        "timestamp": timestamp or "",
    }
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"


def _render_figure(series: DataSeries, path: Path) -> None:
    rows = [list(map(float, r)) for r in series.rows]
    if not rows or len(series.columns) < 2:
        return
    cols = list(zip(*rows))
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    plotter = {
        "line": ax.plot,
        "loglog": ax.loglog,
        "semilogy": ax.semilogy,
    }.get(series.plot or "line", ax.plot)
    for j in range(1, len(series.columns)):
        plotter(cols[0], cols[j], marker="o", markersize=3, label=series.columns[j])
    ax.set_xlabel(series.xlabel or series.columns[0])
    if series.ylabel:
        ax.set_ylabel(series.ylabel)
    if len(series.columns) > 2:
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    ax.set_title(series.name, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def emit_report(
    out_dir,
    scenario: str,
    params: dict,
    checks: Sequence[Check],
    data: Sequence[DataSeries] = (),
    formats: Sequence[str] = ("json", "csv", "png"),
    timestamp: Optional[str] = None,
) -> dict:
    """Write report files; returns {format: [paths]}.

    JSON always documents data_refs (the CSV files) whether or not they
    were requested, so reports stay byte-stable across format choices.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out}: {exc}") from exc

    written: dict = {"json": [], "csv": [], "png": []}
    refs = [f"{scenario}_{s.name}.csv" for s in data]
    try:
        if "csv" in formats:
            for s in data:
                p = out / f"{scenario}_{s.name}.csv"
                with open(p, "w", newline="", encoding="utf-8") as fh:
                    w = csv.writer(fh)
                    w.writerow(s.columns)
                    w.writerows(s.rows)
                written["csv"].append(str(p))
        if "png" in formats:
            for s in data:
                if s.plot is None:
                    continue
                p = out / f"{scenario}_{s.name}.png"
                _render_figure(s, p)
                written["png"].append(str(p))
        if "json" in formats:
            p = out / f"{scenario}.json"
            p.write_text(
                report_json(scenario, params, checks, refs, timestamp),
                encoding="utf-8",
            )
            written["json"].append(str(p))
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return written
