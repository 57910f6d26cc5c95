#!/usr/bin/env python3
"""Render the experiment CSVs written by the qofc CLI into figures.

Reads only the documented CSV contract (experiment, sample_index,
param_json, e1, e2, tau, tau_method), never the simulation engine.  Each
render writes the image plus an adjacent ``.points.json`` sidecar holding
the exact plotted (tau, e2) series, which is byte-identical across runs.

    render_figs.py --experiment fig3 --in fig3.csv --out fig3.svg
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

REQUIRED_COLUMNS = ("experiment", "sample_index", "param_json", "e1", "e2", "tau", "tau_method")

#: Scatter plots are thinned to at most this many points (stride sampling).
MAX_SCATTER_POINTS = 50_000


@dataclass(frozen=True)
class PlotSpec:
    experiment: str
    csv_path: Path
    image_path: Path
    x_label: str
    y_label: str
    series_key: str | None
    kind: str  # "scatter" | "curves"


_EXPERIMENTS: dict[str, dict] = {
    "fig1": dict(kind="scatter", series_key=None, x_label="tau",
                 title="mixed twin beams"),
    "fig2": dict(kind="curves", series_key="xi_s", x_label="tau",
                 title="seeded pure twin beams"),
    "fig3": dict(kind="curves", series_key=None, x_label="tau_M",
                 title="pair comb, Gaussian gain spectrum"),
    "fig4": dict(kind="curves", series_key="xi_s", x_label="tau_M",
                 title="pair comb with seeded signal arm"),
    "fig5": dict(kind="scatter", series_key="panel", x_label="tau",
                 title="all-to-all comb, mode pairs"),
    "fig6": dict(kind="curves", series_key="xi", x_label="tau",
                 title="all-to-all comb, out-of-pair seed"),
    "fig7": dict(kind="curves", series_key="m", x_label="tau_M",
                 title="all-to-all comb bipartitions"),
    "fig8": dict(kind="curves", series_key="xi", x_label="tau_M",
                 title="seeded all-to-all bipartition"),
}


def plot_spec(experiment: str, csv_path: str | Path, image_path: str | Path) -> PlotSpec:
    if experiment not in _EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; expected fig1..fig8")
    info = _EXPERIMENTS[experiment]
    return PlotSpec(
        experiment=experiment,
        csv_path=Path(csv_path),
        image_path=Path(image_path),
        x_label=info["x_label"],
        y_label="E",
        series_key=info["series_key"],
        kind=info["kind"],
    )


def _read_rows(spec: PlotSpec) -> list[dict]:
    with open(spec.csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in REQUIRED_COLUMNS:
            if column not in header:
                raise ValueError(f"{spec.csv_path}: missing column {column!r}")
        rows = []
        for row in reader:
            if row["experiment"] != spec.experiment:
                raise ValueError(
                    f"{spec.csv_path}: row {row['sample_index']} belongs to "
                    f"{row['experiment']!r}, not {spec.experiment!r}"
                )
            rows.append(
                {
                    "index": int(row["sample_index"]),
                    "params": json.loads(row["param_json"]),
                    "tau": float(row["tau"]),
                    "e": float(row["e2"]),
                }
            )
    return rows


def _series_label(key: str | None, value) -> str:
    if key is None:
        return "all"
    if isinstance(value, float) and value == int(value):
        return f"{key}={int(value)}"
    return f"{key}={value}"


def _group_series(spec: PlotSpec, rows: list[dict]) -> list[dict]:
    if spec.series_key is None:
        groups = {None: rows} if rows else {}
    else:
        groups: dict = {}
        for row in rows:
            if spec.series_key not in row["params"]:
                raise ValueError(
                    f"{spec.csv_path}: param_json lacks the series key {spec.series_key!r}"
                )
            groups.setdefault(row["params"][spec.series_key], []).append(row)
    series = []
    for value in sorted(groups, key=lambda v: (str(type(v)), v)):
        members = groups[value]
        if spec.kind == "curves":
            members = sorted(members, key=lambda r: (r["tau"], r["index"]))
        else:
            cap = max(1, MAX_SCATTER_POINTS // max(1, len(groups)))
            stride = -(-len(members) // cap)  # ceil
            members = members[::stride]
        series.append(
            {
                "key": spec.series_key,
                "value": value,
                "label": _series_label(spec.series_key, value),
                "tau": [r["tau"] for r in members],
                "e": [r["e"] for r in members],
            }
        )
    return series


def render(spec: PlotSpec) -> Path:
    """Render one experiment CSV; returns the sidecar path."""
    rows = _read_rows(spec)
    if not rows:
        print(f"warning: {spec.csv_path} has no data rows; writing empty axes",
              file=sys.stderr)
    series = _group_series(spec, rows)

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for entry in series:
        if spec.kind == "scatter":
            ax.scatter(entry["tau"], entry["e"], s=2.0, alpha=0.5, label=entry["label"])
        else:
            ax.plot(entry["tau"], entry["e"], lw=1.4, label=entry["label"])
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    ax.set_title(f"{spec.experiment}: {_EXPERIMENTS[spec.experiment]['title']}")
    if series and (spec.series_key is not None):
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.image_path)
    plt.close(fig)

    sidecar = spec.image_path.with_suffix(".points.json")
    doc = {
        "experiment": spec.experiment,
        "source": spec.csv_path.name,
        "x_label": spec.x_label,
        "y_label": spec.y_label,
        "series": [
            {k: entry[k] for k in ("key", "value", "label", "tau", "e")}
            for entry in series
        ],
    }
    sidecar.write_text(json.dumps(doc, separators=(",", ":"), sort_keys=True) + "\n")
    return sidecar


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figs",
        description="Render qofc experiment CSVs into figures with point-set sidecars.",
    )
    parser.add_argument("--experiment", required=True, help="fig1..fig8")
    parser.add_argument("--in", dest="csv_path", required=True, metavar="CSV")
    parser.add_argument("--out", dest="image_path", required=True, metavar="IMAGE")
    args = parser.parse_args(argv)
    try:
        spec = plot_spec(args.experiment, args.csv_path, args.image_path)
        sidecar = render(spec)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"render_figs: error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.image_path} and {sidecar}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
