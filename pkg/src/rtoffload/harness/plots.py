"""Throughput and deadline-miss charts from a results CSV."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path
from statistics import fmean

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .sweep import CSV_HEADER  # noqa: E402

X_AXIS = {"1": "clients", "2": "laxity_mean_ms", "3": "latency_std_ms"}
X_LABEL = {"clients": "number of clients", "laxity_mean_ms": "laxity mean [ms]",
           "latency_std_ms": "latency std-dev [ms]", "u_factor": "uncertainty factor"}

_INT_COLUMNS = ("clients", "workers", "seed", "submitted", "accepted", "rejected",
                "completed_on_time", "missed", "in_flight_at_end")
_FLOAT_COLUMNS = ("laxity_mean_ms", "latency_mean_ms", "latency_std_ms", "success_rate",
                  "miss_rate", "mean_response_ms", "mean_fallback_lead_ms")


class PlotError(ValueError):
    pass


def read_rows(csv_path) -> list[dict]:
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise PlotError(f"{csv_path}: header does not match the results schema")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            try:
                row = dict(raw)
                for col in _INT_COLUMNS:
                    row[col] = int(raw[col])
                for col in _FLOAT_COLUMNS:
                    row[col] = float(raw[col])
                row["u_factor"] = float(raw["u_factor"]) if raw["u_factor"] else None
                if raw["scheduler"] not in ("latency_aware", "reference"):
                    raise ValueError(f"unknown scheduler {raw['scheduler']!r}")
            except (TypeError, ValueError) as exc:
                raise PlotError(f"{csv_path}: malformed row {lineno}: {exc}") from None
            rows.append(row)
    if not rows:
        raise PlotError(f"{csv_path}: no data rows")
    return rows


def _x_column(scenario: str, rows: list[dict]) -> str:
    if scenario in X_AXIS:
        return X_AXIS[scenario]
    for col in ("clients", "laxity_mean_ms", "latency_std_ms"):
        if len({r[col] for r in rows}) > 1:
            return col
    return "clients"


def _series_label(row: dict) -> str:
    return "reference" if row["scheduler"] == "reference" else f"U={row['u_factor']:g}"


def emit_plots(csv_path, out_dir) -> list[Path]:
    """One PNG per scenario: success rate and missed fraction vs the swept axis."""
    rows = read_rows(csv_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    by_scenario = defaultdict(list)
    for row in rows:
        by_scenario[row["scenario"]].append(row)

    written = []
    for scenario in sorted(by_scenario):
        srows = by_scenario[scenario]
        x_col = _x_column(scenario, srows)
        series = defaultdict(lambda: defaultdict(list))
        for row in srows:
            series[_series_label(row)][row[x_col]].append(row)

        fig, (ax_ok, ax_miss) = plt.subplots(1, 2, figsize=(10, 4))
        ordered = sorted(series, key=lambda s: (s == "reference", s))
        for label in ordered:
            xs = sorted(series[label])
            ok = [fmean(r["success_rate"] for r in series[label][x]) for x in xs]
            miss = [fmean(r["missed"] / r["submitted"] if r["submitted"] else 0.0
                          for r in series[label][x]) for x in xs]
            style = {"color": "black", "linestyle": "--"} if label == "reference" else {}
            ax_ok.plot(xs, ok, marker="o", label=label, **style)
            ax_miss.plot(xs, miss, marker="o", label=label, **style)
        ax_ok.set_ylabel("successful / submitted")
        ax_miss.set_ylabel("missed / submitted")
        for ax in (ax_ok, ax_miss):
            ax.set_xlabel(X_LABEL[x_col])
            ax.set_ylim(-0.02, 1.02)
            ax.grid(alpha=0.3)
        ax_ok.legend(fontsize="small")
        fig.suptitle(f"Scenario {scenario}")
        fig.tight_layout()
        path = out_dir / f"scenario_{scenario}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
