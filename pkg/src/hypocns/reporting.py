"""File outputs for runs: delimited trajectories, fit summaries, figures.

The trajectory format is plain comma-separated text with one row per
sample and 17 significant digits throughout, so a written file reproduces
the in-memory doubles exactly on read-back; fits and verification verdicts
go to JSON; the decay figure is rendered as a static SVG next to them.
"""

from __future__ import annotations

import csv
import json
from typing import Optional, Sequence

import numpy as np

from .analysis import FunctionalSample
from .errors import ParameterError

__all__ = [
    "trajectory_columns",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "pair_norm_column",
    "write_table_csv",
    "write_json",
    "write_decay_plot",
]

_FIXED_COLUMNS = (
    "time",
    "e0",
    "e_s",
    "weighted_pair_l2",
    "lyap0",
    "diss0",
    "lyap1",
    "diss1",
    "visc_dissipation",
    "besov_neg_half",
    "low_freq_energy",
    "split_measure",
    "mean_a",
    "momentum",
    "min_density",
    "max_speed",
)


def pair_norm_column(order: float) -> str:
    """Column name carrying the joint norm of a given order."""
    return f"pair_norm_{order:g}"


def trajectory_columns(samples: Sequence[FunctionalSample]) -> list[str]:
    orders = sorted(samples[0].pair_norms)
    return list(_FIXED_COLUMNS) + [pair_norm_column(s) for s in orders]


def write_trajectory_csv(path, samples: Sequence[FunctionalSample]) -> list[str]:
    """Write one row per sample; returns the column names written."""
    if not samples:
        raise ParameterError("refusing to write an empty trajectory")
    columns = trajectory_columns(samples)
    orders = sorted(samples[0].pair_norms)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for s in samples:
            row = [getattr(s, name) for name in _FIXED_COLUMNS]
            row += [s.pair_norms[order] for order in orders]
            writer.writerow([f"{value:.17g}" for value in row])
    return columns


def write_table_csv(path, columns: Sequence[str], rows) -> None:
    """Write a plain numeric table with the same 17-digit float convention."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [f"{v:.17g}" if isinstance(v, float) else str(v) for v in row]
            )


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    """Read a trajectory back as a column-name to array mapping."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParameterError(f"{path} is empty") from None
        rows = [[float(cell) for cell in row] for row in reader if row]
    if not rows:
        raise ParameterError(f"{path} contains a header but no samples")
    data = np.asarray(rows, dtype=np.float64)
    if data.shape[1] != len(header):
        raise ParameterError(f"{path} has ragged rows")
    return {name: data[:, i].copy() for i, name in enumerate(header)}


def write_json(path, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def write_decay_plot(
    path,
    samples: Sequence[FunctionalSample],
    fits: dict[float, dict],
    title: Optional[str] = None,
) -> None:
    """Render the tracked joint norms against 1 + t on log-log axes.

    Each tracked order gets its measured curve plus, when a fit entry is
    provided for it, the fitted power law over the fit window and a dotted
    reference with the predicted exponent anchored at the window start.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not samples:
        raise ParameterError("nothing to plot: no samples")

    times = np.array([s.time for s in samples])
    shifted = 1.0 + times
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]

    for i, order in enumerate(sorted(samples[0].pair_norms)):
        values = np.array([s.pair_norms[order] for s in samples])
        positive = values > 0.0
        color = colors[i % len(colors)]
        ax.loglog(
            shifted[positive],
            values[positive],
            color=color,
            label=f"measured, order {order:g}",
        )
        entry = fits.get(order)
        if entry is None:
            continue
        lo, hi = entry["window"]
        span = np.geomspace(1.0 + lo, 1.0 + hi, 64)
        ax.loglog(
            span,
            entry["amplitude"] * span ** entry["exponent"],
            "--",
            color=color,
            label=f"fit, slope {entry['exponent']:.3f}",
        )
        predicted = entry.get("predicted_exponent")
        if predicted is not None:
            anchor = entry["amplitude"] * (1.0 + lo) ** entry["exponent"]
            ax.loglog(
                span,
                anchor * (span / (1.0 + lo)) ** predicted,
                ":",
                color=color,
                label=f"predicted, slope {predicted:.3f}",
            )

    ax.set_xlabel("1 + t")
    ax.set_ylabel("joint norm")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
