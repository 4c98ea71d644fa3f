"""Figure builders for run logs: formation paths, error traces, torque traces."""

import math
from dataclasses import dataclass
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvlog import parse_run_csv

KINDS = ("formation3d", "eps1", "eps2", "torque")

CHANNEL_LABELS = ("x", "y", "z", "roll", "pitch", "yaw")

# leader track coefficients used to redraw the reference path in formation3d;
# the log schema carries no leader columns, so the shipped trajectory shape
# is assumed unless overridden
DEFAULT_LEADER_COEF = (30.0, 1.0, 5.0, 2.0)


@dataclass(frozen=True)
class FigureRequest:
    """One figure: source csv(s), figure kind, output image path."""

    csv: str
    kind: str
    out: str
    csv2: Optional[str] = None
    tau_max: float = 300.0
    leader_coef: tuple = DEFAULT_LEADER_COEF

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.tau_max <= 0.0:
            raise ValueError("tau_max must be positive")


@dataclass(frozen=True)
class RenderReport:
    """What was drawn; guides lists the horizontal reference lines, if any."""

    kind: str
    out: str
    agents: int
    samples: int
    guides: tuple = ()
    overlay: bool = False


def _leader_track(t, coef):
    amplitude, rate, vy, vz = coef
    decay = np.exp(-rate * t)
    return np.stack([amplitude * (1.0 - decay), vy * t, vz * t], axis=1)


def _formation3d(req, table, table2):
    fig = plt.figure(figsize=(8.0, 6.0))
    ax = fig.add_subplot(projection="3d")
    for i in range(table.n):
        ax.plot(table.eta[:, i, 0], table.eta[:, i, 1], table.eta[:, i, 2],
                label=f"agent {i + 1}")
        ax.scatter(*table.eta[0, i, :3], marker="o", s=18)
    leader = _leader_track(table.t, req.leader_coef)
    ax.plot(leader[:, 0], leader[:, 1], leader[:, 2], "k--", label="leader")
    if table2 is not None:
        for i in range(table2.n):
            ax.plot(table2.eta[:, i, 0], table2.eta[:, i, 1], table2.eta[:, i, 2],
                    linestyle=":", alpha=0.7)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_zlabel("z [m]")
    ax.legend(loc="upper left", fontsize=8)
    return fig


def _grid(fig_width, n):
    rows = math.ceil(n / 2) if n > 1 else 1
    cols = 2 if n > 1 else 1
    return plt.subplots(rows, cols, figsize=(fig_width, 2.6 * rows), squeeze=False)


def _error_panels(req, table, table2, block):
    fig, axes = _grid(9.0, table.n)
    data = getattr(table, block)
    for i in range(table.n):
        ax = axes[i // 2][i % 2]
        for c in range(6):
            ax.plot(table.t, data[:, i, c], lw=0.8, label=CHANNEL_LABELS[c])
        if table2 is not None:
            other = getattr(table2, block)
            for c in range(6):
                ax.plot(table2.t, other[:, i, c], lw=0.6, ls="--", alpha=0.6)
        ax.set_title(f"agent {i + 1}", fontsize=9)
        ax.set_xlabel("t [s]")
        ax.grid(True, alpha=0.3)
    axes[0][0].legend(fontsize=7, ncol=3)
    fig.tight_layout()
    return fig


def _torque_panels(req, table, table2):
    fig, axes = _grid(9.0, table.n)
    for i in range(table.n):
        ax = axes[i // 2][i % 2]
        for c in range(6):
            ax.plot(table.t, table.tau[:, i, c], lw=0.8, label=CHANNEL_LABELS[c])
        if table2 is not None:
            for c in range(6):
                ax.plot(table2.t, table2.tau[:, i, c], lw=0.6, ls="--", alpha=0.6)
        ax.axhline(req.tau_max, color="k", ls="--", lw=1.0)
        ax.axhline(-req.tau_max, color="k", ls="--", lw=1.0)
        ax.set_title(f"agent {i + 1}", fontsize=9)
        ax.set_xlabel("t [s]")
        ax.grid(True, alpha=0.3)
    axes[0][0].legend(fontsize=7, ncol=3)
    fig.tight_layout()
    return fig


def build_figure(req: FigureRequest) -> tuple:
    """Load the csv(s) and build the figure; returns (figure, report)."""
    table = parse_run_csv(req.csv)
    table2 = parse_run_csv(req.csv2) if req.csv2 else None
    if req.kind == "formation3d":
        fig = _formation3d(req, table, table2)
        guides = ()
    elif req.kind in ("eps1", "eps2"):
        fig = _error_panels(req, table, table2, req.kind)
        guides = ()
    else:
        fig = _torque_panels(req, table, table2)
        guides = (-req.tau_max, req.tau_max)
    report = RenderReport(
        kind=req.kind, out=req.out, agents=table.n, samples=table.t.size,
        guides=guides, overlay=table2 is not None,
    )
    return fig, report


def render(req: FigureRequest) -> RenderReport:
    """Render the requested figure to a raster image file."""
    fig, report = build_figure(req)
    try:
        fig.savefig(req.out, dpi=110)
    finally:
        plt.close(fig)
    return report
