"""Figure rendering for the CLI report paths.

All figures are written as PNG next to the delimited outputs. The Agg
backend is forced so rendering works headless and byte-stable for a given
matplotlib install.
"""

from __future__ import annotations

import io as _io
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import atomic_write_bytes

DPI = 150


def _save(fig, path: Path) -> None:
    buf = _io.BytesIO()
    fig.savefig(buf, format="png", dpi=DPI)
    plt.close(fig)
    atomic_write_bytes(Path(path), buf.getvalue())


def plot_scan_region(path, v_r, i_values, cv_grid) -> None:
    """Firing-pattern map over (V_r, I): bursting vs spiking vs quiescent."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    coded = np.where(np.isnan(cv_grid), -1.0, np.where(cv_grid >= 0.5, 1.0, 0.0))
    cmap = matplotlib.colors.ListedColormap(["0.85", "#4878d0", "#d65f5f"])
    norm = matplotlib.colors.BoundaryNorm([-1.5, -0.5, 0.5, 1.5], cmap.N)
    ax.pcolormesh(v_r, i_values, coded.T, cmap=cmap, norm=norm, shading="nearest")
    ax.set_xlabel("$V_r$ (mV)")
    ax.set_ylabel("$I$ (pA)")
    ax.set_title("firing patterns (red: bursting, blue: spiking, grey: quiescent)")
    fig.tight_layout()
    _save(fig, path)


def plot_single_trace(path, traj, params, spike_times) -> None:
    """Membrane trace plus V-w phase plane with nullclines."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(traj.times, traj.V[:, 0], lw=0.7, color="k")
    ax1.set_xlabel("t (ms)")
    ax1.set_ylabel("V (mV)")
    if len(spike_times):
        ax1.plot(spike_times, np.full(len(spike_times), params.V_peak), "r.", ms=3)
    from .model import nullclines

    vs = np.linspace(params.E_L - 5, params.V_T + 6, 400)
    w_v, w_w = nullclines(params, vs)
    ax2.plot(traj.V[:, 0], traj.w[:, 0], lw=0.6, color="k")
    ax2.plot(vs, w_v, "--", color="#4878d0", label="dV/dt = 0")
    ax2.plot(vs, w_w, "--", color="#d65f5f", label="dw/dt = 0")
    w_all = traj.w[:, 0]
    ax2.set_xlim(params.E_L - 6, params.V_r + 10)
    ax2.set_ylim(min(w_all.min(), -50) - 50, w_all.max() * 1.1 + 50)
    ax2.set_xlabel("V (mV)")
    ax2.set_ylabel("w (pA)")
    ax2.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_raster(path, windows) -> None:
    """Raster panels, one per burst window: [(label, rows), ...]."""
    fig, axes = plt.subplots(1, len(windows), figsize=(4.5 * len(windows), 3.2),
                             squeeze=False)
    for ax, (label, rows) in zip(axes[0], windows):
        if rows:
            ids = [r[0] for r in rows]
            ts = [r[1] for r in rows]
            ax.plot(ts, ids, "|", ms=12, color="k")
            ax.set_yticks(sorted(set(ids)))
        ax.set_xlabel("t (ms)")
        ax.set_ylabel("neuron")
        ax.set_title(label)
    fig.tight_layout()
    _save(fig, path)


def plot_delta_series(path, sync) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    n = np.arange(1, sync.delta_series.size + 1)
    ax.plot(n, sync.delta_series * 1e3, lw=0.9, color="k")
    if sync.stabilized is not None:
        ax.axhline(sync.stabilized * 1e3, ls="--", color="#d65f5f",
                   label=f"stabilized = {sync.stabilized*1e3:.4f}e-3 s")
        ax.legend(fontsize=8)
    ax.set_xlabel("burst index n")
    ax.set_ylabel(r"$\delta(n)$ ($\times 10^{-3}$ s)")
    fig.tight_layout()
    _save(fig, path)


def plot_td_series(path, traces) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for tr in traces:
        ax.plot(np.arange(tr.td_series.size), tr.td_series, lw=0.8,
                label=f"neuron {tr.neuron_id}")
    ax.axhline(0.0, color="0.7", lw=0.5)
    ax.set_xlabel("spike index k")
    ax.set_ylabel("TD(k) (ms)")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    _save(fig, path)


def plot_toy_sweep(path, rows) -> None:
    """delta and delta(1) against the initial potential difference."""
    fig, ax = plt.subplots(figsize=(6, 4))
    v0s = sorted({r[0] for r in rows})
    for v0 in v0s:
        pts = [(r[1], r[2], r[3]) for r in rows if r[0] == v0]
        diffs = [p[0] for p in pts]
        ax.plot(diffs, [p[2] * 1e3 for p in pts], "o-", ms=3,
                label=f"$V_0$={v0} mV ($\\delta$)")
        ax.plot(diffs, [p[1] * 1e3 for p in pts], "s--", ms=3, alpha=0.5,
                label=f"$V_0$={v0} mV ($\\delta(1)$)")
    ax.set_xlabel("$V_0 - V_1$ (mV)")
    ax.set_ylabel(r"$\delta$ ($\times 10^{-3}$ s)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_propagation(path, graph) -> None:
    """Layered drawing of the spiking propagation graph."""
    fig, ax = plt.subplots(figsize=(6, 1.6 + 1.3 * len(graph.layers)))
    pos = {}
    for m, layer in enumerate(graph.layers):
        xs = np.linspace(0, 1, len(layer) + 2)[1:-1]
        for x, v in zip(xs, layer):
            pos[v] = (x, -m)
    for u, v in graph.edges:
        (x1, y1), (x2, y2) = pos[u], pos[v]
        ax.annotate("", xy=(x2, y2 + 0.08), xytext=(x1, y1 - 0.08),
                    arrowprops=dict(arrowstyle="-|>", color="0.5", lw=0.8))
    for v, (x, y) in pos.items():
        label = str(v) if v not in graph.dr else f"{v}\ndr={graph.dr[v]} d={graph.d[v]}"
        ax.plot(x, y, "o", ms=26, color="#9ecae1", mec="k", mew=0.5, zorder=3)
        ax.annotate(label, (x, y), ha="center", va="center", fontsize=7, zorder=4)
    ax.set_ylim(-len(graph.layers) + 0.5, 0.5)
    ax.set_xlim(-0.05, 1.05)
    ax.axis("off")
    fig.tight_layout()
    _save(fig, path)
