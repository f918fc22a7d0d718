"""Static figures for runs and benchmark reports (matplotlib, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

MODE_COLORS = {"S1": "tab:blue", "S2": "tab:orange", "S3": "tab:red", "VO": "tab:green"}


def plot_trajectory(trace, tracks, path, title: str = "") -> Path:
    """Own-ship path coloured by mode, obstacle paths and the unsafe boxes."""
    fig, ax = plt.subplots(figsize=(7, 5))
    modes = np.asarray(trace.mode)
    for m, col in MODE_COLORS.items():
        sel = modes == m
        if sel.any():
            ax.plot(np.where(sel, trace.x, np.nan), np.where(sel, trace.y, np.nan),
                    color=col, lw=1.5, label=m)
    t = np.asarray(trace.t)
    for tr in tracks:
        vx, vy = tr.velocity
        ax.plot(tr.p0[0] + vx * t, tr.p0[1] + vy * t, color="0.4", lw=1, ls="--")
        ax.plot([tr.p0[0]], [tr.p0[1]], "ks", ms=4)
    for b in trace.boxes:
        v = np.asarray(b["vertices"] + b["vertices"][:1])
        ax.plot(v[:, 0], v[:, 1], color="tab:purple", lw=0.8, alpha=0.7)
    sc = trace.scenario or {}
    if sc.get("waypoint"):
        ax.plot([sc["waypoint"][0]], [sc["waypoint"][1]], "r*", ms=10)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(title or sc.get("name", ""))
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_metric_bars(rows, path, C_s=None) -> Path:
    """One panel per metric with a bar per case and algorithm."""
    rows = [r for r in rows if r["J1"] != "absent"]
    algs = sorted({r["algorithm"] for r in rows})
    cases = sorted({r["case"] for r in rows}, key=str)
    cases = sorted(cases, key=lambda c: (isinstance(c, str), c))
    fig, axes = plt.subplots(3, 2, figsize=(11, 9))
    w = 0.8 / max(len(algs), 1)
    xs = np.arange(len(cases))
    for ax, key in zip(axes.flat, ["J1", "J2", "J3", "J4", "J5", "J6"]):
        for i, alg in enumerate(algs):
            val = {r["case"]: r[key] for r in rows if r["algorithm"] == alg}
            ax.bar(xs + i * w, [val.get(c, np.nan) for c in cases], w, label=alg)
        if key == "J1" and C_s:
            ax.axhline(C_s, color="r", lw=1)
            ax.set_yscale("log")
        ax.set_title(key)
        ax.set_xticks(xs + 0.4 - w / 2)
        ax.set_xticklabels([str(c) for c in cases], fontsize=7)
    axes.flat[0].legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return path
