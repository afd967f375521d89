"""Figure rendering for suite and table outputs.

Each CSV the CLI writes gets a PNG companion.  Figure content is a
deterministic function of the rows (fixed dpi, no timestamps), so reruns
with the same seed redraw the same picture.
"""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_rows_figure", "render_opsum_figure",
           "render_lpnorm_figure", "render_bounds_figure",
           "render_maxreg_figure"]

FLOOR = 1e-18


def _defect_ratio(row):
    """log10(|value| / tolerance), clipped; None when not meaningful."""
    tol = row.tolerance
    if tol == 0.0 or not math.isfinite(tol):
        return None
    return math.log10(max(abs(row.value), FLOOR) / tol)


def render_rows_figure(rows, path, title):
    """Strip chart of measured defect over tolerance, grouped by suite."""
    pts = [(r.suite, _defect_ratio(r), r.passed) for r in rows]
    pts = [p for p in pts if p[1] is not None]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.05 * len(pts) + 4.0), 4.0))
    if pts:
        xs = np.arange(len(pts))
        ys = np.array([p[1] for p in pts])
        ok = np.array([p[2] for p in pts], dtype=bool)
        ax.scatter(xs[ok], ys[ok], s=14, color="tab:blue", label="pass")
        if np.any(~ok):
            ax.scatter(xs[~ok], ys[~ok], s=26, color="tab:red",
                       marker="x", label="fail")
        # suite boundaries
        prev = None
        for i, (suite, _, _) in enumerate(pts):
            if suite != prev:
                ax.axvline(i - 0.5, color="0.85", lw=0.8, zorder=0)
                ax.text(i, ax.get_ylim()[1], suite, fontsize=8,
                        rotation=90, va="top", ha="left", color="0.4")
                prev = suite
        ax.legend(loc="lower right", fontsize=8)
    ax.axhline(0.0, color="tab:red", lw=1.0, ls="--")
    ax.set_xlabel("row")
    ax.set_ylabel("log10(|value| / tolerance)")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_opsum_figure(records, path):
    """Factorized bound against the exact norm it must dominate."""
    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    xs = np.array([r["norm_AS"] for r in records], dtype=float)
    ys = np.array([r["dpg_bound"] for r in records], dtype=float)
    ax.loglog(xs, ys, "o", ms=5, color="tab:blue")
    lo = min(xs.min(), ys.min()) * 0.8
    hi = max(xs.max(), ys.max()) * 1.25
    ax.loglog([lo, hi], [lo, hi], "--", color="tab:red", lw=1.0,
              label="equality")
    for r in records:
        ax.annotate(r["label"], (r["norm_AS"], r["dpg_bound"]),
                    fontsize=6, alpha=0.6)
    ax.set_xlabel("||A(A+B)^{-1}||_2")
    ax.set_ylabel("pairing chain bound")
    ax.set_title("factorized bound vs exact norm")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_lpnorm_figure(records, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    labels = [f"{r['label']}\n{r['symbol']} p={r['p_or_q']:g} "
              f"th={r['theta']:g}" for r in records]
    vals = [r["value"] for r in records]
    ax.bar(np.arange(len(vals)), vals, color="tab:blue", width=0.6)
    ax.set_xticks(np.arange(len(vals)))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylabel("orbit norm")
    ax.set_title("square-function norms")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_bounds_figure(records, path):
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    xs = np.arange(len(records))
    lows = [r["lower_bound"] for r in records]
    sing = [r["singleton_max"] for r in records]
    ax.bar(xs - 0.17, lows, width=0.34, label="family lower bound",
           color="tab:blue")
    ax.bar(xs + 0.17, sing, width=0.34, label="largest member norm",
           color="tab:orange")
    ax.set_xticks(xs)
    ax.set_xticklabels([f"{r['label']}\n{r['kind']}" for r in records],
                       fontsize=8)
    ax.set_ylabel("bound")
    ax.set_title("randomized boundedness estimates")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_maxreg_figure(records, path):
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ms = [r["m"] for r in records]
    cs = [r["C_p"] for r in records]
    ax.plot(ms, cs, "o-", color="tab:blue")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("time steps m (fixed horizon)")
    ax.set_ylabel("C_p")
    ax.set_title("maximal regularity constant under refinement")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
