"""Figures written next to CSV/JSON reports."""

from __future__ import annotations

import math
import statistics

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed metadata keeps repeated renders byte-stable
_PNG_META = {"Software": None}


def _figure(width=5.0):
    golden = (math.sqrt(5) - 1.0) / 2.0
    fig, ax = plt.subplots(figsize=(width, width * golden), constrained_layout=True)
    ax.tick_params(direction="in", top=True, right=True)
    return fig, ax


def _save(fig, path):
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def plot_wh_sweep(rows, path, p_star=None):
    """Gap versus p, with the refined crossing marked."""
    fig, ax = _figure()
    ps = [r["p"] for r in rows]
    gaps = [r["gap"] for r in rows]
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.plot(ps, gaps, "o-", color="C0", ms=4)
    if p_star is not None:
        ax.axvline(p_star, color="C3", ls="--", lw=1, label=f"$p^* \\approx {p_star:.3f}$")
        ax.legend(frameon=False)
    ax.set_xlabel("$p$")
    ax.set_ylabel(r"$\|(N\otimes N)(\Phi)\|_p - \nu_p(N)^2$")
    _save(fig, path)


def plot_scaling(records, path):
    """Median eps_hat versus n for each d, individual seeds as faint points."""
    fig, ax = _figure()
    by_d = {}
    for r in records:
        by_d.setdefault(r["d"], {}).setdefault(r["n"], []).append(r["eps_hat"])
    for i, (d, cells) in enumerate(sorted(by_d.items())):
        ns = sorted(cells)
        meds = [statistics.median(cells[n]) for n in ns]
        for n in ns:
            ax.plot([n] * len(cells[n]), cells[n], ".", color=f"C{i}", alpha=0.3)
        ax.plot(ns, meds, "o-", color=f"C{i}", label=f"$d={d}$")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("number of unitaries $n$")
    ax.set_ylabel(r"$\hat\varepsilon$")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_crossover(results, path):
    """Threshold dimension d* against p (log scale)."""
    pts = [(r["p"], r["d_star"]) for r in results if r.get("d_star")]
    fig, ax = _figure()
    if pts:
        ax.plot(*zip(*pts), "s-", color="C2")
    ax.set_yscale("log")
    ax.set_xlabel("$p$")
    ax.set_ylabel("$d^*$")
    _save(fig, path)
