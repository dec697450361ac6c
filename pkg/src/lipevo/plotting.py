"""PNG figures written next to the CSV reports (Agg backend, no display)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)


def kernel_estimates(rows, path):
    """measured / bound against t - s, one series per (family, estimate, m)."""
    series = {}
    for est, fam, j, m, dt, meas, bound, ratio in rows:
        if est == "shell":
            continue
        series.setdefault((fam, est, m), []).append((dt, ratio))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for (fam, est, m), pts in sorted(series.items()):
        pts.sort()
        x, y = zip(*pts)
        ax.loglog(x, np.maximum(y, 1e-300), marker=".", label=f"{fam} {est} m={m}")
    ax.set_xlabel("t - s")
    ax.set_ylabel("measured / bound")
    ax.legend(fontsize=6, ncol=2)
    _save(fig, path)


def check_ratios(report, path, title=None):
    """Per-row ratios of one EstimateReport with its fitted N."""
    r = np.array([row.ratio for row in report.rows], dtype=float)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(np.arange(r.size), r, ".", ms=3)
    ax.axhline(report.N, color="k", lw=0.8, ls="--", label=f"N = {report.N:.4g}")
    ax.set_xlabel("sweep point")
    ax.set_ylabel("measured / bound")
    ax.set_title(title or report.id)
    ax.legend()
    _save(fig, path)


def summary(entries, path):
    """Fitted N and refined N per estimate."""
    labels = [f"{s}:{e}" for s, e, *_ in entries]
    n = np.array([v[2] for v in entries], dtype=float)
    nr = np.array([v[3] for v in entries], dtype=float)
    fig, ax = plt.subplots(figsize=(8, max(3, 0.18 * len(labels) + 1)))
    y = np.arange(len(labels))
    ax.barh(y - 0.2, n, 0.4, label="N")
    ax.barh(y + 0.2, np.nan_to_num(nr), 0.4, label="N refined")
    ax.set_yticks(y, labels, fontsize=5)
    ax.set_xscale("log")
    ax.legend()
    _save(fig, path)


def profile(x, values, path, xlabel="x"):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(x, np.real(values), label="re")
    if np.any(np.imag(values)):
        ax.plot(x, np.imag(values), label="im")
    ax.set_xlabel(xlabel)
    ax.legend()
    _save(fig, path)


def image(values, extent, path):
    fig, ax = plt.subplots(figsize=(5, 4.5))
    im = ax.imshow(np.real(values).T, origin="lower", extent=extent)
    fig.colorbar(im, ax=ax)
    _save(fig, path)
