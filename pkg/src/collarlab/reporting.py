"""Figures and console summaries for the CLI report path.

Every number printed in a summary line is pulled from the report dict that
gets serialized, so the console output never carries orphan values.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update(
    {
        "figure.figsize": (6.0, 4.0),
        "figure.dpi": 120,
        "savefig.bbox": "tight",
        "axes.grid": True,
        "grid.alpha": 0.3,
    }
)


def fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def criterion_line(name, passed, detail="") -> str:
    mark = "PASS" if passed else "FAIL"
    return f"[{mark}] {name}" + (f": {detail}" if detail else "")


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def fig_curve(xs, ys, xlabel, ylabel, path, label=None, ref=None, ref_label=None,
              logx=False, logy=False, title=None):
    fig, ax = plt.subplots()
    ax.plot(xs, ys, "o-", label=label)
    if ref is not None:
        ax.plot(xs, ref, "--", label=ref_label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if label or ref_label:
        ax.legend()
    return _save(fig, path)


def fig_hist_vs_normal(values, sigma, path, title=None):
    fig, ax = plt.subplots()
    ax.hist(values, bins=40, density=True, alpha=0.6, label="replications")
    grid = np.linspace(min(values), max(values), 256)
    pdf = np.exp(-(grid**2) / (2 * sigma**2)) / np.sqrt(2 * np.pi * sigma**2)
    ax.plot(grid, pdf, "r-", label=f"N(0, {sigma**2:.3g})")
    ax.set_xlabel("v_n(B)")
    ax.set_ylabel("density")
    if title:
        ax.set_title(title)
    ax.legend()
    return _save(fig, path)


def fig_ecdf_pair(a, b, labels, path, title=None):
    fig, ax = plt.subplots()
    for values, label in zip((a, b), labels):
        xs = np.sort(values)
        ax.step(xs, np.arange(1, len(xs) + 1) / len(xs), where="post", label=label)
    ax.set_xlabel("sup statistic")
    ax.set_ylabel("empirical cdf")
    if title:
        ax.set_title(title)
    ax.legend()
    return _save(fig, path)


def fig_heatmap(matrix, path, title=None, xlabel="j", ylabel="i"):
    fig, ax = plt.subplots()
    im = ax.imshow(np.asarray(matrix), origin="lower", aspect="auto")
    fig.colorbar(im, ax=ax)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def fig_body_collar(body, eps, path, points=None, title=None):
    from .geometry import unmagnify_many

    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    thetas = np.linspace(0.0, body.perimeter, 512, endpoint=False)
    for s in (-1.0, 0.0, 1.0):
        pts, valid = unmagnify_many(body, eps, thetas, np.full(512, s),
                                    on_corner="mask")
        style = "k-" if s == 0 else "b--"
        ax.plot(pts[valid, 0], pts[valid, 1], style, lw=1.2 if s == 0 else 0.8)
    if points is not None and len(points):
        ax.plot(points[:, 0], points[:, 1], ".", ms=2, alpha=0.5)
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    return _save(fig, path)
