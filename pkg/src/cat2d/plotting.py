"""Deterministic SVG renderings of planar scenes, cut trees and majorizations."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no timestamp so identical inputs give identical files
matplotlib.rcParams["svg.hashsalt"] = "cat2d"
matplotlib.rcParams["svg.fonttype"] = "none"
_META = {"Date": None, "Creator": "cat2d"}


def _ring(ax, P, **kw):
    P = np.asarray(P)
    Q = np.vstack([P, P[:1]])
    ax.plot(Q[:, 0], Q[:, 1], **kw)


def _save(fig, ax, path, title):
    ax.set_aspect("equal")
    ax.set_title(title, fontsize=9)
    ax.tick_params(labelsize=7)
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)


def plot_domain(domain, path, title="", witnesses=None, curve=None):
    fig, ax = plt.subplots(figsize=(5, 5))
    for r in domain.rings:
        _ring(ax, r, color="black", lw=1)
    if curve is not None:
        _ring(ax, curve, color="tab:blue", lw=1)
    for w in witnesses or []:
        _ring(ax, np.asarray(w["points"], dtype=float), color="tab:red", lw=0.6, ls="--")
    _save(fig, ax, path, title)


def plot_tree(tree, path, title=""):
    fig, ax = plt.subplots(figsize=(6, 6))
    _ring(ax, tree.root.vertices, color="black", lw=1)
    segs = tree.cut_segments()
    for p, q in segs:
        ax.plot([p[0], q[0]], [p[1], q[1]], color="tab:orange", lw=0.6)
    _save(fig, ax, path, title or f"{len(tree.leaves())} leaves, eps = {tree.epsilon:g}")


def plot_majdisc(Z, path, title=""):
    fig, ax = plt.subplots(figsize=(6, 6))
    img = np.asarray(Z.images)
    tris = np.asarray(Z.disc.triangles)
    for t in tris:
        _ring(ax, img[t], color="tab:green", lw=0.3)
    _ring(ax, Z.curve.vertices, color="black", lw=1)
    _save(fig, ax, path, title or f"majorization image, {len(tris)} triangles")
