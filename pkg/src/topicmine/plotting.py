"""PNG figures for the run report. Agg backend only, no display needed."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import scipy.sparse as sp  # noqa: E402
import scipy.sparse.linalg as spla  # noqa: E402

_RC = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
    "figure.dpi": 120,
}


def _save(fig, path):
    # fixed metadata keeps reruns byte-identical
    fig.savefig(path, metadata={"Software": "topicmine"})
    plt.close(fig)


def plot_eigenvalues(result, path, title: str = "Smallest Laplacian eigenvalues"):
    """Eigenvalue index vs value, with the chosen gap marked."""
    ev = np.asarray(result.eigenvalues)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        pos = np.arange(1, ev.size + 1)
        ax.plot(pos, ev, "o", ms=3.5, color="#1f4e79")
        if result.gap_index is not None and ev.size > 1:
            g = result.gap_index
            ax.axvspan(g + 1, g + 2, color="#f4b183", alpha=0.5, lw=0,
                       label=f"largest gap, k = {result.suggested_k}")
            ax.legend(frameon=False, loc="lower right")
        ax.set_xlabel("position")
        ax.set_ylabel("eigenvalue")
        ax.set_title(title)
        fig.tight_layout()
        _save(fig, path)


def project_2d(A) -> np.ndarray:
    """Document coordinates on the two leading singular directions of A."""
    A = getattr(A, "matrix", A)
    m, n = A.shape
    if min(m, n) < 3 or m * n <= 4_000_000:
        dense = A.toarray() if sp.issparse(A) else np.asarray(A)
        _, s, vt = np.linalg.svd(dense, full_matrices=False)
        s, vt = s[:2], vt[:2]
    else:
        # fixed start vector for a reproducible ARPACK run
        u, s, vt = spla.svds(sp.csr_matrix(A, dtype=np.float64), k=2, v0=np.ones(min(m, n)))
        order = np.argsort(-s)
        s, vt = s[order], vt[order]
    coords = (vt * s[:, None]).T
    # sign convention: the largest-magnitude coordinate is positive
    for c in range(coords.shape[1]):
        if coords[np.argmax(np.abs(coords[:, c])), c] < 0:
            coords[:, c] *= -1
    if coords.shape[1] < 2:
        coords = np.column_stack([coords, np.zeros(n)])
    return coords


def plot_noise(A, noise_flags, path, labels_after=None):
    """Before/after scatter of the corpus with noise points marked."""
    xy = project_2d(A)
    flags = np.asarray(noise_flags, dtype=bool)
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharex=True, sharey=True)
        ax = axes[0]
        ax.scatter(*xy[~flags].T, s=4, c="#7f7f7f", lw=0, label="kept")
        ax.scatter(*xy[flags].T, s=8, c="#c00000", marker="x", lw=0.7, label="noise")
        ax.set_title(f"before: {flags.size} documents, {int(flags.sum())} flagged")
        ax.legend(frameon=False, loc="best", markerscale=2)
        ax = axes[1]
        kept = xy[~flags]
        if labels_after is not None and len(labels_after) == kept.shape[0]:
            lab = np.asarray(labels_after)
            colors = plt.get_cmap("tab10")(np.mod(lab, 10))
            colors[lab < 0] = (0.6, 0.6, 0.6, 1.0)
            ax.scatter(*kept.T, s=4, c=colors, lw=0)
        else:
            ax.scatter(*kept.T, s=4, c="#1f4e79", lw=0)
        ax.set_title(f"after: {kept.shape[0]} documents")
        for ax in axes:
            ax.set_xlabel("SV 1")
        axes[0].set_ylabel("SV 2")
        fig.tight_layout()
        _save(fig, path)


def plot_consensus(C, labels, path, max_points: int = 2500):
    """Consensus matrix with rows and columns grouped by cluster."""
    counts = np.asarray(getattr(C, "counts", C))
    labels = np.asarray(getattr(labels, "labels", labels))
    order = np.lexsort((np.arange(labels.size), labels))
    if order.size > max_points:
        order = order[np.linspace(0, order.size - 1, max_points).astype(int)]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 4.4))
        im = ax.imshow(counts[np.ix_(order, order)], cmap="Greys", interpolation="nearest")
        fig.colorbar(im, ax=ax, shrink=0.8, label="runs together")
        ax.set_xticks([])
        ax.set_yticks([])
        ax.set_title("Consensus matrix, grouped by cluster")
        fig.tight_layout()
        _save(fig, path)


def plot_topic_terms(summaries, path, n_terms: int = 10):
    """Bar chart of the heaviest terms per topic, one panel each."""
    k = len(summaries)
    cols = min(3, max(k, 1))
    rows = max(1, -(-k // cols))
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 2.4 * rows), squeeze=False)
        for ax in axes.ravel()[k:]:
            ax.axis("off")
        for s, ax in zip(summaries, axes.ravel()):
            terms = s.top_terms[:n_terms][::-1]
            ax.barh([t for t, _ in terms], [w for _, w in terms], color="#1f4e79")
            ax.set_title(f"topic {s.topic_id} ({len(s.member_docs)} docs)")
            ax.tick_params(axis="y", labelsize=7)
        fig.tight_layout()
        _save(fig, path)
