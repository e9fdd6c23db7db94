"""Graph Laplacian of a consensus matrix and eigengap choice of k."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceFailure

DENSE_LIMIT = 2000


@dataclass(frozen=True)
class LaplacianResult:
    eigenvalues: np.ndarray
    gaps: np.ndarray | None = None
    gap_index: int | None = None
    suggested_k: int | None = None
    normalized: bool = False

    def gap_table(self):
        """Rows of (position, eigenvalue, gap to next), positions 1-based."""
        ev = self.eigenvalues
        gaps = np.append(np.diff(ev), np.nan)
        return [(i + 1, float(ev[i]), float(gaps[i])) for i in range(len(ev))]


def laplacian(C, normalized: bool = False):
    """``L = D - C`` with the diagonal of C ignored.

    ``normalized=True`` gives ``D^-1/2 L D^-1/2`` (isolated points get 0 rows).
    """
    counts = getattr(C, "counts", C)
    W = np.array(counts, dtype=np.float64)
    np.fill_diagonal(W, 0.0)
    deg = W.sum(axis=1)
    L = np.diag(deg) - W
    if normalized:
        inv = np.divide(1.0, np.sqrt(deg), out=np.zeros_like(deg), where=deg > 0)
        L = inv[:, None] * L * inv[None, :]
    return L


def cut_weak_pairs(C, fraction: float, runs: int | None = None) -> np.ndarray:
    """Zero the pairs co-clustered in at most ``fraction * runs`` runs.

    With ``fraction=0.5`` only pairs that share a cluster in a strict
    majority of runs stay connected. ``runs`` defaults to ``C.runs`` or, for
    a bare array, the largest diagonal entry.
    """
    if not 0 <= fraction < 1:
        raise ValueError("fraction must be in [0, 1)")
    counts = np.asarray(getattr(C, "counts", C))
    if runs is None:
        runs = getattr(C, "runs", None)
        if runs is None:
            runs = int(np.max(np.diag(counts))) if counts.size else 0
    out = np.where(counts > fraction * runs, counts, 0)
    np.fill_diagonal(out, 0)
    return out


def laplacian_eigenvalues(C, m: int = 50, normalized: bool = False,
                          dense_limit: int = DENSE_LIMIT) -> LaplacianResult:
    """The ``m`` smallest eigenvalues of the consensus Laplacian, ascending.

    Dense symmetric solver up to ``dense_limit`` points, implicitly restarted
    Lanczos (ARPACK) above that.
    """
    L = laplacian(C, normalized)
    n = L.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"m={m} outside [1, {n}]")
    if n <= dense_limit or m >= n - 1:
        ev = np.linalg.eigvalsh(L)[:m]
    else:
        # largest eigenvalues of (s I - L) are the smallest of L
        s = float(2 * np.max(np.diag(L))) or 1.0
        shifted = sp.csr_matrix(s * sp.identity(n) - sp.csr_matrix(L))
        # fixed start vector: ARPACK's own draw changes from call to call
        v0 = np.random.default_rng(0).random(n) + 0.5
        try:
            top = spla.eigsh(shifted, k=m, which="LA", tol=1e-10, maxiter=max(1000, 20 * n),
                             v0=v0, return_eigenvectors=False)
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceFailure(
                f"Lanczos did not converge: {len(exc.eigenvalues)} of {m} eigenvalues",
                converged=len(exc.eigenvalues),
            ) from exc
        ev = np.sort(s - top)
    return LaplacianResult(np.asarray(ev, dtype=np.float64), normalized=normalized)


def suggest_k(eigenvalues, min_k: int = 1, convention: str = "count",
              small: float | None = None):
    """Pick k at the largest gap between consecutive eigenvalues.

    Returns ``(gap_index, suggested_k, gaps)``. ``gap_index`` is the 0-based
    position of the eigenvalue just below the gap. With ``convention="count"``
    k is the number of eigenvalues below the gap (k near-zero eigenvalues =
    k components). ``convention="upper"`` reports the 1-based position of the
    eigenvalue above the gap, i.e. one more.

    Gaps starting before position ``min_k`` are not considered. With
    ``small`` set, only gaps whose lower eigenvalue is at most ``small``
    times the largest inspected eigenvalue compete, so the first k values
    must all be small; if no gap qualifies the plain largest gap is used.
    """
    ev = np.sort(np.asarray(eigenvalues, dtype=np.float64))
    if ev.size < 2:
        raise ValueError("need at least two eigenvalues")
    gaps = np.diff(ev)
    lo = max(min_k - 1, 0)
    if lo >= gaps.size:
        lo = gaps.size - 1
    candidates = np.arange(lo, gaps.size)
    if small is not None:
        ok = candidates[ev[candidates] <= small * ev[-1]]
        if ok.size:
            candidates = ok
    gap_index = int(candidates[np.argmax(gaps[candidates])])
    if convention == "count":
        k = gap_index + 1
    elif convention == "upper":
        k = gap_index + 2
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return gap_index, k, gaps


def analyze(C, m: int = 50, normalized: bool = False, min_k: int = 1,
            convention: str = "count", cut: float = 0.0,
            small: float | None = None) -> LaplacianResult:
    """Eigenvalues plus the eigengap suggestion in one call.

    ``cut > 0`` first drops weak pairs, see ``cut_weak_pairs``; ``small``
    is passed to ``suggest_k``.
    """
    if cut > 0:
        C = cut_weak_pairs(C, cut)
    m = min(m, np.asarray(getattr(C, "counts", C)).shape[0])
    res = laplacian_eigenvalues(C, m, normalized)
    if res.eigenvalues.size < 2:
        return LaplacianResult(res.eigenvalues, np.zeros(0), 0, 1, normalized)
    gap_index, k, gaps = suggest_k(res.eigenvalues, min_k, convention, small)
    return LaplacianResult(res.eigenvalues, gaps, gap_index, k, normalized)
