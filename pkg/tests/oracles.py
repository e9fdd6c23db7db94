"""Brute-force reference implementations, kept deliberately naive."""

import math

import numpy as np


def cosine_distance_loop(A):
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            dot = sum(A[t, i] * A[t, j] for t in range(A.shape[0]))
            ni = math.sqrt(sum(A[t, i] ** 2 for t in range(A.shape[0])))
            nj = math.sqrt(sum(A[t, j] ** 2 for t in range(A.shape[0])))
            out[i][j] = 1.0 - dot / (ni * nj)
    return np.array(out)


def dbscan_classes(D, eps, c):
    """0 noise, 1 border, 2 dense -- triple loop over a square matrix."""
    n = len(D)
    dense = []
    for i in range(n):
        count = 0
        for j in range(n):
            if D[i][j] <= eps:
                count += 1
        dense.append(count >= c)
    out = []
    for i in range(n):
        if dense[i]:
            out.append(2)
            continue
        border = False
        for j in range(n):
            if dense[j] and D[i][j] <= eps:
                border = True
        out.append(1 if border else 0)
    return out


def dbscan_labels(D, eps, c):
    """Connected components of the dense-dense eps graph, numbered by their
    lowest member; border points take the lowest-numbered adjacent cluster."""
    n = len(D)
    classes = dbscan_classes(D, eps, c)
    dense = [k == 2 for k in classes]
    comp = [-1] * n
    next_id = 0
    for s in range(n):
        if not dense[s] or comp[s] >= 0:
            continue
        stack = [s]
        comp[s] = next_id
        while stack:
            p = stack.pop()
            for q in range(n):
                if dense[q] and comp[q] < 0 and D[p][q] <= eps:
                    comp[q] = next_id
                    stack.append(q)
        next_id += 1
    labels = list(comp)
    for i in range(n):
        if classes[i] == 1:
            labels[i] = min(comp[j] for j in range(n) if dense[j] and D[i][j] <= eps)
    return labels


def consensus_counts(label_sets):
    n = len(label_sets[0])
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for labels in label_sets:
                if i == j or labels[i] == labels[j]:
                    out[i][j] += 1
    return out


def jacobi_eigenvalues(S, sweeps=100, tol=1e-14):
    """Cyclic Jacobi rotations on a dense symmetric matrix."""
    A = np.array(S, dtype=float)
    n = A.shape[0]
    for _ in range(sweeps):
        off = math.sqrt(sum(A[p, q] ** 2 for p in range(n) for q in range(n) if p != q))
        if off < tol * max(1.0, np.abs(A).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                cs = 1 / math.sqrt(t * t + 1)
                sn = t * cs
                J = np.eye(n)
                J[p, p] = J[q, q] = cs
                J[p, q] = sn
                J[q, p] = -sn
                A = J.T @ A @ J
    return sorted(np.diag(A))


def pair_f1(truth, pred):
    """Pair-counting F1: precision/recall over pairs placed together."""
    truth = list(truth)
    pred = list(pred)
    tp = fp = fn = 0
    n = len(truth)
    t = np.asarray(truth)
    p = np.asarray(pred)
    same_t = t[:, None] == t[None, :]
    same_p = p[:, None] == p[None, :]
    iu = np.triu_indices(n, 1)
    st, sp_ = same_t[iu], same_p[iu]
    tp = int(np.sum(st & sp_))
    fp = int(np.sum(~st & sp_))
    fn = int(np.sum(st & ~sp_))
    if tp == 0:
        return 0.0
    prec = tp / (tp + fp)
    rec = tp / (tp + fn)
    return 2 * prec * rec / (prec + rec)


def adjusted_rand(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    n = len(a)
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def comb2(x):
        return x * (x - 1) / 2

    sum_ij = comb2(table).sum()
    sum_a = comb2(table.sum(1)).sum()
    sum_b = comb2(table.sum(0)).sum()
    expected = sum_a * sum_b / comb2(n)
    maximum = (sum_a + sum_b) / 2
    if maximum == expected:
        return 1.0
    return (sum_ij - expected) / (maximum - expected)
