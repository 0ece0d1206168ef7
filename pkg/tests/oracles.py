"""Independent reference implementations used as test oracles.

Everything here is deliberately written on a different path from the package
code: two-pass instead of streaming moments, hand-rolled cyclic Jacobi
instead of LAPACK, union-find labeling instead of scipy, pure-Python loops
instead of vectorized index math, pixel rasterization instead of closed-form
overlap. None of it may import from ddtloc.
"""

import math

import numpy as np


def two_pass_covariance(cell_arrays):
    """Reference mean/covariance: explicit first pass for the mean, second
    pass for the centered outer products, population divisor."""
    rows = np.concatenate([np.asarray(a, dtype=float).reshape(-1, a.shape[-1])
                           for a in cell_arrays])
    k = rows.shape[0]
    mean = rows.sum(axis=0) / k
    centered = rows - mean
    cov = np.zeros((rows.shape[1], rows.shape[1]))
    for row in centered:
        cov += np.outer(row, row)
    return mean, cov / k, k


def jacobi_eigh(matrix, tol=1e-12, max_sweeps=200):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns (eigenvalues descending, eigenvectors as columns). Plain rotation
    loops, no LAPACK anywhere.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    fro = math.sqrt(float((a * a).sum()))
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[p, q] ** 2 for p in range(n) for q in range(n) if p != q))
        if off <= tol * max(fro, 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    evals = np.diag(a).copy()
    order = np.argsort(evals)[::-1]
    return evals[order], v[:, order]


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)


def union_find_components(bits):
    """All 8-connected components of a boolean matrix as frozensets of
    (row, col), via a union-find over flat indices."""
    bits = np.asarray(bits, dtype=bool)
    h, w = bits.shape
    uf = _UnionFind(h * w)
    for r in range(h):
        for c in range(w):
            if not bits[r, c]:
                continue
            for dr, dc in ((-1, -1), (-1, 0), (-1, 1), (0, -1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and bits[rr, cc]:
                    uf.union(r * w + c, rr * w + cc)
    groups = {}
    for r in range(h):
        for c in range(w):
            if bits[r, c]:
                groups.setdefault(uf.find(r * w + c), []).append((r, c))
    return [frozenset(g) for g in groups.values()]


def largest_component_bruteforce(bits):
    """(pixels, size, anchor) of the winning component under the size-then-
    earliest-anchor rule, or None for an all-False map."""
    comps = union_find_components(bits)
    if not comps:
        return None
    w = np.asarray(bits).shape[1]

    def anchor(comp):
        return min(comp, key=lambda rc: rc[0] * w + rc[1])

    best = min(comps, key=lambda comp: (-len(comp), anchor(comp)[0] * w + anchor(comp)[1]))
    return best, len(best), anchor(best)


def roc_bruteforce(labels, scores):
    """Exhaustive threshold sweep of the <=theta detector, pure Python.

    Returns (points, auc) with points as (threshold, fpr, tpr) tuples.
    """
    pairs = list(zip(labels, scores))
    n_pos = sum(1 for noisy, _ in pairs if noisy)
    n_neg = len(pairs) - n_pos
    thresholds = [float("-inf")] + sorted({s for _, s in pairs})
    points = []
    for theta in thresholds:
        tp = sum(1 for noisy, s in pairs if noisy and s <= theta)
        fp = sum(1 for noisy, s in pairs if not noisy and s <= theta)
        points.append((theta, fp / n_neg, tp / n_pos))
    auc = 0.0
    for (_, f0, t0), (_, f1, t1) in zip(points, points[1:]):
        auc += (f1 - f0) * (t0 + t1) / 2.0
    return points, auc


def iou_raster(box_a, box_b, width=64, height=64):
    """IoU by literally counting pixels on a canvas."""
    grid_a = np.zeros((height, width), dtype=bool)
    grid_b = np.zeros((height, width), dtype=bool)
    ax0, ay0, ax1, ay1 = box_a
    bx0, by0, bx1, by1 = box_b
    grid_a[ay0:ay1 + 1, ax0:ax1 + 1] = True
    grid_b[by0:by1 + 1, bx0:bx1 + 1] = True
    union = np.count_nonzero(grid_a | grid_b)
    return np.count_nonzero(grid_a & grid_b) / union


def resize_nearest_loops(values, height, width):
    """Index-formula resize recomputed with explicit loops."""
    values = np.asarray(values)
    h, w = values.shape
    out = np.empty((height, width), dtype=values.dtype)
    for u in range(height):
        for v in range(width):
            out[u, v] = values[(u * h) // height, (v * w) // width]
    return out


def project_loops(tensor_data, mean, xi):
    """Per-cell dot products with explicit loops."""
    h, w, d = tensor_data.shape
    out = np.empty((h, w))
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for c in range(d):
                acc += (float(tensor_data[i, j, c]) - mean[c]) * xi[c]
            out[i, j] = acc
    return out
