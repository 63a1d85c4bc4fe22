"""Relay-to-destination assignment: maximum weight matching and a random baseline."""

import math

import numpy as np


def _as_matrix(weights):
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.size == 0:
        raise ValueError("weights must be a non-empty 2-D matrix")
    if w.shape[0] > w.shape[1]:
        raise ValueError(f"need rows ≤ columns, got {w.shape[0]}x{w.shape[1]}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    return w


def _min_cost_assignment(cost):
    """Shortest augmenting path with potentials on an ``n x m`` cost matrix, n ≤ m.

    Returns the column assigned to each row.
    """
    n, m = cost.shape
    inf = math.inf
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=np.int64)  # p[j]: row (1-based) matched to column j
    way = np.zeros(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            free = ~used[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], inf)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    out = np.empty(n, dtype=np.int64)
    for j in range(1, m + 1):
        if p[j]:
            out[p[j] - 1] = j - 1
    return out


def _best_total(w):
    if w.shape[0] == 0:
        return 0.0
    cols = _min_cost_assignment(-w)
    return float(w[np.arange(w.shape[0]), cols].sum())


def assignment_weight(weights, assignment):
    w = np.asarray(weights, dtype=np.float64)
    return float(sum(w[r, c] for r, c in enumerate(assignment)))


def max_weight_matching(weights, rel_tol=1e-9):
    """Injective row-to-column assignment of maximum total weight.

    Among optimal assignments the lexicographically smallest column tuple is
    returned: rows are fixed one by one to the smallest column that still
    admits an optimal completion. Returns a tuple ``a`` with ``a[r]`` the
    column chosen for row ``r``.
    """
    w = _as_matrix(weights)
    n, m = w.shape
    best = _best_total(w)
    tol = rel_tol * max(1.0, float(np.abs(w).sum()))
    rows = list(range(n))
    cols = list(range(m))
    chosen = []
    fixed = 0.0
    for r in range(n):
        rest_rows = rows[r + 1:]
        for c in cols:
            rest_cols = [x for x in cols if x != c]
            sub = w[np.ix_(rest_rows, rest_cols)]
            total = fixed + w[r, c] + _best_total(sub)
            if total >= best - tol:
                chosen.append(c)
                fixed += w[r, c]
                cols = rest_cols
                break
    return tuple(chosen)


def random_assignment(weights, seed):
    """Uniformly random injective assignment from a seeded generator."""
    w = _as_matrix(weights)
    n, m = w.shape
    perm = np.random.default_rng(seed).permutation(m)
    return tuple(int(c) for c in perm[:n])
