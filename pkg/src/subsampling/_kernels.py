"""Numeric kernels behind the shipped objectives and the graphic matroid.

Every kernel exists twice: a numba ``@njit`` version with explicit loops and a
vectorised numpy version.  The numba path is used when numba imports and the
environment variable ``SUBSAMPLING_DISABLE_NUMBA`` is unset (or ``0``).
"""

import os

import numpy as np

_DISABLE = os.environ.get("SUBSAMPLING_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLE:
        raise ImportError("numba disabled by SUBSAMPLING_DISABLE_NUMBA")
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# pure numpy path
# ---------------------------------------------------------------------------

def modular_value_np(weights, idx):
    return float(weights[idx].sum())


def coverage_value_np(cover, item_weights, idx):
    if idx.shape[0] == 0:
        return 0.0
    covered = cover[idx].any(axis=0)
    return float(item_weights[covered].sum())


def cut_value_np(relevance, similarity, lam, idx):
    if idx.shape[0] == 0:
        return 0.0
    sub = similarity[np.ix_(idx, idx)]
    return float(relevance[idx].sum() - lam * sub.sum())


def logdet_value_np(kernel, idx, alpha, regularized):
    """Return ``(value, ok)``; ``ok`` is False when the factorisation fails."""
    m = idx.shape[0]
    if m == 0:
        return 0.0, True
    sub = kernel[np.ix_(idx, idx)]
    if regularized:
        sub = np.eye(m) + alpha * sub
    try:
        chol = np.linalg.cholesky(sub)
    except np.linalg.LinAlgError:
        return np.nan, False
    diag = np.diag(chol)
    if not np.all(diag > 0.0):
        return np.nan, False
    return float(2.0 * np.log(diag).sum()), True


def is_forest_np(edge_u, edge_v, num_vertices, idx):
    # oriented incidence columns are linearly independent iff the edges are acyclic
    m = idx.shape[0]
    if m == 0:
        return True
    inc = np.zeros((num_vertices, m))
    cols = np.arange(m)
    inc[edge_u[idx], cols] += 1.0
    inc[edge_v[idx], cols] -= 1.0
    return int(np.linalg.matrix_rank(inc)) == m


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def modular_value_nb(weights, idx):
        total = 0.0
        for t in range(idx.shape[0]):
            total += weights[idx[t]]
        return total

    @njit(cache=True)
    def coverage_value_nb(cover, item_weights, idx):
        n_items = cover.shape[1]
        total = 0.0
        for j in range(n_items):
            for t in range(idx.shape[0]):
                if cover[idx[t], j]:
                    total += item_weights[j]
                    break
        return total

    @njit(cache=True)
    def cut_value_nb(relevance, similarity, lam, idx):
        m = idx.shape[0]
        first = 0.0
        second = 0.0
        for a in range(m):
            i = idx[a]
            first += relevance[i]
            for b in range(m):
                second += similarity[i, idx[b]]
        return first - lam * second

    @njit(cache=True)
    def logdet_value_nb(kernel, idx, alpha, regularized):
        m = idx.shape[0]
        if m == 0:
            return 0.0, True
        a = np.empty((m, m))
        for r in range(m):
            for c in range(m):
                v = kernel[idx[r], idx[c]]
                if regularized:
                    v = alpha * v
                    if r == c:
                        v += 1.0
                a[r, c] = v
        # in-place lower Cholesky; a non-positive pivot means not positive definite
        total = 0.0
        for j in range(m):
            s = a[j, j]
            for t in range(j):
                s -= a[j, t] * a[j, t]
            if not s > 0.0:
                return np.nan, False
            d = np.sqrt(s)
            a[j, j] = d
            total += np.log(d)
            for r in range(j + 1, m):
                s = a[r, j]
                for t in range(j):
                    s -= a[r, t] * a[j, t]
                a[r, j] = s / d
        return 2.0 * total, True

    @njit(cache=True)
    def is_forest_nb(edge_u, edge_v, num_vertices, idx):
        parent = np.arange(num_vertices)
        for t in range(idx.shape[0]):
            a = edge_u[idx[t]]
            b = edge_v[idx[t]]
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a == b:
                return False
            parent[a] = b
        return True

    modular_value = modular_value_nb
    coverage_value = coverage_value_nb
    cut_value = cut_value_nb
    logdet_value = logdet_value_nb
    is_forest = is_forest_nb
else:
    modular_value = modular_value_np
    coverage_value = coverage_value_np
    cut_value = cut_value_np
    logdet_value = logdet_value_np
    is_forest = is_forest_np


BACKEND = "numba" if HAVE_NUMBA else "numpy"
