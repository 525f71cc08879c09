"""Shipped set functions.

Each objective is immutable after construction and exposes ``n``,
``value(S)`` and a few class attributes the algorithms read:

``objective_class``
    ``"linear"``, ``"submodular-monotone"`` or ``"submodular-nonmonotone"``;
    selects the default sampling probability.
``may_be_negative``
    True when the function can take negative values, which voids the
    approximation guarantees.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .core import OracleError, as_index_array


class NonPSDError(OracleError):
    """Cholesky factorisation of a kernel submatrix failed."""


class SetFunction:
    n: int
    kind = "function"
    objective_class = "submodular-nonmonotone"
    may_be_negative = False

    def value(self, S: Iterable[int]) -> float:
        return self._value(self._index(S))

    def _index(self, S):
        idx = as_index_array(S)
        if idx.size and (idx[0] < 0 or idx[-1] >= self.n):
            raise OracleError(f"set {idx.tolist()} leaves the ground set of size {self.n}")
        return idx

    def _value(self, idx: np.ndarray) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class ModularFunction(SetFunction):
    kind = "modular"
    objective_class = "linear"

    def __init__(self, weights: Sequence[float]):
        self.weights = np.ascontiguousarray(weights, dtype=float)
        self.n = len(self.weights)
        self.may_be_negative = bool((self.weights < 0).any())

    def _value(self, idx):
        return float(_kernels.modular_value(self.weights, idx))

    def to_dict(self):
        return {"kind": "modular", "weights": self.weights.tolist()}


class WeightedCoverage(SetFunction):
    """Total weight of universe items covered by the chosen elements."""

    kind = "coverage"
    objective_class = "submodular-monotone"

    def __init__(self, covers: Sequence[Iterable[int]], item_weights: Optional[Sequence[float]] = None,
                 universe_size: Optional[int] = None):
        covers = [sorted(set(int(x) for x in c)) for c in covers]
        if universe_size is None:
            universe_size = 1 + max((c[-1] for c in covers if c), default=-1)
        if item_weights is None:
            item_weights = np.ones(universe_size)
        item_weights = np.ascontiguousarray(item_weights, dtype=float)
        if len(item_weights) != universe_size:
            raise ValueError("one weight per universe item required")
        if (item_weights < 0).any():
            raise ValueError("coverage weights must be non-negative")
        self.covers = covers
        self.item_weights = item_weights
        self.n = len(covers)
        self.cover = np.zeros((self.n, universe_size), dtype=np.bool_)
        for i, c in enumerate(covers):
            if c and (c[0] < 0 or c[-1] >= universe_size):
                raise ValueError(f"element {i} covers an item outside the universe")
            self.cover[i, c] = True

    def _value(self, idx):
        return float(_kernels.coverage_value(self.cover, self.item_weights, idx))

    def to_dict(self):
        return {"kind": "coverage", "covers": self.covers, "item_weights": self.item_weights.tolist()}


class RecommendationCut(SetFunction):
    """Relevance to a target set minus a within-set similarity penalty.

    ``f(S) = sum_{i in S} sum_{j in relevant} s[i, j] - lam * sum_{i, j in S} s[i, j]``
    """

    kind = "cut"

    def __init__(self, similarity, relevant: Optional[Iterable[int]] = None, lam: float = 1.0):
        s = np.ascontiguousarray(similarity, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError("similarity must be a square matrix")
        if not np.allclose(s, s.T, rtol=0, atol=1e-12):
            raise ValueError("similarity must be symmetric")
        if (s < 0).any():
            raise ValueError("similarity must be non-negative")
        if not 0.0 <= lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        self.similarity = s
        self.n = s.shape[0]
        self.relevant = frozenset(range(self.n)) if relevant is None else frozenset(int(x) for x in relevant)
        self.lam = float(lam)
        rel = as_index_array(self.relevant)
        self.relevance = np.ascontiguousarray(s[:, rel].sum(axis=1)) if rel.size else np.zeros(self.n)
        self.objective_class = "submodular-nonmonotone" if lam > 0 else "linear"
        # outside the relevant set the penalty can exceed the relevance term
        self.may_be_negative = bool(lam > 0 and len(self.relevant) < self.n)

    def _value(self, idx):
        return float(_kernels.cut_value(self.relevance, self.similarity, self.lam, idx))

    def to_dict(self):
        return {"kind": "cut", "similarity": self.similarity.tolist(),
                "relevant": sorted(self.relevant), "lambda": self.lam}


class LogDetDPP(SetFunction):
    """``log det(I + alpha K_S)`` (regularized) or ``log det(K_S)`` (plain).

    The plain variant can be negative; runs on it carry the guarantees-void
    flag.
    """

    kind = "logdet"

    def __init__(self, kernel, alpha: float = 1.0, regularized: bool = True, check_psd: bool = True):
        K = np.ascontiguousarray(kernel, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError("kernel must be a square matrix")
        if not np.allclose(K, K.T, rtol=0, atol=1e-10):
            raise ValueError("kernel must be symmetric")
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        if check_psd and K.size and np.linalg.eigvalsh(K).min() < -1e-9:
            raise NonPSDError("kernel is not positive semidefinite")
        self.kernel = K
        self.n = K.shape[0]
        self.alpha = float(alpha)
        self.regularized = bool(regularized)
        self.objective_class = "submodular-monotone" if regularized else "submodular-nonmonotone"
        self.may_be_negative = not regularized

    def _value(self, idx):
        v, ok = _kernels.logdet_value(self.kernel, idx, self.alpha, self.regularized)
        if not ok:
            raise NonPSDError(f"kernel submatrix on {idx.tolist()} is not positive definite")
        return float(v)

    def to_dict(self):
        return {"kind": "logdet", "kernel": self.kernel.tolist(), "alpha": self.alpha,
                "variant": "regularized" if self.regularized else "plain"}


def gaussian_kernel(points, h: float) -> np.ndarray:
    """``K[i, j] = exp(-d(i, j)**2 / h**2)`` over Euclidean distances."""
    if not h > 0:
        raise ValueError("bandwidth h must be positive")
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    diff = X[:, None, :] - X[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    K = np.exp(-d2 / (h * h))
    return (K + K.T) / 2.0


def objective_from_dict(d: dict, load_matrix=None) -> SetFunction:
    """Build an objective from its JSON form.

    ``load_matrix(path)`` resolves ``*_csv`` fields; the harness supplies one
    that is relative to the instance file.
    """
    kind = d["kind"]

    def matrix(key):
        if key in d:
            return np.asarray(d[key], dtype=float)
        if key + "_csv" in d:
            if load_matrix is None:
                raise ValueError(f"{key}_csv given but no matrix loader available")
            return load_matrix(d[key + "_csv"])
        raise ValueError(f"objective {kind!r} needs {key!r} or {key + '_csv'!r}")

    if kind == "modular":
        return ModularFunction(d["weights"])
    if kind == "coverage":
        return WeightedCoverage(d["covers"], d.get("item_weights"), d.get("universe_size"))
    if kind == "cut":
        return RecommendationCut(matrix("similarity"), d.get("relevant"), d.get("lambda", 1.0))
    if kind == "logdet":
        if "points" in d:
            K = gaussian_kernel(d["points"], d["bandwidth"])
        else:
            K = matrix("kernel")
        return LogDetDPP(K, d.get("alpha", 1.0), d.get("variant", "regularized") == "regularized")
    raise ValueError(f"unknown objective kind {kind!r}")
