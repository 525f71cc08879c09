"""Independence systems: matroids, matchoids and a bounded knapsack.

All systems share the attribute ``n`` (size of the index space) and the
declared extendibility parameter ``p``.  ``is_independent`` is the raw,
uncounted membership test; counting happens in
:class:`subsampling.core.IndependenceOracle`.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .core import IndependenceOracle, InvariantViolation, OracleError, as_index_array


class IndependenceSystem:
    n: int
    p: int
    kind: str = "system"
    is_matroid_class = False

    def check_elements(self, S):
        for x in S:
            if not 0 <= x < self.n:
                raise OracleError(f"element {x} outside ground set of size {self.n}")

    def is_independent(self, S: Iterable[int]) -> bool:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class UniformMatroid(IndependenceSystem):
    kind = "uniform"
    is_matroid_class = True

    def __init__(self, n: int, k: int):
        if n < 0 or k < 0:
            raise ValueError("uniform matroid needs n >= 0 and k >= 0")
        self.n, self.k, self.p = int(n), int(k), 1

    def is_independent(self, S):
        S = frozenset(S)
        self.check_elements(S)
        return len(S) <= self.k

    def to_dict(self):
        return {"kind": "uniform", "n": self.n, "k": self.k}


class PartitionMatroid(IndependenceSystem):
    kind = "partition"
    is_matroid_class = True

    def __init__(self, n: int, blocks: Sequence[Iterable[int]], caps: Sequence[int]):
        blocks = [frozenset(int(x) for x in b) for b in blocks]
        if len(blocks) != len(caps):
            raise ValueError("one cap per block required")
        seen: set = set()
        for b in blocks:
            if seen & b:
                raise ValueError(f"partition blocks overlap on {sorted(seen & b)}")
            seen |= b
        if seen != set(range(n)):
            raise ValueError("partition blocks must cover the ground set exactly")
        if any(c < 0 for c in caps):
            raise ValueError("caps must be non-negative")
        self.n, self.p = int(n), 1
        self.blocks = blocks
        self.caps = [int(c) for c in caps]
        self._block_of = np.empty(n, dtype=np.int64)
        for j, b in enumerate(blocks):
            for x in b:
                self._block_of[x] = j

    def is_independent(self, S):
        S = frozenset(S)
        self.check_elements(S)
        counts = [0] * len(self.blocks)
        for x in S:
            j = self._block_of[x]
            counts[j] += 1
            if counts[j] > self.caps[j]:
                return False
        return True

    def to_dict(self):
        return {"kind": "partition", "n": self.n,
                "blocks": [sorted(b) for b in self.blocks], "caps": self.caps}


class GraphicMatroid(IndependenceSystem):
    """Element ``i`` is edge ``edges[i]``; independent sets are forests."""

    kind = "graphic"
    is_matroid_class = True

    def __init__(self, num_vertices: int, edges: Sequence[Sequence[int]]):
        edges = [(int(a), int(b)) for a, b in edges]
        for a, b in edges:
            if not (0 <= a < num_vertices and 0 <= b < num_vertices):
                raise ValueError(f"edge ({a}, {b}) references a missing vertex")
        self.num_vertices = int(num_vertices)
        self.edges = edges
        self.n, self.p = len(edges), 1
        self._u = np.array([a for a, _ in edges], dtype=np.int64)
        self._v = np.array([b for _, b in edges], dtype=np.int64)

    def is_independent(self, S):
        S = frozenset(S)
        self.check_elements(S)
        # fresh union-find per query
        return bool(_kernels.is_forest(self._u, self._v, self.num_vertices, as_index_array(S)))

    def to_dict(self):
        return {"kind": "graphic", "num_vertices": self.num_vertices,
                "edges": [list(e) for e in self.edges]}


class Matchoid(IndependenceSystem):
    """Member matroids over (possibly overlapping) ground subsets.

    ``members`` is a list of ``(ground_subset, matroid)`` pairs; a set is
    independent iff its restriction to every ground subset is independent in
    that member.  ``p`` is computed as the largest number of ground subsets
    any single element belongs to.
    """

    kind = "matchoid"

    def __init__(self, n: int, members: Sequence[tuple]):
        self.n = int(n)
        self.members = []
        multiplicity = np.zeros(self.n, dtype=np.int64)
        for ground, matroid in members:
            ground = frozenset(int(x) for x in ground)
            if matroid.n != self.n:
                raise ValueError("member matroids must be defined on the same index space")
            if not getattr(matroid, "is_matroid_class", False):
                raise ValueError(f"matchoid member of kind {matroid.kind!r} is not a matroid")
            for x in ground:
                if not 0 <= x < self.n:
                    raise ValueError(f"ground subset element {x} out of range")
                multiplicity[x] += 1
            self.members.append((ground, matroid))
        self.multiplicity = multiplicity
        self.p = int(multiplicity.max()) if self.n else 0

    @property
    def m(self) -> int:
        return len(self.members)

    def is_independent(self, S):
        S = frozenset(S)
        self.check_elements(S)
        return all(mat.is_independent(S & ground) for ground, mat in self.members)

    def to_dict(self):
        return {"kind": "matchoid", "n": self.n,
                "members": [{"ground": sorted(g), "matroid": mat.to_dict()}
                            for g, mat in self.members]}


class BoundedKnapsack(IndependenceSystem):
    """Knapsack with every size in ``[1, p]``: p-extendible, not a matchoid."""

    kind = "knapsack"

    def __init__(self, sizes: Sequence[float], capacity: float):
        sizes = np.asarray(sizes, dtype=float)
        if sizes.size and sizes.min() < 1.0:
            raise ValueError("knapsack sizes must be at least 1")
        if capacity < 0:
            raise ValueError("capacity must be non-negative")
        self.sizes = sizes
        self.capacity = float(capacity)
        self.n = len(sizes)
        self.p = max(1, int(math.ceil(sizes.max()))) if self.n else 1

    def is_independent(self, S):
        S = frozenset(S)
        self.check_elements(S)
        return float(self.sizes[as_index_array(S)].sum()) <= self.capacity

    def to_dict(self):
        return {"kind": "knapsack", "sizes": self.sizes.tolist(), "capacity": self.capacity}


def constraint_from_dict(d: dict, n: Optional[int] = None) -> IndependenceSystem:
    kind = d["kind"]
    if kind == "uniform":
        return UniformMatroid(d.get("n", n), d["k"])
    if kind == "partition":
        return PartitionMatroid(d.get("n", n), d["blocks"], d["caps"])
    if kind == "graphic":
        return GraphicMatroid(d["num_vertices"], d["edges"])
    if kind == "knapsack":
        return BoundedKnapsack(d["sizes"], d["capacity"])
    if kind == "matchoid":
        size = d.get("n", n)
        members = [(m["ground"], constraint_from_dict(m["matroid"], size)) for m in d["members"]]
        return Matchoid(size, members)
    if kind == "genre-limits":
        return genre_limits(d.get("n", n), d["genres"], d["genre_caps"], d["k"])
    raise ValueError(f"unknown constraint kind {kind!r}")


def genre_limits(n: int, genres: Sequence[Iterable[int]], genre_caps, k: int) -> Matchoid:
    """Per-genre caps over overlapping genre sets plus one global cardinality cap."""
    if isinstance(genre_caps, (int, np.integer)):
        genre_caps = [int(genre_caps)] * len(genres)
    if len(genre_caps) != len(genres):
        raise ValueError("one cap per genre required")
    members = [(frozenset(g), UniformMatroid(n, cap)) for g, cap in zip(genres, genre_caps)]
    members.append((frozenset(range(n)), UniformMatroid(n, k)))
    return Matchoid(n, members)


# ---------------------------------------------------------------------------
# matchoid helper used by the streaming exchange
# ---------------------------------------------------------------------------

def matchoid_violated_members(matchoid: Matchoid, S, u: int,
                              oracle: Optional[IndependenceOracle] = None) -> list:
    """Indices of members rejecting ``(S + u)`` restricted to their ground subset.

    Every member is queried (no short-circuit).  ``S`` must be independent.
    """
    S = frozenset(S)
    if not matchoid.is_independent(S):
        raise OracleError("matchoid_violated_members requires an independent S")
    if u in S:
        raise OracleError("u must not already belong to S")
    oracle = oracle if oracle is not None else IndependenceOracle(matchoid)
    Su = S | {u}
    return [ell for ell in range(matchoid.m) if not oracle.member_independent(ell, Su)]


# ---------------------------------------------------------------------------
# exhaustive validators (small ground sets only)
# ---------------------------------------------------------------------------

def independent_family(system: IndependenceSystem, max_n: int = 14) -> list:
    """Every independent set, as frozensets, found by brute force."""
    n = system.n
    if n > max_n:
        raise ValueError(f"exhaustive enumeration refused for n={n} > {max_n}")
    out = []
    for mask in range(1 << n):
        S = frozenset(i for i in range(n) if mask >> i & 1)
        if system.is_independent(S):
            out.append(S)
    return out


def check_downward_closed(system: IndependenceSystem, max_n: int = 12):
    """``None`` if ∅ is independent and subsets of independent sets are; else a witness."""
    fam = set(independent_family(system, max_n))
    if frozenset() not in fam:
        return (frozenset(),)
    for S in fam:
        for x in S:
            if S - {x} not in fam:
                return (S, S - {x})
    return None


def validate_matroid(system: IndependenceSystem, max_n: int = 12):
    """Exhaustive matroid-axiom check.

    Returns ``(True, None)`` or ``(False, witness)``; the witness is either a
    downward-closure failure or an exchange triple ``(A, B, "exchange")``.
    """
    bad = check_downward_closed(system, max_n)
    if bad is not None:
        return False, bad
    fam = independent_family(system, max_n)
    famset = set(fam)
    for A in fam:
        for B in fam:
            if len(A) < len(B) and not any(A | {u} in famset for u in B - A):
                return False, (A, B, "exchange")
    return True, None


def _independence_table(system, max_n):
    n = system.n
    if n > max_n:
        raise ValueError(f"exhaustive enumeration refused for n={n} > {max_n}")
    return [system.is_independent(frozenset(i for i in range(n) if mask >> i & 1))
            for mask in range(1 << n)]


def _submasks(mask):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def measure_extendibility(system: IndependenceSystem, max_n: int = 10) -> int:
    """Smallest p for which the system is p-extendible, by exhaustive search.

    For every independent ``B``, every ``e`` outside it and every ``A ⊆ B``
    with ``A + e`` independent, finds the smallest ``Y ⊆ B \\ A`` with
    ``(B \\ Y) + e`` independent.  The answer is the worst case over all
    such triples.  The parameter ranges over positive integers, so systems
    that never need a repair (free or rank-0 matroids) report 1.
    """
    n = system.n
    ind = _independence_table(system, max_n)
    best = 0
    for B in range(1 << n):
        if not ind[B]:
            continue
        for e in range(n):
            bit = 1 << e
            if B & bit or ind[B | bit]:
                continue
            # smallest repair set inside every C ⊆ B, by subset DP
            smallest = {}
            for C in sorted(_submasks(B), key=lambda m: bin(m).count("1")):
                v = bin(C).count("1") if ind[(B & ~C) | bit] else n + 1
                c = C
                while c:
                    low = c & -c
                    v = min(v, smallest[C & ~low])
                    c &= c - 1
                smallest[C] = v
            for A in _submasks(B):
                if ind[A | bit]:
                    need = smallest[B & ~A]
                    if need > n:
                        raise InvariantViolation("no repair set found; system is not downward closed")
                    best = max(best, need)
    return max(best, 1)
