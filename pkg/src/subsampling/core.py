"""Ground sets, counted oracles, marginal shorthands and the sampling coins.

Elements are integer indices ``0 .. n-1``.  Index order is the default stream
arrival order and the tie-break order everywhere in the package.  Sets of
elements are plain Python ``set``/``frozenset`` objects; anything iterable over
ints is accepted as input.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

import numpy as np

ElementSet = frozenset

MASK64 = (1 << 64) - 1


class OracleError(RuntimeError):
    """An oracle was queried with something it cannot answer."""


class InvariantViolation(AssertionError):
    """An internal invariant that the theory guarantees did not hold."""


def as_index_array(S: Iterable[int]) -> np.ndarray:
    # sorted so every oracle sees a set in one canonical order
    return np.array(sorted(S), dtype=np.int64)


class ValueOracle:
    """Per-run counting wrapper around an objective.

    The objective itself is immutable and can be shared between runs; the
    counter lives here.
    """

    def __init__(self, objective):
        self.objective = objective
        self.n = objective.n
        self.query_count = 0

    def evaluate(self, S: Iterable[int]) -> float:
        self.query_count += 1
        return self.objective.value(S)

    __call__ = evaluate


class IndependenceOracle:
    """Per-run counting wrapper around an independence system.

    Matchoids are charged one query per member matroid actually consulted;
    every other system is charged one query per membership test.
    """

    def __init__(self, system):
        self.system = system
        self.n = system.n
        self.query_count = 0
        self.members = getattr(system, "members", None)

    def is_independent(self, S: Iterable[int]) -> bool:
        if self.members is None:
            self.query_count += 1
            return self.system.is_independent(S)
        S = frozenset(S)
        self.system.check_elements(S)
        for ground, matroid in self.members:
            self.query_count += 1
            if not matroid.is_independent(S & ground):
                return False
        return True

    __call__ = is_independent

    def member_independent(self, ell: int, S: Iterable[int]) -> bool:
        ground, matroid = self.members[ell]
        self.query_count += 1
        return matroid.is_independent(frozenset(S) & ground)


def marginal(f: ValueOracle, u: int, S: Iterable[int]) -> float:
    """``f(S + u) - f(S)``; always exactly two evaluate calls."""
    S = frozenset(S)
    return f.evaluate(S | {u}) - f.evaluate(S)


def set_marginal(f: ValueOracle, A: Iterable[int], S: Iterable[int]) -> float:
    S = frozenset(S)
    return f.evaluate(S | frozenset(A)) - f.evaluate(S)


def arrival_prefix(u: int, S: Iterable[int], rank: Optional[Sequence[int]] = None) -> frozenset:
    """Members of ``S`` that arrived strictly before ``u``.

    ``rank[e]`` is the arrival position of element ``e``; ``None`` means index
    order.
    """
    if rank is None:
        return frozenset(x for x in S if x < u)
    r = rank[u]
    return frozenset(x for x in S if rank[x] < r)


def arrival_marginal(f: ValueOracle, u: int, S: Iterable[int], rank=None) -> float:
    """Marginal of ``u`` against the earlier-arriving part of ``S``."""
    return marginal(f, u, arrival_prefix(u, S, rank))


def arrival_marginal_sum(f: ValueOracle, T: Iterable[int], S: Iterable[int], rank=None) -> float:
    S = frozenset(S)
    return sum(arrival_marginal(f, u, S, rank) for u in sorted(T))


# ---------------------------------------------------------------------------
# randomness
# ---------------------------------------------------------------------------

def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Child seed for trial/repetition ``index`` of ``master``."""
    return splitmix64((master & MASK64) ^ splitmix64(index & MASK64))


@dataclass(frozen=True)
class SampleBits:
    bits: np.ndarray
    q: float
    seed: Optional[int] = None

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, i):
        return bool(self.bits[i])

    @classmethod
    def from_sequence(cls, bits: Sequence, q: float = 0.5) -> "SampleBits":
        return cls(np.asarray(bits, dtype=bool), q, None)

    def sampled(self) -> list:
        return [int(i) for i in np.flatnonzero(self.bits)]


def check_probability(q: float) -> float:
    q = float(q)
    if not (0.0 < q <= 1.0):
        raise ValueError(f"sampling probability must lie in (0, 1], got {q!r}")
    return q


def draw_sample_bits(n: int, q: float, seed: int) -> SampleBits:
    """Independent coins with ``Pr[bit = 1] = q``.

    Bit ``i`` is the ``i``-th uniform of a PCG64 stream keyed by ``seed``, so it
    depends only on ``(seed, i, q)`` and prefixes agree across different ``n``.
    """
    q = check_probability(q)
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.Generator(np.random.PCG64(seed & MASK64))
    u = rng.random(n)
    return SampleBits(u < q, q, seed)


def enumerate_bit_vectors(n: int):
    """All ``2**n`` coin vectors, in binary-counting order (bit 0 fastest)."""
    for combo in itertools.product((False, True), repeat=n):
        yield np.array(combo[::-1], dtype=bool)


def bits_probability(bits: np.ndarray, q: float) -> float:
    k = int(np.count_nonzero(bits))
    return (q ** k) * ((1.0 - q) ** (len(bits) - k))


# ---------------------------------------------------------------------------
# run report
# ---------------------------------------------------------------------------

GUARANTEES_VOID = "non-negativity violated: guarantees void"


@dataclass
class RunReport:
    solution: frozenset
    value: float
    value_queries: int
    independence_queries: int
    peak_stored_elements: int
    selections: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    # per-arrival solutions, filled by the streaming algorithms on request
    prefixes: list = field(default_factory=list, repr=False)

    def to_dict(self, with_trace: bool = False) -> dict:
        d: dict[str, Any] = {
            "solution": sorted(int(x) for x in self.solution),
            "value": float(self.value),
            "value_queries": int(self.value_queries),
            "independence_queries": int(self.independence_queries),
            "peak_stored_elements": int(self.peak_stored_elements),
            "selections": [int(x) for x in self.selections],
            "flags": list(self.flags),
        }
        if with_trace:
            d["trace"] = self.trace
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def finish_report(f: ValueOracle, ind: IndependenceOracle, solution, peak: int,
                  selections=(), trace=None, objective=None) -> RunReport:
    """Recompute the final value (one extra counted query) and package a report."""
    solution = frozenset(solution)
    value = f.evaluate(solution)
    flags = []
    objective = objective if objective is not None else f.objective
    if getattr(objective, "may_be_negative", False):
        flags.append(GUARANTEES_VOID)
    return RunReport(solution, value, f.query_count, ind.query_count,
                     max(peak, len(solution)), list(selections), trace or [], flags)


# ---------------------------------------------------------------------------
# brute-force validators for set functions
# ---------------------------------------------------------------------------

def _all_subsets(n):
    for mask in range(1 << n):
        yield mask, frozenset(i for i in range(n) if mask >> i & 1)


def _table(objective):
    n = objective.n
    return {mask: objective.value(S) for mask, S in _all_subsets(n)}


def check_submodular(objective, tol: float = 1e-9, max_n: int = 10):
    """Exhaustive diminishing-returns check.

    Returns ``None`` on success, otherwise a witness ``(A, B, e)`` with
    ``A ⊆ B``, ``e ∉ B`` and ``f(e|A) < f(e|B) - tol``.
    """
    n = objective.n
    if n > max_n:
        raise ValueError(f"exhaustive check refused for n={n} > {max_n}")
    val = _table(objective)
    for B in range(1 << n):
        A = B
        while True:
            for e in range(n):
                if B >> e & 1:
                    continue
                bit = 1 << e
                if val[A | bit] - val[A] < val[B | bit] - val[B] - tol:
                    return (_members(A), _members(B), e)
            if A == 0:
                break
            A = (A - 1) & B
    return None


def check_monotone(objective, tol: float = 1e-9, max_n: int = 10):
    """Returns ``None`` or a witness ``(A, e)`` with ``f(A + e) < f(A) - tol``."""
    n = objective.n
    if n > max_n:
        raise ValueError(f"exhaustive check refused for n={n} > {max_n}")
    val = _table(objective)
    for A in range(1 << n):
        for e in range(n):
            if not A >> e & 1 and val[A | 1 << e] < val[A] - tol:
                return (_members(A), e)
    return None


def check_nonnegative(objective, tol: float = 0.0, max_n: int = 12):
    n = objective.n
    if n > max_n:
        raise ValueError(f"exhaustive check refused for n={n} > {max_n}")
    for _, S in _all_subsets(n):
        if objective.value(S) < -tol:
            return S
    return None


def _members(mask):
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)
