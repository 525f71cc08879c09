"""Subsampled greedy for p-extendible systems, its instrumented twin, and the
brute-force oracles used to check both.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .core import (
    IndependenceOracle,
    InvariantViolation,
    RunReport,
    SampleBits,
    ValueOracle,
    bits_probability,
    check_probability,
    draw_sample_bits,
    enumerate_bit_vectors,
    finish_report,
    marginal,
)

OBJECTIVE_CLASSES = ("submodular-nonmonotone", "submodular-monotone", "linear")


def default_q(p: int, objective_class: str) -> float:
    """1/(p+1) for submodular objectives, 1/p for linear ones."""
    if p is None or p < 1:
        raise ValueError(f"constraint parameter p must be a positive integer, got {p!r}")
    if objective_class not in OBJECTIVE_CLASSES:
        raise ValueError(f"unknown objective class {objective_class!r}")
    return 1.0 / p if objective_class == "linear" else 1.0 / (p + 1)


@dataclass
class OfflineConfig:
    q: Optional[float] = None
    objective_class: Optional[str] = None
    tolerance: float = 0.0
    seed: int = 0
    lazy_evaluation: bool = False
    trace: bool = False

    def resolve_q(self, system, objective=None) -> float:
        if self.q is not None:
            return check_probability(self.q)
        cls = self.objective_class or getattr(objective, "objective_class", "submodular-nonmonotone")
        return default_q(system.p, cls)


@dataclass
class OfflineTrace:
    """Per-iteration bookkeeping of the instrumented greedy."""

    records: list = field(default_factory=list)
    opt: Optional[frozenset] = None
    final_O: Optional[frozenset] = None

    def removal_sets(self) -> dict:
        return {r["u"]: frozenset(r["O_u"]) for r in self.records}


def _resolve_bits(objective, system, config: OfflineConfig, bits) -> SampleBits:
    if bits is None:
        return draw_sample_bits(objective.n, config.resolve_q(system, objective), config.seed)
    if isinstance(bits, SampleBits):
        out = bits
    else:
        out = SampleBits(np.asarray(bits, dtype=bool), config.q if config.q is not None else float("nan"))
    if len(out) != objective.n:
        raise ValueError("need exactly one sampling bit per element")
    return out


def _check_sizes(objective, system):
    if objective.n != system.n:
        raise ValueError(f"objective has {objective.n} elements but constraint has {system.n}")


def _greedy_scan(f, ind, candidates, S, eps):
    """One greedy step over ``candidates`` (ascending).

    Returns ``(best, gain)`` or ``(None, None)``.  Candidates that are already
    infeasible are pruned in place; independence systems are downward closed,
    so they can never become feasible again.
    """
    best, best_gain = None, None
    keep = []
    for u in candidates:
        if not ind.is_independent(S | {u}):
            continue
        keep.append(u)
        g = marginal(f, u, S)
        if g > eps and (best is None or g > best_gain + eps):
            best, best_gain = u, g
    candidates[:] = keep
    return best, best_gain


def _lazy_greedy(f, ind, candidates, eps, on_select=None):
    """Lazy greedy with stale upper bounds in a heap (valid for submodular f)."""
    S = frozenset()
    selections = []
    heap = []
    for u in candidates:
        if ind.is_independent({u}):
            heapq.heappush(heap, (-marginal(f, u, S), u, 0))
    while heap:
        neg, u, stamp = heapq.heappop(heap)
        if not ind.is_independent(S | {u}):
            continue
        if stamp == len(S):
            if -neg <= eps:
                break
            if on_select is not None:
                on_select(u, -neg, S)
            S = S | {u}
            selections.append(u)
            continue
        heapq.heappush(heap, (-marginal(f, u, S), u, len(S)))
    return S, selections


def sample_greedy(objective, system, config: Optional[OfflineConfig] = None, bits=None) -> RunReport:
    """Greedy restricted to an independently subsampled ground set.

    Each element is kept with probability ``q``; the greedy then repeatedly
    adds the kept element with the largest positive marginal whose addition
    keeps the solution independent.  Ties go to the smaller index.
    """
    config = config or OfflineConfig()
    _check_sizes(objective, system)
    sb = _resolve_bits(objective, system, config, bits)
    f, ind = ValueOracle(objective), IndependenceOracle(system)
    candidates = sb.sampled()
    eps = config.tolerance
    trace = []

    if config.lazy_evaluation:
        def log(u, g, S):
            if config.trace:
                trace.append({"event": "select", "u": u, "gain": g, "size": len(S)})
        S, selections = _lazy_greedy(f, ind, candidates, eps, log)
    else:
        S = frozenset()
        selections = []
        while candidates:
            u, g = _greedy_scan(f, ind, candidates, S, eps)
            if u is None:
                break
            if config.trace:
                trace.append({"event": "select", "u": u, "gain": g, "size": len(S)})
            S = S | {u}
            selections.append(u)
            candidates.remove(u)
    return finish_report(f, ind, S, objective.n, selections, trace)


def vanilla_greedy(objective, system, config: Optional[OfflineConfig] = None, bits=None) -> RunReport:
    """Plain greedy over the whole ground set; lazy unless a config says otherwise."""
    cfg = replace(config, q=1.0) if config is not None else OfflineConfig(q=1.0, lazy_evaluation=True)
    return sample_greedy(objective, system, cfg, np.ones(objective.n, dtype=bool))


def smallest_removal_set(system, O, S, u) -> frozenset:
    """Smallest ``Y ⊆ (O + u) \\ (S + u)`` with ``(O + u) \\ Y`` independent.

    Exhaustive search by increasing size; among equally small sets the
    lexicographically first (by sorted indices) wins.
    """
    O, S = frozenset(O), frozenset(S)
    if u in O:
        return frozenset()
    Ou = O | {u}
    pool = sorted(Ou - S - {u})
    for size in range(len(pool) + 1):
        for Y in itertools.combinations(pool, size):
            if system.is_independent(Ou - frozenset(Y)):
                return frozenset(Y)
    raise InvariantViolation(f"no removal set restores independence of {sorted(Ou)}")


def equivalent_sample_greedy(objective, system, config: Optional[OfflineConfig] = None, bits=None,
                             opt=None) -> tuple:
    """Greedy over the full ground set that flips each chosen element's coin.

    Under the same coin vector it selects exactly what :func:`sample_greedy`
    selects.  When ``opt`` is supplied it also maintains the analysis sets:
    ``O`` (starting at ``opt``), and for each considered ``u`` the snapshot
    ``S_u`` and removal set ``O_u``.  Instrumentation queries go to the raw
    system/objective and are not counted in the report.
    """
    config = config or OfflineConfig()
    _check_sizes(objective, system)
    sb = _resolve_bits(objective, system, config, bits)
    f, ind = ValueOracle(objective), IndependenceOracle(system)
    eps = config.tolerance

    track = opt is not None
    tr = OfflineTrace()
    if track:
        O = frozenset(opt)
        if not system.is_independent(O):
            raise ValueError("supplied OPT set is not independent")
        tr.opt = O
    candidates = list(range(objective.n))
    S = frozenset()
    selections = []
    considered = []
    while candidates:
        u, g = _greedy_scan(f, ind, candidates, S, eps)
        if u is None:
            break
        candidates.remove(u)
        considered.append(u)
        bit = bool(sb.bits[u])
        S_u = S
        if track:
            in_O = u in O
            if bit:
                O_u = smallest_removal_set(system, O, S, u)
                O = (O | {u}) - O_u
            else:
                O_u = frozenset({u}) if in_O else frozenset()
                O = O - O_u
        if bit:
            S = S | {u}
            selections.append(u)
        if track:
            before = objective.value(S_u)
            after = objective.value(S) if bit else before
            tr.records.append({
                "u": u, "bit": bit, "gain": g,
                "S_u": sorted(S_u), "S": sorted(S), "O": sorted(O), "O_u": sorted(O_u),
                "considered": list(considered),
                "X_u": 1, "Y_u": int(bit and not in_O),
                "value_before": before, "value_after": after, "G_u": after - before,
            })
    if track:
        tr.final_O = O
    report = finish_report(f, ind, S, objective.n, selections)
    return report, tr


def brute_force_opt(objective, system, max_n: int = 20) -> tuple:
    """Exact maximiser of ``objective`` over the independent sets.

    Depth-first over independent sets in lexicographic order of their sorted
    indices, so the first maximiser found is the lexicographically smallest.
    """
    n = objective.n
    _check_sizes(objective, system)
    if n > max_n:
        raise ValueError(f"brute force refused for n={n} > {max_n}")
    best_set = frozenset()
    best_val = objective.value(best_set)

    def visit(S, start):
        nonlocal best_set, best_val
        for j in range(start, n):
            T = S | {j}
            if not system.is_independent(T):
                continue
            v = objective.value(T)
            if v > best_val:
                best_set, best_val = T, v
            visit(T, j + 1)

    visit(frozenset(), 0)
    return best_set, best_val


Algorithm = Callable[..., RunReport]


def enumerate_runs(algorithm: Algorithm, objective, system, config, q: Optional[float] = None,
                   max_n: int = 14):
    """Yield ``(bits, probability, report)`` for every coin vector."""
    n = objective.n
    if n > max_n:
        raise ValueError(f"exact enumeration refused for n={n} > {max_n}; use monte_carlo_expectation")
    if q is None:
        q = config.resolve_q(system, objective)
    for b in enumerate_bit_vectors(n):
        yield b, bits_probability(b, q), algorithm(objective, system, config, SampleBits(b, q))


def exact_expectation(algorithm: Algorithm, objective, system, config, statistic=None,
                      max_n: int = 14) -> float:
    """``E[statistic(run)]`` over all ``2**n`` coin vectors, summed in a fixed order."""
    stat = statistic or (lambda r: r.value)
    terms = [prob * stat(rep) for _, prob, rep in enumerate_runs(algorithm, objective, system, config,
                                                                   max_n=max_n)]
    return math.fsum(terms)


def monte_carlo_expectation(algorithm: Algorithm, objective, system, config, trials: int,
                            seed: int = 0, statistic=None) -> tuple:
    """Mean and standard error over ``trials`` independently seeded runs."""
    from .core import derive_seed

    stat = statistic or (lambda r: r.value)
    q = config.resolve_q(system, objective)
    vals = np.array([
        stat(algorithm(objective, system, config,
                       draw_sample_bits(objective.n, q, derive_seed(seed, t))))
        for t in range(trials)
    ])
    se = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    return float(vals.mean()), se
