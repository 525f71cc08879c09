"""One-pass subsampled streaming with exchanges over a p-matchoid."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .constraints import Matchoid
from .core import (
    GUARANTEES_VOID,
    IndependenceOracle,
    InvariantViolation,
    RunReport,
    SampleBits,
    ValueOracle,
    arrival_prefix,
    check_probability,
    draw_sample_bits,
    finish_report,
    marginal,
)

MODES = ("monotone", "general")


@dataclass
class StreamingConfig:
    c: Optional[float] = None
    q: Optional[float] = None
    mode: str = "general"
    seed: int = 0
    tolerance: float = 0.0
    check_invariants: bool = False
    trace: bool = False
    record_prefixes: bool = False

    def resolve_c(self, p: int) -> float:
        if self.c is not None:
            if not self.c > 0:
                raise ValueError("acceptance parameter c must be positive")
            return float(self.c)
        if self.mode not in MODES:
            raise ValueError(f"unknown streaming mode {self.mode!r}")
        return 1.0 if self.mode == "monotone" else math.sqrt(1.0 + 1.0 / p)

    def resolve_q(self, p: int) -> float:
        if p is None or p < 1:
            raise ValueError(f"matchoid parameter p must be a positive integer, got {p!r}")
        if self.q is not None:
            return check_probability(self.q)
        return 1.0 / ((1.0 + self.resolve_c(p)) * p + 1.0)


@dataclass
class ExchangeResult:
    U: frozenset
    chosen: dict = field(default_factory=dict)
    candidates: dict = field(default_factory=dict)
    violated: list = field(default_factory=list)
    marginals: dict = field(default_factory=dict)

    def cost(self) -> float:
        """``f(U : S)`` from the arrival marginals computed during the exchange."""
        return math.fsum(self.marginals[x] for x in sorted(self.U))


@dataclass
class StreamState:
    """Bookkeeping of the instrumented streaming run.

    ``solutions[t]`` is the solution after ``t`` arrivals (``solutions[0]`` is
    empty).  ``removed_at[e]`` is the arrival time whose element evicted ``e``
    (``n + 1`` if never evicted, the arrival time of ``e`` itself if ``e`` was
    never accepted).
    """

    order: list
    rank: np.ndarray
    c: float
    q: float
    solutions: list = field(default_factory=list)
    A: set = field(default_factory=set)
    R: set = field(default_factory=set)
    removed_at: dict = field(default_factory=dict)
    exchanges: dict = field(default_factory=dict)
    peak_stored_elements: int = 0

    @property
    def final(self) -> frozenset:
        return self.solutions[-1]


def _value_oracle(f):
    return f if isinstance(f, ValueOracle) else ValueOracle(f)


def _ind_oracle(system):
    return system if isinstance(system, IndependenceOracle) else IndependenceOracle(system)


def _rank_of(order, n):
    rank = np.empty(n, dtype=np.int64)
    rank[np.asarray(order, dtype=np.int64)] = np.arange(n)
    return rank


def _check_order(order, n):
    order = list(range(n)) if order is None else [int(x) for x in order]
    if sorted(order) != list(range(n)):
        raise ValueError("stream order must be a permutation of the ground set")
    return order


def exchange_candidate(f, matchoid, S, u, rank=None) -> ExchangeResult:
    """Cheapest evictions that make room for ``u``.

    For every member matroid rejecting ``(S + u)`` on its ground subset, the
    evictable elements ``X`` are those whose removal restores that member, and
    the one with the smallest arrival marginal ``f(x : S)`` is evicted (ties to
    the smaller index).  Arrival marginals are computed once per element per
    call since ``S`` is fixed for its duration.
    """
    f = _value_oracle(f)
    ind = _ind_oracle(matchoid)
    if ind.members is None:
        raise TypeError("exchange_candidate needs a matchoid constraint")
    S = frozenset(S)
    if u in S:
        raise ValueError("arriving element already in the solution")
    res = ExchangeResult(frozenset())
    Su = S | {u}
    U = set()
    ordered = sorted(S)
    for ell in range(len(ind.members)):
        if ind.member_independent(ell, Su):
            continue
        res.violated.append(ell)
        X = [x for x in ordered if ind.member_independent(ell, Su - {x})]
        if not X:
            raise InvariantViolation(f"member {ell} cannot make room for {u} in {ordered}")
        best = None
        for x in X:
            if x not in res.marginals:
                res.marginals[x] = marginal(f, x, arrival_prefix(x, S, rank))
            if best is None or res.marginals[x] < res.marginals[best]:
                best = x
        res.candidates[ell] = X
        res.chosen[ell] = best
        U.add(best)
    res.U = frozenset(U)
    return res


def _accepts(gain, cost, c, eps):
    return gain >= (1.0 + c) * cost - eps


def _audit_exchange(system, S, u, ex, p):
    if not system.is_independent((S - ex.U) | {u}):
        raise InvariantViolation(f"exchange for {u} leaves a dependent set: S={sorted(S)} U={sorted(ex.U)}")
    if len(ex.U) > p:
        raise InvariantViolation(f"exchange evicts {len(ex.U)} > p={p} elements")


def _setup(objective, matchoid, config, bits, order):
    if not isinstance(matchoid, Matchoid):
        raise TypeError("streaming algorithms accept only matchoid constraints")
    if objective.n != matchoid.n:
        raise ValueError(f"objective has {objective.n} elements but constraint has {matchoid.n}")
    config = config or StreamingConfig()
    p = matchoid.p
    c = config.resolve_c(p)
    q = config.resolve_q(p)
    if bits is None:
        bits = draw_sample_bits(objective.n, q, config.seed)
    elif not isinstance(bits, SampleBits):
        bits = SampleBits(np.asarray(bits, dtype=bool), q)
    if len(bits) != objective.n:
        raise ValueError("need exactly one sampling bit per element")
    order = _check_order(order, objective.n)
    rank = None if order == list(range(objective.n)) else _rank_of(order, objective.n)
    return config, p, c, q, bits, order, rank


def sample_streaming(objective, matchoid, config: Optional[StreamingConfig] = None, bits=None,
                     order: Optional[Sequence[int]] = None) -> RunReport:
    """Single pass; each arrival is flipped first and only sampled ones pay for oracle work.

    A sampled arrival ``u`` replaces the exchange set ``U`` when
    ``f(u | S) >= (1 + c) * f(U : S)``.
    """
    config, p, c, q, bits, order, rank = _setup(objective, matchoid, config, bits, order)
    f, ind = ValueOracle(objective), IndependenceOracle(matchoid)
    eps = config.tolerance
    S = frozenset()
    peak = 0
    selections, trace, prefixes = [], [], []
    if config.record_prefixes:
        prefixes.append(S)
    for pos, u in enumerate(order):
        peak = max(peak, len(S) + 1)
        if bits.bits[u]:
            ex = exchange_candidate(f, ind, S, u, rank)
            gain = marginal(f, u, S)
            cost = ex.cost()
            ok = _accepts(gain, cost, c, eps)
            if config.check_invariants:
                _audit_exchange(matchoid, S, u, ex, p)
            if config.trace:
                trace.append({"pos": pos, "u": u, "sampled": True, "U": sorted(ex.U), "gain": gain,
                              "cost": cost, "accepted": ok})
            if ok:
                S = (S - ex.U) | {u}
                selections.append(u)
                if config.check_invariants and not matchoid.is_independent(S):
                    raise InvariantViolation(f"solution became dependent after arrival {pos}")
        elif config.trace:
            trace.append({"pos": pos, "u": u, "sampled": False})
        if config.record_prefixes:
            prefixes.append(S)
    rep = finish_report(f, ind, S, peak, selections, trace)
    rep.prefixes = prefixes
    return rep


def equivalent_sample_streaming(objective, matchoid, config: Optional[StreamingConfig] = None,
                                bits=None, order: Optional[Sequence[int]] = None) -> tuple:
    """Threshold test first, coin second; qualifying arrivals that lose the coin go to ``R``.

    Under a shared coin vector the per-arrival solutions coincide with those
    of :func:`sample_streaming`.
    """
    config, p, c, q, bits, order, rank = _setup(objective, matchoid, config, bits, order)
    f, ind = ValueOracle(objective), IndependenceOracle(matchoid)
    eps = config.tolerance
    n = objective.n
    state = StreamState(order=order, rank=rank if rank is not None else np.arange(n), c=c, q=q)
    S = frozenset()
    state.solutions.append(S)
    selections, trace = [], []
    for t, u in enumerate(order, start=1):
        state.peak_stored_elements = max(state.peak_stored_elements, len(S) + 1)
        ex = exchange_candidate(f, ind, S, u, rank)
        gain = marginal(f, u, S)
        cost = ex.cost()
        ok = _accepts(gain, cost, c, eps)
        state.removed_at[u] = t
        if ok:
            if config.check_invariants:
                _audit_exchange(matchoid, S, u, ex, p)
            if bits.bits[u]:
                for x in ex.U:
                    state.removed_at[x] = t
                state.exchanges[t] = ex.U
                S = (S - ex.U) | {u}
                state.A.add(u)
                state.removed_at[u] = n + 1
                selections.append(u)
            else:
                state.R.add(u)
        if config.trace:
            trace.append({"pos": t - 1, "u": u, "qualifies": ok, "sampled": bool(bits.bits[u]),
                          "U": sorted(ex.U), "gain": gain, "cost": cost})
        state.solutions.append(S)
    rep = finish_report(f, ind, S, state.peak_stored_elements, selections, trace)
    rep.prefixes = list(state.solutions)
    return rep, state


# ---------------------------------------------------------------------------
# per-run audit
# ---------------------------------------------------------------------------

@dataclass
class StreamingAudit:
    skipped: bool
    reason: str = ""
    value_final: float = float("nan")
    value_union: float = float("nan")
    evicted_vs_final: float = float("nan")      # f(A \ S_n : S_n)
    evicted_vs_union: float = float("nan")      # f(A \ S_n : A)
    evicted_at_removal: float = float("nan")    # sum f(u_j : S_{d(j)-1}) over A \ S_n
    evicted_joint_gain: float = float("nan")    # f(A \ S_n | S_n)
    c: float = float("nan")
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.skipped or all(self.checks.values())


def streaming_invariant_audit(state: StreamState, objective, c: Optional[float] = None,
                              tol: float = 1e-9, raise_on_violation: bool = False,
                              context: Optional[dict] = None) -> StreamingAudit:
    """Check the eviction-cost inequalities on a finished instrumented run.

    ``checks`` holds one boolean per inequality:

    * ``evicted_vs_final``: ``f(A \\ S_n : S_n) <= f(S_n) / c``
    * ``union_vs_final``: ``f(A) <= (c + 1) / c * f(S_n)``
    * ``evicted_at_removal``: the same sum with each evictee measured against
      the solution just before its eviction, ``<= f(S_n) / c``
    * ``observation``: ``f(B | A \\ B) <= f(B : A)`` for ``B = A \\ S_n``
    * ``disjoint_runs``: ``A`` and ``R`` are disjoint
    """
    c = state.c if c is None else c
    if getattr(objective, "may_be_negative", False):
        return StreamingAudit(skipped=True, reason=GUARANTEES_VOID, c=c)
    f = ValueOracle(objective)
    rank = state.rank
    Sn = state.final
    A = frozenset(state.A)
    evicted = A - Sn

    def am(x, ref):
        return marginal(f, x, arrival_prefix(x, ref, rank))

    fS = f.evaluate(Sn)
    fA = f.evaluate(A)
    vs_final = math.fsum(am(x, Sn) for x in sorted(evicted))
    vs_union = math.fsum(am(x, A) for x in sorted(evicted))
    at_removal = math.fsum(am(x, state.solutions[state.removed_at[x] - 1]) for x in sorted(evicted))
    joint = fA - fS
    rec = StreamingAudit(False, value_final=fS, value_union=fA, evicted_vs_final=vs_final,
                         evicted_vs_union=vs_union, evicted_at_removal=at_removal,
                         evicted_joint_gain=joint, c=c)
    rec.checks = {
        "evicted_vs_final": vs_final <= fS / c + tol,
        "union_vs_final": fA <= (c + 1.0) / c * fS + tol,
        "evicted_at_removal": at_removal <= fS / c + tol,
        "observation": joint <= vs_union + tol,
        "disjoint_runs": not (A & state.R),
    }
    if raise_on_violation and not rec.ok:
        dump = {"checks": rec.checks, "final": sorted(Sn), "A": sorted(A), "R": sorted(state.R),
                "order": list(state.order), **(context or {})}
        raise InvariantViolation("streaming audit failed: " + json.dumps(dump, default=str))
    return rec
