"""Oracle-suite driver: validators, pathwise equivalences, structural checks,
streaming audits and exact-expectation bounds over a small shipped corpus.

Every check returns a list of failure artifacts (plain dicts naming the
instance, seed and coin vector) so that a failing case can be replayed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .constraints import (
    Matchoid,
    PartitionMatroid,
    measure_extendibility,
    validate_matroid,
)
from .core import (
    InvariantViolation,
    SampleBits,
    bits_probability,
    check_nonnegative,
    check_submodular,
    derive_seed,
    draw_sample_bits,
    enumerate_bit_vectors,
)
from .experiment import offline_guarantee, streaming_guarantee
from .instances import Instance, generate_instance, seeded_permutation
from .offline import (
    OfflineConfig,
    brute_force_opt,
    equivalent_sample_greedy,
    exact_expectation,
    sample_greedy,
)
from .streaming import (
    StreamingConfig,
    equivalent_sample_streaming,
    sample_streaming,
    streaming_invariant_audit,
)

SUITES = ("validators", "offline-equivalence", "offline-structure", "streaming-equivalence",
          "streaming-audit", "expectation")

# (kind, params) cycled through by the offline corpus
_OFFLINE_KINDS = [
    ("coverage+uniform", {"k": 3}),
    ("coverage+partition", {"blocks": 3, "cap": 1}),
    ("coverage+graphic", {}),
    ("cut+uniform", {"k": 3}),
    ("cut+matchoid", {"members": 3, "p": 2, "cap": 2}),
    ("cut+matchoid", {"members": 4, "p": 3, "cap": 2}),
    ("cut+knapsack", {"p": 2}),
    ("cut+genre-limits", {"genres": 3, "genre_cap": 1, "max_genres": 2}),
    ("modular+knapsack", {"p": 3}),
    ("modular+matchoid", {"members": 3, "p": 2, "cap": 1}),
    ("coverage+matchoid", {"members": 4, "p": 3, "cap": 2}),
    ("modular+uniform", {"k": 2}),
]

_STREAMING_KINDS = [
    ("coverage+matchoid", {"members": 3, "p": 2, "cap": 2}),
    ("coverage+matchoid", {"members": 4, "p": 3, "cap": 1}),
    ("cut+matchoid", {"members": 3, "p": 2, "cap": 2}),
    ("cut+matchoid", {"members": 4, "p": 3, "cap": 2}),
    ("modular+matchoid", {"members": 3, "p": 2, "cap": 2}),
    ("cut+genre-limits", {"genres": 3, "genre_cap": 1, "max_genres": 2}),
    ("logdet+matchoid", {"regions": 4, "cap": 2}),
]


def offline_corpus(count: int = 60, sizes=(6, 7, 8, 9, 10)) -> list:
    """Deterministic mix of small instances over all constraint families."""
    out = []
    for i in range(count):
        kind, params = _OFFLINE_KINDS[i % len(_OFFLINE_KINDS)]
        out.append(generate_instance(kind, sizes[i % len(sizes)], seed=1000 + i, **params))
    return out


def streaming_corpus(count: int = 35, sizes=(6, 7, 8, 9, 10)) -> list:
    out = []
    for i in range(count):
        kind, params = _STREAMING_KINDS[i % len(_STREAMING_KINDS)]
        out.append(generate_instance(kind, sizes[i % len(sizes)], seed=2000 + i, **params))
    return out


def _artifact(inst: Instance, check: str, bits=None, seed=None, **detail) -> dict:
    d = {"check": check, "instance": inst.name, "instance_data": inst.to_dict()}
    if bits is not None:
        d["bits"] = [int(b) for b in np.asarray(bits)]
    if seed is not None:
        d["seed"] = int(seed)
    d.update(detail)
    return d


def _bool_bits(bits):
    return bits.bits if isinstance(bits, SampleBits) else np.asarray(bits, dtype=bool)


# ---------------------------------------------------------------------------
# validators
# ---------------------------------------------------------------------------

def validator_failures(inst: Instance, max_fn: int = 8, max_matroid: int = 12, max_ext: int = 10) -> list:
    fails = []
    f, g = inst.objective, inst.constraint
    if f.n <= max_fn:
        w = check_submodular(f, max_n=max_fn)
        if w is not None:
            fails.append(_artifact(inst, "submodularity", witness=repr(w)))
    if getattr(g, "is_matroid_class", False) and g.n <= max_matroid:
        ok, w = validate_matroid(g, max_matroid)
        if not ok:
            fails.append(_artifact(inst, "matroid-axioms", witness=repr(w)))
    members = g.members if isinstance(g, Matchoid) else []
    for ell, (_, mat) in enumerate(members):
        if mat.n <= max_matroid:
            ok, w = validate_matroid(mat, max_matroid)
            if not ok:
                fails.append(_artifact(inst, "member-matroid-axioms", member=ell, witness=repr(w)))
    if g.n <= max_ext:
        measured = measure_extendibility(g, max_ext)
        if measured > g.p:
            fails.append(_artifact(inst, "extendibility", measured=measured, declared=g.p))
        if getattr(g, "is_matroid_class", False) and measured != 1:
            fails.append(_artifact(inst, "matroid-extendibility", measured=measured))
    return fails


def corrupted_partition_rejected() -> list:
    """An overlapping partition must be refused at construction."""
    try:
        PartitionMatroid(4, [[0, 1], [1, 2, 3]], [1, 1])
    except ValueError:
        return []
    return [{"check": "corrupted-partition", "detail": "overlapping blocks were accepted"}]


# ---------------------------------------------------------------------------
# offline
# ---------------------------------------------------------------------------

def offline_equivalence_failures(inst: Instance, config: Optional[OfflineConfig] = None) -> list:
    """Selection sequences of both greedy forms agree for every coin vector."""
    config = config or OfflineConfig()
    q = config.resolve_q(inst.constraint, inst.objective)
    fails = []
    for b in enumerate_bit_vectors(inst.n):
        sb = SampleBits(b, q)
        a = sample_greedy(inst.objective, inst.constraint, config, sb).selections
        e = equivalent_sample_greedy(inst.objective, inst.constraint, config, sb)[0].selections
        if a != e:
            fails.append(_artifact(inst, "offline-equivalence", b, sampled=a, equivalent=e))
    return fails


def structural_failures(inst: Instance, bits, opt, config: Optional[OfflineConfig] = None) -> list:
    """P1–P3, disjointness of the removal sets outside S, and exact gain accounting."""
    config = config or OfflineConfig()
    f, g = inst.objective, inst.constraint
    rep, tr = equivalent_sample_greedy(f, g, config, bits, opt=opt)
    b = _bool_bits(bits)
    fails = []
    S_final = frozenset(rep.solution)
    outside = []
    for i, r in enumerate(tr.records):
        O, S = frozenset(r["O"]), frozenset(r["S"])
        considered = set(r["considered"])
        if not g.is_independent(O):
            fails.append(_artifact(inst, "P1-independent", b, step=i, O=sorted(O)))
        if not S <= O:
            fails.append(_artifact(inst, "P2-subset", b, step=i, S=sorted(S), O=sorted(O)))
        if (O - S) & considered:
            fails.append(_artifact(inst, "P3-unconsidered", b, step=i, touched=sorted((O - S) & considered)))
        outside.append(frozenset(r["O_u"]) - S_final)
    seen = set()
    for i, part in enumerate(outside):
        if seen & part:
            fails.append(_artifact(inst, "removal-sets-disjoint", b, step=i, overlap=sorted(seen & part)))
        seen |= part
    # gains telescope exactly: compare rationals of the recorded float values
    empty = f.value(frozenset())
    final = f.value(S_final)
    prev = empty
    chain_ok = True
    for r in tr.records:
        if r["value_before"] != prev:
            chain_ok = False
        prev = r["value_after"]
    total = sum((Fraction(r["value_after"]) - Fraction(r["value_before"]) for r in tr.records), Fraction(0))
    if not chain_ok or prev != final or total != Fraction(final) - Fraction(empty):
        fails.append(_artifact(inst, "gain-accounting", b, total=float(total), expected=final - empty))
    return fails


def offline_structure_failures_all(inst: Instance, config: Optional[OfflineConfig] = None) -> list:
    config = config or OfflineConfig()
    opt, _ = brute_force_opt(inst.objective, inst.constraint)
    q = config.resolve_q(inst.constraint, inst.objective)
    fails = []
    for b in enumerate_bit_vectors(inst.n):
        fails += structural_failures(inst, SampleBits(b, q), opt, config)
    return fails


def offline_bound_failures(inst: Instance, tol: float = 1e-9) -> list:
    """Exact expectation of the sampled greedy against its guarantee for the objective's class."""
    f, g = inst.objective, inst.constraint
    if check_nonnegative(f) is not None:
        return []
    _, opt = brute_force_opt(f, g)
    cls = f.objective_class
    config = OfflineConfig(objective_class=cls)
    q = config.resolve_q(g, f)
    bound = offline_guarantee("sample-greedy", cls, g.p, q)
    ev = exact_expectation(sample_greedy, f, g, config)
    if bound is not None and ev < bound * opt - tol:
        return [_artifact(inst, "offline-expectation", expectation=ev, opt=opt, bound=bound, q=q)]
    return []


def sampling_lemma_failures(inst: Instance, tol: float = 1e-9) -> list:
    """``E[f(S ∪ OPT)] >= (1 - q) f(OPT)`` over the sampled greedy's output distribution."""
    f, g = inst.objective, inst.constraint
    if check_nonnegative(f) is not None:
        return []
    opt_set, opt = brute_force_opt(f, g)
    config = OfflineConfig(objective_class=f.objective_class)
    q = config.resolve_q(g, f)
    union = exact_expectation(sample_greedy, f, g, config, statistic=lambda r: f.value(r.solution | opt_set))
    if union < (1.0 - q) * opt - tol:
        return [_artifact(inst, "sampling-lemma", expectation=union, opt=opt, q=q)]
    return []


# ---------------------------------------------------------------------------
# streaming
# ---------------------------------------------------------------------------

def _stream_config(inst: Instance, **kw) -> StreamingConfig:
    mode = "monotone" if inst.objective_class in ("submodular-monotone", "linear") else "general"
    return StreamingConfig(mode=mode, **kw)


def streaming_equivalence_failures(inst: Instance, order=None, config: Optional[StreamingConfig] = None) -> list:
    """Per-arrival solutions of both streaming forms agree for every coin vector."""
    config = config or _stream_config(inst, record_prefixes=True)
    q = config.resolve_q(inst.p)
    fails = []
    for b in enumerate_bit_vectors(inst.n):
        sb = SampleBits(b, q)
        a = sample_streaming(inst.objective, inst.constraint, config, sb, order).prefixes
        e = equivalent_sample_streaming(inst.objective, inst.constraint, config, sb, order)[0].prefixes
        if a != e:
            first = next(i for i, (x, y) in enumerate(zip(a, e)) if x != y) if len(a) == len(e) else -1
            fails.append(_artifact(inst, "streaming-equivalence", b, order=order, first_difference=first))
    return fails


def streaming_audit_failures(inst: Instance, seed: int, permute: bool = True, tol: float = 1e-9) -> list:
    """One seeded instrumented run: exchange soundness and the eviction inequalities."""
    config = _stream_config(inst, check_invariants=True, seed=seed)
    q = config.resolve_q(inst.p)
    bits = draw_sample_bits(inst.n, q, seed)
    order = seeded_permutation(inst.n, derive_seed(seed, 1)) if permute else None
    try:
        _, state = equivalent_sample_streaming(inst.objective, inst.constraint, config, bits, order)
    except InvariantViolation as exc:
        return [_artifact(inst, "exchange-soundness", bits.bits, seed, order=order, detail=str(exc))]
    audit = streaming_invariant_audit(state, inst.objective, tol=tol)
    if audit.ok:
        return []
    bad = sorted(k for k, v in audit.checks.items() if not v)
    return [_artifact(inst, "streaming-audit", bits.bits, seed, order=order, failed=bad,
                      value_final=audit.value_final, value_union=audit.value_union,
                      evicted_vs_final=audit.evicted_vs_final, c=audit.c)]


def streaming_bound_failures(inst: Instance, tol: float = 1e-9) -> list:
    f, g = inst.objective, inst.constraint
    if check_nonnegative(f) is not None:
        return []
    _, opt = brute_force_opt(f, g)
    config = _stream_config(inst)
    c, q = config.resolve_c(g.p), config.resolve_q(g.p)
    bound = streaming_guarantee(config.mode, g.p, c, q)

    def algo(objective, system, cfg, bits):
        return sample_streaming(objective, system, config, bits)

    terms = []
    for b in enumerate_bit_vectors(inst.n):
        sb = SampleBits(b, q)
        terms.append(bits_probability(b, q) * algo(f, g, config, sb).value)
    ev = math.fsum(terms)
    if ev < bound * opt - tol:
        return [_artifact(inst, "streaming-expectation", expectation=ev, opt=opt, bound=bound,
                          mode=config.mode, c=c, q=q)]
    return []


# ---------------------------------------------------------------------------
# suite driver
# ---------------------------------------------------------------------------

@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"suite": self.name, "checks": self.checks, "passed": self.passed, "failures": self.failures}


@dataclass
class AuditReport:
    suites: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "suites": [s.to_dict() for s in self.suites]}


def parse_scope(scope) -> list:
    if scope is None:
        return []
    if isinstance(scope, str):
        scope = [s.strip() for s in scope.split(",") if s.strip()]
    scope = list(scope)
    if "all" in scope:
        return list(SUITES)
    unknown = [s for s in scope if s not in SUITES]
    if unknown:
        raise ValueError(f"unknown audit suites {unknown}; choose from {list(SUITES)} or 'all'")
    return scope


def audit_suite(scope, offline_instances=None, streaming_instances=None, streaming_runs: int = 200,
                seed: int = 0) -> AuditReport:
    """Run the selected suites; an empty scope passes vacuously."""
    names = parse_scope(scope)
    off = offline_instances if offline_instances is not None else offline_corpus()
    stream = streaming_instances if streaming_instances is not None else streaming_corpus()
    report = AuditReport()
    for name in names:
        res = SuiteResult(name)
        if name == "validators":
            for inst in off + stream:
                res.failures += validator_failures(inst)
                res.checks += 1
            res.failures += corrupted_partition_rejected()
            res.checks += 1
        elif name == "offline-equivalence":
            for inst in off:
                res.failures += offline_equivalence_failures(inst)
                res.checks += 1 << inst.n
        elif name == "offline-structure":
            for inst in off:
                res.failures += offline_structure_failures_all(inst)
                res.checks += 1 << inst.n
        elif name == "streaming-equivalence":
            for inst in stream:
                res.failures += streaming_equivalence_failures(inst)
                res.checks += 1 << inst.n
        elif name == "streaming-audit":
            usable = [i for i in stream if check_nonnegative(i.objective) is None]
            for r in range(streaming_runs):
                inst = usable[r % len(usable)]
                res.failures += streaming_audit_failures(inst, derive_seed(seed, r))
                res.checks += 1
        elif name == "expectation":
            for inst in off:
                res.failures += offline_bound_failures(inst) + sampling_lemma_failures(inst)
                res.checks += 2
            for inst in stream:
                res.failures += streaming_bound_failures(inst)
                res.checks += 1
        report.suites.append(res)
    return report
