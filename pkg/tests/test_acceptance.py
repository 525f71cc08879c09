"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v`` (the lines are
repeated in the terminal summary) or ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import hashlib
import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from subsampling.audit import (
    offline_bound_failures,
    offline_corpus,
    offline_equivalence_failures,
    offline_structure_failures_all,
    sampling_lemma_failures,
    streaming_audit_failures,
    streaming_bound_failures,
    streaming_corpus,
    streaming_equivalence_failures,
    validator_failures,
)
from subsampling.core import check_nonnegative, derive_seed, draw_sample_bits
from subsampling.constraints import GraphicMatroid, Matchoid, PartitionMatroid, UniformMatroid
from subsampling.instances import Instance, generate_instance
from subsampling.objectives import LogDetDPP, ModularFunction, gaussian_kernel
from subsampling.offline import OfflineConfig, default_q, sample_greedy
from subsampling.streaming import StreamingConfig, sample_streaming

RESULTS: list = []


def report(number: int, ok: bool, detail: str) -> None:
    line = f"[criterion {number:>2}] {'PASS' if ok else 'FAIL'}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def first(failures, k=3):
    return json.dumps([{x: v for x, v in f.items() if x != "instance_data"} for f in failures[:k]], default=str)


# the corpora are deterministic, so building them once is enough
OFFLINE = offline_corpus(60)
STREAMING = streaming_corpus(35)
LARGER = [generate_instance(kind, n, seed=3000 + i, **params) for i, (kind, n, params) in enumerate([
    ("cut+matchoid", 11, {"members": 3, "p": 2, "cap": 2}),
    ("coverage+matchoid", 12, {"members": 4, "p": 3, "cap": 2}),
    ("modular+knapsack", 12, {"p": 2}),
    ("cut+genre-limits", 11, {"genres": 3, "genre_cap": 1, "max_genres": 2}),
])]


def test_criterion_01_offline_pathwise_equivalence():
    t0 = time.perf_counter()
    families = {inst.constraint.kind if not isinstance(inst.constraint, Matchoid) else f"{inst.p}-matchoid"
                for inst in OFFLINE}
    objectives = {inst.objective.kind for inst in OFFLINE}
    fails = []
    branches = 0
    for inst in OFFLINE:
        assert inst.n <= 10
        fails += offline_equivalence_failures(inst)
        branches += 1 << inst.n
    dt = time.perf_counter() - t0
    needed = {"uniform", "partition", "graphic", "knapsack", "2-matchoid", "3-matchoid"}
    ok = not fails and len(OFFLINE) >= 50 and needed <= families and {"modular", "coverage", "cut"} <= objectives
    report(1, ok and dt < 120, f"{len(OFFLINE)} instances, {branches} coin vectors, families {sorted(families)}, "
                               f"{len(fails)} mismatches, {dt:.1f}s (limit 120s) {first(fails)}")


def test_criterion_02_offline_exact_expectation():
    t0 = time.perf_counter()
    pool = [i for i in OFFLINE + LARGER if check_nonnegative(i.objective) is None]
    fails = []
    for inst in pool:
        fails += offline_bound_failures(inst)
    dt = time.perf_counter() - t0
    classes = sorted({i.objective_class for i in pool})
    report(2, not fails and len(pool) >= 30 and dt < 300,
           f"{len(pool)} instances (n <= 12, classes {classes}), {len(fails)} bound violations, "
           f"{dt:.1f}s (limit 300s) {first(fails)}")


def test_criterion_03_structural_invariants():
    t0 = time.perf_counter()
    fails = []
    for inst in OFFLINE:
        fails += offline_structure_failures_all(inst)
    dt = time.perf_counter() - t0
    report(3, not fails, f"P1-P3, removal-set disjointness and exact gain sums over every branch of "
                         f"{len(OFFLINE)} instances: {len(fails)} violations, {dt:.1f}s {first(fails)}")


def test_criterion_04_streaming_pathwise_equivalence():
    t0 = time.perf_counter()
    fails = []
    for inst in STREAMING:
        assert inst.n <= 10 and isinstance(inst.constraint, Matchoid)
        fails += streaming_equivalence_failures(inst)
    dt = time.perf_counter() - t0
    report(4, not fails and len(STREAMING) >= 30 and dt < 120,
           f"{len(STREAMING)} matchoid instances, per-prefix comparison over all coin vectors: "
           f"{len(fails)} mismatches, {dt:.1f}s (limit 120s) {first(fails)}")


def test_criterion_05_streaming_exact_expectation():
    t0 = time.perf_counter()
    pool = [i for i in STREAMING if check_nonnegative(i.objective) is None]
    modes = {"monotone" if i.objective_class in ("linear", "submodular-monotone") else "general" for i in pool}
    fails = []
    for inst in pool:
        fails += streaming_bound_failures(inst)
    dt = time.perf_counter() - t0
    report(5, not fails and modes == {"monotone", "general"} and dt < 300,
           f"{len(pool)} instances, modes {sorted(modes)}, {len(fails)} bound violations, "
           f"{dt:.1f}s (limit 300s) {first(fails)}")


def test_criterion_06_streaming_audits():
    t0 = time.perf_counter()
    pool = [i for i in STREAMING if check_nonnegative(i.objective) is None]
    fails = []
    runs = 1000
    for r in range(runs):
        fails += streaming_audit_failures(pool[r % len(pool)], derive_seed(6, r), permute=True)
    dt = time.perf_counter() - t0
    report(6, not fails and dt < 180,
           f"{runs} seeded runs on {len(pool)} instances (random arrival orders): eviction inequalities and "
           f"exchange soundness, {len(fails)} violations, {dt:.1f}s (limit 180s) {first(fails)}")


def scaling_measurements(seeds=200, n=500):
    rows = []
    for k in (5, 10, 20):
        for p in (1, 2, 4):
            inst = generate_instance("modular+copies", n, seed=k * 10 + p, k=k, p=p)
            f, g = inst.objective, inst.constraint
            q_off = default_q(p, f.objective_class)
            vq = []
            for s in range(seeds):
                seed = derive_seed(7, s)
                vq.append(sample_greedy(f, g, OfflineConfig(seed=seed), draw_sample_bits(n, q_off, seed)).value_queries)
            cfg = StreamingConfig(mode="monotone")
            q_str = cfg.resolve_q(p)
            mq = []
            for s in range(seeds):
                seed = derive_seed(8, s)
                rep = sample_streaming(f, g, cfg, draw_sample_bits(n, q_str, seed))
                mq.append(rep.independence_queries / n)
            # a sampled arrival tests S + u against each of the m members, then scans the k members of a full S
            scan = g.m * (k + 1)
            rows.append({
                "k": k, "p": p,
                "offline_mean": float(np.mean(vq)), "offline_pred": 2 * q_off * n * (k + 1),
                "stream_mean": float(np.mean(mq)), "stream_pred": q_str * scan,
            })
    return rows


def test_criterion_07_oracle_cost_scaling():
    t0 = time.perf_counter()
    rows = scaling_measurements()
    dt = time.perf_counter() - t0
    band = lambda got, pred: pred / 2 <= got <= 2 * pred  # noqa: E731
    off_band = all(band(r["offline_mean"], r["offline_pred"]) for r in rows)
    str_band = all(band(r["stream_mean"], r["stream_pred"]) for r in rows)
    off_dec, str_dec = True, True
    for k in (5, 10, 20):
        seq = [r for r in rows if r["k"] == k]
        off_dec &= all(a["offline_mean"] > b["offline_mean"] for a, b in zip(seq, seq[1:]))
        str_dec &= all(a["stream_mean"] > b["stream_mean"] for a, b in zip(seq, seq[1:]))
    table = "; ".join(f"k={r['k']},p={r['p']}: offline {r['offline_mean']:.0f}/{r['offline_pred']:.0f}, "
                      f"stream {r['stream_mean']:.2f}/{r['stream_pred']:.2f}" for r in rows)
    report(7, off_band and str_band and off_dec and str_dec and dt < 180,
           f"offline within 2x: {off_band}, streaming within 2x: {str_band}, offline decreasing in p: {off_dec}, "
           f"streaming decreasing in p: {str_dec}, {dt:.1f}s (limit 180s) [measured/predicted] {table}")


def test_criterion_08_validators():
    extra = [
        Instance(LogDetDPP(gaussian_kernel(np.random.default_rng(1).random((8, 2)), 0.5)),
                 UniformMatroid(8, 3), "logdet-8"),
        Instance(ModularFunction(np.arange(12.0)), PartitionMatroid(12, [range(0, 5), range(5, 12)], [2, 3]),
                 "partition-12"),
        Instance(ModularFunction(np.ones(12)),
                 GraphicMatroid(6, [(i, j) for i in range(6) for j in range(i + 1, 6)][:12]), "graphic-12"),
        Instance(ModularFunction(np.ones(12)), UniformMatroid(12, 5), "uniform-12"),
    ]
    pool = OFFLINE + STREAMING + extra
    fails = []
    counts = {"objectives": 0, "matroids": 0, "extendibility": 0}
    for inst in pool:
        fails += validator_failures(inst)
        counts["objectives"] += inst.n <= 8
        counts["matroids"] += getattr(inst.constraint, "is_matroid_class", False) and inst.n <= 12
        counts["extendibility"] += inst.n <= 10
    report(8, not fails, f"{len(pool)} instances; submodularity checked on {counts['objectives']}, matroid axioms "
                         f"on {counts['matroids']} (plus matchoid members), extendibility on "
                         f"{counts['extendibility']}: {len(fails)} failures {first(fails)}")


def test_criterion_09_sampling_lemma():
    t0 = time.perf_counter()
    pool = [i for i in OFFLINE + LARGER if check_nonnegative(i.objective) is None]
    fails = []
    for inst in pool:
        fails += sampling_lemma_failures(inst)
    dt = time.perf_counter() - t0
    report(9, not fails, f"{len(pool)} instances (n <= 12): E[f(S u OPT)] >= (1-q) f(OPT) on all, "
                         f"{len(fails)} violations, {dt:.1f}s {first(fails)}")


CLI_CONFIGS = [
    ["--generate", "cut+genre-limits:n=10,seed=1", "--trials", "3", "--seed", "7"],
    ["--generate", "coverage+graphic:n=12,seed=2", "--algorithm", "vanilla-greedy"],
    ["--generate", "coverage+matchoid:n=40,seed=3", "--algorithm", "sample-streaming", "--permute-stream", "5",
     "--trials", "3"],
    ["--generate", "cut+matchoid:n=12,seed=4", "--boost", "4", "--trials", "2", "--mode", "general"],
    ["--generate", "cut+matchoid:n=9,seed=5", "--algorithm", "sample-streaming", "--expectation", "exact"],
]


def cli_digest(args):
    res = subprocess.run([sys.executable, "-m", "subsampling", *args], capture_output=True, text=True,
                         env=dict(os.environ), check=True)
    lines = []
    for line in res.stdout.splitlines():
        rec = json.loads(line)
        rec.pop("wall_time", None)
        lines.append(json.dumps(rec, sort_keys=True))
    return hashlib.sha256("\n".join(lines).encode()).hexdigest(), len(lines)


def test_criterion_10_cli_reproducibility():
    mismatched = []
    for args in CLI_CONFIGS:
        digests = [cli_digest(args) for _ in range(3)]
        if len(set(digests)) != 1 or digests[0][1] == 0:
            mismatched.append(" ".join(args))
    report(10, not mismatched, f"{len(CLI_CONFIGS)} configurations x 3 runs hashed without wall time; "
                               f"mismatches: {mismatched or 'none'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
