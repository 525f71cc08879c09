"""Trial loops, expectation modes, result records and comparisons."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from .core import derive_seed, draw_sample_bits
from .offline import (
    OfflineConfig,
    brute_force_opt,
    default_q,
    enumerate_runs,
    sample_greedy,
    vanilla_greedy,
)
from .streaming import StreamingConfig, sample_streaming

OFFLINE = ("sample-greedy", "vanilla-greedy")
STREAMING = ("sample-streaming",)
ALGORITHMS = OFFLINE + STREAMING

EXACT_MAX_N = 14
OPT_MAX_N = 14


@dataclass
class ExperimentConfig:
    algorithm: str = "sample-greedy"
    q: Optional[float] = None
    c: Optional[float] = None
    mode: Optional[str] = None
    seed: int = 0
    trials: int = 1
    boost: int = 1
    expectation: str = "single"
    tolerance: float = 0.0
    lazy: Optional[bool] = None
    order: Optional[list] = None
    compute_opt: str = "auto"
    trace: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.trials < 1 or self.boost < 1:
            raise ValueError("trials and boost must be at least 1")
        kind, _ = parse_expectation(self.expectation)
        if kind != "single" and self.boost > 1:
            raise ValueError("boosting combines only with single-run expectation mode")
        if self.mode is not None and self.mode not in ("monotone", "general", "linear"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("trace")
        return d


def parse_expectation(text: str):
    if text in ("single", "exact"):
        return text, None
    if text.startswith("mc:"):
        N = int(text[3:])
        if N < 2:
            raise ValueError("Monte-Carlo mode needs at least 2 samples")
        return "mc", N
    raise ValueError(f"expectation mode must be single, exact or mc:N, got {text!r}")


def _objective_class(mode, objective):
    if mode is None:
        return objective.objective_class
    return {"monotone": "submodular-monotone", "general": "submodular-nonmonotone", "linear": "linear"}[mode]


def algorithm_setup(cfg: ExperimentConfig, instance):
    """Return ``(callable(bits, seed) -> RunReport, q, guarantee)``."""
    f, g = instance.objective, instance.constraint
    if cfg.algorithm in OFFLINE:
        cls = _objective_class(cfg.mode, f)
        lazy = cfg.lazy if cfg.lazy is not None else cfg.algorithm == "vanilla-greedy"
        base = OfflineConfig(q=cfg.q, objective_class=cls, tolerance=cfg.tolerance, seed=cfg.seed,
                             lazy_evaluation=lazy, trace=cfg.trace)
        if cfg.algorithm == "vanilla-greedy":
            q = 1.0

            def call(bits, seed):
                return vanilla_greedy(f, g, replace(base, seed=seed))
        else:
            q = base.resolve_q(g, f)

            def call(bits, seed):
                return sample_greedy(f, g, replace(base, seed=seed), bits)
        bound = offline_guarantee(cfg.algorithm, cls, g.p, q)
        return call, q, bound
    mode = cfg.mode or ("monotone" if f.objective_class in ("submodular-monotone", "linear") else "general")
    mode = "monotone" if mode == "linear" else mode
    base = StreamingConfig(c=cfg.c, q=cfg.q, mode=mode, seed=cfg.seed, tolerance=cfg.tolerance,
                           trace=cfg.trace)
    c, q = base.resolve_c(g.p), base.resolve_q(g.p)

    def call(bits, seed):
        return sample_streaming(f, g, replace(base, seed=seed), bits, cfg.order)
    bound = streaming_guarantee(mode, g.p, c, q)
    return call, q, bound


def offline_guarantee(algorithm, objective_class, p, q) -> Optional[float]:
    """Proven lower bound on ``E[f(S)] / f(OPT)`` or None if no bound applies."""
    if algorithm != "sample-greedy" or p < 1:
        return None
    if objective_class == "linear" and math.isclose(q, 1.0 / p):
        return 1.0 / p
    if math.isclose(q, 1.0 / (p + 1)):
        if objective_class in ("submodular-monotone", "linear"):
            return 1.0 / (p + 1)
        return p / (p + 1) ** 2
    return None


def streaming_guarantee(mode, p, c, q) -> Optional[float]:
    """``c / ((1+c)^2 p)``, times ``1 - q`` for non-monotone objectives, when q matches c."""
    if p < 1 or not math.isclose(q, 1.0 / ((1.0 + c) * p + 1.0)):
        return None
    base = c / ((1.0 + c) ** 2 * p)
    return base if mode == "monotone" else (1.0 - q) * base


def run(cfg: ExperimentConfig, instance, trace_sink=None):
    """Yield one result record (a dict) per trial, in trial order."""
    kind, N = parse_expectation(cfg.expectation)
    call, q, bound = algorithm_setup(cfg, instance)
    n = instance.n
    opt_value = None
    if cfg.compute_opt == "always" or (cfg.compute_opt == "auto" and n <= OPT_MAX_N):
        opt_value = brute_force_opt(instance.objective, instance.constraint)[1]
    if kind == "exact" and n > EXACT_MAX_N:
        raise ValueError(f"exact enumeration refused for n={n} > {EXACT_MAX_N}")

    for trial in range(cfg.trials):
        seed = derive_seed(cfg.seed, trial)
        t0 = time.perf_counter()
        rec = {"instance": instance.name, "algorithm": cfg.algorithm, "config": cfg.echo(),
               "trial": trial, "seed": seed, "q": q, "p": instance.p, "n": n, "expectation": kind}
        if kind == "single":
            reps = []
            for r in range(cfg.boost):
                s = derive_seed(seed, r) if cfg.boost > 1 else seed
                reps.append(call(draw_sample_bits(n, q, s), s))
            best = max(range(len(reps)), key=lambda i: (reps[i].value, -i))
            rep = reps[best]
            rec.update({
                "value": rep.value,
                "solution": sorted(int(x) for x in rep.solution),
                "boost_values": [r.value for r in reps] if cfg.boost > 1 else None,
                "value_queries": sum(r.value_queries for r in reps),
                "independence_queries": sum(r.independence_queries for r in reps),
                "peak_stored_elements": max(r.peak_stored_elements for r in reps),
                "flags": rep.flags,
            })
            if trace_sink is not None:
                for r in reps:
                    for ev in r.trace:
                        trace_sink.write(json.dumps({"trial": trial, **ev}, sort_keys=True) + "\n")
        elif kind == "mc":
            reps = [call(draw_sample_bits(n, q, derive_seed(seed, r)), derive_seed(seed, r)) for r in range(N)]
            vals = np.array([r.value for r in reps])
            rec.update({
                "value": float(vals.mean()),
                "stderr": float(vals.std(ddof=1) / math.sqrt(N)),
                "samples": N,
                "value_queries": float(np.mean([r.value_queries for r in reps])),
                "independence_queries": float(np.mean([r.independence_queries for r in reps])),
                "peak_stored_elements": max(r.peak_stored_elements for r in reps),
                "flags": reps[0].flags,
            })
        else:
            algo = _enumerable(call)
            terms, vq, iq, peak, flags = [], [], [], 0, []
            for bits, prob, rep in enumerate_runs(algo, instance.objective, instance.constraint,
                                                  None, q=q, max_n=EXACT_MAX_N):
                terms.append(prob * rep.value)
                vq.append(prob * rep.value_queries)
                iq.append(prob * rep.independence_queries)
                peak = max(peak, rep.peak_stored_elements)
                flags = rep.flags
            rec.update({
                "value": math.fsum(terms),
                "value_queries": math.fsum(vq),
                "independence_queries": math.fsum(iq),
                "peak_stored_elements": peak,
                "flags": flags,
            })
        if opt_value is not None:
            rec["opt_value"] = opt_value
            rec["ratio"] = rec["value"] / opt_value if opt_value > 0 else None
            rec["guarantee"] = bound
            if kind == "exact" and bound is not None and not rec["flags"]:
                rec["guarantee_holds"] = rec["value"] >= bound * opt_value - 1e-9
        rec["wall_time"] = time.perf_counter() - t0
        yield rec


def _enumerable(call):
    def algo(objective, system, config, bits):
        return call(bits, 0)
    return algo


def record_json(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True)


def strip_wall_time(line: str) -> str:
    d = json.loads(line)
    d.pop("wall_time", None)
    return json.dumps(d, sort_keys=True)


COMPARE_COLUMNS = ("algorithm", "value", "value_queries", "independence_queries", "peak_stored_elements",
                   "value_ratio", "query_ratio", "ratio_vs_opt")


def compare(algorithms, instance, cfg: ExperimentConfig, baseline: Optional[str] = None) -> list:
    """Run each algorithm under the same seeds and report ratios against a baseline.

    The baseline is ``baseline`` if given, else the first algorithm.  Values are
    means over ``cfg.trials`` trials.
    """
    if not algorithms:
        raise ValueError("nothing to compare")
    baseline = baseline or algorithms[0]
    algorithms = list(algorithms)
    if baseline not in algorithms:
        algorithms.append(baseline)
    rows = []
    for alg in algorithms:
        recs = list(run(replace(cfg, algorithm=alg), instance))
        opt = recs[0].get("opt_value")
        rows.append({
            "algorithm": alg,
            "value": float(np.mean([r["value"] for r in recs])),
            "value_queries": float(np.mean([r["value_queries"] for r in recs])),
            "independence_queries": float(np.mean([r["independence_queries"] for r in recs])),
            "peak_stored_elements": max(r["peak_stored_elements"] for r in recs),
            "ratio_vs_opt": float(np.mean([r["value"] for r in recs])) / opt if opt else None,
            "baseline": baseline,
        })
    base = rows[algorithms.index(baseline)]
    for row in rows:
        row["value_ratio"] = row["value"] / base["value"] if base["value"] else None
        row["query_ratio"] = row["value_queries"] / base["value_queries"] if base["value_queries"] else None
    return rows


def comparison_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(COMPARE_COLUMNS) + ["baseline"], lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


__all__ = ["ExperimentConfig", "run", "compare", "comparison_csv", "offline_guarantee", "streaming_guarantee",
           "default_q", "ALGORITHMS"]
