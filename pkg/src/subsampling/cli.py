"""Command-line entry point: ``subsampling --generate coverage+uniform:n=10 ...``."""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import ExitStack

from .audit import audit_suite
from .core import OracleError
from .experiment import ALGORITHMS, ExperimentConfig, compare, comparison_csv, record_json, run
from .instances import GENERATORS, load_instance, load_permutation, parse_generate_spec, seeded_permutation


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="subsampling",
        description="Run subsampled greedy and streaming maximisers on a stored or generated instance.",
    )
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--instance", metavar="PATH", help="instance JSON file")
    src.add_argument("--generate", metavar="KIND:PARAMS",
                     help="synthetic instance, e.g. cut+genre-limits:n=12,seed=3,genres=4; kinds: "
                          + ", ".join(sorted(GENERATORS)))
    ap.add_argument("--algorithm", choices=ALGORITHMS, default="sample-greedy")
    ap.add_argument("--q", type=float, help="sampling probability (default from p and the mode)")
    ap.add_argument("--c", type=float, help="streaming acceptance parameter")
    ap.add_argument("--mode", choices=("monotone", "general", "linear"),
                    help="objective class used for defaults (default: the objective's own class)")
    ap.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit)")
    ap.add_argument("--trials", type=int, default=1)
    ap.add_argument("--boost", type=int, default=1, help="best-of-R repetitions per trial")
    ap.add_argument("--expectation", default="single", help="single, mc:N or exact")
    ap.add_argument("--tolerance", type=float, default=0.0, help="marginals at or below this count as zero")
    order = ap.add_mutually_exclusive_group()
    order.add_argument("--permute-stream", type=int, metavar="SEED", help="seeded arrival order")
    order.add_argument("--stream-order", metavar="PATH", help="arrival order, one index per line")
    ap.add_argument("--no-opt", action="store_true", help="skip the brute-force optimum")
    ap.add_argument("--trace", metavar="PATH", help="write per-step events as JSON lines")
    ap.add_argument("--out", metavar="PATH", help="JSON-lines output (default: stdout)")
    ap.add_argument("--compare", metavar="ALG,ALG", help="comparison table instead of per-trial records")
    ap.add_argument("--csv", metavar="PATH", help="CSV copy of the comparison table")
    ap.add_argument("--audit", metavar="SCOPE",
                    help="run oracle suites (comma list or 'all'); exits 1 if any check fails")
    ap.add_argument("--audit-runs", type=int, default=200, help="seeded runs for the streaming-audit suite")
    return ap


def _load(args):
    if args.instance:
        return load_instance(args.instance)
    if args.generate:
        return parse_generate_spec(args.generate)
    raise ValueError("one of --instance or --generate is required")


def _config(args, inst) -> ExperimentConfig:
    order = None
    if args.permute_stream is not None:
        order = seeded_permutation(inst.n, args.permute_stream)
    elif args.stream_order:
        order = load_permutation(args.stream_order, inst.n)
    if order is not None and args.algorithm != "sample-streaming" and not args.compare:
        raise ValueError("stream orders apply only to sample-streaming")
    return ExperimentConfig(
        algorithm=args.algorithm, q=args.q, c=args.c, mode=args.mode, seed=args.seed,
        trials=args.trials, boost=args.boost, expectation=args.expectation, tolerance=args.tolerance,
        order=order, compute_opt="never" if args.no_opt else "auto", trace=bool(args.trace),
    )


def _main(args, stdout) -> int:
    with ExitStack() as stack:
        out = stack.enter_context(open(args.out, "w")) if args.out else stdout
        if args.audit is not None:
            report = audit_suite(args.audit, streaming_runs=args.audit_runs, seed=args.seed)
            out.write(json.dumps(report.to_dict(), sort_keys=True, default=str) + "\n")
            return 0 if report.passed else 1
        inst = _load(args)
        cfg = _config(args, inst)
        if args.compare:
            algs = [a.strip() for a in args.compare.split(",") if a.strip()]
            rows = compare(algs, inst, cfg)
            for row in rows:
                out.write(json.dumps({"instance": inst.name, **row}, sort_keys=True) + "\n")
            if args.csv:
                with open(args.csv, "w") as fh:
                    fh.write(comparison_csv(rows))
            return 0
        trace = stack.enter_context(open(args.trace, "w")) if args.trace else None
        for rec in run(cfg, inst, trace):
            out.write(record_json(rec) + "\n")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _main(args, sys.stdout)
    except (ValueError, TypeError, KeyError, OSError, OracleError, json.JSONDecodeError) as exc:
        print(f"subsampling: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
