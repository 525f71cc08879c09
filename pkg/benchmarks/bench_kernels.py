"""Numba kernels against their numpy fallbacks.

Two measurements:

* per-kernel timings, calling the ``*_nb`` and ``*_np`` functions side by side
  on identical inputs (and checking that they agree);
* an end-to-end greedy run, repeated in a child process with
  ``SUBSAMPLING_DISABLE_NUMBA=1`` so the whole package uses the fallback.

    python3 benchmarks/bench_kernels.py [--repeat 2000] [--n 200]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from subsampling import _kernels


def timeit(fn, args, repeat):
    fn(*args)  # warm-up, includes jit compile
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def kernel_cases(n, rng):
    idx = np.sort(rng.choice(n, size=min(20, n), replace=False)).astype(np.int64)
    w = rng.random(n)
    cover = rng.random((n, 4 * n)) < 0.05
    iw = rng.random(4 * n)
    X = rng.random((n, 6))
    sim = X @ X.T
    rel = sim.sum(axis=1)
    pts = rng.random((n, 2))
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    K = np.exp(-d2 / 0.25)
    eu = rng.integers(0, n // 2, size=n).astype(np.int64)
    ev = (eu + 1 + rng.integers(0, n // 2 - 1, size=n)) % (n // 2)
    return {
        "modular": ((w, idx),),
        "coverage": ((cover, iw, idx),),
        "cut": ((rel, sim, 0.5, idx),),
        "logdet": ((K, idx, 1.0, True),),
        "is_forest": ((eu, ev.astype(np.int64), n // 2, idx[:8]),),
    }


def bench_kernels(n, repeat, seed=0):
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable; kernel comparison skipped")
        return []
    rng = np.random.default_rng(seed)
    rows = []
    for name, (args,) in kernel_cases(n, rng).items():
        base = name if name == "is_forest" else name + "_value"
        nb = getattr(_kernels, base + "_nb")
        npf = getattr(_kernels, base + "_np")
        a, b = nb(*args), npf(*args)
        agree = bool(np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float)))
        t_nb, t_np = timeit(nb, args, repeat), timeit(npf, args, repeat)
        rows.append({"kernel": name, "numba_us": t_nb * 1e6, "numpy_us": t_np * 1e6,
                     "speedup": t_np / t_nb, "agree": agree})
    return rows


END_TO_END = """
import json, time
from subsampling import generate_instance, sample_greedy, OfflineConfig, _kernels
inst = generate_instance("cut+genre-limits", {n}, seed=1, genres=5, genre_cap=3, k=15)
sample_greedy(inst.objective, inst.constraint, OfflineConfig(seed=0))
t0 = time.perf_counter()
vals = [sample_greedy(inst.objective, inst.constraint, OfflineConfig(seed=s)).value for s in range({runs})]
print(json.dumps({{"backend": _kernels.BACKEND, "seconds": time.perf_counter() - t0, "checksum": sum(vals)}}))
"""


def bench_end_to_end(n, runs):
    out = []
    for disable in ("0", "1"):
        env = dict(os.environ, SUBSAMPLING_DISABLE_NUMBA=disable)
        res = subprocess.run([sys.executable, "-c", END_TO_END.format(n=n, runs=runs)],
                             env=env, capture_output=True, text=True, check=True)
        out.append(json.loads(res.stdout))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--runs", type=int, default=20)
    args = ap.parse_args(argv)

    print(f"{'kernel':<10} {'numba us':>10} {'numpy us':>10} {'speedup':>8}  agree")
    for r in bench_kernels(args.n, args.repeat):
        print(f"{r['kernel']:<10} {r['numba_us']:>10.2f} {r['numpy_us']:>10.2f} {r['speedup']:>8.1f}  {r['agree']}")
    runs = bench_end_to_end(args.n, args.runs)
    for r in runs:
        print(f"sample_greedy x{args.runs} [{r['backend']}]: {r['seconds']:.3f} s  (checksum {r['checksum']:.6f})")
    if len(runs) == 2 and not np.isclose(runs[0]["checksum"], runs[1]["checksum"]):
        print("warning: backends disagree on the end-to-end checksum")


if __name__ == "__main__":
    main()
