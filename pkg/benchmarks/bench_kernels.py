"""Compare the numba kernels against their pure-Python bodies.

    python3 benchmarks/bench_kernels.py [--family av123] [--n 200] [--rows 2000]

Both columns run the same source. The pure column is timed in a child
process with GENTREE_NO_NUMBA=1, so nested kernels are not compiled there
either. Under that flag the script prints only the pure timings.
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from gentree._jit import HAVE_NUMBA
from gentree.families import get_family
from gentree.kernels import count_consecutive_batch, decode_batch
from gentree.walks import SAMPLERS, make_rng, solve_pq, walks_to_body


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def timings(args):
    F = get_family(args.family)
    W = solve_pq(F)
    pos, col = SAMPLERS["cycle"](W, args.n + F.n_offset, args.rows, make_rng(0, 1))
    labels, colors = walks_to_body(F, pos, col)
    labels = np.ascontiguousarray(labels, np.int64)
    colors = np.ascontiguousarray(colors, np.int64)
    out = np.empty(labels.shape, np.int64)
    decode_batch(F.code, labels, colors, out)
    perms = out.copy()
    pi = np.array([2, 1], np.int64)

    cases = [("decode_batch", decode_batch, (F.code, labels, colors, out)),
             ("count_consecutive_batch", count_consecutive_batch, (perms, pi))]
    res = {}
    for name, fn, a in cases:
        fn(*a)  # compile or load from cache; a no-op when pure
        res[name] = best_of(lambda: fn(*a), args.repeat if HAVE_NUMBA else 1)
    return F.id, res, perms


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="av123")
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--rows", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)

    fid, res, perms = timings(args)
    if args.child:
        print(json.dumps({"res": res, "digest": int(perms.sum())}))
        return 0
    print(f"family {fid}, size {args.n}, {args.rows} rows, numba {'on' if HAVE_NUMBA else 'off'}")
    print(f"{'kernel':<26}{'pure s':>10}{'numba s':>10}{'speedup':>10}")
    if not HAVE_NUMBA:
        for name, t in res.items():
            print(f"{name:<26}{t:>10.3f}{'-':>10}{'-':>10}")
        return 0
    cmd = [sys.executable, __file__, "--child", "--family", fid, "--n", str(args.n),
           "--rows", str(args.rows), "--repeat", "1"]
    env = dict(os.environ, GENTREE_NO_NUMBA="1")
    child = json.loads(subprocess.run(cmd, env=env, capture_output=True, text=True,
                                      check=True).stdout)
    # same seed, same walks: both builds must decode to the same permutations
    assert child["digest"] == int(perms.sum())
    for name, t in res.items():
        tp = child["res"][name]
        print(f"{name:<26}{tp:>10.3f}{t:>10.4f}{tp / t:>9.0f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
