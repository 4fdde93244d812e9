"""Compare the numba and numpy kernel backends on representative workloads.

Each backend runs in its own interpreter (the backend is fixed at import time
by UAG_NUMBA). One warm-up pass absorbs JIT compilation; the reported figure
is the best of ``--repeat`` timed passes.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from uag import _kernels
from uag.algebra import generate_subalgebra
from uag.fixtures import Q8, S3
from uag.terms import point_array
from uag.geometry import next_closure

repeat = int(sys.argv[1])

def free_rows(H, r):
    gens = np.ascontiguousarray(point_array(H.size, r).T)
    return generate_subalgebra([H] * gens.shape[1], gens)

def gen_s3():
    free_rows(S3, 2)

def gen_q8():
    free_rows(Q8, 2)

F_S3 = free_rows(S3, 2).rows
F_Q8 = free_rows(Q8, 2).rows

def closed_s3():
    next_closure(F_S3.shape[1], lambda m: _kernels.fd_closure(F_S3, m, 6))

def closed_q8():
    next_closure(F_Q8.shape[1], lambda m: _kernels.fd_closure(F_Q8, m, 8))

out = {"backend": _kernels.BACKEND}
for name, fn in [("generate F2(S3)", gen_s3), ("generate F2(Q8)", gen_q8),
                 ("next-closure Cl2(S3)", closed_s3), ("next-closure Cl2(Q8)", closed_q8)]:
    fn()
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    out[name] = best
print(json.dumps(out))
"""


def run(flag, repeat):
    env = dict(os.environ, UAG_NUMBA=flag)
    p = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                       capture_output=True, text=True, check=True)
    return json.loads(p.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    fast, slow = run("1", args.repeat), run("0", args.repeat)
    if args.json:
        print(json.dumps({"numba": fast, "numpy": slow}, indent=2))
        return
    if fast["backend"] != "numba":
        print("numba is not installed; both columns use numpy")
    print(f"{'workload':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for key in fast:
        if key == "backend":
            continue
        print(f"{key:<24}{fast[key]:>12.4f}{slow[key]:>12.4f}{slow[key] / fast[key]:>9.1f}x")


if __name__ == "__main__":
    main()
