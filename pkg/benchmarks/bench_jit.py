#!/usr/bin/env python3
"""Timing comparison of the compiled kernels against the pure-Python fallback.

Runs the hot paths (GIG draws, local-scale sweeps, coordinate descent, a short
MCEM segment) in this process, then re-runs them in a subprocess with
NBP_DISABLE_JIT=1 and prints the speedups.  Draw streams are bit-identical
across modes, so the comparison is like for like.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np

BENCH_CODE = r"""
import json, time
import numpy as np
import nbp._jit
from nbp.rand_dist import RngStream, GigParams, sample_gig
from nbp.gibbs import _update_local_scales, run_mcem, McemConfig
from nbp.dss import adaptive_lasso_cd
from nbp.model import standardize

results = {"jit": nbp._jit.JIT_ENABLED}

def timeit(label, fn, *args, repeat=1):
    fn(*args)  # warmup / compile
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    results[label] = (time.perf_counter() - t0) / repeat

n_gig = 200_000
def bench_gig():
    s = RngStream(1)
    gp = GigParams(0.4, 2.0, -0.3)
    for _ in range(n_gig):
        sample_gig(gp, s)
timeit("gig_draws_200k", bench_gig)

def bench_local_scales():
    s = RngStream(2)
    p = 500
    beta = np.linspace(-2, 2, p)
    lam2 = np.ones(p)
    xi2 = np.ones(p)
    for _ in range(200):
        _update_local_scales(s.state, beta, lam2, xi2, 1.5, 0.5, 1.0)
timeit("local_scale_sweeps_200x500", bench_local_scales)

def bench_cd():
    gen = np.random.default_rng(3)
    X = np.ascontiguousarray(gen.standard_normal((100, 300)))
    y = gen.standard_normal(100)
    w = gen.uniform(0.5, 2.0, 300)
    adaptive_lasso_cd(X, y, w, 0.01)
timeit("coordinate_descent_100x300", bench_cd)

def bench_mcem():
    gen = np.random.default_rng(4)
    X = gen.standard_normal((60, 100))
    y = X @ np.where(np.arange(100) < 10, 1.5, 0.0) + gen.standard_normal(60)
    data = standardize(X, y)
    run_mcem(data, McemConfig(total_iters=1500, burn_in=700, em_block=50, seed=5))
timeit("mcem_1500_sweeps_60x100", bench_mcem)

print(json.dumps(results))
"""


def run_mode(disable_jit):
    env = dict(os.environ)
    if disable_jit:
        env["NBP_DISABLE_JIT"] = "1"
    else:
        env.pop("NBP_DISABLE_JIT", None)
    out = subprocess.run(
        [sys.executable, "-c", BENCH_CODE], capture_output=True, text=True, env=env, check=True
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    print("compiling and timing (jit mode)...")
    jit = run_mode(disable_jit=False)
    print("timing (pure-python fallback)...")
    py = run_mode(disable_jit=True)
    assert jit.pop("jit") is True and py.pop("jit") is False
    width = max(map(len, jit))
    print(f"\n{'benchmark'.ljust(width)}  {'jit':>10}  {'python':>10}  {'speedup':>8}")
    for key in jit:
        print(f"{key.ljust(width)}  {jit[key]:>9.3f}s  {py[key]:>9.3f}s  {py[key] / jit[key]:>7.1f}x")


if __name__ == "__main__":
    main()
