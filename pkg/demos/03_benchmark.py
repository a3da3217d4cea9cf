"""Monte-Carlo benchmark: reconstruction error against number of shots.

Run: python demos/03_benchmark.py [n] [workers]

Draws n random Lindbladians, simulates each at several shot counts M, and
reconstructs.  Mean infidelity should track the projection-noise level
0.5/sqrt(M) and the generator error should fall roughly as M**-0.5.  The
default n=20 takes a couple of minutes on one core; the acceptance suite
uses n=100.
"""

import sys

from lindrecon import benchmark, loglog_slope

n = int(sys.argv[1]) if len(sys.argv) > 1 else 20
workers = int(sys.argv[2]) if len(sys.argv) > 2 else 1
shots = [64, 256, 1024, 4096]

rows = benchmark(shots, n, seed=2024, workers=workers)
print(f"{'M':>6} {'mean err':>10} {'16%':>8} {'84%':>8} {'infidelity':>11} {'0.5/sqrtM':>10}")
for r in rows:
    print(f"{r.shots:6d} {r.mean_error:10.4f} {r.p16:8.4f} {r.p84:8.4f} {r.mean_infidelity:11.5f} {r.bound:10.5f}")
print(f"log-log slope of mean error: {loglog_slope(shots, [r.mean_error for r in rows]):.3f}")
