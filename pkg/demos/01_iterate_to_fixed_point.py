"""Solve a k-th order fixed-point problem by the k-step iteration.

The averaging operator f(x_1, .., x_k) = (x_1 + .. + x_k) / (2k) on [0, 2]
has the unique fixed point 0: starting from any k seed points, the sequence
x_{n+k} = f(x_n, .., x_{n+k-1}) contracts toward it. We run the scheme for
several arities under the squared-Euclidean distance (a b-metric with
relaxation constant b = 2) and watch the step sizes die off geometrically.

Run with:  python3 demos/01_iterate_to_fixed_point.py
"""

import numpy as np

from presic_lab import Box, StopRule, averaging, iterate, squared_euclidean

box = Box(np.zeros(1), np.full(1, 2.0))
space = squared_euclidean(box)
stop = StopRule(residual_tol=1e-20, step_tol=1e-20)

print("k-step iteration of the averaging operator on [0, 2]")
print(f"{'k':>3} {'start':>24} {'iterations':>11} {'limit':>12} {'residual':>12}")
for k in (1, 2, 3, 5):
    rng = np.random.default_rng(42)
    start = box.sample(rng, k)
    trace = iterate(averaging(k), space, start, stop)
    label = ", ".join(f"{v[0]:.3f}" for v in start)
    print(f"{k:>3} [{label:>22}] {len(trace.points):>11} "
          f"{trace.limit[0]:>12.3e} {trace.final_residual:>12.3e}")

print("\nfirst ten step sizes alpha_n = d(x_n, x_{n+1}) for k = 2:")
trace = iterate(averaging(2), space, [2.0, 1.0], stop)
for n, a in enumerate(trace.alphas[:10]):
    print(f"  alpha_{n} = {a:.6e}")
print(f"stop reason: {trace.stop_reason}, fitted rate ~ {trace.fitted_rate:.4f}")
