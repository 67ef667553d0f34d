"""A-priori error bounds and empirical rate estimation.

When the operator satisfies a sum-type or max-type contraction condition
with constant eta < 1 on a b-metric space, the step sizes obey
alpha_n <= b^k K theta^n with theta = eta^(1/k) and K determined by the
first k steps, and the tail d(x_n, x_{n+p}) is bounded by
b^p K theta^n / (1 - theta). presic_bounds checks the per-step bound
against an actual trace; estimate_rate fits the observed geometric rate by
least squares on log(alpha_n) and compares it to the guaranteed theta.

For the averaging operator with k = 2 the observed rate is governed by the
dominant root of t^2 = (t + 1) / 4 (squared, because the distance here is
the squared difference) - noticeably faster than the worst-case guarantee.

Run with:  python3 demos/04_rates_and_bounds.py
"""

import numpy as np

from presic_lab import (
    Box,
    StopRule,
    affine,
    averaging,
    euclidean,
    iterate,
    kannan_bounds,
    picard,
    presic_bounds,
    squared_euclidean,
)

box = Box(np.zeros(1), np.full(1, 2.0))
space = squared_euclidean(box)
stop = StopRule(residual_tol=1e-20, step_tol=1e-20)

trace = iterate(averaging(2), space, [2.0, 1.0], stop)
report = presic_bounds(trace, eta=0.26, b=2.0, k=2)
print("averaging operator, k = 2, eta = 0.26 on the squared metric:")
print(f"  theta = eta^(1/k) = {report.theta:.4f}, K = {report.K:.4f}")
print(f"  every observed alpha_n within its bound: {report.all_steps_within}")
print(f"  tail bound d(x_5, x_8) <= {report.tail_bound(5, 3):.6f}; "
      f"observed = {space.distance(trace.points[5], trace.points[8]):.6e}")

root = float(max(np.roots([1.0, -0.25, -0.25])))
print(f"  fitted rate {trace.fitted_rate:.4f} vs characteristic-root "
      f"prediction {root ** 2:.4f} vs guaranteed theta {report.theta:.4f}")

print("\nquarter map f(x) = x/4 under a kannan-type condition (a = 2/3):")
eu = euclidean(Box(np.full(1, -2.0), np.full(1, 2.0)))
qtrace = picard(affine([0.25]), eu, [1.0], StopRule(residual_tol=1e-15, step_tol=1e-15))
d01 = eu.distance(qtrace.points[0], qtrace.points[1])
for n in (1, 3, 5):
    bound = kannan_bounds(2 / 3, 1, 1.0, d01, n)
    observed = eu.distance(qtrace.points[n], qtrace.points[-1])
    print(f"  n = {n}: tail bound {bound:.6f}, observed distance to limit {observed:.6e}")
