"""Empirically verify or falsify contraction conditions by sampling.

A condition such as ciric_max(kappa) claims that for every window
(x_1, .., x_{k+1}) the distance d(f(x_1,..,x_k), f(x_2,..,x_{k+1})) is at
most kappa times the largest consecutive gap max_i d(x_i, x_{i+1}). We
sample many windows from the domain; a single counterexample falsifies the
claim with an explicit witness, otherwise the certificate reports the
minimum slack seen.

The second half shows a gauge-function condition of the form
rhs = M - phi(M) that fails on part of the domain: the built-in piecewise
gauge satisfies phi(M) > M for M in [5/2, 4], so the right-hand side goes
negative there and sampling finds a witness. Restricting the box so that
M stays below 5/2 makes the same condition pass.

Run with:  python3 demos/02_verify_contractions.py
"""

import numpy as np

from presic_lab import (
    Box,
    averaging,
    ciric_max,
    estimate_constant,
    piecewise_phi,
    squared_euclidean,
    verify,
    weak_phi,
)

box = Box(np.zeros(1), np.full(1, 2.0))
space = squared_euclidean(box)
op = averaging(2)

print("-- ciric_max on the averaging operator (k = 2) --")
for kappa in (0.3, 0.2):
    cert = verify(op, space, ciric_max(kappa), samples=3000, seed=0)
    print(f"kappa = {kappa}: {cert.verdict} (slack_min = {cert.slack_min:+.4f})")
    if cert.witness is not None:
        w = cert.witness
        pts = np.asarray(w.window).ravel().tolist()
        print(f"  witness window {pts}: lhs = {w.lhs:.4f} > rhs = {w.rhs:.4f}")

est = estimate_constant(op, space, "ciric_max", samples=0, seed=0, grid_points=40)
print(f"estimated sharp constant: {est['constant_hat']:.4f} (true value 1/4)")

print("\n-- gauge condition rhs = M - phi(M) with the piecewise gauge --")
cond = weak_phi(piecewise_phi())
full = verify(averaging(1), space, cond, samples=4000, seed=7)
print(f"full box [0, 2]:   {full.verdict}")
w = full.witness
print(f"  witness M = {space.distance(w.window[0], w.window[1]):.4f} "
      f"(gauge exceeds the identity on [5/2, 4], so rhs = {w.rhs:.4f} < 0)")
sub = squared_euclidean(Box(np.zeros(1), np.full(1, 1.5)))
print(f"sub-box [0, 1.5]:  {verify(averaging(1), sub, cond, 4000, seed=7).verdict}")
