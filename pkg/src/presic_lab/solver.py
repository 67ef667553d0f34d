"""k-step iteration x_{n+k} = f(x_n,..,x_{n+k-1}), diagonal Picard iteration,
convergence detection, empirical rate fitting, and explicit error bounds.

The bound machinery: with theta = eta^(1/k) and
K = max(alpha_1/theta, .., alpha_k/theta^k) built from the first k
consecutive-step distances alpha_n = d(x_n, x_{n+1}), every step obeys
alpha_n <= b^k K theta^n, and d(x_n, x_{n+p}) <= b^p K theta^n / (1-theta).
For the kannan-style scheme with lambda = a k b^k the tail bound is
(b lambda)^n / (1 - b lambda) * d(x_0, x_1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bmetric import TOL_REL, leq_tol
from .errors import DomainError, NumericEvalError, UsageError

DIVERGENCE_FACTOR = 1e12


@dataclass(frozen=True)
class StopRule:
    residual_tol: float = 1e-10
    step_tol: float = 1e-10
    max_iterations: int = 10 ** 6
    cauchy_window: int = 16

    def __post_init__(self):
        if self.residual_tol <= 0 or self.step_tol <= 0:
            raise UsageError("tolerances must be positive")
        if self.max_iterations < 2:
            raise UsageError("max_iterations too small")


@dataclass
class IterationTrace:
    points: np.ndarray            # (n, m), includes the k seeds
    alphas: np.ndarray            # (n-1,), alphas[i] = d(points[i], points[i+1])
    stop_reason: str              # converged | max_iterations | diverged
    limit: np.ndarray | None = None
    final_residual: float | None = None
    fitted_rate: float | None = None
    out_of_domain: int = 0

    def __len__(self):
        return len(self.points)

    def to_dict(self):
        out = {
            "points": [[float(v) for v in row] for row in self.points],
            "alphas": [float(a) for a in self.alphas],
            "stop_reason": self.stop_reason,
            "limit": [float(v) for v in self.limit] if self.limit is not None else None,
            "final_residual": self.final_residual,
            "fitted_rate": self.fitted_rate,
        }
        return out

    def to_csv_rows(self, bounds=None):
        """Rows (n, x, alpha_n, bound_n); coordinates are ';'-joined."""
        rows = [("n", "x", "alpha_n", "bound_n")]
        for i, pt in enumerate(self.points):
            alpha = repr(float(self.alphas[i])) if i < len(self.alphas) else ""
            bnd = ""
            if bounds is not None and i < len(bounds.per_step_bounds):
                bnd = repr(float(bounds.per_step_bounds[i]))
            rows.append((str(i + 1), ";".join(repr(float(v)) for v in pt), alpha, bnd))
        return rows


def _run(step_fn, op, space, seeds, stop, strict_domain):
    """Shared loop: extend `seeds` with step_fn until a stop rule fires."""
    points = [np.atleast_1d(np.asarray(p, dtype=float)) for p in seeds]
    alphas = [space.distance(points[i], points[i + 1]) for i in range(len(points) - 1)]
    out_of_domain = 0
    stop_reason = "max_iterations"
    while len(points) < stop.max_iterations:
        nxt = step_fn(points)
        if not np.all(np.isfinite(nxt)):
            raise NumericEvalError("iteration produced a non-finite point")
        if not space.domain.contains(nxt)[0]:
            if strict_domain:
                raise DomainError("iterate left the domain in strict mode")
            out_of_domain += 1
        alpha = space.distance(points[-1], nxt)
        points.append(nxt)
        alphas.append(alpha)
        if alphas and alpha > DIVERGENCE_FACTOR * (1.0 + alphas[0]):
            stop_reason = "diverged"
            break
        if alpha <= stop.step_tol:
            res = space.distance(nxt, op.diagonal_apply(nxt))
            if res <= stop.residual_tol:
                stop_reason = "converged"
                break
    pts = np.asarray(points)
    trace = IterationTrace(pts, np.asarray(alphas), stop_reason,
                           out_of_domain=out_of_domain)
    if stop_reason == "converged":
        trace.limit = pts[-1]
        trace.final_residual = space.distance(trace.limit, op.diagonal_apply(trace.limit))
    trace.fitted_rate = estimate_rate(trace)
    return trace


def iterate(op, space, initial, stop=None, strict_domain=False):
    """Run the k-step scheme from k seed points."""
    stop = stop or StopRule()
    arr = np.asarray(initial, dtype=float)
    if arr.ndim == 1:
        if op.dimension == 1:
            arr = arr.reshape(-1, 1)
        elif op.arity == 1 and arr.size == op.dimension:
            arr = arr.reshape(1, -1)
    if arr.shape != (op.arity, op.dimension):
        raise UsageError(
            f"initial must supply k={op.arity} points of dimension {op.dimension}, got shape {arr.shape}")
    seeds = [arr[i] for i in range(op.arity)]
    step = lambda pts: op.apply(np.stack(pts[-op.arity:]))
    return _run(step, op, space, seeds, stop, strict_domain)


def picard(op, space, x0, stop=None, strict_domain=False):
    """Iterate the diagonal map F(x) = f(x,..,x) from a single start."""
    stop = stop or StopRule()
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    step = lambda pts: op.diagonal_apply(pts[-1])
    return _run(step, op, space, [x0], stop, strict_domain)


@dataclass
class BoundReport:
    theta: float
    K: float
    b: float
    per_step_bounds: np.ndarray  # bound for alpha_n at n = 1..len(alphas)
    all_steps_within: bool

    def tail_bound(self, n, p):
        """Upper bound on d(x_n, x_{n+p}): b^p K theta^n / (1 - theta)."""
        if n < 1 or p < 1:
            raise UsageError("tail_bound needs n >= 1 and p >= 1")
        return self.b ** p * self.K * self.theta ** n / (1.0 - self.theta)

    def to_dict(self):
        return {
            "theta": self.theta,
            "K": self.K,
            "b": self.b,
            "per_step_bounds": [float(v) for v in self.per_step_bounds],
            "all_steps_within": self.all_steps_within,
        }


def presic_bounds(trace, eta, b, k):
    """Per-step and tail bounds for a trace of a ciric_max(eta) operator.

    theta = eta^(1/k); K = max over the first k alphas of alpha_i/theta^i;
    per-step bound b^k K theta^n; all_steps_within reports whether every
    observed alpha respects its bound (tolerance-aware).
    """
    if not 0 < eta < 1:
        raise UsageError("eta must lie in (0, 1)")
    alphas = np.asarray(trace.alphas, dtype=float)
    if len(alphas) < k:
        raise UsageError(f"trace too short: need at least k+1={k + 1} points")
    theta = eta ** (1.0 / k)
    K = float(max(alphas[i] / theta ** (i + 1) for i in range(k)))
    n = np.arange(1, len(alphas) + 1, dtype=float)
    per_step = b ** k * K * theta ** n
    within = bool(np.all(leq_tol(alphas, per_step)))
    return BoundReport(theta=theta, K=K, b=float(b),
                       per_step_bounds=per_step, all_steps_within=within)


def kannan_bounds(a, k, b, d01, n):
    """(b lambda)^n / (1 - b lambda) * d01 with lambda = a k b^k.

    Upper bound on d(x_n, x_m) for every m > n along the Picard scheme;
    requires a k b^(k+1) < 1.
    """
    if d01 < 0 or n < 0:
        raise UsageError("d01 and n must be nonnegative")
    lam = a * k * b ** k
    if not b * lam < 1:
        raise UsageError("requires a*k*b^(k+1) < 1")
    return (b * lam) ** n / (1.0 - b * lam) * d01


def estimate_rate(trace):
    """Geometric rate fitted to the tail of the step distances.

    Least-squares slope of log(alpha_n) over the trailing half of the
    nonzero alphas, exponentiated; None when fewer than 8 nonzero alphas.
    """
    alphas = np.asarray(trace.alphas, dtype=float)
    mask = alphas > 0
    if mask.sum() < 8:
        return None
    idx = np.nonzero(mask)[0]
    tail = idx[len(idx) // 2:]
    slope = np.polyfit(tail.astype(float), np.log(alphas[tail]), 1)[0]
    return float(np.exp(slope))


def cauchy_profile(trace, space, P):
    """s_n = max_{1<=p<=P} d(x_n, x_{n+p}) for every n with n+P in range."""
    if P < 1:
        raise UsageError("P must be >= 1")
    pts = np.asarray(trace.points, dtype=float)
    n_max = len(pts) - P
    if n_max <= 0:
        return np.empty(0)
    out = np.zeros(n_max)
    for p in range(1, P + 1):
        d = space.distance_batch(pts[:n_max], pts[p:p + n_max])
        out = np.maximum(out, d)
    return out
