"""b-metric spaces on box domains.

A b-metric relaxes the triangle inequality to d(x,y) <= b(d(x,z)+d(z,y))
for a constant b >= 1. This module provides the standard constructions
(p-th power of a metric with b = 2^(p-1), squared Euclidean with b = 2,
truncated l_p for 0 < p < 1 with b = 2^(1/p)), sampled axiom checking,
empirical estimation of the sharp relaxation constant, and the iterated
chain bound d(u_0,u_n) <= b d(u_0,u_1) + ... + b^(n-1) d(u_{n-1},u_n).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dsl
from .errors import DegenerateDomainError, UsageError

# Scale-aware slack: L <= R is judged violated when L > R + TOL_REL*(1+|R|).
TOL_REL = 1e-9


def leq_tol(lhs, rhs):
    """Tolerance-aware comparison lhs <= rhs (elementwise for arrays)."""
    return lhs <= rhs + TOL_REL * (1.0 + np.abs(rhs))


def as_point(x, dimension=None):
    """Coerce to a finite 1-d float64 vector, optionally of a fixed dimension."""
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1 or p.size < 1:
        raise UsageError(f"a point must be a 1-d vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise UsageError("point has non-finite coordinates")
    if dimension is not None and p.size != dimension:
        raise UsageError(f"dimension mismatch: expected {dimension}, got {p.size}")
    return p


@dataclass(frozen=True)
class Box:
    """Axis-aligned sampling domain [lo_1,hi_1] x ... x [lo_m,hi_m]."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise UsageError("box lo/hi must be 1-d vectors of equal length")
        if np.any(lo > hi):
            raise UsageError("box requires lo[i] <= hi[i]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dimension(self):
        return self.lo.size

    def contains(self, points):
        pts = np.atleast_2d(points)
        return np.all((pts >= self.lo - TOL_REL) & (pts <= self.hi + TOL_REL), axis=-1)

    def sample(self, rng, count):
        """Draw `count` uniform points, shape (count, m)."""
        return rng.uniform(self.lo, self.hi, size=(count, self.dimension))

    def grid(self, points_per_axis):
        """Uniform grid, shape (points_per_axis**m, m)."""
        axes = [np.linspace(self.lo[i], self.hi[i], points_per_axis)
                for i in range(self.dimension)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class Violation:
    axiom: str  # b1 | b2 | b3
    points: tuple
    lhs: float
    rhs: float


@dataclass
class AxiomReport:
    checked_pairs: int
    checked_triples: int
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


_KINDS = ("euclidean", "power", "lp_truncated", "squared_euclidean", "custom_dsl")


@dataclass(frozen=True)
class BMetricSpace:
    """A distance on a box with its declared relaxation constant b >= 1."""

    kind: str
    domain: Box
    b: float
    p: float | None = None
    expr: object = None  # compiled dsl.Expr for custom_dsl

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise UsageError(f"unknown metric kind {self.kind!r}")
        if self.b < 1.0:
            raise UsageError("relaxation constant b must be >= 1")

    @property
    def dimension(self):
        return self.domain.dimension

    def distance(self, x, y):
        x = as_point(x, self.dimension)
        y = as_point(y, self.dimension)
        return float(self.distance_batch(x[None, :], y[None, :])[0])

    def distance_batch(self, xs, ys):
        """Vectorized distance for (N, m) arrays; returns shape (N,)."""
        xs = np.atleast_2d(xs)
        ys = np.atleast_2d(ys)
        if xs.shape[-1] != self.dimension or ys.shape[-1] != self.dimension:
            raise UsageError("dimension mismatch in distance")
        diff = np.abs(xs - ys)
        if self.kind == "euclidean":
            return np.sqrt(np.sum(diff * diff, axis=-1))
        if self.kind == "squared_euclidean":
            return np.sum(diff * diff, axis=-1)
        if self.kind == "power":
            base = np.sqrt(np.sum(diff * diff, axis=-1))
            return base ** self.p
        if self.kind == "lp_truncated":
            s = np.sum(diff ** self.p, axis=-1)
            # 0^(1/p) handled explicitly so d(x,x) is exactly 0
            return np.where(s == 0.0, 0.0, s ** (1.0 / self.p))
        if self.kind == "custom_dsl":
            env = {}
            for i in range(self.dimension):
                env[f"u{i + 1}"] = xs[..., i]
                env[f"v{i + 1}"] = ys[..., i]
            out = np.asarray(dsl.evaluate(self.expr, env), dtype=float)
            return np.broadcast_to(out, xs.shape[:-1]).copy() if out.ndim == 0 else out
        raise AssertionError(self.kind)


def euclidean(domain):
    """The ordinary Euclidean metric (b = 1)."""
    return BMetricSpace("euclidean", domain, b=1.0)


def squared_euclidean(domain):
    """d(x,y) = ||x-y||^2, a b-metric with b = 2 but not a metric."""
    return BMetricSpace("squared_euclidean", domain, b=2.0)


def power(p, domain):
    """p-th power of the Euclidean metric, p > 1; b = 2^(p-1)."""
    if p <= 1:
        raise UsageError("power construction requires p > 1")
    return BMetricSpace("power", domain, b=2.0 ** (p - 1.0), p=float(p))


def lp_truncated(p, domain):
    """Finite-dimensional l_p distance for 0 < p < 1; b = 2^(1/p)."""
    if not 0 < p < 1:
        raise UsageError("lp_truncated requires 0 < p < 1")
    return BMetricSpace("lp_truncated", domain, b=2.0 ** (1.0 / p), p=float(p))


def custom(expr_source, domain, b):
    """Distance from a DSL expression in u1..um, v1..vm with declared b."""
    expr = dsl.parse(expr_source, dsl.metric_variables(domain.dimension))
    return BMetricSpace("custom_dsl", domain, b=float(b), expr=expr)


def _sample_points(space, sample_count, seed, grid_points=None):
    if grid_points is not None:
        return space.domain.grid(grid_points)
    rng = np.random.default_rng(seed)
    return space.domain.sample(rng, sample_count)


def check_axioms(space, sample_count, seed, grid_points=None, max_triples=2_000_000):
    """Sampled check of identity, symmetry, and the relaxed triangle inequality.

    With grid_points set, points come from a uniform grid and all ordered
    triples are enumerated when that stays within max_triples; otherwise
    triples are drawn at random (seeded) from the sampled points.
    """
    if grid_points is None and sample_count < 1:
        raise UsageError("sample_count must be >= 1")
    pts = _sample_points(space, sample_count, seed, grid_points)
    n = len(pts)
    violations = []

    # b1: d(x,x) = 0 for every sampled point
    self_d = space.distance_batch(pts, pts)
    for i in np.nonzero(~leq_tol(self_d, 0.0))[0]:
        violations.append(Violation("b1", (tuple(pts[i]),), float(self_d[i]), 0.0))

    rng = np.random.default_rng(seed + 1 if seed is not None else None)
    if grid_points is not None and n ** 3 <= max_triples:
        idx = np.indices((n, n, n)).reshape(3, -1)
        ia, ib, ic = idx[0], idx[1], idx[2]
    else:
        count = max(sample_count, 1)
        ia = rng.integers(0, n, size=count)
        ib = rng.integers(0, n, size=count)
        ic = rng.integers(0, n, size=count)

    xs, ys, zs = pts[ia], pts[ib], pts[ic]
    d_xy = space.distance_batch(xs, ys)
    d_yx = space.distance_batch(ys, xs)
    d_xz = space.distance_batch(xs, zs)
    d_zy = space.distance_batch(zs, ys)

    # b2: symmetry on the (x, y) pairs
    asym = np.abs(d_xy - d_yx) > TOL_REL * (1.0 + np.abs(d_xy))
    for i in np.nonzero(asym)[0]:
        violations.append(Violation("b2", (tuple(xs[i]), tuple(ys[i])),
                                    float(d_xy[i]), float(d_yx[i])))

    # b3: relaxed triangle inequality against the declared b
    rhs = space.b * (d_xz + d_zy)
    bad = ~leq_tol(d_xy, rhs)
    for i in np.nonzero(bad)[0]:
        violations.append(Violation("b3", (tuple(xs[i]), tuple(zs[i]), tuple(ys[i])),
                                    float(d_xy[i]), float(rhs[i])))

    return AxiomReport(checked_pairs=len(ia), checked_triples=len(ia),
                       violations=violations)


def estimate_b(space, sample_count, seed, grid_points=None, max_triples=2_000_000):
    """Empirical sharp relaxation constant.

    Returns {'b_hat', 'witness'} where b_hat is the maximum of
    d(x,y)/(d(x,z)+d(z,y)) over sampled triples and witness attains it.
    Triples with a zero denominator are skipped; if every triple is
    degenerate the domain has collapsed and DegenerateDomainError is raised.
    """
    if grid_points is None and sample_count < 1:
        raise UsageError("sample_count must be >= 1")
    if grid_points is not None:
        pts = space.domain.grid(grid_points)
        n = len(pts)
        if n ** 3 <= max_triples:
            idx = np.indices((n, n, n)).reshape(3, -1)
            xs, zs, ys = pts[idx[0]], pts[idx[1]], pts[idx[2]]
        else:
            rng = np.random.default_rng(seed)
            sel = rng.integers(0, n, size=(sample_count, 3))
            xs, zs, ys = pts[sel[:, 0]], pts[sel[:, 1]], pts[sel[:, 2]]
    else:
        rng = np.random.default_rng(seed)
        xs = space.domain.sample(rng, sample_count)
        zs = space.domain.sample(rng, sample_count)
        ys = space.domain.sample(rng, sample_count)

    num = space.distance_batch(xs, ys)
    den = space.distance_batch(xs, zs) + space.distance_batch(zs, ys)
    ok = den > 0
    if not np.any(ok):
        raise DegenerateDomainError("all sampled triples have zero denominator")
    ratio = np.where(ok, num / np.where(ok, den, 1.0), -np.inf)
    best = int(np.argmax(ratio))
    return {
        "b_hat": float(ratio[best]),
        "witness": (as_point(xs[best]), as_point(zs[best]), as_point(ys[best])),
    }


def chain_bound(space, points):
    """Both sides of the iterated relaxed triangle inequality along a chain.

    For points u_0..u_n, lhs = d(u_0,u_n) and
    rhs = sum_{j=1}^{n-1} b^j d(u_{j-1},u_j) + b^(n-1) d(u_{n-1},u_n);
    the last two terms share the coefficient b^(n-1).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) < 2:
        raise UsageError("chain_bound needs at least 2 points")
    n = len(pts) - 1
    steps = space.distance_batch(pts[:-1], pts[1:])
    coeff = space.b ** np.arange(1, n + 1, dtype=float)
    if n >= 1:
        coeff[-1] = space.b ** (n - 1)
    rhs = float(np.dot(coeff, steps))
    lhs = space.distance(pts[0], pts[-1])
    return {"lhs": lhs, "rhs": rhs, "holds": bool(leq_tol(lhs, rhs))}
