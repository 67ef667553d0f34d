"""Arity-k operators f: X^k -> X and their diagonal companions F(x) = f(x,..,x).

Built-in kinds:

* averaging(k): f(x_1,..,x_k) = (x_1 + .. + x_k) / (2k), coordinatewise
* affine(weights, offset): f = sum_j a_j x_j + c, coordinatewise weights
* constant(c)
* dsl: one expression per output coordinate, in variables x1..xk which
  refer to that coordinate of each window entry

A point u is a fixed point when f(u,..,u) = u; residual() measures the
distance d(u, f(u,..,u)) in a given space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dsl
from .errors import NumericEvalError, UsageError

_KINDS = ("averaging", "affine", "constant", "dsl")


@dataclass(frozen=True)
class PresicOperator:
    kind: str
    arity: int
    dimension: int
    weights: np.ndarray | None = None  # affine, shape (k,)
    offset: np.ndarray | None = None   # affine, shape (m,)
    value: np.ndarray | None = None    # constant, shape (m,)
    exprs: tuple | None = None         # dsl, one Expr per output coordinate

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise UsageError(f"unknown operator kind {self.kind!r}")
        if self.arity < 1:
            raise UsageError("operator arity must be >= 1")
        if self.dimension < 1:
            raise UsageError("operator dimension must be >= 1")

    def apply(self, window):
        """Evaluate f on a window of k points; returns one point."""
        w = np.asarray(window, dtype=float)
        if w.ndim == 1:
            w = w[:, None]
        if w.shape != (self.arity, self.dimension):
            raise UsageError(
                f"window shape {w.shape} does not match (k={self.arity}, m={self.dimension})")
        return self.apply_batch(w[None, ...])[0]

    def apply_batch(self, windows):
        """Evaluate f on (N, k, m) stacked windows; returns (N, m)."""
        w = np.asarray(windows, dtype=float)
        if w.ndim != 3 or w.shape[1] != self.arity or w.shape[2] != self.dimension:
            raise UsageError(f"batch shape {w.shape} does not match (N, {self.arity}, {self.dimension})")
        if self.kind == "averaging":
            out = np.sum(w, axis=1) / (2.0 * self.arity)
        elif self.kind == "affine":
            # explicit fold keeps summation order independent of batch size,
            # so batched and single-window evaluation agree bit-for-bit
            out = w[:, 0, :] * self.weights[0]
            for j in range(1, self.arity):
                out = out + w[:, j, :] * self.weights[j]
            out = out + self.offset
        elif self.kind == "constant":
            out = np.broadcast_to(self.value, (len(w), self.dimension)).copy()
        elif self.kind == "dsl":
            cols = []
            for j, expr in enumerate(self.exprs):
                env = {f"x{i + 1}": w[:, i, j] for i in range(self.arity)}
                col = np.asarray(dsl.evaluate(expr, env), dtype=float)
                cols.append(np.broadcast_to(col, (len(w),)))
            out = np.stack(cols, axis=-1)
        else:
            raise AssertionError(self.kind)
        bad = ~np.isfinite(out)
        if np.any(bad):
            n, j = np.argwhere(bad)[0]
            raise NumericEvalError(f"non-finite operator output at coordinate {j} (window {n})")
        return out

    def diagonal_apply(self, x):
        """F(x) = f(x,..,x); identical to apply on the k-fold repeated window."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self.apply(np.tile(x, (self.arity, 1)))

    def diagonal_batch(self, xs):
        """Vectorized diagonal map on (N, m) points."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        return self.apply_batch(np.repeat(xs[:, None, :], self.arity, axis=1))


def averaging(k, dimension=1):
    """Example operator f(x_1,..,x_k) = (x_1+..+x_k)/(2k); fixed point 0."""
    return PresicOperator("averaging", k, dimension)


def affine(weights, offset=0.0, dimension=1):
    """f = sum_j a_j x_j + c with scalar per-slot weights, coordinatewise."""
    a = np.atleast_1d(np.asarray(weights, dtype=float))
    c = np.broadcast_to(np.atleast_1d(np.asarray(offset, dtype=float)), (dimension,)).copy()
    return PresicOperator("affine", len(a), dimension, weights=a, offset=c)


def constant(value, k=1):
    """f identically equal to a fixed point value."""
    v = np.atleast_1d(np.asarray(value, dtype=float))
    return PresicOperator("constant", k, v.size, value=v)


def from_dsl(exprs, k, dimension=None):
    """Operator from one DSL source string per output coordinate."""
    if isinstance(exprs, str):
        exprs = [exprs]
    dimension = dimension if dimension is not None else len(exprs)
    if len(exprs) != dimension:
        raise UsageError("need one expression per output coordinate")
    names = dsl.operator_variables(k)
    compiled = tuple(dsl.parse(src, names) for src in exprs)
    return PresicOperator("dsl", k, dimension, exprs=compiled)


def residual(op, space, u):
    """d(u, f(u,..,u)): zero exactly at fixed points."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return space.distance(u, op.diagonal_apply(u))
