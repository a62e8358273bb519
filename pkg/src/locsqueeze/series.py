"""Summation of absolutely convergent multiple series.

A multiple series ``sum a(k_1, ..., k_n)`` over ``N^n`` may be summed over
growing cubes ``{0..s}^n`` or over diagonal shells ``k_1 + ... + k_n = r``.
Both orders give the same value when ``sum |a| < inf``; the diagonal sum
stops once a caller-supplied majorant certifies that the remaining tail
is below tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable

import numpy as np

from .errors import AccuracyError, InputError


@dataclass(frozen=True)
class MultiSeriesTerm:
    """Coefficients of an ``arity``-fold series with a majorant.

    Parameters
    ----------
    coefficient : callable
        Maps an integer array of shape ``(m, arity)`` to ``m`` real values.
    arity : int
    abs_bound : callable
        ``abs_bound(r)`` bounds ``sum |a(k)|`` over all ``k`` with
        ``k_1 + ... + k_n >= r``. ``abs_bound(0)`` is the full absolute sum.
    """

    coefficient: Callable
    arity: int
    abs_bound: Callable

    def __post_init__(self):
        if int(self.arity) != self.arity or self.arity < 1:
            raise InputError("arity must be a positive integer")
        total = float(self.abs_bound(0))
        if not np.isfinite(total):
            raise InputError("the majorant must be finite")

    def values(self, idx):
        idx = np.asarray(idx, dtype=np.int64).reshape(-1, self.arity)
        return np.asarray(self.coefficient(idx), dtype=float).reshape(-1)


def shell_indices(arity: int, r: int):
    """All ``k`` in ``N^arity`` with ``|k| = r``, lexicographic in ``k_1``."""
    if arity == 1:
        return np.array([[r]], dtype=np.int64)
    blocks = []
    for first in range(r + 1):
        rest = shell_indices(arity - 1, r - first)
        blocks.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
    return np.concatenate(blocks)


def cube_indices(arity: int, s: int):
    axis = np.arange(s + 1)
    return np.stack(np.meshgrid(*([axis] * arity), indexing="ij"), axis=-1).reshape(-1, arity)


def rectangular_sum(t: MultiSeriesTerm, s: int) -> float:
    """Partial sum over the cube ``{0..s}^n``."""
    if s < 0 or int(s) != s:
        raise InputError("cube size must be a non-negative integer")
    return float(np.sum(t.values(cube_indices(t.arity, int(s)))))


@dataclass(frozen=True)
class DiagonalSum:
    value: float
    shells: int
    tail: float


def diagonal_sum(t: MultiSeriesTerm, tol: float, max_shells: int = 10_000, detail=False):
    """Sum shell by shell until ``abs_bound(r + 1) < tol``.

    Raises
    ------
    AccuracyError
        If the certified tail stops decreasing or ``max_shells`` is hit.
    """
    if not tol > 0:
        raise InputError("tol must be positive")
    total, prev_tail = 0.0, np.inf
    for r in range(max_shells):
        total += float(np.sum(t.values(shell_indices(t.arity, r))))
        tail = float(t.abs_bound(r + 1))
        if tail < tol:
            out = DiagonalSum(total, r + 1, tail)
            return out if detail else out.value
        if not tail < prev_tail:
            raise AccuracyError(f"majorant tail not decreasing at shell {r}", residual=tail)
        prev_tail = tail
    raise AccuracyError(f"tail still {prev_tail:.3g} after {max_shells} shells", residual=prev_tail)


def shells_covering_cube(arity: int, s: int) -> int:
    """Largest shell index met by the cube ``{0..s}^n``; shells ``r <= n s`` cover it."""
    return arity * s


def geometric_series(ratios) -> MultiSeriesTerm:
    """``a(k) = prod_i x_i^{k_i}`` with ``|x_i| < 1`` and its shell majorant."""
    x = np.asarray(ratios, dtype=float)
    if np.any(np.abs(x) >= 1):
        raise InputError("geometric ratios must satisfy |x| < 1")
    n = x.size
    q = float(np.max(np.abs(x)))

    def coefficient(idx):
        return np.prod(x[None, :] ** idx, axis=1)

    def abs_bound(r):
        # shell r holds comb(r+n-1, n-1) terms, each at most q^r
        if q == 0.0:
            return 0.0 if r > 0 else 1.0
        total, j, term = 0.0, r, comb(r + n - 1, n - 1) * q**r
        while True:
            total += term
            nxt = term * q * (j + n) / (j + 1)
            j += 1
            # beyond here consecutive ratios q (j + n)/(j + 1) only decrease
            ratio = q * (j + n) / (j + 1)
            if ratio < 1 and nxt <= 1e-18 * total:
                return total + nxt / (1 - ratio)
            term = nxt

    return MultiSeriesTerm(coefficient, n, abs_bound)
