"""Fixed-particle-number bounds for ``phi(f) + :phi^2:(h)``.

On ``n``-particle vectors the operator is bounded by ``(n + 1) K(f, h)`` with

``K(f, h) = max(||f||_2, c(h), ||h~(+-(omega_p + omega_q), p + q)||_{L^2(dmu x dmu)})``.

Products of ``k`` such operators lose a factor
``10^k prod_{j=1}^k (n - 1 + 2j) = 20^k Gamma(k + (n+1)/2) / Gamma((n+1)/2)``,
which fixes the convergence radii of the exponential series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InputError
from .kinematics import MassShellSample, ModelParams, lp_norm, measure_density
from .quadrature import QuadratureSpec, integrate_whole_space
from .squeezing import bound_c


@dataclass(frozen=True)
class BoundReport:
    """Ingredients of ``K(f, h)`` and the derived radii."""

    f_norm: float
    c_h: float
    pair_norm: float
    K: float

    @property
    def radius_10(self):
        """``1 / (10 K)``: convergence radius of the analytic-vector series."""
        return convergence_radii(self)[0]

    @property
    def radius_20(self):
        """``1 / (20 K)``: radius used for products of exponentials."""
        return convergence_radii(self)[1]

    def gamma_factor(self, k, n):
        return gamma_factor(k, n)

    def to_dict(self):
        return {"f_norm": self.f_norm, "c_h": self.c_h, "pair_norm": self.pair_norm, "K": self.K,
                "radius_10": self.radius_10, "radius_20": self.radius_20}


def pair_kernel_norm(h, quad: QuadratureSpec, model: ModelParams):
    """``sqrt(int int |h~(+-(omega_p + omega_q), p + q)|^2 dmu(p) dmu(q))``, max over the sign."""
    D = model.spatial_dim
    out = 0.0
    for sign in (1.0, -1.0):
        def integrand(x, sign=sign):
            p, q = x[:, :D], x[:, D:]
            pq = p + q
            e = sign * (np.sqrt(model.mass**2 + np.sum(p * p, -1)) + np.sqrt(model.mass**2 + np.sum(q * q, -1)))
            k = np.concatenate([e[:, None], pq], axis=-1)
            return np.abs(h.fourier(k)) ** 2 * measure_density(p, model) * measure_density(q, model)
        val, _ = integrate_whole_space(integrand, 2 * D, quad)
        out = max(out, float(np.real(val)))
    return math.sqrt(out)


def bound_K(f: MassShellSample, h, quad: QuadratureSpec, model: ModelParams, c_h=None):
    """Compute ``K(f, h)``.

    Parameters
    ----------
    f : MassShellSample
    h : test function with ``.fourier``
    quad : QuadratureSpec
    model : ModelParams
    c_h : float, optional
        Precomputed ``c(h)``.
    """
    fn = lp_norm(f, 2, quad, model)
    c = bound_c(h, model) if c_h is None else float(c_h)
    pn = pair_kernel_norm(h, quad, model)
    return BoundReport(fn, c, pn, max(fn, c, pn))


def _rising(a: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for j in range(k):
        out *= a + j
    return out


def gamma_factor(k: int, n: int) -> Fraction:
    """``20^k Gamma(k + (n+1)/2) / Gamma((n+1)/2)`` as an exact rational."""
    if k < 0 or n < 0:
        raise InputError("k and n must be non-negative")
    return Fraction(20) ** k * _rising(Fraction(n + 1, 2), k)


def odd_product_factor(k: int, n: int) -> int:
    """``10^k prod_{j=1}^k (n - 1 + 2j)``."""
    if k < 0 or n < 0:
        raise InputError("k and n must be non-negative")
    out = 10**k
    for j in range(1, k + 1):
        out *= n - 1 + 2 * j
    return out


def product_bound(k: int, n: int, Ks: Sequence[float]) -> float:
    """Bound on ``||X_1 ... X_k psi||`` per unit ``||psi||`` for ``n``-particle ``psi``.

    ``Ks`` holds ``K(f_j, h_j)`` for the ``k`` factors.
    """
    if len(Ks) != k:
        raise InputError(f"need {k} constants, got {len(Ks)}")
    if any(K < 0 for K in Ks):
        raise InputError("K values must be non-negative")
    # running product: 20 K_j ((n + 1)/2 + j); overflows to inf rather than raising
    a = (n + 1) / 2
    out = 1.0
    for j, K in enumerate(Ks):
        out *= 20.0 * (a + j) * K
    return out


def convergence_radii(report: BoundReport):
    """Radii ``1 / (10 K)`` and ``1 / (20 K)``; infinite when ``K = 0``."""
    if report.K == 0:
        return math.inf, math.inf
    return 1.0 / (10 * report.K), 1.0 / (20 * report.K)


def analytic_series_majorant(s: float, n: int, report: BoundReport):
    """Closed form ``(1 - 10 s K)^(-(n+1)/2)``; ``inf`` outside ``10 s K < 1``."""
    x = 10.0 * abs(s) * report.K
    if x >= 1.0:
        return math.inf
    return (1.0 - x) ** (-(n + 1) / 2)


def analytic_series_partial_sum(s: float, n: int, report: BoundReport, terms: int, base: float = 10.0):
    """``sum_{k < terms} s^k / k! * Gamma(k + (n+1)/2) / Gamma((n+1)/2) * (base K)^k``.

    With ``base = 10`` the series sums to :func:`analytic_series_majorant`;
    ``base = 20`` is the series built from :func:`product_bound`, whose sum
    is ``(1 - 20 s K)^(-(n+1)/2)``.
    """
    a = (n + 1) / 2
    total, term = 0.0, 1.0
    x = base * abs(s) * report.K
    for k in range(terms):
        total += term
        term *= x * (a + k) / (k + 1)
    return total
