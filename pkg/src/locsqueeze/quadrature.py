"""Quadrature building blocks.

Fixed rules (Gauss-Legendre, a log-weighted product rule) and adaptive
wrappers around :func:`scipy.integrate.cubature` that add a cutoff
doubling test for integrals over the whole momentum space.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import cubature
from scipy.special import eval_legendre

from .errors import AccuracyError, ConfigurationError


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and truncation for momentum-space integrals.

    Parameters
    ----------
    cutoff : float
        Initial momentum cutoff Lambda. Integrals over R^D are first taken
        over ``[-cutoff, cutoff]^D`` and then checked by doubling.
    abs_tol, rel_tol : float
        Absolute and relative tolerances.
    max_subdivisions : int
        Subdivision budget handed to the adaptive Gauss-Kronrod driver.
    max_doublings : int
        How many times the cutoff may be doubled before giving up.
    """

    cutoff: float = 16.0
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 4000
    max_doublings: int = 4

    def __post_init__(self):
        if not np.isfinite(self.cutoff) or self.cutoff <= 0:
            raise ConfigurationError(f"cutoff must be positive, got {self.cutoff}")
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ConfigurationError("tolerances must be non-negative")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise ConfigurationError("at least one tolerance must be positive")
        if self.max_subdivisions < 1:
            raise ConfigurationError("max_subdivisions must be >= 1")

    def tol(self, value):
        return max(self.abs_tol, self.rel_tol * abs(value))


@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def composite_gauss_legendre(lo, hi, panels, order):
    """Composite Gauss-Legendre rule on ``[lo, hi]`` with equal panels."""
    x, w = gauss_legendre(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@lru_cache(maxsize=32)
def log_product_rule(n: int):
    """Product rule for ``int_0^1 phi(t) log(t) dt``.

    Nodes are the Gauss-Legendre nodes mapped to [0, 1]. The weights
    integrate the degree ``n - 1`` Legendre interpolant of ``phi``
    exactly against ``log t``, using the closed-form moments
    ``int_0^1 P_k(2t-1) log t dt = (-1)^(k+1) / (k (k+1))`` (and ``-1``
    for ``k = 0``).

    Returns
    -------
    t : ndarray
        Nodes in (0, 1).
    w_plain : ndarray
        Gauss-Legendre weights on [0, 1].
    w_log : ndarray
        Weights for the log-weighted integral.
    """
    x, w = gauss_legendre(n)
    k = np.arange(n)
    moments = np.empty(n)
    moments[0] = -1.0
    moments[1:] = (-1.0) ** (k[1:] + 1) / (k[1:] * (k[1:] + 1))
    # interpolant coefficients: c_k = (2k+1)/2 sum_i w_i phi_i P_k(x_i)
    pk = np.array([eval_legendre(j, x) for j in k])  # (n, nodes)
    w_log = 0.5 * w * (((2 * k + 1)[:, None] * pk * moments[:, None]).sum(axis=0))
    return 0.5 * (x + 1.0), 0.5 * w, w_log


def finite_part_rule(extent, scale, *, log_order=24, order=16):
    """Nodes and weights for ``-int_{-extent}^{extent} phi(q) log|q| dq``.

    The two panels touching the origin use :func:`log_product_rule`; the
    rest of the interval is covered by Gauss-Legendre panels no wider than
    ``scale``.
    """
    a = min(scale, extent)
    t, w_plain, w_log = log_product_rule(log_order)
    inner_nodes = a * t
    inner_w = a * (np.log(a) * w_plain + w_log)
    nodes = [inner_nodes]
    weights = [inner_w]
    if extent > a:
        panels = max(1, int(np.ceil((extent - a) / scale)))
        q, wq = composite_gauss_legendre(a, extent, panels, order)
        nodes.append(q)
        weights.append(wq * np.log(q))
    pos_nodes = np.concatenate(nodes)
    pos_w = np.concatenate(weights)
    all_nodes = np.concatenate([-pos_nodes[::-1], pos_nodes])
    all_w = np.concatenate([pos_w[::-1], pos_w])
    return all_nodes, -all_w


def _as_real_stack(values):
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return np.concatenate([values.real[..., None], values.imag[..., None]], axis=-1), True
    return values[..., None], False


def integrate_box(func, lo, hi, *, rtol, atol, max_subdivisions, splits=None):
    """Adaptive cubature of a vectorised integrand over a box.

    ``func`` maps points of shape ``(n, ndim)`` to values of shape
    ``(n,)`` or ``(n, m)``, real or complex. The box is first cut into
    ``splits`` equal pieces per axis so that narrow features are not
    missed by the initial rule.

    Returns
    -------
    value : ndarray or complex or float
    error : float
        Summed error estimate.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    ndim = lo.size
    if splits is None:
        splits = {1: 8, 2: 4, 3: 2}.get(ndim, 1)
    state = {}

    def wrapped(x):
        vals, is_complex = _as_real_stack(func(x))
        state["complex"] = is_complex
        return vals.reshape(x.shape[0], -1)

    total = 0.0
    err = 0.0
    edges = [np.linspace(lo[i], hi[i], splits + 1) for i in range(ndim)]
    for idx in itertools.product(range(splits), repeat=ndim):
        a = np.array([edges[i][j] for i, j in enumerate(idx)])
        b = np.array([edges[i][j + 1] for i, j in enumerate(idx)])
        res = cubature(wrapped, a, b, rtol=rtol, atol=atol / splits**ndim,
                       max_subdivisions=max_subdivisions)
        if res.status != "converged":
            raise AccuracyError("adaptive cubature did not converge",
                                float(np.max(np.abs(res.error))))
        total = total + res.estimate
        err += float(np.max(np.abs(res.error)))
    total = np.asarray(total)
    if state.get("complex"):
        total = total.reshape(-1, 2)
        total = total[:, 0] + 1j * total[:, 1]
    else:
        total = total.reshape(-1)
    return (total[0] if total.size == 1 else total), err


def _shell_boxes(dim, inner, outer):
    """Boxes tiling ``[-outer, outer]^D`` minus ``[-inner, inner]^D``."""
    pieces = [(-outer, -inner), (-inner, inner), (inner, outer)]
    for combo in itertools.product(range(3), repeat=dim):
        if all(c == 1 for c in combo):
            continue
        yield (np.array([pieces[c][0] for c in combo]),
               np.array([pieces[c][1] for c in combo]))


def integrate_whole_space(func, dim, quad: QuadratureSpec):
    """Integrate over R^D with a cutoff doubling convergence test.

    The integral over ``[-L, L]^D`` is accepted once the contribution of
    the shell ``[-2L, 2L]^D \\ [-L, L]^D`` falls below tolerance.

    Returns
    -------
    value : float or complex or ndarray
    error : float
        Quadrature error estimate plus the last shell contribution.
    """
    kw = dict(rtol=quad.rel_tol, atol=quad.abs_tol, max_subdivisions=quad.max_subdivisions)
    cut = quad.cutoff
    value, err = integrate_box(func, -cut * np.ones(dim), cut * np.ones(dim), **kw)
    for _ in range(quad.max_doublings + 1):
        shell = 0.0
        shell_err = 0.0
        for a, b in _shell_boxes(dim, cut, 2 * cut):
            v, e = integrate_box(func, a, b, splits=1, **kw)
            shell = shell + v
            shell_err += e
        value = value + shell
        err += shell_err
        if np.max(np.abs(shell)) <= quad.tol(np.max(np.abs(value))):
            return value, err + float(np.max(np.abs(shell)))
        cut *= 2
    raise AccuracyError("integral did not settle under cutoff doubling",
                        float(np.max(np.abs(shell))))


def integrate_ball(func, dim, radius, *, rtol, atol, max_subdivisions):
    """Integrate ``func(p)`` over the ball ``|p| <= radius`` in R^D.

    D = 1 is a plain interval. For D = 2 and 3 polar and spherical
    coordinates are used so that the cubature box matches the ball.
    """
    kw = dict(rtol=rtol, atol=atol, max_subdivisions=max_subdivisions)
    if dim == 1:
        return integrate_box(lambda x: func(x), [-radius], [radius], **kw)
    if dim == 2:
        def polar(x):
            r, th = x[:, 0], x[:, 1]
            p = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
            vals = np.asarray(func(p))
            return vals * (r if vals.ndim == 1 else r[:, None])
        return integrate_box(polar, [0.0, 0.0], [radius, 2 * np.pi], splits=4, **kw)
    if dim == 3:
        def spherical(x):
            r, th, ph = x[:, 0], x[:, 1], x[:, 2]
            st = np.sin(th)
            p = np.stack([r * st * np.cos(ph), r * st * np.sin(ph), r * np.cos(th)], axis=-1)
            jac = r * r * st
            vals = np.asarray(func(p))
            return vals * (jac if vals.ndim == 1 else jac[:, None])
        return integrate_box(spherical, [0.0, 0.0, 0.0], [radius, np.pi, 2 * np.pi], splits=2, **kw)
    raise ConfigurationError(f"ball integration supports D <= 3, got {dim}")
