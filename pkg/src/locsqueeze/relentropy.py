"""Wedge relative entropy of a covariantly squeezed vacuum, to first order.

To first order in ``h`` the relative entropy with respect to the right
wedge is a sum of two terms,

``term_s = -pi int_{|p| <= L} d^D p / (2 pi)^D int dq / (2 pi)
           R_s(p, q) Im h~(omega_p + s omega_{p - q e1}, q e1) Pf 1/q^2``

for ``s = +1, -1``, with
``R_s = (omega_p omega_{p-q} + s (p^1 q - omega_p^2)) / (2 omega_p omega_{p-q})``.
The finite part is ``int f Pf 1/q^2 dq = -int f''(q) log|q| dq``.

The inner second derivative is computed exactly by the chain rule through
the closed-form transform of ``h``; the log-singular inner integral uses a
product rule near ``q = 0``; the outer integral is adaptive.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad as quad1d

from .errors import AccuracyError, InputError
from .kinematics import ModelParams
from .quadrature import QuadratureSpec, finite_part_rule, integrate_ball, log_product_rule
from .testfunctions import antisymmetric_energy  # noqa: F401  (re-exported)

# ------------------------------------------------------------- finite part


def _second_difference(g, q, step):
    """Five-point second derivative with one Richardson step."""
    def d2(hh):
        return (-g(q + 2 * hh) + 16 * g(q + hh) - 30 * g(q) + 16 * g(q - hh) - g(q - 2 * hh)) / (12 * hh * hh)
    return (16 * d2(step / 2) - d2(step)) / 15


def pf_integrate(g, quad: QuadratureSpec | None = None, *, g2=None, scale=1.0, order=30):
    """Finite-part integral ``Pf int g(q) / q^2 dq = -int g''(q) log|q| dq``.

    Parameters
    ----------
    g : callable
        Real function on R with Schwartz decay (vectorised).
    quad : QuadratureSpec, optional
        Tolerances for the outer adaptive pieces.
    g2 : callable, optional
        Exact second derivative. A Richardson-extrapolated finite
        difference is used otherwise.
    scale : float
        Half-width of the log-weighted panels around the origin.
    """
    quad = quad or QuadratureSpec()
    if g2 is None:
        step = 1e-2 * scale
        g2 = lambda q: _second_difference(g, np.asarray(q, dtype=float), step)  # noqa: E731
    t, w_plain, w_log = log_product_rule(order)
    a = float(scale)
    # int_0^a phi(q) log q dq for phi(q) = g''(q) + g''(-q)
    nodes = a * t
    phi = np.asarray(g2(nodes), dtype=float) + np.asarray(g2(-nodes), dtype=float)
    inner = a * np.sum((np.log(a) * w_plain + w_log) * phi)
    opts = dict(epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_subdivisions)
    with np.errstate(all="ignore"):
        right, e1 = quad1d(lambda q: float(np.ravel(g2(np.array([q])))[0]) * np.log(q), a, np.inf, **opts)
        left, e2 = quad1d(lambda q: float(np.ravel(g2(np.array([-q])))[0]) * np.log(q), a, np.inf, **opts)
    for tail in (np.ravel(g2(np.array([50.0 * a]))), np.ravel(g2(np.array([-50.0 * a])))):
        if not np.all(np.isfinite(tail)) or abs(float(tail[0])) > 1e3 * (abs(inner) + 1.0):
            raise AccuracyError("second derivative does not decay", float(abs(tail[0])))
    if not np.isfinite(right + left):
        raise AccuracyError("finite-part integral diverged", float("inf"))
    return float(-(inner + right + left))


@dataclass(frozen=True)
class JComponents:
    """Fourier transform of the wedge weight, as functionals in ``k^1``.

    The transform is ``(2 pi)^(D-1) delta(k_perp) [-Pf 1/(k^1)^2 + i pi delta'(k^1)]``.
    Callers collapse the ``k_perp`` delta themselves; the two methods apply
    the real and imaginary parts to a test function of ``k^1``.
    """

    dim: int
    prefactor: float

    def real_part(self, g, g2=None, quad=None):
        return -self.prefactor * pf_integrate(g, quad, g2=g2)

    def imag_part(self, dg0):
        """Imaginary part applied to ``g`` given ``g'(0)``."""
        return self.prefactor * np.pi * (-dg0)


def fourier_j_components(D: int) -> JComponents:
    if D < 1:
        raise InputError("D must be >= 1")
    return JComponents(D, (2 * np.pi) ** (D - 1))


# --------------------------------------------------------------- integrands
def _pf_rule_for(h, model):
    scale = min(model.mass, h.momentum_scale(), 1.0) / 2
    extent = h.momentum_radius(1e-17)
    return finite_part_rule(extent, scale)


def pf_second_derivative(h, p, q, sign, model: ModelParams):
    """``d^2/dq^2 [R_s(p, q) Im h~(omega_p + s omega_{p - q e1}, q e1)]``.

    Parameters
    ----------
    p : ndarray, shape (n, D)
    q : ndarray, shape (nq,)
    sign : {+1, -1}

    Returns
    -------
    ndarray, shape (n, nq)
    """
    m = model.mass
    D = model.spatial_dim
    p = np.asarray(p, dtype=float).reshape(-1, D)
    q = np.asarray(q, dtype=float)[None, :]
    p1 = p[:, :1]
    perp2 = np.sum(p[:, 1:] ** 2, axis=1, keepdims=True)
    w = np.sqrt(m * m + p1 * p1 + perp2)
    a = p1 - q
    u = np.sqrt(m * m + a * a + perp2)
    du = -a / u
    d2u = (m * m + perp2) / u**3
    N = p1 * q - w * w
    Q = N / u
    dQ = p1 / u - N * du / u**2
    d2Q = -2 * p1 * du / u**2 - N * d2u / u**2 + 2 * N * du**2 / u**3
    s = float(sign)
    R = 0.5 + s * Q / (2 * w)
    dR = s * dQ / (2 * w)
    d2R = s * d2Q / (2 * w)
    k = np.zeros(u.shape + (D + 1,))
    k[..., 0] = w + s * u
    k[..., 1] = q
    val, grad, hess = h.fourier_jet(k)
    g = val.imag
    g0, g1 = grad[..., 0].imag, grad[..., 1].imag
    H00, H01, H11 = hess[..., 0, 0].imag, hess[..., 0, 1].imag, hess[..., 1, 1].imag
    k0p = s * du
    dg = g0 * k0p + g1
    d2g = H00 * k0p**2 + 2 * H01 * k0p + H11 + g0 * s * d2u
    return d2R * g + 2 * dR * dg + R * d2g


def pf_profile(h, p, sign, model: ModelParams, rule=None, chunk=64):
    """``Pf int F_s(p, q) / q^2 dq`` for a batch of momenta ``p``."""
    qn, qw = rule if rule is not None else _pf_rule_for(h, model)
    p = np.asarray(p, dtype=float).reshape(-1, model.spatial_dim)
    out = np.empty(p.shape[0])
    for s in range(0, p.shape[0], chunk):
        out[s:s + chunk] = pf_second_derivative(h, p[s:s + chunk], qn, sign, model) @ qw
    return out


def _term(h, sign, cutoff, quad, model, rule):
    D = model.spatial_dim
    pref = -np.pi / (2 * np.pi) ** (D + 1)
    val, err = integrate_ball(lambda p: pf_profile(h, p, sign, model, rule), D, cutoff,
                              rtol=quad.rel_tol, atol=quad.abs_tol / abs(pref),
                              max_subdivisions=quad.max_subdivisions)
    return pref * float(np.real(val)), abs(pref) * err


def _radial_edges(cutoffs, mass):
    """Panel edges: uniform near the origin, geometric beyond, hitting every cutoff."""
    edges = [0.0]
    width = 0.5 * mass
    for c in sorted(cutoffs):
        while edges[-1] < c - 1e-12:
            step = max(width, 0.15 * edges[-1])
            edges.append(min(c, edges[-1] + step))
    return np.array(edges)


def _sphere_rule(D, n):
    """Directions and weights on the unit sphere ``S^(D-1)``."""
    if D == 2:
        th = 2 * np.pi * np.arange(n) / n
        return np.stack([np.cos(th), np.sin(th)], axis=-1), np.full(n, 2 * np.pi / n)
    if D == 3:
        x, w = np.polynomial.legendre.leggauss(n // 2)
        ph = 2 * np.pi * np.arange(n) / n
        ct, cp = np.meshgrid(x, ph, indexing="ij")
        wt = np.broadcast_to(w[:, None], ct.shape)
        st = np.sqrt(1 - ct**2)
        dirs = np.stack([st * np.cos(cp), st * np.sin(cp), ct], axis=-1).reshape(-1, 3)
        return dirs, (wt * 2 * np.pi / n).reshape(-1)
    raise InputError(f"the product rule supports D = 2 or 3, got {D}")


def _ladder_product_rule(h, sign, cutoffs, model, rule, order, n_dirs):
    """Cumulative ball integrals of the Pf profile at every cutoff (D >= 2)."""
    D = model.spatial_dim
    edges = _radial_edges(cutoffs, model.mass)
    x, w = np.polynomial.legendre.leggauss(order)
    dirs, dw = _sphere_rule(D, n_dirs)
    panel = np.empty(edges.size - 1)
    for j in range(edges.size - 1):
        a, b = edges[j], edges[j + 1]
        r = 0.5 * (a + b) + 0.5 * (b - a) * x
        wr = 0.5 * (b - a) * w * r ** (D - 1)
        pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, D)
        vals = pf_profile(h, pts, sign, model, rule).reshape(r.size, dirs.shape[0])
        panel[j] = wr @ vals @ dw
    cum = np.concatenate([[0.0], np.cumsum(panel)])
    return np.array([cum[np.argmin(np.abs(edges - c))] for c in cutoffs])


def _ladder(h, sign, cutoffs, quad, model, rule, threads=1):
    """Values of one term at each cutoff and an error estimate.

    D = 1 uses adaptive cubature per cutoff. For D >= 2 a radial Gauss by
    spherical product rule integrates all cutoffs in one pass; its error
    is estimated against a coarser companion rule.
    """
    D = model.spatial_dim
    if D == 1:
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            res = list(pool.map(lambda c: _term(h, sign, c, quad, model, rule), cutoffs))
        return np.array([r[0] for r in res]), max(r[1] for r in res)
    pref = -np.pi / (2 * np.pi) ** (D + 1)
    fine = _ladder_product_rule(h, sign, cutoffs, model, rule, 8, 48 if D == 2 else 24)
    coarse = _ladder_product_rule(h, sign, cutoffs, model, rule, 6, 36 if D == 2 else 16)
    return pref * fine, float(np.max(np.abs(fine - coarse))) * abs(pref)


# ------------------------------------------------------------------ reports
@dataclass(frozen=True)
class RelEntropyReport:
    """First-order relative entropy data.

    Attributes
    ----------
    term_plus, term_minus : float
        The two terms at the largest cutoff.
    cutoff : float
    converged_plus : bool
        Whether ``term_plus`` is stable under cutoff doubling.
    scan : list of (cutoff, term_minus)
    growth_exponent : float
        Least-squares slope of ``log|term_minus|`` against ``log cutoff``.
    verdict : {"finite", "divergent"}
    plus_scan : list of (cutoff, term_plus)
    """

    term_plus: float
    term_minus: float
    cutoff: float
    converged_plus: bool
    scan: list
    growth_exponent: float
    verdict: str
    plus_scan: list = field(default_factory=list)

    def to_dict(self):
        return {
            "term_plus": self.term_plus,
            "term_minus": self.term_minus,
            "cutoff": self.cutoff,
            "converged_plus": self.converged_plus,
            "scan": [[a, b] for a, b in self.scan],
            "plus_scan": [[a, b] for a, b in self.plus_scan],
            "growth_exponent": self.growth_exponent,
            "verdict": self.verdict,
        }


GROWTH_THRESHOLD = 0.2


def growth_exponent(cutoffs, values):
    """Slope of ``log|values|`` against ``log cutoffs``; 0 for an all-zero scan."""
    cutoffs = np.asarray(cutoffs, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    if cutoffs.size < 3:
        raise InputError("a growth fit needs at least three cutoffs")
    if np.all(values == 0):
        return 0.0
    if np.any(values == 0):
        values = np.where(values == 0, np.min(values[values > 0]) * 1e-3, values)
    slope, _ = np.polyfit(np.log(cutoffs), np.log(values), 1)
    return float(slope)


def _has_odd_part(h, rel=1e-13):
    """Whether ``Im h~`` is distinguishable from zero."""
    if all(t.is_even() for t in h.terms):
        return False
    R = h.momentum_radius(1e-8)
    axis = np.linspace(-R, R, 33)
    k = np.stack(np.meshgrid(*([axis] * h.dim), indexing="ij"), axis=-1)
    vals = h.fourier(k)
    return bool(np.abs(vals.imag).max() > rel * max(np.abs(vals).max(), 1e-300))


def srel_first_order(h, cutoff, quad: QuadratureSpec, model: ModelParams, cutoffs=None, threads=1):
    """First-order wedge relative entropy with a cutoff ladder.

    Parameters
    ----------
    h : SchwartzElement or SchwartzSum
        Real spacetime test function.
    cutoff : float
        Largest momentum cutoff ``L`` (must exceed the mass).
    quad : QuadratureSpec
    model : ModelParams
    cutoffs : sequence of float, optional
        The ladder; defaults to ``L/8, L/4, L/2, L``.
    threads : int
        Worker threads for the ladder (results are collected in order).
    """
    if h.dim != model.d:
        raise InputError("dimension mismatch between h and model")
    if cutoffs is None:
        cutoffs = [cutoff / 8, cutoff / 4, cutoff / 2, cutoff]
    cutoffs = sorted(float(c) for c in cutoffs)
    if len(cutoffs) < 3:
        raise InputError("a growth fit needs at least three cutoffs")
    if cutoffs[0] <= model.mass:
        raise InputError("cutoffs must exceed the mass")
    if not _has_odd_part(h):
        zero = [(c, 0.0) for c in cutoffs]
        return RelEntropyReport(0.0, 0.0, cutoffs[-1], True, zero, 0.0, "finite",
                                zero + [(2 * cutoffs[-1], 0.0)])
    rule = _pf_rule_for(h, model)
    minus = [float(v) for v in _ladder(h, -1, cutoffs, quad, model, rule, threads)[0]]
    top = cutoffs[-1]
    plus = [float(v) for v in _ladder(h, +1, cutoffs + [2 * top], quad, model, rule, threads)[0]]
    plus_val, doubled = plus[-2], plus[-1]
    plus_scan = list(zip(cutoffs + [2 * top], plus))
    converged = abs(doubled - plus_val) <= max(quad.abs_tol, quad.rel_tol * abs(doubled))
    expo = growth_exponent(cutoffs, minus)
    verdict = "divergent" if expo > GROWTH_THRESHOLD else "finite"
    return RelEntropyReport(doubled, minus[-1], top, bool(converged), list(zip(cutoffs, minus)),
                            expo, verdict, plus_scan)


# ----------------------------------------------------------- boundary terms
def boundary_term_check(h, quad: QuadratureSpec, model: ModelParams):
    """Normalised boundary contributions of the ``delta'`` pairing.

    Returns
    -------
    a : float
        ``|int d^D p [-(p^1/omega_p) d_0 Re h~(2 omega_p, 0) + d_1 Re h~(2 omega_p, 0)]|``
        divided by the integral of the absolute values of the two summands.
    b : float
        ``sup_p |d/dq Re h~(omega_p - omega_{p - q e1}, q e1)|`` at ``q = 0``,
        divided by the largest momentum gradient of ``h~`` on the probe set.
    """
    D = model.spatial_dim
    m = model.mass

    def jet_at_zero_momentum(p):
        w = np.sqrt(m * m + np.sum(p * p, axis=-1))
        k = np.zeros(p.shape[:-1] + (D + 1,))
        k[..., 0] = 2 * w
        return w, h.fourier_jet(k)

    def pieces(p):
        w, (val, grad, _) = jet_at_zero_momentum(p)
        first = -(p[:, 0] / w) * grad[:, 0].real
        second = grad[:, 1].real
        return np.stack([first + second, np.abs(first) + np.abs(second)], axis=-1)

    R = h.momentum_radius(1e-17)
    from .quadrature import integrate_box
    val, _ = integrate_box(pieces, -R * np.ones(D), R * np.ones(D), rtol=quad.rel_tol,
                           atol=quad.abs_tol, max_subdivisions=quad.max_subdivisions)
    total, mass = float(val[0]), float(val[1])
    a = abs(total) / mass if mass > 0 else 0.0

    # component (b): gradient of Re h~ at the origin, contracted with (p^1/omega, 1)
    axis = np.linspace(-R, R, 41)
    probe = np.stack(np.meshgrid(*([axis] * D), indexing="ij"), axis=-1).reshape(-1, D)
    w, (_, grad_probe, _) = jet_at_zero_momentum(probe)
    _, g0, _ = h.fourier_jet(np.zeros((1, D + 1)))
    b_raw = np.abs(g0[0, 0].real * (probe[:, 0] / w) + g0[0, 1].real)
    scale = max(float(np.abs(grad_probe).max()), float(np.abs(g0).max()))
    b = float(b_raw.max()) / scale if scale > 0 else 0.0
    return a, b


def plus_boundary_pairing(h, quad: QuadratureSpec, model: ModelParams):
    """Full plus-branch ``delta'`` pairing ``int d^D p d/dq [R_+ Re h~(omega_p + omega_{p-q}, q)]_{q=0}``.

    ``R_+`` and its first derivative vanish at ``q = 0``, so the value is
    zero for every ``h``. Returned normalised as in :func:`boundary_term_check`.
    """
    D = model.spatial_dim
    m = model.mass

    def pieces(p):
        p1 = p[:, :1]
        perp2 = np.sum(p[:, 1:] ** 2, axis=1, keepdims=True)
        w = np.sqrt(m * m + p1 * p1 + perp2)
        u = w
        du = -p1 / u
        N = -w * w
        R = 0.5 + N / u / (2 * w)
        dR = (p1 / u - N * du / u**2) / (2 * w)
        k = np.zeros((p.shape[0], D + 1))
        k[:, 0] = 2 * w[:, 0]
        val, grad, _ = h.fourier_jet(k)
        dg = grad[:, 0].real * du[:, 0] + grad[:, 1].real
        pair = dR[:, 0] * val.real + R[:, 0] * dg
        return np.stack([pair, np.abs(dR[:, 0] * val.real) + np.abs(R[:, 0] * dg) + np.abs(dg)], axis=-1)

    R = h.momentum_radius(1e-17)
    from .quadrature import integrate_box
    val, _ = integrate_box(pieces, -R * np.ones(D), R * np.ones(D), rtol=quad.rel_tol,
                           atol=quad.abs_tol, max_subdivisions=quad.max_subdivisions)
    return abs(float(val[0])) / float(val[1]) if val[1] > 0 else 0.0
