"""One-particle action of the smeared Wick square.

The commutator of ``(1/2) :phi^2:(h)`` with a field operator acts on the
one-particle data by the operator ``t_h``,

``(t_h f)~(k0, p) = -i int dmu(l) [h~(k0 - omega_l, p - l) f+(l)
                                   - h~(k0 + omega_l, p - l) f-(l)]``,

evaluated at ``k0 = +omega_p`` (plus branch) and ``k0 = -omega_p`` (minus
branch). The Bogoliubov map is the exponential series
``T_h = sum_n t_h^n / n!``.

The integral over ``l`` is discretised on a symmetric tensor
Gauss-Legendre grid. Values away from the grid are obtained by Nystrom
interpolation, i.e. by evaluating the kernel at the requested momentum
against the grid data, so the results are again :class:`MassShellSample`
objects defined on all of R^D.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigurationError, InputError
from .kinematics import MassShellSample, ModelParams, omega, pauli_jordan, two_point
from .quadrature import QuadratureSpec, composite_gauss_legendre

MAX_SERIES_ORDER = 64
CACHE_ENTRIES = 8_000_000


# ------------------------------------------------------------------- grids
@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Symmetric tensor-product Gauss-Legendre grid on ``[-cutoff, cutoff]^D``.

    Attributes
    ----------
    nodes : ndarray, shape (N, D)
    flat : ndarray, shape (N,)
        Lebesgue weights.
    mu : ndarray, shape (N,)
        Weights of the invariant measure ``dmu``.
    energy : ndarray, shape (N,)
    """

    nodes: np.ndarray
    flat: np.ndarray
    mu: np.ndarray
    energy: np.ndarray
    cutoff: float

    @classmethod
    def build(cls, model: ModelParams, cutoff, panel_width=1.0, order=12):
        D = model.spatial_dim
        panels = max(2, 2 * int(math.ceil(cutoff / panel_width)))
        x, w = composite_gauss_legendre(-cutoff, cutoff, panels, order)
        mesh = np.meshgrid(*([x] * D), indexing="ij")
        wmesh = np.meshgrid(*([w] * D), indexing="ij")
        nodes = np.stack(mesh, axis=-1).reshape(-1, D)
        flat = np.prod(np.stack(wmesh, axis=-1), axis=-1).reshape(-1)
        en = omega(nodes, model)
        mu = flat / (2.0 * en * (2 * np.pi) ** D)
        return cls(nodes, flat, mu, en, float(cutoff))

    @classmethod
    def default(cls, h, model: ModelParams, quad: QuadratureSpec):
        """Grid resolving both the mass scale and the momentum scale of ``h``."""
        width = min(model.mass, h.momentum_scale(), 1.0)
        D = model.spatial_dim
        if D == 1:
            return cls.build(model, quad.cutoff, width, 12)
        cutoff = min(quad.cutoff, 8.0 * model.mass + 2.0)
        return cls.build(model, cutoff, max(width, 2.0 / D), 6)

    @property
    def size(self):
        return self.nodes.shape[0]

    def mirror(self):
        """Permutation ``i -> j`` with ``nodes[j] = -nodes[i]``."""
        n = int(round(self.size ** (1.0 / self.nodes.shape[1])))
        idx = np.arange(self.size).reshape([n] * self.nodes.shape[1])
        return idx[(slice(None, None, -1),) * self.nodes.shape[1]].reshape(-1)


# ------------------------------------------------------------------ kernel
def kernel_blocks(h, p, grid: MomentumGrid, model: ModelParams, branch=0):
    """Rows of the discretised ``t_h`` at momenta ``p``.

    Returns four ``(n, N)`` arrays ``(pp, pm, mp, mm)`` such that
    ``(t_h f)+(p) = pp @ f+ + pm @ f-`` and ``(t_h f)-(p) = mp @ f+ + mm @ f-``
    where ``f+-`` are the grid values. With ``branch = +1`` (``-1``) only
    the blocks of the plus (minus) branch are computed, the others are None.
    """
    p = np.asarray(p, dtype=float).reshape(-1, model.spatial_dim)
    wp = omega(p, model)[:, None]
    wl = grid.energy[None, :]
    dp = p[:, None, :] - grid.nodes[None, :, :]

    def h_at(k0):
        k = np.concatenate([np.broadcast_to(k0, dp.shape[:2])[..., None], dp], axis=-1)
        return h.fourier(k)

    mu = grid.mu[None, :]
    pp = pm = mp = mm = None
    if branch >= 0:
        pp = -1j * mu * h_at(wp - wl)
        pm = 1j * mu * h_at(wp + wl)
    if branch <= 0:
        mp = -1j * mu * h_at(-wp - wl)
        mm = 1j * mu * h_at(-wp + wl)
    return pp, pm, mp, mm


class SqueezeOperator:
    """Discretised ``t_h`` and ``T_h`` for a fixed smearing function ``h``.

    Parameters
    ----------
    h : SchwartzElement or SchwartzSum
        Real spacetime test function.
    model : ModelParams
    grid : MomentumGrid, optional
        Defaults to :meth:`MomentumGrid.default`.
    quad : QuadratureSpec, optional
    c_h : float, optional
        Known value of ``c(h)``; computed on demand otherwise.
    """

    def __init__(self, h, model: ModelParams, grid: MomentumGrid | None = None,
                 quad: QuadratureSpec | None = None, c_h=None):
        if h.dim != model.d:
            raise InputError(f"h lives in d={h.dim}, model has d={model.d}")
        self.h = h
        self.model = model
        self.quad = quad or QuadratureSpec()
        self.grid = grid or MomentumGrid.default(h, model, self.quad)
        if c_h is not None:
            self.__dict__["c_h"] = float(c_h)

    @cached_property
    def matrix(self):
        """Dense ``2N x 2N`` matrix on stacked grid data ``(f+, f-)``, if small enough."""
        n = self.grid.size
        if 4 * n * n > CACHE_ENTRIES:
            return None
        pp, pm, mp, mm = kernel_blocks(self.h, self.grid.nodes, self.grid, self.model)
        return np.block([[pp, pm], [mp, mm]])

    @cached_property
    def c_h(self):
        return bound_c(self.h, self.model)

    def sample(self, f: MassShellSample):
        """Stack grid values ``(f+, f-)`` of a shell sample."""
        return np.concatenate([f.plus(self.grid.nodes), f.minus(self.grid.nodes)]).astype(complex)

    def apply_grid(self, vec, chunk=512):
        """``t_h`` acting on stacked grid data."""
        if self.matrix is not None:
            return self.matrix @ vec
        n = self.grid.size
        out = np.empty(2 * n, dtype=complex)
        fp, fm = vec[:n], vec[n:]
        for s in range(0, n, chunk):
            pp, pm, mp, mm = kernel_blocks(self.h, self.grid.nodes[s:s + chunk], self.grid, self.model)
            out[s:s + chunk] = pp @ fp + pm @ fm
            out[n + s:n + s + chunk] = mp @ fp + mm @ fm
        return out

    def extend(self, vec, real=True):
        """Nystrom extension: the sample ``p -> (t_h v)(p)`` for grid data ``v``."""
        n = self.grid.size
        fp, fm = vec[:n].copy(), vec[n:].copy()
        h, grid, model = self.h, self.grid, self.model

        def branch(which):
            def ev(p, chunk=256):
                p = np.asarray(p, dtype=float).reshape(-1, model.spatial_dim)
                out = np.empty(p.shape[0], dtype=complex)
                for s in range(0, p.shape[0], chunk):
                    pp, pm, mp, mm = kernel_blocks(h, p[s:s + chunk], grid, model, which)
                    out[s:s + chunk] = (pp @ fp + pm @ fm) if which > 0 else (mp @ fp + mm @ fm)
                return out
            return ev

        return MassShellSample(branch(+1), branch(-1), real, model.spatial_dim)

    def grid_norm(self, vec):
        """``L^2(dmu)`` norm of the plus part of grid data."""
        n = self.grid.size
        return float(np.sqrt(np.sum(self.grid.mu * np.abs(vec[:n]) ** 2)))

    def operator_norms(self):
        """``(B1, B2, Binf)``: norms of the discretised ``t_h`` on ``L^p(dmu)`` of both sheets.

        Each sheet carries the weights ``mu``, so ``B2`` is the spectral norm
        of ``W^(1/2) M W^(-1/2)`` and ``B1``, ``Binf`` are weighted column and
        row sums.
        """
        M = self.matrix
        if M is None:
            raise ConfigurationError("grid too large for a dense operator")
        mu = np.concatenate([self.grid.mu, self.grid.mu])
        A = M / mu[None, :]  # kernel against dmu
        B1 = float(np.max(np.sum(np.abs(A) * mu[:, None], axis=0)))
        Binf = float(np.max(np.sum(np.abs(A) * mu[None, :], axis=1)))
        r = np.sqrt(mu)
        B2 = float(np.linalg.norm(r[:, None] * A * r[None, :], 2))
        return B1, B2, Binf

    def apply_t(self, f: MassShellSample):
        """``t_h f`` as a shell sample."""
        return self.extend(self.sample(f), f.real_in_position)

    def series_order(self, f_norm, eps):
        return series_order(self.c_h, f_norm, eps)

    def apply_T(self, f: MassShellSample, eps=1e-10, order=None):
        """``T_h f = f + t_h (sum_{n>=1} t_h^(n-1) f / n!)``.

        Returns
        -------
        MassShellSample
            The transformed sample. The chosen order and tail bound are
            available through :meth:`plan`.
        """
        vec = self.sample(f)
        plan = self.plan(f, eps, order, vec)
        acc = np.zeros_like(vec)
        term = vec.copy()
        for n in range(1, plan.order + 1):
            acc += term / math.factorial(n)
            term = self.apply_grid(term)
        return f + self.extend(acc, f.real_in_position)

    def plan(self, f, eps=1e-10, order=None, vec=None):
        vec = self.sample(f) if vec is None else vec
        norm = self.grid_norm(vec)
        c = self.c_h
        n = self.series_order(norm, eps) if order is None else int(order)
        if n < 0 or n > MAX_SERIES_ORDER:
            raise InputError(f"series order must lie in [0, {MAX_SERIES_ORDER}]")
        return SqueezeKernelApplication(self.h, n, tail_bound(c, norm, n))

    def apply_T_grid(self, vec, s=1.0, order=40):
        """``exp(s t_h)`` on grid data (used for group-law checks)."""
        acc = vec.astype(complex).copy()
        term = vec.astype(complex).copy()
        for n in range(1, order + 1):
            term = s * self.apply_grid(term) / n
            acc += term
        return acc


@dataclass(frozen=True)
class SqueezeKernelApplication:
    """Series bookkeeping for one application of ``T_h``.

    Attributes
    ----------
    h : test function
    order : int
        Number of terms kept (powers ``t_h^n`` with ``n <= order``).
    tail_bound : float
        ``e^c c^(N+1) / (N+1)! * ||f||_2`` with ``c = c(h)``.
    """

    h: object
    order: int
    tail_bound: float


def tail_bound(c, norm, n):
    """Lagrange bound on the exponential tail beyond order ``n``."""
    return math.exp(c) * c ** (n + 1) / math.factorial(n + 1) * norm


def series_order(c, norm, eps):
    """Smallest order whose tail bound is below ``eps``."""
    if eps <= 0:
        raise InputError("eps must be positive")
    for n in range(MAX_SERIES_ORDER + 1):
        if tail_bound(c, norm, n) < eps:
            return n
    raise ConfigurationError(f"series order cap {MAX_SERIES_ORDER} reached: tail bound "
                             f"{tail_bound(c, norm, MAX_SERIES_ORDER):.3e} still above eps={eps:.3e}")


# ------------------------------------------------------------ convenience
_OPERATORS: dict = {}


def squeeze_operator(h, model: ModelParams, quad: QuadratureSpec | None = None):
    """Cached :class:`SqueezeOperator` keyed on the identity of ``h``."""
    key = (id(h), model, quad)
    op = _OPERATORS.get(key)
    if op is None or op.h is not h:
        if len(_OPERATORS) > 32:
            _OPERATORS.clear()
        op = _OPERATORS[key] = SqueezeOperator(h, model, quad=quad)
    return op


def apply_t_h(h, f: MassShellSample, quad: QuadratureSpec, model: ModelParams):
    """``t_h f`` for a real test function ``h`` and shell data ``f``."""
    return squeeze_operator(h, model, quad).apply_t(f)


def apply_T_h(h, f: MassShellSample, eps, quad: QuadratureSpec, model: ModelParams, order=None):
    """``T_h f`` with the series truncated at tail bound ``eps``."""
    return squeeze_operator(h, model, quad).apply_T(f, eps, order)


def symplectic_residual(h, f, g, eps, quad: QuadratureSpec, model: ModelParams, c_h=None):
    """``|Delta(T_h f, T_h g) - Delta(f, g)|`` together with ``Delta(f, g)``.

    ``c_h`` may carry an already known value of ``c(h)``.
    """
    op = squeeze_operator(h, model, quad) if c_h is None else SqueezeOperator(h, model, quad=quad, c_h=c_h)
    tf, tg = op.apply_T(f, eps), op.apply_T(g, eps)
    before = pauli_jordan(f, g, quad, model)
    after = pauli_jordan(tf, tg, quad, model)
    return abs(after - before), before


def transformed_two_point(h, f, g, eps, quad: QuadratureSpec, model: ModelParams):
    """Two-point function of the squeezed state, ``w2(T_h f, T_h g)``."""
    op = squeeze_operator(h, model, quad)
    return two_point(op.apply_T(f, eps), op.apply_T(g, eps), quad, model)


# -------------------------------------------------------- the constant c(h)
@dataclass(frozen=True)
class SupReport:
    """Outcome of the supremum search for ``c(h)``.

    ``value`` is the largest value found (a lower bound on the supremum).
    ``residual`` is how much local refinement added to the grid maximum.
    """

    value: float
    grid_value: float
    residual: float
    argmax: tuple


def _directions(D, n):
    if D == 1:
        return np.array([[1.0], [-1.0]])
    if D == 2:
        th = np.linspace(0, 2 * np.pi, n, endpoint=False)
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    i = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * i / n)
    th = np.pi * (1 + 5**0.5) * i
    return np.stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)], axis=-1)


def _combo_weighted(h, p, u, t, model, s1, s2):
    """``omega_p^(D+1) / m^2 |h~(s1 omega_{p+k} + s2 omega_k, p)|`` with ``k = u m tan t``.

    ``t = pi/2`` is the point at infinity; there the energy tends to
    ``s1 p.u`` when ``s1 = -s2`` and the value vanishes when ``s1 = s2``.
    """
    m, D = model.mass, model.spatial_dim
    p, u, t = np.broadcast_arrays(p, u, t[..., None])
    t = t[..., 0]
    inf = t >= np.pi / 2 - 1e-15
    tt = np.where(inf, 0.0, t)
    k = u * (m * np.tan(tt))[..., None]
    pk = p + k
    wpk = np.sqrt(m * m + np.sum(pk * pk, axis=-1))
    wk = np.sqrt(m * m + np.sum(k * k, axis=-1))
    if s1 == -s2:
        # difference form avoids cancellation for large |k|
        diff = (np.sum(p * p, axis=-1) + 2 * np.sum(p * k, axis=-1)) / (wpk + wk)
        e = s1 * np.where(inf, np.sum(p * u, axis=-1), diff)
    else:
        e = s1 * (wpk + wk)
    wp = np.sqrt(m * m + np.sum(p * p, axis=-1))
    val = wp ** (D + 1) / (m * m) * np.abs(h.fourier(np.concatenate([e[..., None], p], axis=-1)))
    if s1 == s2:
        val = np.where(inf, 0.0, val)
    return val


def bound_c_report(h, model: ModelParams, *, p_points=None, t_points=121, n_dirs=None,
                   refine=4):
    """Scan-and-refine estimate of

    ``c(h) = sup_{p, k, signs} omega_p^(D+1) / m^2 |h~(+-omega_{p+k} +- omega_k, p)|``.

    The ``k`` variable is compactified as ``k = u m tan t`` with
    ``t in [0, pi/2]`` so the limit ``|k| -> inf`` is part of the scan.
    The ``p`` range is grown until the envelope over the outermost shell
    is negligible.
    """
    if h.dim != model.d:
        raise InputError("dimension mismatch between h and model")
    D, m = model.spatial_dim, model.mass
    if p_points is None:
        p_points = {1: 401, 2: 61, 3: 21}.get(D, 11)
    if n_dirs is None:
        n_dirs = {1: 2, 2: 24, 3: 48}.get(D, 64)
    u = _directions(D, n_dirs)
    t = np.linspace(0.0, np.pi / 2, t_points)
    P = h.momentum_radius(1e-12) + 2 * m
    combos = ((1, 1), (1, -1), (-1, 1), (-1, -1))
    for _ in range(4):
        axis = np.linspace(-P, P, p_points)
        pg = np.stack(np.meshgrid(*([axis] * D), indexing="ij"), axis=-1).reshape(-1, D)
        best = (-1.0, None)
        edge = 0.0
        radius = np.sqrt(np.sum(pg * pg, axis=-1))
        outer = radius >= 0.9 * P
        for s1, s2 in combos:
            vals = _combo_weighted(h, pg[:, None, None, :], u[None, :, None, :], t[None, None, :],
                                   model, s1, s2)
            flat = vals.reshape(pg.shape[0], -1)
            i = np.unravel_index(int(np.argmax(flat)), flat.shape)
            if flat[i] > best[0]:
                best = (float(flat[i]), (pg[i[0]], u[i[1] // t.size], t[i[1] % t.size], s1, s2))
            edge = max(edge, float(flat[outer].max()) if outer.any() else 0.0)
        if best[0] <= 0 or edge <= 1e-9 * best[0]:
            break
        P *= 2
    grid_value = max(best[0], 0.0)
    if grid_value == 0.0:
        return SupReport(0.0, 0.0, 0.0, ())
    refined = grid_value
    arg = best[1]
    # refine the best few candidates per sign pattern
    cands = [best[1]]
    for s1, s2 in combos:
        if (s1, s2) != best[1][3:]:
            cands.append((best[1][0], best[1][1], best[1][2], s1, s2))
    for cand in cands[:refine]:
        p0, u0, t0, s1, s2 = cand

        def unpack(x):
            pv = x[:D]
            if D == 1:
                uv = np.array([1.0])
                tv = x[D]
                return pv, uv * np.sign(tv if tv != 0 else 1.0), min(abs(tv), np.pi / 2)
            ang = x[D:-1]
            if D == 2:
                uv = np.array([np.cos(ang[0]), np.sin(ang[0])])
            else:
                uv = np.array([np.cos(ang[1]) * np.sin(ang[0]), np.sin(ang[1]) * np.sin(ang[0]), np.cos(ang[0])])
            return pv, uv, min(abs(x[-1]), np.pi / 2)

        if D == 1:
            x0 = np.array([p0[0], t0 * u0[0]])
        elif D == 2:
            x0 = np.concatenate([p0, [np.arctan2(u0[1], u0[0]), t0]])
        else:
            x0 = np.concatenate([p0, [np.arccos(np.clip(u0[2], -1, 1)), np.arctan2(u0[1], u0[0]), t0]])

        def neg(x, s1=s1, s2=s2):
            pv, uv, tv = unpack(x)
            return -float(_combo_weighted(h, pv, uv, np.array(tv), model, s1, s2))

        res = minimize(neg, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
        if -res.fun > refined:
            refined = -res.fun
            pv, uv, tv = unpack(res.x)
            arg = (pv, uv, tv, s1, s2)
    return SupReport(float(refined), grid_value, float(refined - grid_value),
                     tuple(np.atleast_1d(a).tolist() if isinstance(a, np.ndarray) else a for a in arg))


def bound_c(h, model: ModelParams, **kw):
    """The constant ``c(h)`` (see :func:`bound_c_report`)."""
    return bound_c_report(h, model, **kw).value


# ------------------------------------------------------ position-space locality
def pauli_jordan_kernel(x0, x1, mass):
    """Commutator function in 1+1 dimensions, ``-sgn(x0) J0(m s) / 2`` inside the light cone.

    ``s = sqrt(x0^2 - x1^2)``; the kernel vanishes at spacelike separation,
    and ``Delta(f, g) = int int f(x) Delta(x - y) g(y) dx dy``.
    """
    from scipy.special import j0

    x0, x1 = np.broadcast_arrays(np.asarray(x0, float), np.asarray(x1, float))
    s2 = x0 * x0 - x1 * x1
    inside = s2 > 0
    out = np.zeros(x0.shape)
    out[inside] = -0.5 * np.sign(x0[inside]) * j0(mass * np.sqrt(s2[inside]))
    return out


def commutator_smear(values, axes, targets, mass, chunk=4096):
    """``(Delta * g)(x) = int Delta(x - y) g(y) dy`` by a Riemann sum over a sampled ``g``.

    Parameters
    ----------
    values : ndarray, shape (n0, n1)
        Samples of ``g`` on the tensor grid ``axes``.
    axes : (ndarray, ndarray)
    targets : ndarray, shape (..., 2)
        Points ``x = (x0, x1)``.
    mass : float
    """
    y = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 2)
    g = np.asarray(values, float).ravel()
    keep = g != 0
    y, g = y[keep], g[keep]
    cell = float(np.prod([a[1] - a[0] for a in axes]))
    x = np.asarray(targets, float)
    flat = x.reshape(-1, 2)
    out = np.empty(flat.shape[0])
    for s in range(0, flat.shape[0], chunk):
        d = flat[s:s + chunk, None, :] - y[None, :, :]
        out[s:s + chunk] = pauli_jordan_kernel(d[..., 0], d[..., 1], mass) @ g
    return (cell * out).reshape(x.shape[:-1])


@dataclass(frozen=True)
class LocalityReport:
    """Support of ``h (Delta * f)`` on the grid of the bump ``h``.

    ``outside`` is the largest magnitude at grid points outside the wedge
    ``x^1 >= |x^0|``; ``peak`` is the largest magnitude overall.
    """

    outside: float
    peak: float

    @property
    def local(self):
        return self.outside == 0.0


def wedge_locality(h_bump, f_bump, model: ModelParams):
    """Where ``h (Delta * f)`` lives, for sampled bumps in 1+1 dimensions.

    This is the position-space shape of ``t_h f``; it can only be supported
    where ``h`` is, and it vanishes identically when ``f`` sits at spacelike
    separation from ``supp h``.
    """
    if model.spatial_dim != 1 or h_bump.dim != 2 or f_bump.dim != 2:
        raise InputError("wedge locality is implemented in 1+1 dimensions")
    pts = h_bump.points()
    conv = commutator_smear(f_bump.values, f_bump.axes, pts, model.mass)
    prod = h_bump.values * conv
    outside = ~h_bump.in_wedge(pts)
    return LocalityReport(float(np.max(np.abs(prod[outside]), initial=0.0)),
                          float(np.max(np.abs(prod), initial=0.0)))
