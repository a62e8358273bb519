"""Test functions on Minkowski space and their Fourier transforms.

Two families are provided.

* :class:`SchwartzElement`: ``A * trig(kappa . x) * exp(-(x - x0)^T S (x - x0))``
  with a closed-form Fourier transform, gradient and Hessian. Sums of
  elements are represented by :class:`SchwartzSum`.
* :class:`WedgeBump`: a sampled, compactly supported mollified indicator of
  a shifted right wedge ``x^1 >= |x^0| + margin``.

The Fourier transform uses the Minkowski pairing
``kx = -k^0 x^0 + k . x``, i.e. ``f~(k) = int f(x) exp(-i kx) d^d x``.
It therefore equals the Euclidean transform evaluated at ``eta k`` with
``eta = diag(-1, 1, ..., 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError


def _eta(d):
    e = np.ones(d)
    e[0] = -1.0
    return e


def _as_points(x, d):
    x = np.asarray(x, dtype=float)
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != d:
        raise InputError(f"expected trailing dimension {d}, got shape {x.shape}")
    return x


def _parse_sigma(sigma, d):
    s = np.asarray(sigma, dtype=float)
    if s.ndim == 0:
        s = s * np.eye(d)
    elif s.ndim == 1:
        s = np.diag(s)
    if s.shape != (d, d):
        raise InputError(f"sigma must be {d}x{d}, got shape {s.shape}")
    return s


@dataclass(frozen=True, eq=False)
class SchwartzElement:
    """Gaussian times a trigonometric modulation.

    ``f(x) = amplitude * trig(kappa . x) * exp(-(x - center)^T sigma (x - center))``
    with ``trig`` either ``cos`` or ``sin`` and ``kappa . x`` the Euclidean
    dot product.

    Parameters
    ----------
    amplitude : float
    center : sequence of float
        Length ``d`` (spacetime dimension, ``d = D + 1``).
    sigma : array_like
        Symmetric positive-definite ``d x d`` matrix. A scalar or a vector
        is promoted to a multiple of the identity or a diagonal matrix.
    kappa : sequence of float, optional
        Modulation wave vector (default zero).
    phase : {"cos", "sin"}
    """

    amplitude: float
    center: Sequence[float]
    sigma: np.ndarray
    kappa: Sequence[float] | None = None
    phase: str = "cos"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        d = c.size
        s = _parse_sigma(self.sigma, d)
        kap = np.zeros(d) if self.kappa is None else np.atleast_1d(np.asarray(self.kappa, dtype=float))
        if kap.shape != (d,):
            raise InputError(f"kappa must have length {d}")
        if self.phase not in ("cos", "sin"):
            raise InputError(f"phase must be 'cos' or 'sin', got {self.phase!r}")
        for name, arr in (("amplitude", np.asarray(self.amplitude)), ("center", c), ("sigma", s), ("kappa", kap)):
            if not np.all(np.isfinite(arr)):
                raise InputError(f"{name} must be finite")
        if not np.allclose(s, s.T, rtol=0, atol=1e-12 * max(1.0, np.abs(s).max())):
            raise InputError("sigma must be symmetric")
        eig = np.linalg.eigvalsh(s)
        if eig.min() <= 0:
            raise InputError("sigma must be positive definite")
        for name, arr in (("center", c), ("sigma", s), ("kappa", kap)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "amplitude", float(self.amplitude))
        inv = np.linalg.inv(s)
        self._cache.update(
            d=d,
            B=0.25 * inv,
            norm=self.amplitude * np.pi ** (d / 2) / np.sqrt(np.linalg.det(s)),
            eig=eig,
            eta=_eta(d),
        )

    # ---------------------------------------------------------------- basics
    @property
    def dim(self) -> int:
        """Spacetime dimension ``d``."""
        return self._cache["d"]

    @property
    def terms(self):
        return (self,)

    def scaled(self, factor):
        return SchwartzElement(self.amplitude * factor, self.center, self.sigma, self.kappa, self.phase)

    def reflected(self):
        """The element ``x -> f(-x)``."""
        sign = 1.0 if self.phase == "cos" else -1.0
        return SchwartzElement(sign * self.amplitude, -self.center, self.sigma, self.kappa, self.phase)

    def is_even(self):
        return self.amplitude == 0 or (not np.any(self.center) and (self.phase == "cos" or not np.any(self.kappa)))

    def __add__(self, other):
        return SchwartzSum(self.terms + other.terms)

    def __mul__(self, factor):
        return self.scaled(factor)

    __rmul__ = __mul__

    def to_dict(self):
        return {
            "amplitude": self.amplitude,
            "center": self.center.tolist(),
            "sigma": self.sigma.tolist(),
            "kappa": self.kappa.tolist(),
            "phase": self.phase,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                amplitude=data.get("amplitude", 1.0),
                center=data["center"],
                sigma=data["sigma"],
                kappa=data.get("kappa"),
                phase=data.get("phase", "cos"),
            )
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed test function description: {exc}") from exc

    # -------------------------------------------------------- position space
    def _trig(self, x):
        arg = x @ self.kappa
        if self.phase == "cos":
            return np.cos(arg), -np.sin(arg)
        return np.sin(arg), np.cos(arg)

    def evaluate(self, x):
        """Values at points ``x`` of shape ``(..., d)``."""
        x = _as_points(x, self.dim)
        y = x - self.center
        env = np.exp(-np.einsum("...i,ij,...j->...", y, self.sigma, y))
        return self.amplitude * self._trig(x)[0] * env

    def gradient(self, x):
        x = _as_points(x, self.dim)
        y = x - self.center
        env = np.exp(-np.einsum("...i,ij,...j->...", y, self.sigma, y))
        t, dt = self._trig(x)
        v = -2.0 * y @ self.sigma
        return self.amplitude * env[..., None] * (dt[..., None] * self.kappa + t[..., None] * v)

    def hessian(self, x):
        x = _as_points(x, self.dim)
        y = x - self.center
        env = np.exp(-np.einsum("...i,ij,...j->...", y, self.sigma, y))
        t, dt = self._trig(x)
        v = -2.0 * y @ self.sigma
        kk = np.multiply.outer(self.kappa, self.kappa)
        kv = self.kappa[:, None] * v[..., None, :]
        out = (-t[..., None, None] * kk
               + dt[..., None, None] * (kv + np.swapaxes(kv, -1, -2))
               + t[..., None, None] * (v[..., :, None] * v[..., None, :] - 2.0 * self.sigma))
        return self.amplitude * env[..., None, None] * out

    # --------------------------------------------------------- momentum space
    def _shifts(self):
        if self.phase == "cos":
            return ((0.5, 1.0), (0.5, -1.0))
        return ((-0.5j, 1.0), (0.5j, -1.0))

    def fourier(self, k):
        """Minkowski Fourier transform at momenta ``k`` of shape ``(..., d)``."""
        k = _as_points(k, self.dim)
        xi = k * self._cache["eta"]
        B = self._cache["B"]
        out = np.zeros(xi.shape[:-1], dtype=complex)
        for coef, s in self._shifts():
            z = xi - s * self.kappa
            out += coef * np.exp(-1j * (z @ self.center) - np.sum((z @ B) * z, axis=-1))
        return self._cache["norm"] * out

    def fourier_jet(self, k):
        """Transform with its momentum gradient and Hessian.

        Returns
        -------
        value : ndarray, shape (...)
        grad : ndarray, shape (..., d)
        hess : ndarray, shape (..., d, d)
        """
        k = _as_points(k, self.dim)
        eta = self._cache["eta"]
        xi = k * eta
        B = self._cache["B"]
        val = np.zeros(xi.shape[:-1], dtype=complex)
        grad = np.zeros(xi.shape, dtype=complex)
        hess = np.zeros(xi.shape + (self.dim,), dtype=complex)
        for coef, s in self._shifts():
            z = xi - s * self.kappa
            g = coef * np.exp(-1j * (z @ self.center) - np.sum((z @ B) * z, axis=-1))
            v = -1j * self.center - 2.0 * z @ B
            val += g
            grad += g[..., None] * v
            hess += g[..., None, None] * (v[..., :, None] * v[..., None, :] - 2.0 * B)
        n = self._cache["norm"]
        return n * val, n * grad * eta, n * hess * np.multiply.outer(eta, eta)

    def momentum_radius(self, rel=1e-16):
        """Euclidean radius beyond which ``|f~|`` is below ``rel`` times its bound."""
        lam = self._cache["eig"].max()
        return float(np.linalg.norm(self.kappa) + 2.0 * np.sqrt(lam * np.log(1.0 / rel)))

    def momentum_scale(self):
        """Shortest length scale on which ``f~`` varies in momentum space."""
        width = 2.0 * np.sqrt(self._cache["eig"].min())
        shift = np.linalg.norm(self.center)
        return float(min(width, 1.0 / shift) if shift > 0 else width)

    def fourier_bound(self):
        """Upper bound on ``sup |f~|``."""
        return abs(self._cache["norm"])


@dataclass(frozen=True, eq=False)
class SchwartzSum:
    """Finite sum of :class:`SchwartzElement` objects."""

    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise InputError("empty sum")
        dims = {t.dim for t in self.terms}
        if len(dims) != 1:
            raise InputError("all terms must share the spacetime dimension")

    @property
    def dim(self):
        return self.terms[0].dim

    def scaled(self, factor):
        return SchwartzSum(tuple(t.scaled(factor) for t in self.terms))

    def reflected(self):
        return SchwartzSum(tuple(t.reflected() for t in self.terms))

    def __add__(self, other):
        return SchwartzSum(self.terms + other.terms)

    def __mul__(self, factor):
        return self.scaled(factor)

    __rmul__ = __mul__

    def evaluate(self, x):
        return sum(t.evaluate(x) for t in self.terms)

    def gradient(self, x):
        return sum(t.gradient(x) for t in self.terms)

    def hessian(self, x):
        return sum(t.hessian(x) for t in self.terms)

    def fourier(self, k):
        return sum(t.fourier(k) for t in self.terms)

    def fourier_jet(self, k):
        parts = [t.fourier_jet(k) for t in self.terms]
        return tuple(sum(p[i] for p in parts) for i in range(3))

    def momentum_radius(self, rel=1e-16):
        return max(t.momentum_radius(rel) for t in self.terms)

    def momentum_scale(self):
        return min(t.momentum_scale() for t in self.terms)

    def fourier_bound(self):
        return sum(t.fourier_bound() for t in self.terms)

    def to_dict(self):
        return {"terms": [t.to_dict() for t in self.terms]}


def even_part(h):
    """``(h(x) + h(-x)) / 2``."""
    return SchwartzSum(tuple(t.scaled(0.5) for t in h.terms) + tuple(t.reflected().scaled(0.5) for t in h.terms))


def odd_part(h):
    """``(h(x) - h(-x)) / 2``."""
    return SchwartzSum(tuple(t.scaled(0.5) for t in h.terms) + tuple(t.reflected().scaled(-0.5) for t in h.terms))


def load_test_function(data):
    """Build an element or a sum from its JSON dictionary."""
    if isinstance(data, dict) and "terms" in data:
        return SchwartzSum(tuple(SchwartzElement.from_dict(t) for t in data["terms"]))
    if isinstance(data, list):
        return SchwartzSum(tuple(SchwartzElement.from_dict(t) for t in data))
    return SchwartzElement.from_dict(data)


def antisymmetric_energy(e, window, *, mass=1.0, cutoff=16.0, points=201):
    """``sup |Im e~(k0, k1, 0, ...)|`` over ``|k1| <= window`` and ``mass <= k0 <= cutoff``.

    ``Im e~`` is the transform of the odd part of ``e``; the value is zero
    exactly when the element is even about the origin.
    """
    if not window > 0:
        raise InputError("window must be positive")
    if not cutoff > mass:
        raise InputError("cutoff must exceed the mass")
    k0, k1 = np.meshgrid(np.linspace(mass, cutoff, points), np.linspace(-window, window, points),
                         indexing="ij")
    k = np.zeros(k0.shape + (e.dim,))
    k[..., 0], k[..., 1] = k0, k1
    return float(np.max(np.abs(e.fourier(k).imag)))


# ---------------------------------------------------------------- wedge bumps
def smooth_step(t):
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True, eq=False)
class WedgeBump:
    """Sampled bump supported in ``x^1 >= |x^0| + margin`` inside a box.

    Attributes
    ----------
    axes : tuple of ndarray
        Grid coordinates along each spacetime axis.
    values : ndarray
        Samples on the tensor grid.
    margin, smoothness : float
    empty : bool
        True when the shifted wedge misses the box and the bump vanishes.
    """

    axes: tuple
    values: np.ndarray
    margin: float
    smoothness: float
    empty: bool

    @property
    def dim(self):
        return len(self.axes)

    @property
    def spacing(self):
        return np.array([a[1] - a[0] for a in self.axes])

    def points(self):
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def in_wedge(self, pts=None, margin=0.0):
        pts = self.points() if pts is None else pts
        return pts[..., 1] >= np.abs(pts[..., 0]) + margin


def make_wedge_bump(box, margin, smoothness, resolution=64):
    """Mollified indicator of the shifted wedge intersected with a box.

    Parameters
    ----------
    box : sequence of (lo, hi)
        One interval per spacetime axis (``d >= 2``).
    margin : float
        Distance of the support from the wedge edge, ``x^1 >= |x^0| + margin``.
    smoothness : float
        Width of the smooth transition. Must span at least eight grid cells.
    resolution : int
        Grid points per axis.
    """
    box = [tuple(map(float, b)) for b in box]
    if len(box) < 2:
        raise InputError("wedge bumps need at least two spacetime dimensions")
    if any(not (hi > lo) for lo, hi in box):
        raise InputError("box intervals must have hi > lo")
    if not margin > 0 or not smoothness > 0:
        raise InputError("margin and smoothness must be positive")
    axes = tuple(np.linspace(lo, hi, resolution) for lo, hi in box)
    dx = min(a[1] - a[0] for a in axes)
    if smoothness < 8 * dx:
        raise InputError(f"grid spacing {dx:.3g} too coarse for smoothness {smoothness:.3g}")
    mesh = np.meshgrid(*axes, indexing="ij")
    x0, x1 = mesh[0], mesh[1]
    vals = smooth_step((x1 - x0 - margin) / smoothness) * smooth_step((x1 + x0 - margin) / smoothness)
    for (lo, hi), xi in zip(box, mesh):
        vals = vals * smooth_step((xi - lo) / smoothness) * smooth_step((hi - xi) / smoothness)
    return WedgeBump(axes, vals, float(margin), float(smoothness), bool(not np.any(vals)))


def bump_fourier(b: WedgeBump, k, chunk=2048):
    """Riemann-sum Fourier transform of a sampled bump at momenta ``k``."""
    k = _as_points(k, b.dim)
    pts = b.points().reshape(-1, b.dim)
    vals = b.values.ravel()
    keep = vals != 0
    pts, vals = pts[keep], vals[keep]
    cell = np.prod(b.spacing)
    flat = k.reshape(-1, b.dim) * _eta(b.dim)
    out = np.empty(flat.shape[0], dtype=complex)
    for s in range(0, flat.shape[0], chunk):
        out[s:s + chunk] = np.exp(-1j * flat[s:s + chunk] @ pts.T) @ vals
    return (cell * out).reshape(k.shape[:-1])


def bump_dft(b: WedgeBump):
    """Unitary discrete Fourier transform of the samples."""
    return np.fft.fftn(b.values, norm="ortho")
