"""Mass-shell kinematics of the free scalar field.

Conventions
-----------
``omega_p = sqrt(m^2 + |p|^2)`` and the invariant measure is
``dmu(p) = d^D p / (2 omega_p (2 pi)^D)``. A one-particle test function is
represented by its Fourier transform restricted to the two sheets of the
mass shell, ``f+(p) = f~(omega_p, p)`` and ``f-(p) = f~(-omega_p, p)``.

The two-point function is ``w2(f, g) = int dmu f~(-omega_p, -p) g~(omega_p, p)``
and the Pauli-Jordan form is ``Delta(f, g) = -i [w2(f, g) - w2(g, f)]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import gamma

from .errors import ConfigurationError, InputError
from .quadrature import QuadratureSpec, integrate_whole_space


@dataclass(frozen=True)
class ModelParams:
    """Mass and spatial dimension of the free field.

    Parameters
    ----------
    mass : float
        Strictly positive mass ``m``.
    spatial_dim : int
        Number of spatial dimensions ``D >= 1``.
    """

    mass: float = 1.0
    spatial_dim: int = 1

    def __post_init__(self):
        if not np.isfinite(self.mass) or self.mass <= 0:
            raise ConfigurationError(f"massive field required (mass > 0), got {self.mass}")
        if int(self.spatial_dim) != self.spatial_dim or self.spatial_dim < 1:
            raise ConfigurationError(f"spatial_dim must be a positive integer, got {self.spatial_dim}")

    @property
    def d(self) -> int:
        """Spacetime dimension ``D + 1``."""
        return self.spatial_dim + 1


def as_momenta(p, dim):
    """Coerce to an array of spatial momenta with trailing axis ``dim``.

    For ``dim == 1`` a bare scalar or a 1-D array of momenta is accepted.
    """
    p = np.asarray(p, dtype=float)
    if dim == 1 and (p.ndim == 0 or p.shape[-1] != 1):
        p = p[..., None]
    if p.shape[-1] != dim:
        raise InputError(f"momenta must have trailing dimension {dim}, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise InputError("momenta must be finite")
    return p


def omega(p, model: ModelParams):
    """Relativistic energy ``sqrt(m^2 + |p|^2)`` for momenta ``p``."""
    p = as_momenta(p, model.spatial_dim)
    return np.sqrt(model.mass**2 + np.einsum("...i,...i->...", p, p))


def on_shell(p, model, sign=1):
    """Four-momenta ``(sign * omega_p, p)``."""
    p = as_momenta(p, model.spatial_dim)
    w = omega(p, model)
    return np.concatenate([(sign * w)[..., None], p], axis=-1)


def measure_density(p, model):
    """Density of ``dmu`` with respect to ``d^D p``."""
    return 1.0 / (2.0 * omega(p, model) * (2 * np.pi) ** model.spatial_dim)


@dataclass(frozen=True, eq=False)
class MassShellSample:
    """Fourier data of a test function on both mass-shell sheets.

    Attributes
    ----------
    plus, minus : callable
        Vectorised maps from momenta ``(n, D)`` to complex values ``(n,)``
        giving ``f~(omega_p, p)`` and ``f~(-omega_p, p)``.
    real_in_position : bool
        Whether the underlying function is real, which forces
        ``f-(p) = conj(f+(-p))``.
    dim : int
        Spatial dimension ``D``.
    """

    plus: Callable
    minus: Callable
    real_in_position: bool
    dim: int

    @classmethod
    def from_element(cls, e, model: ModelParams):
        """Restrict a spacetime test function (anything with ``.fourier``) to the shell."""
        if e.dim != model.d:
            raise InputError(f"test function lives in d={e.dim}, model has d={model.d}")
        return cls(lambda p: e.fourier(on_shell(p, model, +1)),
                   lambda p: e.fourier(on_shell(p, model, -1)),
                   True, model.spatial_dim)

    @classmethod
    def from_plus(cls, plus, dim):
        """Real test function determined by its positive-energy data."""
        return cls(plus, lambda p: np.conj(plus(-np.asarray(p))), True, dim)

    @classmethod
    def zero(cls, dim):
        z = lambda p: np.zeros(np.asarray(p).shape[0], dtype=complex)
        return cls(z, z, True, dim)

    def evaluate(self, p):
        p = as_momenta(p, self.dim)
        flat = p.reshape(-1, self.dim)
        return (np.asarray(self.plus(flat), dtype=complex).reshape(p.shape[:-1]),
                np.asarray(self.minus(flat), dtype=complex).reshape(p.shape[:-1]))

    def __add__(self, other):
        if other.dim != self.dim:
            raise InputError("dimension mismatch")
        return MassShellSample(lambda p: self.plus(p) + other.plus(p),
                               lambda p: self.minus(p) + other.minus(p),
                               self.real_in_position and other.real_in_position, self.dim)

    def __mul__(self, c):
        real = self.real_in_position and np.isreal(c)
        return MassShellSample(lambda p: c * self.plus(p), lambda p: c * self.minus(p), bool(real), self.dim)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)


def _plus_density(f: MassShellSample, model, power):
    def integrand(p):
        return np.abs(f.plus(p)) ** power * measure_density(p, model)
    return integrand


def sup_norm(func, dim, cutoff, *, points=2001):
    """``sup |func|`` over ``[-cutoff, cutoff]^D``: grid scan plus local refinement.

    Returns
    -------
    value : float
        Best value found (a lower bound on the true supremum).
    residual : float
        Improvement of the refinement over the raw grid maximum.
    """
    n = points if dim == 1 else max(41, int(round(points ** (1.0 / dim))) * (3 - min(dim, 2)))
    axis = np.linspace(-cutoff, cutoff, n)
    grid = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    vals = np.abs(func(grid))
    i = int(np.argmax(vals))
    best = float(vals[i])
    step = axis[1] - axis[0]
    x0 = grid[i]
    if dim == 1:
        res = minimize_scalar(lambda t: -abs(func(np.array([[t]]))[0]),
                              bounds=(x0[0] - step, x0[0] + step), method="bounded",
                              options={"xatol": 1e-12})
        refined = -res.fun
    else:
        res = minimize(lambda t: -abs(func(t[None, :])[0]), x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14})
        refined = -res.fun
    return max(best, refined), max(0.0, refined - best)


def lp_norm(f: MassShellSample, p, quad: QuadratureSpec, model: ModelParams):
    """``L^p(dmu)`` norm of the positive-energy data.

    For ``p = inf`` the plain supremum ``sup_k |f~(omega_k, k)|`` is returned.

    Parameters
    ----------
    f : MassShellSample
    p : float
        ``1 <= p <= inf``.
    quad : QuadratureSpec
    model : ModelParams
    """
    if not (p == np.inf or (np.isfinite(p) and p >= 1)):
        raise InputError(f"p must be >= 1 or inf, got {p}")
    if f.dim != model.spatial_dim:
        raise InputError("dimension mismatch between sample and model")
    if p == np.inf:
        return sup_norm(f.plus, model.spatial_dim, quad.cutoff)[0]
    val, _ = integrate_whole_space(_plus_density(f, model, p), model.spatial_dim, quad)
    return float(np.real(val)) ** (1.0 / p)


def two_point(f: MassShellSample, g: MassShellSample, quad: QuadratureSpec, model: ModelParams):
    """Vacuum two-point function ``w2(f, g)``."""
    def integrand(p):
        return f.minus(-p) * g.plus(p) * measure_density(p, model)
    val, _ = integrate_whole_space(integrand, model.spatial_dim, quad)
    return complex(val)


def pauli_jordan(f: MassShellSample, g: MassShellSample, quad: QuadratureSpec, model: ModelParams):
    """Symplectic form ``Delta(f, g) = -i [w2(f, g) - w2(g, f)] = 2 Im w2(f, g)``.

    Both arguments must be real in position space.
    """
    if not (f.real_in_position and g.real_in_position):
        raise InputError("the commutator pairing needs real test functions")

    # real data satisfy f-(-p) = conj f+(p), so only the plus sheet is needed
    def integrand(p):
        return np.imag(np.conj(f.plus(p)) * g.plus(p)) * measure_density(p, model)
    val, _ = integrate_whole_space(integrand, model.spatial_dim, quad)
    return float(2.0 * np.real(val))


def shell_mass(f: MassShellSample, quad: QuadratureSpec, model: ModelParams):
    """``int dmu (|f+|^2 + |f-|^2)``; zero exactly when ``f`` lies in the kernel of Delta."""
    def integrand(p):
        return (np.abs(f.plus(p)) ** 2 + np.abs(f.minus(p)) ** 2) * measure_density(p, model)
    val, _ = integrate_whole_space(integrand, model.spatial_dim, quad)
    return float(np.real(val))


def measure_normalization(model: ModelParams, quad: QuadratureSpec | None = None):
    """``int 2m / omega_p^(D+1) d^D p / (2 pi)^D``, numerically.

    The closed form is ``1 / (2^(D-1) pi^((D-1)/2) Gamma((D+1)/2))``,
    available as :func:`measure_normalization_exact`.
    """
    quad = quad or QuadratureSpec(cutoff=32.0 * model.mass, rel_tol=1e-11, abs_tol=1e-13)
    D, m = model.spatial_dim, model.mass
    from scipy.integrate import quad as quad1d
    # radial reduction: surface area of S^(D-1) times int_0^inf r^(D-1) f(r) dr
    area = 2 * np.pi ** (D / 2) / gamma(D / 2)
    val, err = quad1d(lambda r: r ** (D - 1) * 2 * m / (m * m + r * r) ** ((D + 1) / 2), 0, np.inf,
                      epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=400)
    return area * val / (2 * np.pi) ** D


def measure_normalization_exact(model: ModelParams):
    D = model.spatial_dim
    return 1.0 / (2 ** (D - 1) * np.pi ** ((D - 1) / 2) * gamma((D + 1) / 2))
