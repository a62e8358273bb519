"""Canonical (time-zero) quadratic generators and their Bogoliubov coefficients.

For the time-zero generator
``A = (1/2) int [k_phi pi^2 + k0 (phi pi + pi phi) + k_pi phi^2] d^D x``
with profile functions ``k0, k_phi, k_pi`` the transformed fields are

``phi_S = kc_- phi - ks_pi pi``,   ``pi_S = ks_phi phi + kc_+ pi``

with ``kc_+- = C(u) +- k0 S(u)``, ``ks_phi = k_phi S(u)``, ``ks_pi = k_pi S(u)``,
``u = kbar^2 = k0^2 - k_phi k_pi`` and the entire functions
``C(u) = cosh(sqrt u)``, ``S(u) = sinh(sqrt u) / sqrt u``.

The expectation of the local energy-like functional in the transformed
vacuum differs from the vacuum value by ``F1 <pi^2> + F2 <phi^2> + F3 <(grad pi)^2>``
plus finite terms; the vacuum expectations diverge, so the transformed
state is singular unless all three coefficients vanish.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.integrate import quad as quad1d
from scipy.special import gamma

from .errors import AccuracyError, InputError
from .kinematics import ModelParams

_SERIES_TERMS = 24
_C_COEF = np.array([1.0 / factorial(2 * n) for n in range(_SERIES_TERMS)])
_S_COEF = np.array([1.0 / factorial(2 * n + 1) for n in range(_SERIES_TERMS)])
_DS_COEF = np.array([(n + 1) / factorial(2 * n + 3) for n in range(_SERIES_TERMS)])


def _horner(coef, u):
    out = np.zeros_like(u)
    for c in coef[::-1]:
        out = out * u + c
    return out


def cosh_sinh_functions(u):
    """``C(u)``, ``S(u)`` and ``S'(u)`` for real ``u``.

    Power series on ``|u| <= 4``; larger arguments are reduced by
    ``u -> u / 4`` and rebuilt with ``C(4u) = 2 C(u)^2 - 1`` and
    ``S(4u) = S(u) C(u)``, valid for either sign of ``u``.
    """
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise InputError("non-finite argument")
    steps = np.zeros(u.shape, dtype=int)
    big = np.abs(u) > 4.0
    if np.any(big):
        steps[big] = np.ceil(np.log(np.abs(u[big]) / 4.0) / np.log(4.0)).astype(int)
    red = u / 4.0**steps
    C = _horner(_C_COEF, red)
    S = _horner(_S_COEF, red)
    for j in range(int(steps.max(initial=0))):
        act = steps > j
        S = np.where(act, S * C, S)
        C = np.where(act, 2.0 * C * C - 1.0, C)
    with np.errstate(divide="ignore", invalid="ignore"):
        dS = np.where(np.abs(u) <= 4.0, _horner(_DS_COEF, u), (C - S) / (2.0 * u))
    return C, S, dS


def squeeze_coeffs(k0, kphi, kpi):
    """``(kc_plus, kc_minus, ks_phi, ks_pi)`` for pointwise profile values."""
    k0, kphi, kpi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (k0, kphi, kpi)))
    C, S, _ = cosh_sinh_functions(k0 * k0 - kphi * kpi)
    return C + k0 * S, C - k0 * S, kphi * S, kpi * S


def iterated_commutator_coeffs(k0, kphi, kpi, n: int):
    """Coefficients of the ``n``-fold commutators with ``A``.

    ``[A, phi]_n = f_n phi + g_n pi`` and ``[A, pi]_n = h_n phi + l_n pi``.
    With ``P = [[-k0, k_phi], [-k_pi, k0]]`` (``P^2 = kbar^2``) one has
    ``(f_n, g_n) = (iP)^n (1, 0)`` and ``(h_n, l_n) = (iP)^n (0, 1)``,
    evaluated through powers of ``kbar^2`` only.
    """
    if n < 0 or int(n) != n:
        raise InputError("n must be a non-negative integer")
    k0, kphi, kpi = (np.asarray(a, dtype=float) for a in (k0, kphi, kpi))
    u = k0 * k0 - kphi * kpi
    phase = 1j**n
    if n % 2 == 0:
        r = u ** (n // 2)
        z = np.zeros_like(r)
        return phase * r, phase * z, phase * z, phase * r
    r = u ** ((n - 1) // 2)
    return phase * r * (-k0), phase * r * (-kpi), phase * r * kphi, phase * r * k0


@dataclass(frozen=True)
class CanonicalProfile:
    """Spatial profile functions ``k0, k_phi, k_pi`` on R^D (None means zero)."""

    k0: object = None
    kphi: object = None
    kpi: object = None

    def values(self, x):
        """Values and gradients of the three profiles at points ``x`` of shape ``(n, D)``."""
        x = np.asarray(x, dtype=float)
        out = []
        for fn in (self.k0, self.kphi, self.kpi):
            if fn is None:
                out.append((np.zeros(x.shape[:-1]), np.zeros(x.shape)))
            else:
                if fn.dim != x.shape[-1]:
                    raise InputError("profile dimension does not match the points")
                out.append((fn.evaluate(x), fn.gradient(x)))
        return out


def entropy_coefficients(profile: CanonicalProfile, x, model: ModelParams):
    """Coefficients ``(F1, F2, F3)`` of the divergent vacuum expectations at ``x``.

    ``F1 = kc_+^2 + kc_-^2 - 2 + m^2 ks_pi^2 + |grad ks_pi|^2`` multiplies ``<pi^2>``,
    ``F2 = ks_phi^2 + |grad kc_-|^2`` multiplies ``<phi^2>`` and
    ``F3 = ks_pi^2`` multiplies ``<(grad pi)^2>``.
    Gradients use the exact chain rule through ``C`` and ``S``.

    ``F2`` and ``F3`` are sums of squares. ``F1`` is not: by the unit
    determinant ``kc_+^2 + kc_-^2 - 2 = (kc_+ - kc_-)^2 - 2 ks_phi ks_pi``,
    so it turns negative where ``ks_phi ks_pi`` dominates.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.spatial_dim:
        raise InputError(f"points must have trailing dimension {model.spatial_dim}")
    (a, da), (b, db), (c, dc) = profile.values(x)
    u = a * a - b * c
    du = 2 * a[..., None] * da - b[..., None] * dc - c[..., None] * db
    C, S, dS = cosh_sinh_functions(u)
    dC = 0.5 * S
    kcp, kcm = C + a * S, C - a * S
    ksphi, kspi = b * S, c * S
    grad_kcm = (dC - a * dS)[..., None] * du - S[..., None] * da
    grad_kspi = S[..., None] * dc + (c * dS)[..., None] * du
    F1 = kcp**2 + kcm**2 - 2 + model.mass**2 * kspi**2 + np.sum(grad_kspi**2, axis=-1)
    F2 = ksphi**2 + np.sum(grad_kcm**2, axis=-1)
    F3 = kspi**2
    return F1, F2, F3


@dataclass(frozen=True)
class CanonicalVerdict:
    """Outcome of :func:`divergence_verdict`."""

    verdict: str
    max_abs_F: tuple
    witness: tuple
    branch: int

    def to_dict(self):
        return {"verdict": self.verdict, "max_abs_F": list(self.max_abs_F),
                "witness": list(self.witness), "branch": self.branch}


def divergence_verdict(profile: CanonicalProfile, scan_grid, model: ModelParams, tol=1e-10):
    """``"trivial"`` when ``|F1| + |F2| + |F3| < tol`` on the whole grid, else ``"divergent"``.

    A trivial verdict also requires ``kc_+ = kc_- = +-1`` and vanishing
    ``ks`` on the grid; ``branch`` records the sign.
    """
    pts = np.asarray(scan_grid, dtype=float).reshape(-1, model.spatial_dim)
    F = entropy_coefficients(profile, pts, model)
    absF = [np.abs(v) for v in F]
    total = absF[0] + absF[1] + absF[2]
    i = int(np.argmax(total))
    maxes = tuple(float(v.max()) for v in absF)
    if total[i] >= tol:
        return CanonicalVerdict("divergent", maxes, tuple(pts[i].tolist()), 0)
    (a, _), (b, _), (c, _) = profile.values(pts)
    kcp, kcm, ksphi, kspi = squeeze_coeffs(a, b, c)
    branch = int(np.sign(np.mean(kcp)))
    scale = max(1.0, float(np.sqrt(tol)))
    ok = (np.allclose(kcp, branch, atol=scale * 1e-5) and np.allclose(kcm, branch, atol=scale * 1e-5)
          and np.allclose(ksphi, 0, atol=1e-5) and np.allclose(kspi, 0, atol=1e-5))
    if not ok:
        raise AccuracyError("vanishing coefficients without a trivial Bogoliubov map")
    return CanonicalVerdict("trivial", maxes, tuple(pts[i].tolist()), branch)


_VEV_KERNELS = {
    "phi2": lambda r, w: 1.0 / (2.0 * w),
    "pi2": lambda r, w: w / 2.0,
    "grad_pi2": lambda r, w: r * r * w / 2.0,
    "grad_phi2": lambda r, w: r * r / (2.0 * w),
}


def cutoff_vev(which: str, cutoff: float, model: ModelParams):
    """Vacuum expectation with a sharp momentum cutoff ``|p| <= cutoff``.

    ``which`` is one of ``phi2`` (``int 1/(2 omega)``), ``pi2``
    (``int omega/2``), ``grad_pi2`` (``int |p|^2 omega/2``) or ``grad_phi2``
    (``int |p|^2/(2 omega)``), all against ``d^D p / (2 pi)^D``.
    """
    if which not in _VEV_KERNELS:
        raise InputError(f"unknown expectation {which!r}")
    D, m = model.spatial_dim, model.mass
    if not cutoff > m:
        raise InputError("cutoff must exceed the mass")
    kern = _VEV_KERNELS[which]
    area = 2 * np.pi ** (D / 2) / gamma(D / 2)
    val, _ = quad1d(lambda r: r ** (D - 1) * kern(r, np.sqrt(m * m + r * r)), 0.0, cutoff,
                    epsabs=0.0, epsrel=1e-12, limit=200)
    return area * val / (2 * np.pi) ** D
