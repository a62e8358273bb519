"""Quick invariant suite behind ``locsqueeze selftest``.

Each check returns ``(name, passed, value)``; the whole suite runs in a
few seconds and touches every module once.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm


def _measure():
    from .kinematics import ModelParams, measure_normalization

    err = abs(measure_normalization(ModelParams(1.0, 1)) - 1.0)
    return "measure_normalization", err <= 1e-8, err


def _canonical(rng):
    from .canonical import squeeze_coeffs

    k = rng.uniform(-1.5, 1.5, size=(3, 2000))
    kcp, kcm, ksphi, kspi = squeeze_coeffs(*k)
    err = float(np.max(np.abs(kcp * kcm + ksphi * kspi - 1)))
    worst = 0.0
    for a, b, c in k.T[:50]:
        E = expm(np.array([[-a, b], [-c, a]]))
        cp, cm, sphi, spi = squeeze_coeffs(a, b, c)
        worst = max(worst, float(np.max(np.abs(E - np.array([[cm, sphi], [-spi, cp]])))))
    return "canonical_identity", max(err, worst) <= 1e-12, max(err, worst)


def _gamma():
    from .bounds import gamma_factor, odd_product_factor

    ok = all(gamma_factor(k, n) == odd_product_factor(k, n) for k in range(13) for n in range(13))
    return "gamma_factor_identity", ok, 0.0 if ok else 1.0


def _finite_part():
    from .relentropy import pf_integrate

    val = pf_integrate(lambda q: np.exp(-q * q))
    err = abs(val + 2 * math.sqrt(math.pi)) / (2 * math.sqrt(math.pi))
    return "finite_part_gaussian", err <= 1e-6, err


def _series():
    from .series import diagonal_sum, geometric_series

    tol = 1e-10
    err = max(abs(diagonal_sum(geometric_series(x), tol) - v)
              for x, v in (([0.5, 0.5], 4.0), ([1 / 3] * 3, 3.375), ([-1 / 3] * 2, 0.5625)))
    return "diagonal_rearrangement", err <= 2 * tol, err


def _oracle(rng):
    from . import discrete_oracle as do

    m = do.DiscreteModel.lattice(3, 0.7, 6)
    res = max(do.verify_commutator(m, do.random_element(rng, 1), do.random_sample(rng, m))
              for _ in range(3))
    m2 = do.DiscreteModel.lattice(2, 0.7, 8)
    ratio = max(do.verify_fock_bound(m2, do.random_sample(rng, m2), do.random_element(rng, 1)).max_ratio
                for _ in range(3))
    return [("discrete_commutator", res <= 1e-9, res), ("discrete_fock_bound", ratio <= 1.0, ratio)]


def _parity():
    from .kinematics import ModelParams
    from .quadrature import QuadratureSpec
    from .relentropy import srel_first_order
    from .testfunctions import SchwartzElement

    h = SchwartzElement(1.0, [0.0, 0.0], 1.0, [0.5, 1.0], "cos")
    rep = srel_first_order(h, 80.0, QuadratureSpec(), ModelParams(1.0, 1))
    val = abs(rep.term_plus) + abs(rep.term_minus)
    return "even_h_zero_entropy", val <= 1e-7, val


def _symplectic():
    from .kinematics import MassShellSample, ModelParams
    from .quadrature import QuadratureSpec
    from .squeezing import symplectic_residual
    from .testfunctions import SchwartzElement

    model = ModelParams(1.0, 1)
    h = SchwartzElement(0.3, [0.1, -0.2], 1.0, [0.3, 0.5], "sin")
    f = MassShellSample.from_element(SchwartzElement(1.0, [0.2, 0.0], 1.5, [0.0, 0.7], "cos"), model)
    g = MassShellSample.from_element(SchwartzElement(0.8, [-0.3, 0.4], 1.2, [0.4, -0.2], "sin"), model)
    res, d = symplectic_residual(h, f, g, 1e-10, QuadratureSpec(), model)
    return "symplecticity", res <= 1e-5 * (1 + abs(d)), res


def run_selftest(seed=0):
    rng = np.random.default_rng(seed)
    out = [_measure(), _canonical(rng), _gamma(), _finite_part(), _series()]
    out.extend(_oracle(rng))
    out.extend([_parity(), _symplectic()])
    return [(n, bool(ok), float(v)) for n, ok, v in out]
