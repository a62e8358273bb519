import math

import numpy as np
import pytest

from locsqueeze import QuadratureSpec
from locsqueeze.errors import AccuracyError, ConfigurationError
from locsqueeze.quadrature import (composite_gauss_legendre, finite_part_rule, gauss_legendre,
                                   integrate_ball, integrate_box, integrate_whole_space,
                                   log_product_rule)


def test_gauss_legendre_exact_for_polynomials():
    x, w = gauss_legendre(6)
    for k in range(12):
        exact = (1 - (-1) ** (k + 1)) / (k + 1)
        assert abs(np.sum(w * x**k) - exact) < 1e-13


def test_composite_rule_integrates_exp():
    x, w = composite_gauss_legendre(-2.0, 3.0, 5, 8)
    assert abs(np.sum(w * np.exp(x)) - (math.exp(3) - math.exp(-2))) < 1e-12


def test_log_product_rule_moments():
    t, w_plain, w_log = log_product_rule(20)
    # int_0^1 q^k log q dq = -1/(k+1)^2
    for k in range(8):
        assert abs(np.sum(w_log * t**k) + 1.0 / (k + 1) ** 2) < 1e-12
        assert abs(np.sum(w_plain * t**k) - 1.0 / (k + 1)) < 1e-13


def test_finite_part_rule_on_gaussian():
    q, w = finite_part_rule(12.0, 0.5)
    # the rule integrates g'' against -log|q|; for g = exp(-q^2) the result is -2 sqrt(pi)
    g2 = (4 * q * q - 2) * np.exp(-q * q)
    assert abs(np.sum(w * g2) + 2 * math.sqrt(math.pi)) < 1e-8


def test_integrate_box_gaussian():
    val, err = integrate_box(lambda x: np.exp(-np.sum(x * x, axis=1)), [-8, -8], [8, 8],
                             rtol=1e-10, atol=1e-13, max_subdivisions=2000)
    assert abs(val - math.pi) < 1e-8


def test_integrate_whole_space_gaussian():
    val, _ = integrate_whole_space(lambda x: np.exp(-np.sum(x * x, axis=1) / 50.0), 2, QuadratureSpec())
    assert abs(val - 50.0 * math.pi) < 1e-6


def test_integrate_whole_space_rejects_slow_tails():
    # algebraic decay does not settle under cutoff doubling
    with pytest.raises(AccuracyError):
        integrate_whole_space(lambda x: 1.0 / (1.0 + x[:, 0] ** 2) ** 2, 1, QuadratureSpec())


@pytest.mark.parametrize("dim,exact", [(1, 2 * math.erf(3.0) * math.sqrt(math.pi) / 2),
                                       (2, math.pi * (1 - math.exp(-9.0)))])
def test_integrate_ball(dim, exact):
    val, _ = integrate_ball(lambda p: np.exp(-np.sum(p * p, axis=-1)), dim, 3.0,
                            rtol=1e-11, atol=1e-13, max_subdivisions=2000)
    assert abs(val - exact) < 1e-9


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        QuadratureSpec(cutoff=-1.0)
    with pytest.raises(ConfigurationError):
        QuadratureSpec(abs_tol=0.0, rel_tol=0.0)
    assert QuadratureSpec().cutoff > 10 * 1.0
