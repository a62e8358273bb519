import math

import numpy as np
import pytest

import oracles
from locsqueeze import MassShellSample, ModelParams, QuadratureSpec, SchwartzElement, make_wedge_bump
from locsqueeze.errors import ConfigurationError, InputError
from locsqueeze.kinematics import lp_norm, pauli_jordan, two_point
from locsqueeze.squeezing import (MAX_SERIES_ORDER, SqueezeOperator, apply_T_h, apply_t_h, bound_c,
                                  commutator_smear, pauli_jordan_kernel, series_order, symplectic_residual,
                                  tail_bound, transformed_two_point, wedge_locality)

Q = QuadratureSpec()
M1 = ModelParams(1.0, 1)
H = SchwartzElement(0.3, [0.1, -0.2], 1.0, [0.3, 0.5], "sin")
F_EL = SchwartzElement(1.0, [0.2, 0.0], 1.5, [0.0, 0.7], "cos")
G_EL = SchwartzElement(0.8, [-0.3, 0.4], 1.2, [0.4, -0.2], "sin")
P_EVAL = np.linspace(-3, 3, 7)


def shell(e):
    return MassShellSample.from_element(e, M1)


def diff_norm(a, b):
    return lp_norm(a - b, 2, Q, M1)


@pytest.fixture(scope="module")
def op():
    return SqueezeOperator(H, M1)


# ------------------------------------------------------------------ t_h
def test_zero_h_gives_zero(op):
    z = SchwartzElement(0.0, [0.0, 0.0], 1.0)
    tf = apply_t_h(z, shell(F_EL), Q, M1)
    assert np.all(tf.evaluate(P_EVAL)[0] == 0)
    Tf = apply_T_h(z, shell(F_EL), 1e-10, Q, M1)
    assert np.allclose(Tf.evaluate(P_EVAL)[0], shell(F_EL).evaluate(P_EVAL)[0], atol=0)
    assert bound_c(z, M1) == 0.0


@pytest.mark.parametrize("branch", [1, -1])
def test_t_h_against_scalar_quadrature(op, branch):
    f = shell(F_EL)
    tf = op.apply_t(f)
    got = tf.evaluate(P_EVAL)[0 if branch > 0 else 1]
    fp = lambda l: complex(f.plus(np.array([[l]]))[0])  # noqa: E731
    fm = lambda l: complex(f.minus(np.array([[l]]))[0])  # noqa: E731
    ref = [oracles.t_h_direct(H, fp, fm, p, branch) for p in P_EVAL[::2]]
    assert np.allclose(got[::2], ref, atol=1e-12, rtol=1e-9)


def test_t_h_linear(op):
    f, g = shell(F_EL), shell(G_EL)
    lhs = op.apply_t(f + g).evaluate(P_EVAL)
    a, b = op.apply_t(f).evaluate(P_EVAL), op.apply_t(g).evaluate(P_EVAL)
    for i in range(2):
        assert np.allclose(lhs[i], a[i] + b[i], atol=1e-15, rtol=1e-12)


def test_t_h_preserves_reality(op):
    tf = op.apply_t(shell(F_EL))
    plus, _ = tf.evaluate(P_EVAL)
    _, minus = tf.evaluate(-P_EVAL)
    assert np.allclose(minus, np.conj(plus), atol=1e-15)


@pytest.mark.parametrize("seed", range(3))
def test_t_h_skew_symmetric(seed):
    rng = np.random.default_rng(seed)
    h = SchwartzElement(rng.uniform(0.2, 0.5), rng.normal(0, 0.3, 2), rng.uniform(0.6, 1.4),
                        rng.normal(0, 0.6, 2), rng.choice(["cos", "sin"]))
    f = shell(SchwartzElement(1.0, rng.normal(0, 0.5, 2), rng.uniform(0.7, 1.5), rng.normal(0, 0.6, 2), "cos"))
    g = shell(SchwartzElement(1.0, rng.normal(0, 0.5, 2), rng.uniform(0.7, 1.5), rng.normal(0, 0.6, 2), "sin"))
    o = SqueezeOperator(h, M1)
    a = pauli_jordan(o.apply_t(f), g, Q, M1)
    b = pauli_jordan(f, o.apply_t(g), Q, M1)
    assert abs(a + b) <= 1e-6 * (abs(a) + 1)


# ------------------------------------------------------------- norm bounds
def test_c_h_dense_oracle():
    h = SchwartzElement(1.0, [0.0, 0.0], 1.0)
    c = bound_c(h, M1)
    assert abs(c - oracles.c_h_dense(h)) <= 1e-3 * c


def test_c_h_homogeneous():
    assert bound_c(H.scaled(3.0), M1) == pytest.approx(3 * bound_c(H, M1), rel=1e-6)


@pytest.mark.parametrize("p", [1, 2, np.inf])
def test_norm_bound(op, p):
    f = shell(F_EL)
    assert lp_norm(op.apply_t(f), p, Q, M1) <= op.c_h * lp_norm(f, p, Q, M1) + 1e-9


def test_riesz_thorin_structure(op):
    b1, b2, binf = op.operator_norms()
    assert b2 <= math.sqrt(b1 * binf) * (1 + 1e-12)
    assert max(b1, b2, binf) <= op.c_h


def test_T_norm_bound(op):
    f = shell(F_EL)
    assert lp_norm(op.apply_T(f), 2, Q, M1) <= math.exp(op.c_h) * lp_norm(f, 2, Q, M1) + 1e-10


# ------------------------------------------------------------ the series T_h
def test_series_order_and_cap():
    n = series_order(0.9, 1.0, 1e-10)
    assert tail_bound(0.9, 1.0, n) < 1e-10 <= tail_bound(0.9, 1.0, n - 1)
    with pytest.raises(ConfigurationError):
        series_order(40.0, 1.0, 1e-12)
    with pytest.raises(InputError):
        SqueezeOperator(H, M1).plan(shell(F_EL), order=MAX_SERIES_ORDER + 1)


def test_first_order_consistency():
    s = 0.01
    hs = H.scaled(s)
    o = SqueezeOperator(hs, M1)
    f = shell(F_EL)
    resid = diff_norm(o.apply_T(f, 1e-14), f + o.apply_t(f))
    c = o.c_h
    assert resid <= math.exp(c) * c * c / 2 * lp_norm(f, 2, Q, M1)


def test_group_property():
    s = 0.2
    o1, o2 = SqueezeOperator(H.scaled(s), M1), SqueezeOperator(H.scaled(2 * s), M1)
    f = shell(F_EL)
    twice = o1.apply_T(o1.apply_T(f, 1e-13), 1e-13)
    once = o2.apply_T(f, 1e-13)
    a, b = twice.evaluate(P_EVAL), once.evaluate(P_EVAL)
    assert np.allclose(a[0], b[0], atol=1e-11) and np.allclose(a[1], b[1], atol=1e-11)


def test_plan_reports_tail(op):
    app = op.plan(shell(F_EL), eps=1e-8)
    assert app.tail_bound < 1e-8 and app.h is H


# ---------------------------------------------------------- symplecticity
def test_symplectic_residual_small():
    res, d = symplectic_residual(H, shell(F_EL), shell(G_EL), 1e-10, Q, M1)
    assert res <= 1e-5 * (1 + abs(d))


def test_zero_h_symplectic_residual():
    z = SchwartzElement(0.0, [0.0, 0.0], 1.0)
    res, _ = symplectic_residual(z, shell(F_EL), shell(G_EL), 1e-10, Q, M1)
    assert res == 0.0


def test_first_order_truncation_is_not_symplectic():
    f, g = shell(F_EL), shell(G_EL)
    full, d = symplectic_residual(H, f, g, 1e-12, Q, M1)
    first = []
    for s in (1.0, 0.5):
        o = SqueezeOperator(H.scaled(s), M1)
        first.append(abs(pauli_jordan(f + o.apply_t(f), g + o.apply_t(g), Q, M1) - d))
    assert full < 1e-3 * first[0]
    # the first-order defect is Delta(t f, t g), quadratic in h
    assert first[0] / first[1] == pytest.approx(4.0, rel=1e-6)


# -------------------------------------------------------- transformed state
def test_transformed_two_point():
    f, g = shell(F_EL), shell(G_EL)
    z = SchwartzElement(0.0, [0.0, 0.0], 1.0)
    assert transformed_two_point(z, f, g, 1e-10, Q, M1) == pytest.approx(two_point(f, g, Q, M1), abs=1e-15)
    wff = transformed_two_point(H, f, f, 1e-10, Q, M1).real
    wgg = transformed_two_point(H, g, g, 1e-10, Q, M1).real
    assert wff * wgg >= 0.25 * pauli_jordan(f, g, Q, M1) ** 2 - 1e-12
    c = bound_c(H, M1)
    assert wff <= math.exp(2 * c) * two_point(f, f, Q, M1).real + 1e-10


# ------------------------------------------------------- position space
def test_pauli_jordan_kernel_support_and_sign():
    assert pauli_jordan_kernel(0.5, 1.0, 1.0) == 0.0
    assert pauli_jordan_kernel(1.0, 0.0, 1.0) == pytest.approx(-0.5 * 0.7651976865579666)
    assert pauli_jordan_kernel(-1.0, 0.0, 1.0) == pytest.approx(0.5 * 0.7651976865579666)


def test_position_pairing_converges_to_momentum_form():
    f_el = SchwartzElement(1.0, [0.0, 0.0], 2.0)
    g_el = SchwartzElement(1.0, [1.0, 0.2], 2.0)
    ref = pauli_jordan(shell(f_el), shell(g_el), Q, M1)
    errs = []
    for n in (31, 61):
        axes = (np.linspace(-2.5, 2.5, n), np.linspace(-2.5, 2.5, n))
        gv = g_el.evaluate(np.stack(np.meshgrid(*axes, indexing="ij"), -1))
        fx = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
        conv = commutator_smear(gv, axes, fx, 1.0)
        cell = (axes[0][1] - axes[0][0]) ** 2
        errs.append(abs(cell * np.sum(f_el.evaluate(fx) * conv) - ref))
    assert errs[1] < errs[0] and errs[1] < 0.05 * abs(ref)


def test_wedge_locality():
    from locsqueeze.testfunctions import WedgeBump

    h = make_wedge_bump([(-1.5, 1.5), (0.0, 3.0)], 0.3, 0.5, resolution=64)
    f = make_wedge_bump([(-1.5, 1.5), (0.0, 3.0)], 0.4, 0.5, resolution=64)
    rep = wedge_locality(h, f, M1)
    assert rep.local and rep.peak > 0
    # the mirror image of f sits in the left wedge, spacelike to all of supp h
    mirrored = WedgeBump((f.axes[0], -f.axes[1][::-1]), f.values[:, ::-1], f.margin, f.smoothness, f.empty)
    assert wedge_locality(h, mirrored, M1).peak == 0.0
    with pytest.raises(InputError):
        wedge_locality(h, f, ModelParams(1.0, 2))
