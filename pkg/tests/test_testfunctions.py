import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from locsqueeze import InputError, SchwartzElement, SchwartzSum, load_test_function, make_wedge_bump
from locsqueeze.testfunctions import (antisymmetric_energy, bump_dft, bump_fourier, even_part, odd_part,
                                      smooth_step)

elements = st.builds(
    SchwartzElement,
    amplitude=st.floats(-2, 2),
    center=st.lists(st.floats(-1, 1), min_size=2, max_size=2),
    sigma=st.floats(0.3, 2.0),
    kappa=st.lists(st.floats(-2, 2), min_size=2, max_size=2),
    phase=st.sampled_from(["cos", "sin"]),
)

K_GRID = np.stack(np.meshgrid(np.linspace(-4, 4, 9), np.linspace(-3, 3, 7), indexing="ij"), -1).reshape(-1, 2)


# ------------------------------------------------------------ evaluation
def test_gaussian_peak_and_zero_amplitude():
    e = SchwartzElement(1.7, [0.3, -0.2], [[1.0, 0.2], [0.2, 0.5]])
    assert e.evaluate(np.array([0.3, -0.2])) == pytest.approx(1.7)
    z = SchwartzElement(0.0, [0.0, 0.0], 1.0, [1.0, 1.0], "sin")
    assert np.all(z.evaluate(K_GRID) == 0)


def test_sin_modulation_vanishes_at_origin():
    e = SchwartzElement(1.0, [0.0, 0.0], 1.0, [1.3, -0.4], "sin")
    assert e.evaluate(np.zeros(2)) == 0.0


@pytest.mark.parametrize("bad", [dict(sigma=[[1.0, 0.0], [0.0, -1.0]]), dict(sigma=[[1.0, 0.5], [0.0, 1.0]]),
                                 dict(kappa=[1.0]), dict(phase="tan"), dict(center=[np.nan, 0.0])])
def test_invalid_elements_rejected(bad):
    args = dict(amplitude=1.0, center=[0.0, 0.0], sigma=1.0, kappa=None, phase="cos") | bad
    with pytest.raises(InputError):
        SchwartzElement(**args)


def test_gradient_and_hessian_match_finite_differences():
    e = SchwartzElement(0.8, [0.2, -0.1], [[1.0, 0.3], [0.3, 0.7]], [0.9, -1.2], "sin")
    x = np.random.default_rng(0).normal(size=(6, 2))
    assert np.allclose(e.gradient(x), oracles.central_gradient(e.evaluate, x), atol=1e-8)
    for i in range(2):
        num = oracles.central_gradient(lambda y: e.gradient(y)[:, i], x)
        assert np.allclose(e.hessian(x)[:, i, :], num, atol=1e-7)


# ---------------------------------------------------------- Fourier side
def test_unit_gaussian_transform_d1():
    e = SchwartzElement(1.0, [0.0], 1.0)
    k = np.linspace(-5, 5, 41)
    assert np.allclose(e.fourier(k), math.sqrt(math.pi) * np.exp(-k * k / 4), atol=1e-15)


def test_transform_against_direct_quadrature():
    e = SchwartzElement(0.9, [0.3, -0.2], [[1.2, 0.3], [0.3, 0.8]], [0.7, 0.4], "sin")
    for k in ([0.5, -1.0], [2.0, 0.7]):
        assert abs(e.fourier(np.array(k)) - oracles.fourier_by_quadrature(e, k)) < 1e-8


def test_shift_theorem():
    a = SchwartzElement(1.0, [0.0, 0.0], [[1.0, 0.2], [0.2, 0.6]])
    x0 = np.array([0.4, -0.7])
    b = SchwartzElement(1.0, x0, [[1.0, 0.2], [0.2, 0.6]])
    eta = np.array([-1.0, 1.0])
    assert np.allclose(b.fourier(K_GRID), np.exp(-1j * (K_GRID * eta) @ x0) * a.fourier(K_GRID), atol=1e-14)


@given(elements)
def test_conjugate_symmetry(e):
    assert np.allclose(e.fourier(-K_GRID), np.conj(e.fourier(K_GRID)), atol=1e-13)


@given(elements)
def test_fourier_jet_consistent(e):
    k = K_GRID[::5]
    val, grad, _ = e.fourier_jet(k)
    assert np.allclose(val, e.fourier(k), atol=1e-14)
    num = oracles.central_gradient(lambda q: e.fourier(q).real, k, 1e-6)
    assert np.allclose(grad.real, num, atol=1e-6)


def test_even_element_has_real_transform():
    e = SchwartzElement(1.0, [0.0, 0.0], [[1.0, 0.4], [0.4, 2.0]], [0.3, 1.1], "cos")
    assert e.is_even()
    assert np.max(np.abs(e.fourier(K_GRID).imag)) == 0.0


def test_even_odd_split():
    e = SchwartzElement(1.0, [0.4, -0.3], 1.0, [0.5, 0.2], "cos")
    x = np.random.default_rng(1).normal(size=(10, 2))
    ev, od = even_part(e), odd_part(e)
    assert np.allclose(ev.evaluate(x) + od.evaluate(x), e.evaluate(x))
    assert np.allclose(ev.evaluate(-x), ev.evaluate(x))
    assert np.allclose(od.evaluate(-x), -od.evaluate(x))
    assert np.max(np.abs(ev.fourier(K_GRID).imag)) < 1e-14


def test_sum_is_linear():
    a = SchwartzElement(1.0, [0.1, 0.0], 1.0, [0.5, 0.0], "sin")
    b = SchwartzElement(0.5, [0.0, 0.3], 0.7)
    s = a + b
    assert isinstance(s, SchwartzSum)
    assert np.allclose(s.fourier(K_GRID), a.fourier(K_GRID) + b.fourier(K_GRID))


def test_load_round_trip(samples):
    data = json.loads((samples / "odd_h.json").read_text())
    e = load_test_function(data)
    again = load_test_function(e.to_dict())
    assert np.allclose(e.fourier(K_GRID), again.fourier(K_GRID))
    with pytest.raises(InputError):
        load_test_function({"amplitude": 1.0})


# ---------------------------------------------------- antisymmetric energy
def test_antisymmetric_energy_even_is_zero():
    e = SchwartzElement(1.0, [0.0, 0.0], 1.0, [2.0, 1.0], "cos")
    assert antisymmetric_energy(e, 1.0) == 0.0


def test_antisymmetric_energy_temporal_sine_positive_and_linear():
    e = SchwartzElement(1.0, [0.0, 0.0], 0.5, [1.0, 0.0], "sin")
    v = antisymmetric_energy(e, 1.0)
    assert v > 0.1
    assert antisymmetric_energy(e.scaled(2.0), 1.0) == pytest.approx(2 * v, rel=1e-14)


@given(elements)
def test_antisymmetric_energy_detects_oddness(e):
    v = antisymmetric_energy(e, 2.0)
    if e.is_even():
        assert v == 0.0
    assert antisymmetric_energy(even_part(e), 2.0) < 1e-12 * (1 + e.fourier_bound())


# ------------------------------------------------------------ wedge bumps
def test_smooth_step_limits():
    t = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    assert np.allclose(smooth_step(t), [0, 0, 0.5, 1, 1])


def test_wedge_bump_support():
    b = make_wedge_bump([(-2, 2), (-1, 5)], 0.5, 0.6, resolution=96)
    assert not b.empty
    pts = b.points()
    outside = pts[..., 1] < np.abs(pts[..., 0]) + 0.5
    assert np.all(b.values[outside] == 0)
    assert np.all(b.values[~b.in_wedge()] == 0)


def test_wedge_bump_empty_when_margin_too_large():
    b = make_wedge_bump([(-1, 1), (0, 2)], 5.0, 0.3, resolution=96)
    assert b.empty and not np.any(b.values)


@pytest.mark.parametrize("kw", [dict(margin=0.0), dict(margin=-1.0), dict(smoothness=0.05),
                                dict(box=[(0, 1)])])
def test_wedge_bump_preconditions(kw):
    args = dict(box=[(-1, 1), (0, 3)], margin=0.2, smoothness=0.5, resolution=64) | kw
    with pytest.raises(InputError):
        make_wedge_bump(**args)


def test_bump_dft_parseval():
    b = make_wedge_bump([(-2, 2), (-1, 5)], 0.3, 0.6, resolution=80)
    assert abs(np.linalg.norm(b.values) - np.linalg.norm(bump_dft(b))) < 1e-8


def test_bump_fourier_conjugate_symmetry_and_mass():
    b = make_wedge_bump([(-2, 2), (-1, 5)], 0.3, 0.6, resolution=80)
    k = np.array([[0.3, -0.5], [1.0, 2.0]])
    assert np.allclose(bump_fourier(b, -k), np.conj(bump_fourier(b, k)))
    total = b.values.sum() * np.prod(b.spacing)
    assert abs(bump_fourier(b, np.zeros(2)) - total) < 1e-12
