"""Acceptance criteria, each at its stated tolerance and time budget.

Every test prints one ``PASS`` or ``FAIL`` line and adds it to the summary
printed at the end of the pytest run. Two criteria do not hold as stated;
they run unchanged and are marked as expected failures (strict, so an
unexpected pass is reported).
"""
import json
import math
import re
import time
from fractions import Fraction

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE_LINES, SAMPLES
from locsqueeze import MassShellSample, ModelParams, QuadratureSpec, SchwartzElement, load_test_function
from locsqueeze.bounds import gamma_factor, odd_product_factor
from locsqueeze.canonical import CanonicalProfile, divergence_verdict, entropy_coefficients, squeeze_coeffs
from locsqueeze.discrete_oracle import DiscreteModel, random_element, random_sample, verify_commutator, \
    verify_fock_bound
from locsqueeze.kinematics import lp_norm, measure_normalization
from locsqueeze.relentropy import boundary_term_check, pf_integrate, plus_boundary_pairing, srel_first_order
from locsqueeze.series import diagonal_sum, geometric_series, rectangular_sum
from locsqueeze.squeezing import SqueezeOperator, bound_c, symplectic_residual

M1 = ModelParams(1.0, 1)
Q = QuadratureSpec()


def verdict(key, title, ok, detail, elapsed, budget):
    """Print and record one line; the criterion passes only within its time budget."""
    in_time = budget is None or elapsed <= budget
    timing = f"{elapsed:.2f} s" + ("" if budget is None else f" of {budget:g} s")
    line = f"{'PASS' if ok and in_time else 'FAIL'} criterion {key:<4} {title}: {detail} [{timing}]"
    print(line)
    order = tuple(int(t) if t.isdigit() else t for t in re.findall(r"\d+|\D+", key))
    ACCEPTANCE_LINES.append((order, line))
    return ok and in_time


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def shell(e, model=M1):
    return MassShellSample.from_element(e, model)


# ------------------------------------------------------------------ 1
def test_01_measure_normalization():
    with Clock() as t:
        err = abs(measure_normalization(M1) - 1.0)
    assert verdict("1", "measure normalization", err <= 1e-8, f"|err| = {err:.2e} (tol 1e-8)", t.elapsed, 1)


# ------------------------------------------------------------------ 2
def test_02_canonical_special_case():
    with Clock() as t:
        err = max(np.max(np.abs(np.array(squeeze_coeffs(r, 0.0, 0.0)) - [math.exp(r), math.exp(-r), 0, 0]))
                  for r in (-2.0, -0.5, 0.0, 0.5, 2.0))
    assert verdict("2", "pure k0 coefficients", err <= 1e-12, f"max err {err:.2e} (tol 1e-12)", t.elapsed, 1)


def random_triples(n=10_000, seed=2024):
    rng = np.random.default_rng(seed)
    return rng.uniform(-2.5, 2.5, size=(3, n))


# ------------------------------------------------------------------ 3
def test_03_canonical_identity():
    a, b, c = random_triples()
    with Clock() as t:
        kcp, kcm, ksphi, kspi = squeeze_coeffs(a, b, c)
        err = np.abs(kcp * kcm + ksphi * kspi - 1.0) / np.maximum(1.0, np.abs(kcp * kcm))
    negative = int(np.sum(a * a - b * c < 0))
    ok = float(err.max()) <= 1e-12 and negative > 0
    assert verdict("3", "unit determinant", ok,
                   f"max err {err.max():.2e} (tol 1e-12), {negative} of {a.size} triples with negative kbar^2",
                   t.elapsed, 1)


# ------------------------------------------------------------------ 4
def test_04_matrix_exponential_oracle():
    a, b, c = random_triples()
    with Clock() as t:
        got = np.array(squeeze_coeffs(a, b, c)).T
        ref = np.array([oracles.canonical_expm(*abc) for abc in zip(a, b, c)])
        err = np.abs(got - ref) / np.maximum(1.0, np.abs(ref))
    assert verdict("4", "matrix exponential", err.max() <= 1e-12, f"max err {err.max():.2e} (tol 1e-12)",
                   t.elapsed, 1)


# ------------------------------------------------------------------ 5
def test_05_symplecticity():
    rng = np.random.default_rng(5)
    worst = 0.0
    with Clock() as t:
        for _ in range(100):
            h = random_element(rng, 1)
            c = bound_c(h, M1)
            if c > 1.0:
                h, c = h.scaled(1.0 / c), 1.0
            f, g = shell(random_element(rng, 1)), shell(random_element(rng, 1))
            res, d = symplectic_residual(h, f, g, 1e-10, Q, M1, c_h=c)
            worst = max(worst, res / (1.0 + abs(d)))
    assert verdict("5", "symplecticity", worst <= 1e-5, f"max residual/(1+|Delta|) {worst:.2e} (tol 1e-5), 100 cases",
                   t.elapsed, 60)


# ------------------------------------------------------------------ 6
def test_06_norm_bound():
    rng = np.random.default_rng(6)
    tol = 1e-8
    worst = -np.inf
    with Clock() as t:
        for _ in range(50):
            h = random_element(rng, 1)
            f = shell(random_element(rng, 1))
            op = SqueezeOperator(h, M1, quad=Q)
            tf = op.apply_t(f)
            for p in (1, 2, np.inf):
                worst = max(worst, lp_norm(tf, p, Q, M1) - op.c_h * lp_norm(f, p, Q, M1))
    assert verdict("6", "norm bound", worst <= tol, f"max ||t f||_p - c ||f||_p = {worst:.3e} (tol {tol:g})",
                   t.elapsed, 60)


# ------------------------------------------------------------------ 7
def test_07_gamma_identity():
    with Clock() as t:
        bad = 0
        for k in range(13):
            for n in range(13):
                lhs = 10**k * math.prod(n - 1 + 2 * j for j in range(1, k + 1))
                a = Fraction(n + 1, 2)
                rhs = 20**k * math.prod((a + j for j in range(k)), start=Fraction(1))
                bad += not (lhs == rhs == gamma_factor(k, n) == odd_product_factor(k, n))
    assert verdict("7", "Gamma-factor identity", bad == 0, f"{bad} mismatches over k, n <= 12 (exact)", t.elapsed, 1)


# ------------------------------------------------------------------ 8
def test_08_discrete_commutator():
    m = DiscreteModel.lattice(3, 0.7, 6)
    rng = np.random.default_rng(8)
    with Clock() as t:
        worst = max(verify_commutator(m, random_element(rng, 1), random_sample(rng, m)) for _ in range(20))
    assert verdict("8", "discrete commutator", worst <= 1e-9, f"max residual {worst:.2e} (tol 1e-9), 20 cases",
                   t.elapsed, 10)


# ------------------------------------------------------------------ 9
def test_09_discrete_fock_bound():
    m = DiscreteModel.lattice(2, 0.9, 8)
    rng = np.random.default_rng(9)
    with Clock() as t:
        worst = max(verify_fock_bound(m, random_sample(rng, m), random_element(rng, 1)).max_ratio
                    for _ in range(20))
    assert verdict("9", "discrete Fock bound", worst <= 1.0, f"max ratio {worst:.3f} (<= 1), 20 cases", t.elapsed, 10)


# ------------------------------------------------------------------ 10
def test_10_finite_part():
    with Clock() as t:
        got = pf_integrate(lambda q: np.exp(-q * q))
        ref = oracles.pf_subtracted(lambda q: math.exp(-q * q))
    err = abs(got - ref) / abs(ref)
    closed = abs(ref + 2 * math.sqrt(math.pi)) / (2 * math.sqrt(math.pi))
    assert verdict("10", "finite-part integral", err <= 1e-6 and closed <= 1e-6,
                   f"rel err {err:.2e} vs oracle, oracle {closed:.1e} from -2 sqrt(pi) (tol 1e-6)", t.elapsed, 1)


# ------------------------------------------------------------------ 11
EVEN_H = [
    SchwartzElement(1.0, [0.0, 0.0], 0.5, [1.0, 0.0], "cos"),
    SchwartzElement(0.7, [0.0, 0.0], [[1.0, 0.3], [0.3, 0.6]], [0.4, 1.2], "cos"),
    SchwartzElement(1.3, [0.0, 0.0], 1.2),
    SchwartzElement(1.0, [0.0, 0.0], 0.5, [1.0, 0.0], "cos") + SchwartzElement(0.4, [0.0, 0.0], 2.0),
]


def test_11_parity_law():
    worst = 0.0
    with Clock() as t:
        for h in EVEN_H:
            rep = srel_first_order(h, 80.0, Q, M1)
            worst = max(worst, abs(rep.term_plus), abs(rep.term_minus))
    assert verdict("11", "even h gives zero", worst <= 1e-7, f"max |term| {worst:.1e} (tol 1e-7), {len(EVEN_H)} h",
                   t.elapsed, 30)


# ------------------------------------------------------------------ 12
def divergence_scan(h, model, quad):
    rep = srel_first_order(h, 80.0, quad, model, cutoffs=[10.0, 20.0, 40.0, 80.0])
    vals = [v for _, v in rep.scan]
    increasing = all(b > a for a, b in zip(vals, vals[1:]))
    plus = [v for _, v in rep.plus_scan]
    plus_change = max(abs(b - a) / max(abs(b), 1e-300) for a, b in zip(plus, plus[1:]))
    ok = (increasing and abs(rep.growth_exponent - 1.0) <= 0.2 and rep.verdict == "divergent"
          and plus_change < 1e-4)
    detail = (f"scan {['%.4g' % v for v in vals]}, exponent {rep.growth_exponent:.3f} (1.0 +- 0.2), "
              f"verdict {rep.verdict}, plus-term change {plus_change:.1e}")
    return ok, detail


@pytest.mark.xfail(strict=True, reason="the minus-branch growth exponent is D - 1; at D = 1 the scan saturates")
def test_12a_divergence_one_dimension():
    h = load_test_function(json.loads((SAMPLES / "odd_h.json").read_text()))
    with Clock() as t:
        ok, detail = divergence_scan(h, M1, Q)
    assert verdict("12a", "divergence at D = 1", ok, detail, t.elapsed, 300)


def test_12b_divergence_two_dimensions():
    h = load_test_function(json.loads((SAMPLES / "odd_h_2d.json").read_text()))
    quad = QuadratureSpec(cutoff=16.0, abs_tol=1e-10, rel_tol=1e-6)
    with Clock() as t:
        ok, detail = divergence_scan(h, ModelParams(1.0, 2), quad)
    assert verdict("12b", "divergence at D = 2", ok, detail, t.elapsed, 300)


# ------------------------------------------------------------------ 13
def random_real_h(n=10, seed=13):
    rng = np.random.default_rng(seed)
    return [random_element(rng, 1) for _ in range(n)]


def normalized_components(h):
    scale = max(h.fourier_bound(), 1e-300)
    a, b = boundary_term_check(h, Q, M1)
    return a / scale, b / scale


@pytest.mark.xfail(strict=True, reason="the first plus-branch component needs h symmetric under x1 -> -x1")
def test_13a_boundary_terms_random_h():
    with Clock() as t:
        comps = np.array([normalized_components(h) for h in random_real_h()])
    ok = comps.max() <= 1e-8
    assert verdict("13a", "boundary terms, generic h", ok,
                   f"max component (a) {comps[:, 0].max():.2e}, (b) {comps[:, 1].max():.2e} (tol 1e-8)", t.elapsed, 30)


def test_13b_boundary_pairing_random_h():
    with Clock() as t:
        hs = random_real_h()
        comps = np.array([normalized_components(h) for h in hs])
        pair = max(plus_boundary_pairing(h, Q, M1) / h.fourier_bound() for h in hs)
    ok = comps[:, 1].max() <= 1e-8 and pair <= 1e-8
    assert verdict("13b", "boundary terms, full plus pairing", ok,
                   f"component (b) {comps[:, 1].max():.2e}, plus pairing {pair:.2e} (tol 1e-8)", t.elapsed, 30)


def test_13c_boundary_terms_spatially_symmetric_h():
    rng = np.random.default_rng(131)
    hs = [SchwartzElement(rng.uniform(0.3, 1.0), [rng.normal(0, 0.5), 0.0],
                          [rng.uniform(0.4, 1.2), rng.uniform(0.4, 1.2)], [rng.normal(0, 0.7), 0.0],
                          rng.choice(["cos", "sin"])) for _ in range(10)]
    with Clock() as t:
        comps = np.array([normalized_components(h) for h in hs])
    assert verdict("13c", "boundary terms, x1-symmetric h", comps.max() <= 1e-8,
                   f"max component {comps.max():.2e} (tol 1e-8)", t.elapsed, 30)


# ------------------------------------------------------------------ 14
def test_14_rearrangement():
    tol = 1e-12
    cases = [([0.5, 0.5], 4.0), ([1 / 3] * 3, 3.375), ([-1 / 3, -1 / 3], 0.5625)]
    with Clock() as t:
        errs = []
        for ratios, exact in cases:
            s = geometric_series(ratios)
            d, r = diagonal_sum(s, tol), rectangular_sum(s, 120)
            errs.append(max(abs(d - r), abs(d - exact)))
    assert verdict("14", "diagonal vs rectangular", max(errs) <= 2 * tol,
                   f"max deviation {max(errs):.1e} (tol {2 * tol:g})", t.elapsed, 1)


# ------------------------------------------------------------------ 15
def test_15_canonical_verdict():
    grid = np.linspace(-5, 5, 201)[:, None]
    tol = 1e-10
    rng = np.random.default_rng(15)
    profiles = [CanonicalProfile(), CanonicalProfile(kphi=SchwartzElement(math.pi, [0.0], 1e-14),
                                                     kpi=SchwartzElement(math.pi, [0.0], 1e-14)),
                CanonicalProfile(k0=SchwartzElement(1e-9, [0.0], 1.0))]
    profiles += [CanonicalProfile(k0=SchwartzElement(rng.uniform(0.01, 2), [rng.normal()], rng.uniform(0.2, 3)),
                                  kphi=SchwartzElement(rng.uniform(-1, 1), [rng.normal()], rng.uniform(0.2, 3)),
                                  kpi=SchwartzElement(rng.uniform(-1, 1), [rng.normal()], rng.uniform(0.2, 3)))
                 for _ in range(10)]
    bumps = [CanonicalProfile(k0=SchwartzElement(a, [x0], w))
             for a, x0, w in zip(rng.uniform(-2, 2, 20), rng.normal(0, 1, 20), rng.uniform(0.1, 5, 20))]
    with Clock() as t:
        iff = 0
        for prof in profiles + bumps:
            F = entropy_coefficients(prof, grid, M1)
            vanishing = float(np.max(np.abs(F[0]) + np.abs(F[1]) + np.abs(F[2]))) < tol
            iff += (divergence_verdict(prof, grid, M1, tol).verdict == "trivial") == vanishing
        bump_div = sum(divergence_verdict(b, grid, M1, tol).verdict == "divergent" for b in bumps)
    total = len(profiles) + len(bumps)
    ok = iff == total and bump_div == len(bumps)
    assert verdict("15", "no-squeezing verdict", ok,
                   f"iff holds on {iff}/{total} profiles, {bump_div}/{len(bumps)} k0 bumps divergent", t.elapsed, 5)
