import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qbl.geometry import (ExactDensity, SmoothWeight, TauEstimate, ToleranceError, is_definite,
                          rho_infinity, rho_infinity_quadrature, rho_infinity_squares,
                          sigma_infinity_batch, sigma_infinity_fiber, sigma_infinity_weighted,
                          slice_volume, smooth_weight_eval, tau_infinity)

vec4 = st.lists(st.integers(-9, 9), min_size=4, max_size=4).filter(any)
nonzero4 = st.lists(st.integers(-9, 9).filter(bool), min_size=4, max_size=4)


# ---------------------------------------------------------------- rho

@pytest.mark.parametrize("y, want", [((1, 0, 0, 0), 8), ((1, 1, 1, 1), Fraction(16, 3)),
                                     ((1, 1, 0, 0), 8)])
def test_rho_examples(y, want):
    assert rho_infinity(y) == want


def test_rho_zero_vector():
    with pytest.raises(ValueError):
        rho_infinity((0, 0, 0, 0))


@pytest.mark.parametrize("y, rational, radicand", [((1, 0, 0, 0), 8, 1),
                                                   ((1, 1, 1, 1), Fraction(32, 3), 1),
                                                   ((1, 1, 0, 0), 8, 2)])
def test_slice_volume_examples(y, rational, radicand):
    v = slice_volume(y)
    assert v.rational_part == rational and v.radicand == radicand


def test_exact_density_normalizes_radicand():
    v = ExactDensity(Fraction(1), 8)
    assert (v.rational_part, v.radicand) == (2, 2)
    assert float(v * ExactDensity(Fraction(1, 2), 2)) == pytest.approx(2.0)


@given(vec4, st.integers(1, 6))
def test_rho_homogeneity(y, k):
    assert rho_infinity([k * t for t in y]) == rho_infinity(y) * ExactDensity(Fraction(1, k * k))


@given(vec4, st.permutations(range(4)), st.lists(st.sampled_from([1, -1]), min_size=4, max_size=4))
def test_rho_permutation_and_sign_invariance(y, perm, signs):
    z = [y[perm[i]] * signs[i] for i in range(4)]
    assert rho_infinity(z) == rho_infinity(y)


@given(vec4)
def test_slice_volume_identity(y):
    d = ExactDensity(Fraction(1), sum(t ** 4 for t in y))
    assert slice_volume(y) == rho_infinity(y) * d


def test_rho_float_route_matches_exact():
    rng = np.random.default_rng(11)
    Y = rng.integers(-7, 8, (200, 4))
    Y = Y[np.any(Y != 0, axis=1)]
    got = rho_infinity_squares(Y.astype(float) ** 2)
    want = np.array([float(rho_infinity(tuple(int(t) for t in y))) for y in Y])
    assert np.allclose(got, want, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("y", [(1, 2, 0, 0), (1, 2, 3, 0), (2, 3, 5, 7), (1, 1, 1, 4)])
def test_rho_matches_theta_quadrature(y):
    assert rho_infinity_quadrature(y) == pytest.approx(float(rho_infinity(y)), abs=1e-6)


def test_rho_real_input_and_scaling():
    assert rho_infinity((0.5, 0.0, 0.0, 0.0)) == pytest.approx(32.0)
    assert rho_infinity((2.0, 2.0, 2.0, 2.0)) == pytest.approx(16 / 3 / 4)


# ---------------------------------------------------------------- sigma

def test_sigma_closed_values():
    # independent hand evaluations of the real density at 0
    assert sigma_infinity_fiber((1, 1, 1, -1)) == pytest.approx(2 * math.pi, abs=1e-8)
    assert sigma_infinity_fiber((1, 1, -1, -1)) == pytest.approx(16 * math.log(2), abs=1e-8)


def test_sigma_homogeneity_and_conjugation():
    tol = 1e-8
    base = sigma_infinity_fiber((1, 1, 1, -1), tol)
    assert abs(sigma_infinity_fiber((2, 2, 2, -2), tol) - base / 2) <= 2 * tol
    assert abs(sigma_infinity_fiber((-1, -1, -1, 1), tol) - base) <= 2 * tol


def test_sigma_matches_slab_volume_monte_carlo():
    rng = np.random.default_rng(2024)
    x = np.array([1, 1, 1, -1])
    delta, n = 0.01, 4_000_000
    hits = 0
    for _ in range(4):
        y = rng.uniform(-1, 1, (n // 4, 4))
        hits += int((np.abs((y * y) @ x) < delta).sum())
    p = hits / n
    # sigma = 16 * density, the slab has width 2 delta
    est = 16 * p / (2 * delta)
    se = 16 * math.sqrt(p * (1 - p) / n) / (2 * delta)
    # O(delta^2) bias of the slab is far below se here
    tol = se
    assert abs(sigma_infinity_fiber(tuple(x), tol) - est) <= 3 * tol


@pytest.mark.parametrize("x", [(1, 1, 1, -1), (1, 2, 3, -5), (2, -3, 5, -7), (1, -1, 4, 9)])
def test_sigma_two_routes_agree(x):
    a = sigma_infinity_fiber(x, 1e-8, method="density")
    b = sigma_infinity_fiber(x, 1e-7, method="fresnel")
    assert a == pytest.approx(b, abs=2e-7)


@given(nonzero4, st.permutations(range(4)))
def test_sigma_permutation_and_negation_invariance(x, perm):
    v = sigma_infinity_fiber(x, 1e-9)
    assert sigma_infinity_fiber([x[i] for i in perm], 1e-9) == pytest.approx(v, abs=1e-8)
    assert sigma_infinity_fiber([-t for t in x], 1e-9) == pytest.approx(v, abs=1e-8)


def test_sigma_not_invariant_under_single_sign_flip():
    assert sigma_infinity_fiber((1, 1, 1, -1)) != pytest.approx(sigma_infinity_fiber((1, 1, -1, -1)))


def test_sigma_definite_and_errors():
    v, info = sigma_infinity_fiber((1, 2, 3, 4), return_info=True)
    assert v == 0.0 and info["definite"]
    assert sigma_infinity_fiber((-1, -2, -3, -4)) == 0.0
    with pytest.raises(ValueError):
        sigma_infinity_fiber((1, 1, 1, -1), tol=0)
    with pytest.raises(ValueError):
        sigma_infinity_fiber((1, 0, 1, -1))
    with pytest.raises(ToleranceError):
        sigma_infinity_fiber((1, 1, 1, -1), tol=1e-30)


def test_sigma_batch_matches_single():
    X = [(1, 2, 3, -5), (1, -1, 1, -1), (3, -2, 7, 1)]
    got = sigma_infinity_batch(np.array(X, dtype=float))
    for g, x in zip(got, X):
        assert g == pytest.approx(sigma_infinity_fiber(x), abs=1e-9)


def _random_indefinite(rng, hi):
    while True:
        x = [int(t) for t in rng.integers(-hi, hi + 1, 4)]
        if 0 not in x and not is_definite(x):
            return x


def test_sigma_discriminant_bound_fitted():
    # fit C in sigma <= C |Delta|^(-1/4) on small forms, check it on larger ones
    rng = np.random.default_rng(5)
    fit = [_random_indefinite(rng, 5) for _ in range(25)]
    hold = [_random_indefinite(rng, 50) for _ in range(25)]

    def scaled(x):
        return sigma_infinity_fiber(x) * abs(math.prod(x)) ** 0.25
    C = max(scaled(x) for x in fit)
    assert max(scaled(x) for x in hold) <= 1.5 * C


# ---------------------------------------------------------------- weights

@pytest.mark.parametrize("r, want", [(0.05, 0.0), (0.5, 1.0), (1.2, 0.0)])
def test_weight_examples(r, want):
    w = SmoothWeight(0.1, "inner_w1")
    assert smooth_weight_eval(w, (r, 0.0, -r / 2, 0.0)) == want


@given(st.floats(0.01, 0.3), st.floats(0, 1.5))
def test_weight_bands(eta, r):
    w0, w1, w2 = (SmoothWeight(eta, k) for k in ("indicator_w0", "inner_w1", "outer_w2"))
    v0, v1, v2 = (float(w.profile(r)) for w in (w0, w1, w2))
    assert all(0 <= v <= 1 for v in (v0, v1, v2))
    if r >= 2 * eta:
        assert v1 <= v0 <= v2
    if 2 * eta <= r <= 1 - eta:
        assert v1 == 1
    if 2 * eta <= r <= 1:
        assert v2 == 1
    if r <= eta or r >= 1:
        assert v1 == 0
    if r <= eta or r >= 1 + eta:
        assert v2 == 0


def test_weight_finite_difference_derivative_bounded():
    w = SmoothWeight(0.05, "inner_w1")
    r = np.linspace(0, 1.1, 200001)
    d = np.diff(w.profile(r)) / np.diff(r)
    # exp(-1/t) smoothstep has slope at most 2/eta
    assert np.abs(d).max() <= 2.5 / w.eta
    d2 = np.diff(d) / np.diff(r)[1:]
    assert np.isfinite(d2).all() and np.abs(d2).max() < 50 / w.eta ** 2


def test_weight_eta_range():
    with pytest.raises(ValueError):
        SmoothWeight(0.0)
    with pytest.raises(ValueError):
        SmoothWeight(0.6)
    with pytest.raises(ValueError):
        SmoothWeight(0.1, "triangle")


def test_weighted_sigma_w0_and_shrink():
    x = (1, 1, 1, -1)
    tol = 1e-8
    w0 = SmoothWeight(0.05, "indicator_w0")
    assert abs(sigma_infinity_weighted(w0, x, tol) - sigma_infinity_fiber(x, tol)) <= 2 * tol
    F = (1, 2, 3, -5)
    small = sigma_infinity_weighted(SmoothWeight(0.4), F)
    big = sigma_infinity_weighted(SmoothWeight(0.05), F)
    assert 0 < small < big


def test_weighted_sigma_comparison_bound_fitted():
    rng = np.random.default_rng(7)
    forms = [_random_indefinite(rng, 20) for _ in range(20)]

    def ratio(x, eta):
        d = abs(sigma_infinity_weighted(SmoothWeight(eta), x) - sigma_infinity_fiber(x))
        return d / (eta ** 0.5 * abs(math.prod(x)) ** -0.25)
    C = max(ratio(x, 0.05) for x in forms)
    for eta in (0.01, 0.02, 0.04):
        assert max(ratio(x, eta) for x in forms) <= C


def test_weighted_sigma_radial_moment_against_quad():
    # the moment integral against a crude Riemann sum
    w = SmoothWeight(0.1, "outer_w2")
    r = np.linspace(0, 1.2, 1200001)
    crude = np.trapezoid(2 * r * w.profile(r), r)
    assert w.radial_moment() == pytest.approx(crude, abs=1e-8)


# ---------------------------------------------------------------- tau

def test_tau_integrand_at_origin():
    assert rho_infinity((0.0, 0.0, 0.0, 1.0)) == 8


def test_tau_quick_routes_overlap_and_positive():
    a = tau_infinity("via_rho", 1e-2)
    b = tau_infinity("via_sigma", 3e-2)
    assert a.value > 0 and b.value > 0
    assert a.abs_error_bound <= 1e-2 and b.abs_error_bound <= 3e-2
    assert a.consistent_with(b)
    lo, hi = a.interval()
    assert lo < a.value < hi


def test_tau_errors():
    with pytest.raises(ValueError):
        tau_infinity("via_rho", 0)
    with pytest.raises(ValueError):
        tau_infinity("via_magic", 1e-2)


def test_tau_estimate_consistency():
    a = TauEstimate(1.0, "via_rho", 0.1, 10)
    assert a.consistent_with(TauEstimate(1.15, "via_sigma", 0.06, 10))
    assert not a.consistent_with(TauEstimate(1.2, "via_sigma", 0.05, 10))
