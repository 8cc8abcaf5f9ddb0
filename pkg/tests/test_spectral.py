import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from revlab.numbers import (
    DispersionPolynomial,
    RationalTime,
    Turns,
    composition_plan,
    parse_theta,
    transform_polynomial,
)
from revlab.spectral import (
    BasisError,
    GridProfile,
    SpectralState,
    analyze,
    apply_group,
    apply_quasi_revival,
    apply_revival,
    box_coefficients_closed_form,
    box_coefficients_periodic,
    box_profile,
    compose_combinations,
    evolve_by_composition,
    evolve_composition,
    evolve_correspondence,
    evolve_periodic,
    evolve_quasi,
    evolve_second_order,
    jump_candidates,
    periodic_to_quasi,
    quasi_revival_combination,
    quasi_to_periodic,
    revival_weights,
    second_order_wrapper,
    synthesize,
    translate,
    translation_delta,
)

T3 = RationalTime(1, 3)


def box_oracle(theta: float, j: int) -> complex:
    """Eigenfunction-expansion coefficient of the box, evaluated in mpmath."""
    with mpmath.workdps(30):
        lam = mpmath.mpf(j) + mpmath.mpf(theta)
        num = mpmath.exp(-1.5j * mpmath.pi * lam) - mpmath.exp(-0.5j * mpmath.pi * lam)
        return complex(1j / mpmath.sqrt(2 * mpmath.pi) * num / lam)


def random_state(J, seed, theta=None):
    rng = np.random.default_rng(seed)
    return SpectralState(rng.normal(size=2 * J + 1) + 1j * rng.normal(size=2 * J + 1), theta)


# ---------------------------------------------------------------- states

def test_state_is_read_only_copy():
    c = np.ones(5, dtype=complex)
    s = SpectralState(c)
    c[0] = 7
    assert s.coeffs[0] == 1
    with pytest.raises(ValueError):
        s.coeffs[0] = 3


def test_state_needs_odd_length():
    with pytest.raises(ValueError):
        SpectralState(np.ones(4))


def test_retag_keeps_coefficients():
    th = parse_theta("1/4")
    u = random_state(8, 1, th)
    assert u.as_periodic().is_periodic
    assert np.array_equal(u.as_periodic().coeffs, u.coeffs)
    assert u.as_periodic().as_quasi(th).theta == th


# ------------------------------------------------------- transforms

@pytest.mark.parametrize("text", ["1/4", "sqrt(2)/4", "0.3"])
def test_box_closed_form_matches_oracle(text):
    th = parse_theta(text)
    u = box_coefficients_closed_form(th, 40)
    for j in (-40, -7, -1, 0, 1, 2, 13, 40):
        assert abs(u.coefficient(j) - box_oracle(th.value, j)) < 1e-14


def test_box_closed_form_frozen():
    u = box_coefficients_closed_form(parse_theta("1/4"), 4)
    assert u.coefficient(0) == pytest.approx(0.86362403 - 0.86362403j, abs=1e-8)
    assert u.coefficient(-1) == pytest.approx(-0.69499094 + 0.69499094j, abs=1e-8)


@pytest.mark.parametrize("text", ["1/4", "sqrt(2)/4"])
def test_box_closed_form_matches_fft(text):
    th = parse_theta(text)
    fft = analyze(box_profile(2 ** 20), 64, th)
    assert np.max(np.abs(fft.coeffs - box_coefficients_closed_form(th, 64).coeffs)) < 1e-5


def test_box_periodic_matches_fft():
    fft = analyze(box_profile(2 ** 18), 32)
    assert np.max(np.abs(fft.coeffs - box_coefficients_periodic(32).coeffs)) < 1e-4


def test_box_profile_excludes_endpoints():
    p = box_profile(8)
    assert list(p.samples.real) == [0, 0, 0, 1, 1, 1, 0, 0]


@pytest.mark.parametrize("theta", [None, "1/4", "sqrt(2)/4"])
def test_analyze_synthesize_round_trip(theta):
    th = parse_theta(theta) if theta else None
    u = random_state(30, 3, th)
    back = analyze(synthesize(u, 128), 30, th)
    assert np.max(np.abs(back.coeffs - u.coeffs)) < 1e-12


def test_synthesize_quasi_single_mode():
    th = parse_theta("sqrt(2)/4")
    prof = synthesize(SpectralState.unit(3, 2, th), 16)
    x = prof.x
    assert np.allclose(prof.samples, np.exp(1j * (2 + th.value) * x) / math.sqrt(2 * math.pi))


def test_synthesize_rejects_small_grid():
    with pytest.raises(ValueError):
        synthesize(SpectralState.zeros(10), 20)


# --------------------------------------------------------- evolutions

@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("text", ["1/4", "sqrt(2)/4"])
def test_three_quasi_paths_agree(n, text):
    th = parse_theta(text)
    P = DispersionPolynomial.monomial(n)
    u0 = box_coefficients_closed_form(th, 1024)
    direct = evolve_quasi(u0, P, T3)
    assert np.max(np.abs(evolve_correspondence(u0, P, T3).coeffs - direct.coeffs)) < 1e-12
    assert np.max(np.abs(evolve_composition(u0, P, T3).coeffs - direct.coeffs)) < 1e-12


def test_evolve_quasi_against_float_phases_for_small_modes():
    th = parse_theta("sqrt(2)/4")
    P = DispersionPolynomial((0, 1, 0, 2))
    u0 = random_state(6, 4, th)
    t = 0.3
    lam = np.arange(-6, 7) + th.value
    want = u0.coeffs * np.exp(-1j * (lam + 2 * lam ** 3) * t)
    assert np.allclose(evolve_quasi(u0, P, t).coeffs, want, atol=1e-13)


def test_basis_errors():
    th = parse_theta("1/4")
    P = DispersionPolynomial.monomial(3)
    with pytest.raises(BasisError):
        evolve_quasi(SpectralState.zeros(4), P, T3)
    with pytest.raises(BasisError):
        translate(SpectralState.zeros(4, th), 0.1)
    with pytest.raises(BasisError):
        evolve_periodic(SpectralState.zeros(4, th), transform_polynomial(P, th), T3)


def test_group_of_order_one_is_translation():
    z = random_state(20, 5)
    for s in (0.3, Turns.of_fraction(Fraction(2, 7))):
        assert np.array_equal(apply_group(z, 1, s).coeffs, translate(z, s).coeffs)


def test_translation_by_grid_shift_rolls_samples():
    z = random_state(10, 6)
    N = 64
    shifted = synthesize(translate(z, Turns.of_fraction(Fraction(5, N))), N).samples
    assert np.allclose(shifted, np.roll(synthesize(z, N).samples, 5), atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.floats(-50, 50, allow_nan=False), st.integers(0, 10 ** 6))
def test_group_elements_are_unitary(n, t, seed):
    z = random_state(64, seed)
    assert apply_group(z, n, t).norm() == pytest.approx(z.norm(), rel=1e-13)


# ------------------------------------------------------------ revivals

def test_weights_frozen():
    assert np.allclose(revival_weights(2, 1, 2).w, [0, 1], atol=1e-15)
    assert np.allclose(revival_weights(3, 1, 3).w, [0, 1, 0], atol=1e-15)
    assert np.allclose(revival_weights(5, 1, 1).w, [1])
    assert np.allclose(revival_weights(3, 1, 4).w, [0.5, 0.5, 0.5, -0.5], atol=1e-15)
    assert np.allclose(revival_weights(2, 1, 4).w, [0.5 - 0.5j, 0, 0.5 + 0.5j, 0], atol=1e-15)


def test_weights_validation():
    with pytest.raises(ValueError):
        revival_weights(1, 1, 3)
    with pytest.raises(ValueError):
        revival_weights(3, 2, 4)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 7), st.integers(1, 300), st.integers(1, 300))
def test_weights_residue_identity(n, p, q):
    if math.gcd(p, q) != 1:
        p, q = 1, q
    w = revival_weights(n, p, q)
    j = np.arange(q)
    res = np.array([(pow(int(k), n, q) * p) % q for k in j])
    assert np.max(np.abs(w.multipliers(j) - np.exp(-2j * np.pi * res / q))) < 1e-11
    assert np.sum(np.abs(w.w) ** 2) == pytest.approx(1.0, rel=1e-12)


def test_weights_fft_branch_matches_sum():
    # q above the explicit-sum threshold takes the FFT route
    w = revival_weights(3, 7, 4099)
    j = np.arange(-50, 50)
    res = np.array([(pow(int(k) % 4099, 3, 4099) * 7) % 4099 for k in j])
    assert np.max(np.abs(w.multipliers(j) - np.exp(-2j * np.pi * res / 4099))) < 1e-11


@pytest.mark.parametrize("n,p,q", [(2, 1, 5), (3, 2, 7), (4, 1, 6), (6, 5, 12)])
def test_revival_equals_group(n, p, q):
    z = random_state(200, n)
    direct = apply_group(z, n, RationalTime(p, q))
    via = apply_revival(z, revival_weights(n, p, q))
    assert np.max(np.abs(direct.coeffs - via.coeffs)) < 1e-12


def test_translation_delta_and_composition():
    d = translation_delta(Fraction(5, 4))
    assert d.q == 4 and np.allclose(d.w, [0, 1, 0, 0])
    a, b = revival_weights(2, 1, 3), revival_weights(3, 1, 4)
    ab = compose_combinations([a, b])
    ba = compose_combinations([b, a])
    assert ab.q == 12
    j = np.arange(-30, 30)
    assert np.allclose(ab.multipliers(j), a.multipliers(j) * b.multipliers(j), atol=1e-13)
    assert np.allclose(ab.w, ba.w, atol=1e-14)


@pytest.mark.parametrize("mode", ["diagonal", "revival-where-rational"])
def test_composition_matches_transformed_evolution(mode):
    P = DispersionPolynomial((0, 2, -1, 3, 0, 1))
    th = parse_theta("2/5")
    z = random_state(512, 9)
    ref = evolve_periodic(z, transform_polynomial(P, th), T3)
    got = evolve_by_composition(z, composition_plan(P, th, T3), mode)
    assert np.max(np.abs(ref.coeffs - got.coeffs)) < 1e-11


def test_strict_revival_mode_rejects_irrational_factor():
    plan = composition_plan(DispersionPolynomial.monomial(3), parse_theta("sqrt(2)/4"), T3)
    with pytest.raises(ValueError):
        evolve_by_composition(SpectralState.zeros(4), plan, "revival")
    with pytest.raises(ValueError):
        evolve_by_composition(SpectralState.zeros(4), plan, "bogus")


# ---------------------------------------------------- correspondence

def test_quasi_to_periodic_at_time_zero_is_retag():
    th = parse_theta("sqrt(2)/4")
    u = random_state(16, 2, th)
    z, phase = quasi_to_periodic(u, DispersionPolynomial.monomial(4), Turns.of_fraction(0))
    assert phase == 1
    assert np.array_equal(z.coeffs, u.coeffs) and z.is_periodic


@pytest.mark.parametrize("t", [T3, 0.81])
def test_correspondence_round_trip(t):
    th = parse_theta("sqrt(3)/3")
    P = DispersionPolynomial((1, 0, 2, 1))
    u = random_state(40, 8, th)
    z, _ = quasi_to_periodic(u, P, t)
    back = periodic_to_quasi(z, P, th, t)
    assert np.max(np.abs(back.coeffs - u.coeffs)) < 1e-14


# ------------------------------------------------- finite translates

@pytest.mark.parametrize("n,Q", [(3, 48), (4, 48), (5, 768)])
def test_quasi_revival_matches_direct(n, Q):
    th = parse_theta("1/4")
    P = DispersionPolynomial.monomial(n)
    u0 = box_coefficients_closed_form(th, 1024)
    glob, combo = quasi_revival_combination(P, th, T3)
    assert combo.q == Q and abs(abs(glob) - 1) < 1e-15
    err = np.max(np.abs(apply_quasi_revival(u0, P, T3).coeffs - evolve_quasi(u0, P, T3).coeffs))
    assert err < 1e-12


@pytest.mark.parametrize("n,count,size", [(3, 2, 1.0), (4, 6, 1 / math.sqrt(3)), (5, 8, 0.5)])
def test_surviving_jumps_frozen(n, count, size):
    _, combo = quasi_revival_combination(DispersionPolynomial.monomial(n), parse_theta("1/4"), T3)
    jumps = jump_candidates(combo)
    assert len(jumps) == count
    assert all(abs(abs(v) - size) < 1e-12 for _, v in jumps)


def test_cubic_jumps_land_on_predicted_points():
    # shifts 1/3 (R_3), 0 or 1/2 (R_2 at a quarter turn) and 1/16 (drift): x = 7/48, 31/48 turns
    _, combo = quasi_revival_combination(DispersionPolynomial.monomial(3), parse_theta("1/4"), T3)
    locs = [loc for loc, _ in jump_candidates(combo)]
    assert locs == pytest.approx([2 * math.pi * 7 / 48, 2 * math.pi * 31 / 48])


def test_quasi_revival_needs_rational_data():
    with pytest.raises(ValueError):
        quasi_revival_combination(DispersionPolynomial.monomial(3), parse_theta("sqrt(2)/4"), T3)
    with pytest.raises(ValueError):
        quasi_revival_combination(DispersionPolynomial.monomial(3), parse_theta("1/4"), 1.0)


# ----------------------------------------------------------- second order

@pytest.mark.parametrize("text", ["1/4", "sqrt(2)/4", "0.3"])
@pytest.mark.parametrize("alpha", [(0, 0, 1), (2, -1, 3)])
def test_second_order_wrapper_revives_for_any_theta(text, alpha):
    u0 = box_coefficients_closed_form(parse_theta(text), 512)
    direct = evolve_second_order(u0, alpha, T3)
    for use in (True, False):
        wrapped = second_order_wrapper(u0, alpha, T3, use_revival=use)
        assert np.max(np.abs(direct.coeffs - wrapped.coeffs)) < 1e-12


def test_second_order_validation():
    with pytest.raises(ValueError):
        evolve_second_order(SpectralState.zeros(2, parse_theta("1/4")), (0, 1), T3)
    with pytest.raises(ValueError):
        evolve_second_order(SpectralState.zeros(2, parse_theta("1/4")), (0, 1, 0), T3)


def test_grid_profile_validation():
    with pytest.raises(ValueError):
        GridProfile(np.ones((2, 2)))
