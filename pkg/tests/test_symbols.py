import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from lipevo.errors import ParameterError, ValidationError
from lipevo.symbols import (SamplingPlan, TimeCoefficient, check_symbol_class, d2,
                            make_custom, make_elliptic_matrix, make_fractional, scale_symbol)

PW = TimeCoefficient.piecewise([(0.0, 1.0), (0.5, 3.0)])


def test_d2():
    assert [d2(1), d2(2), d2(3)] == [1, 2, 2]


def test_heat_symbol_saturates_both_ratios():
    psi = make_fractional(2, 1.0)
    xi = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(psi.evaluate(0.3, xi), -xi ** 2)
    rep = check_symbol_class(psi)
    assert rep.passed
    assert rep.ellipticity_ratio == 1.0
    assert rep.derivative_ratio == pytest.approx(1.0, abs=1e-6)
    assert rep.fitted_kappa == 1.0


def test_poisson_symbol_passes():
    psi = make_fractional(1, 1.0)
    assert psi.kappa == 1.0
    assert check_symbol_class(psi).passed


def test_piecewise_fractional_sampling_oracle():
    # independent oracle: 100 times x 100 frequencies, coefficient written out by hand
    psi = make_fractional(1.5, PW)
    ts = np.linspace(0, 1, 100)
    xi = np.concatenate([-np.logspace(-3, 3, 50), np.logspace(-3, 3, 50)])
    for t in ts:
        a = 1.0 if t < 0.5 else 3.0
        val = psi.evaluate(t, xi)
        np.testing.assert_allclose(val, -a * np.abs(xi) ** 1.5, rtol=1e-14)
        assert np.all((-val).real >= 1.0 * np.abs(xi) ** 1.5)
    assert psi.kappa == 1.0


@pytest.mark.parametrize("psi", [
    make_fractional(2, 1.0),
    make_fractional(1, 1.0),
    make_fractional(1.5, PW),
    make_fractional(0.5, TimeCoefficient.oscillating(2.0, 0.5, 7.0)),
    make_fractional(1.5, PW, d=2),
    make_elliptic_matrix([[1.0, 0.2], [0.2, 2.0]]),
    make_elliptic_matrix([[TimeCoefficient.piecewise([(0, 1), (0.5, 2)]), 0.0],
                          [0.0, TimeCoefficient.piecewise([(0, 2), (0.5, 1)])]]),
], ids=["heat", "poisson", "frac1.5pw", "frac0.5osc", "frac1.5pw-2d", "ell-const", "ell-pw"])
def test_builtins_pass_class_check(psi):
    rep = check_symbol_class(psi, SamplingPlan(tol=1e-6))
    assert rep.passed, rep


def test_elliptic_identity_is_laplacian():
    psi = make_elliptic_matrix([[1.0, 0.0], [0.0, 1.0]])
    xi = (np.array([0.5, -2.0, 3.0]), np.array([1.0, 0.0, -4.0]))
    np.testing.assert_allclose(psi.evaluate(0.0, xi), -(xi[0] ** 2 + xi[1] ** 2))
    assert psi.gamma == 2.0


def test_elliptic_switching_diagonal():
    a11 = TimeCoefficient.piecewise([(0.0, 1.0), (0.5, 2.0)])
    a22 = TimeCoefficient.piecewise([(0.0, 2.0), (0.5, 1.0)])
    psi = make_elliptic_matrix([[a11, 0.0], [0.0, a22]])
    assert psi.kappa == 1.0
    assert psi.M >= 2.0
    assert check_symbol_class(psi).passed
    # direct quadratic form before and after the switch
    assert complex(psi.evaluate(0.25, (np.array([1.0]), np.array([1.0])))[0]) == -3.0
    assert complex(psi.evaluate(0.75, (np.array([2.0]), np.array([0.0])))[0]) == -8.0


def test_ellipticity_failure_names_time():
    a12 = TimeCoefficient.piecewise([(0.0, 0.0), (0.3, 2.0)])
    with pytest.raises(ValidationError, match="t=0.3"):
        make_elliptic_matrix([[1.0, a12], [a12, 1.0]])


def test_wrong_order_fails():
    psi = make_custom(lambda t, c: -np.abs(c[0]), gamma=2, kappa=1.0, M=2.0)
    rep = check_symbol_class(psi)
    assert not rep.passed
    assert rep.ellipticity_ratio < 1e-2
    # the ratio keeps falling as the sampled shells grow
    hi = check_symbol_class(psi, SamplingPlan(j_range=(8, 14)))
    lo = check_symbol_class(psi, SamplingPlan(j_range=(0, 4)))
    assert hi.ellipticity_ratio < lo.ellipticity_ratio


def test_complex_symbol_fits_M():
    psi = make_custom(lambda t, c: -np.abs(c[0]) ** 1.5 * (1 + 0.3j * np.tanh(c[0])),
                      gamma=1.5, kappa=1.0)
    rep = check_symbol_class(psi)
    assert rep.passed
    assert rep.derivative_ratio == 1.0
    assert 1.5 <= rep.fitted_M < 3.0


def test_fractional_and_elliptic_agree():
    a = TimeCoefficient.piecewise([(0.0, 1.0), (0.4, 2.5)])
    f = make_fractional(2, a, d=2)
    e = make_elliptic_matrix([[a, 0.0], [0.0, a]])
    rng = np.random.default_rng(0)
    xi = (rng.normal(size=200) * 10, rng.normal(size=200) * 10)
    for t in (0.1, 0.4, 0.9):
        np.testing.assert_allclose(f.evaluate(t, xi), e.evaluate(t, xi), rtol=1e-15)
        np.testing.assert_allclose(f.exponent(0.0, t, xi), e.exponent(0.0, t, xi), rtol=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 10), st.floats(0, 1), st.floats(-50, 50))
def test_scaling_property(c, t, xi):
    for psi in (make_fractional(1.5, PW), make_elliptic_matrix([[PW]])):
        scaled = scale_symbol(psi, c)
        np.testing.assert_allclose(scaled.evaluate(t, np.array([xi])),
                                   c * psi.evaluate(t, np.array([xi])), rtol=1e-14)


def test_exponent_matches_quadrature():
    # exact piecewise integral against adaptive quadrature of evaluate
    a = TimeCoefficient.piecewise([(0.0, 1.0), (0.337, 3.0), (0.71, 0.5)])
    psi = make_fractional(1.5, a)
    ref, _ = integrate.quad(lambda r: psi.evaluate(r, 2.0).real, 0.1, 0.9,
                            points=[0.337, 0.71], epsabs=1e-13)
    assert psi.exponent(0.1, 0.9, 2.0).real == pytest.approx(ref, rel=1e-12)
    assert psi.breakpoints(0.1, 0.9) == (0.337, 0.71)


def test_oscillating_coefficient_integral():
    a = TimeCoefficient.oscillating(2.0, 0.5, 7.0)
    ref, _ = integrate.quad(a, 0.2, 1.3)
    assert a.integral(0.2, 1.3) == pytest.approx(ref, rel=1e-12)
    assert a.bounds() == (1.5, 2.5)


def test_custom_symbol_simpson_exponent():
    psi = make_custom(lambda t, c: -(1 + t ** 2) * c[0] ** 2, gamma=2, kappa=1.0,
                      piecewise_constant=False)
    exact = -(0.7 + (0.7 ** 3) / 3) * 2.25
    assert psi.exponent(0.0, 0.7, 1.5).real == pytest.approx(exact, rel=1e-10)


def test_custom_at_zero_declared():
    psi = make_custom(lambda t, c: -c[0] ** 2 - 0.1, gamma=2, kappa=1.0, at_zero=-0.1)
    assert psi.at_zero(0.5) == -0.1
    assert make_fractional(2, 1.0).at_zero(0.5) == 0.0


@pytest.mark.parametrize("gamma", [0.0, -1.0])
def test_fractional_rejects_gamma(gamma):
    with pytest.raises(ParameterError):
        make_fractional(gamma, 1.0)


def test_fractional_rejects_nonpositive_coefficient():
    with pytest.raises(ParameterError):
        make_fractional(1.0, TimeCoefficient.piecewise([(0.0, 1.0), (0.5, 0.0)]))
    with pytest.raises(ParameterError):
        make_fractional(1.0, -2.0)


def test_piecewise_breakpoints_strictly_increasing():
    with pytest.raises(ParameterError):
        TimeCoefficient.piecewise([(0.0, 1.0), (0.0, 2.0)])
    with pytest.raises(ParameterError):
        TimeCoefficient.piecewise([])


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2), st.floats(0, 2), st.floats(0, 2))
def test_piecewise_integral_additive(s, u, t):
    a = TimeCoefficient.piecewise([(0.0, 1.0), (0.3, 2.0), (1.1, 0.25)])
    assert a.integral(s, t) == pytest.approx(a.integral(s, u) + a.integral(u, t), abs=1e-13)


def test_ellipticity_bound_on_grid_frequencies():
    psi = make_fractional(0.5, TimeCoefficient.oscillating(2.0, 0.5, 7.0))
    xi = np.logspace(-4, 4, 400)
    for t in np.linspace(0, 1, 41):
        assert np.all((-psi.evaluate(t, xi)).real >= psi.kappa * xi ** 0.5 * (1 - 1e-14))
    assert psi.kappa == 1.5
    assert math.isfinite(psi.M)
