import math

import numpy as np
import pytest

from neck.mode_solver import (
    classify_sigma,
    decay_exponent_fit,
    decaying_mode,
    hypergeom_params_of,
    integrate_mode_ode,
    jump_at_zero,
    lambda_growth_fit,
    mode_at_sigma,
    mode_for,
    mode_ode_residual,
    mode_value_at_zero_closed_form,
    monotonicity_check,
    variation_of_parameters_value,
    wronskian_at_zero,
    wronskian_by_differences,
    zero_mode,
)
from neck.utils.errors import FitDegeneracyError, ModeOverflowError, SigmaDegeneracyError


OFF_ZERO = np.concatenate([np.linspace(-1.0, -0.01, 200), np.linspace(0.01, 0.5, 100)])


def test_params_of_eigenvalue():
    p = hypergeom_params_of(0.0)
    assert (p.alpha, p.beta, p.gamma) == (4.0, 1.0, 3.0)
    p = hypergeom_params_of(3.0)
    assert p.alpha + p.beta == pytest.approx(5.0)
    assert p.alpha - p.beta == pytest.approx(math.sqrt(45.0))


def test_sigma_classification():
    assert classify_sigma(2.0).in_sigma
    assert not classify_sigma(1.0).in_sigma
    assert classify_sigma(math.sqrt(10.0)).in_sigma


def test_decaying_mode_errors():
    with pytest.raises(SigmaDegeneracyError):
        decaying_mode(2.0, 10.0)
    with pytest.raises(ModeOverflowError):
        decaying_mode(75.0, 10.0)
    with pytest.raises(ValueError):
        decaying_mode(0.0, 10.0)


@pytest.mark.parametrize("lam", [0.0, 1.0, 3.0, 7.0])
@pytest.mark.parametrize("T", [10.0, 50.0])
def test_mode_equation_residual(lam, T):
    m = mode_for(lam, T)
    scale = np.max(np.abs(m(OFF_ZERO)))
    assert np.max(np.abs(mode_ode_residual(m, OFF_ZERO))) < 1e-5 * scale


def test_sigma_mode_residual_and_error_bar():
    m = mode_at_sigma(2.0, 10.0)
    assert m.error_bar <= 1e-6
    scale = np.max(np.abs(m(OFF_ZERO)))
    assert np.max(np.abs(mode_ode_residual(m, OFF_ZERO))) < 1e-5 * scale
    with pytest.raises(ValueError):
        mode_at_sigma(1.0, 10.0)


@pytest.mark.parametrize("lam", [1.0, 3.0])
def test_runge_kutta_oracle(lam):
    T = 10.0
    m = mode_for(lam, T)
    f0, fp0, _ = m.evaluate(np.array([0.05]))
    z = np.linspace(0.1, 0.5, 9)
    rk = integrate_mode_ode(lam, T, 0.05, float(f0[0]), float(fp0[0]), z)
    scale = np.max(np.abs(m(OFF_ZERO)))
    assert np.max(np.abs(rk - m(z))) < 1e-6 * scale


@pytest.mark.parametrize("lam", [0.0, 1.0, 3.0])
def test_jump_at_zero(lam):
    check = jump_at_zero(mode_for(lam, 10.0))
    assert check.expected == pytest.approx(2.0 * math.pi * 100.0)
    assert check.relative_error < 1e-3


def test_zero_mode_closed_form():
    T, psi0 = 10.0, 1.0 / (2.0 * math.pi)
    m = zero_mode(T, psi0)
    z = np.array([-0.3, -0.05, 0.02, 0.4])
    w = T * z
    expected = np.sign(z) * math.pi * T**2 * psi0 * (z + T**2 * z**3 / 3.0) / (1.0 + w * w) ** 2
    np.testing.assert_allclose(m(z), expected, rtol=1e-12)


def test_zero_mode_decays_like_inverse_distance():
    fit = decay_exponent_fit(zero_mode(100.0, 1.0), (0.1, 0.5))
    assert fit.slope == pytest.approx(-1.0, abs=0.05)


@pytest.mark.parametrize("lam", [1.0, 3.0])
def test_decay_exponent(lam):
    fit = decay_exponent_fit(mode_for(lam, 100.0), (0.1, 0.5))
    alpha = hypergeom_params_of(lam).alpha
    assert abs(fit.slope + alpha) / alpha < 0.05


@pytest.mark.parametrize("lam", [2.5, 3.0, 4.5, 7.0, 12.0])
def test_sign_and_monotonicity(lam):
    m = mode_for(lam, 10.0)
    assert m(np.array([0.0]))[0] <= 0.0
    assert monotonicity_check(m, np.linspace(-1.0, 0.5, 601)).passed


def test_value_at_zero_matches_closed_form():
    m = mode_for(3.0, 10.0)
    expected = mode_value_at_zero_closed_form(3.0, 10.0, 1.0)
    assert m(np.array([0.0]))[0] == pytest.approx(expected, rel=1e-7)
    with pytest.raises(ValueError):
        mode_value_at_zero_closed_form(1.5, 10.0, 1.0)


def test_variation_of_parameters_cross_check():
    T = 10.0
    m = mode_for(1.0, T)
    z = np.array([-0.08, -0.03, 0.02, 0.07])
    literal = variation_of_parameters_value(hypergeom_params_of(1.0), T, 1.0, z)
    scale = np.max(np.abs(m(OFF_ZERO)))
    assert np.max(np.abs(literal - m(z))) < 1e-6 * scale


def test_wronskian_closed_form():
    p = hypergeom_params_of(1.0)
    closed = wronskian_at_zero(p, 2.0)
    assert closed.real == 0.0
    assert complex(wronskian_by_differences(p, 2.0)) == pytest.approx(closed, rel=1e-6)
    with pytest.raises(SigmaDegeneracyError):
        wronskian_at_zero(hypergeom_params_of(2.0), 2.0)


def test_amplitude_is_linear_in_the_source():
    m = mode_for(3.0, 10.0)
    z = np.array([-0.2, 0.1])
    np.testing.assert_allclose(m.with_source(2.5)(z), 2.5 * m(z), rtol=1e-14)
    np.testing.assert_allclose(mode_for(3.0, 10.0, psi_at_p=2.5)(z), 2.5 * m(z), rtol=1e-12)


def test_lambda_growth_bound_holds_on_the_samples():
    lams = [2.5, 3.0, 4.5, 7.0, 12.0, 20.0]
    fit = lambda_growth_fit(lams, T=1.0)
    assert math.isfinite(fit.order)
    for lam in fit.lambdas:
        value = abs(mode_value_at_zero_closed_form(lam, 1.0, 1.0))
        assert value <= fit.constant * lam**fit.order * (1.0 + 1e-12)
    with pytest.raises(FitDegeneracyError):
        lambda_growth_fit([1.0, 3.0])
