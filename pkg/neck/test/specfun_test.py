import cmath
import math

import numpy as np
import pytest
from scipy import special

from neck.mode_solver import hypergeom_params_of
from neck.specfun import (
    HypergeomParams,
    gamma_fn,
    gauss_half_value,
    hyp2f1,
    hyp2f1_bridge,
    hyp2f1_continued,
    hyp2f1_derivative,
    hyp2f1_disk,
    pochhammer,
    rgamma,
    series_coefficients,
)
from neck.utils.errors import BranchCutError, DegenerateParametersError, DomainError, NeckError, PoleError


def test_gamma_values():
    assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-13)
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert gamma_fn(-0.5) == pytest.approx(-2.0 * math.sqrt(math.pi), rel=1e-13)
    assert gamma_fn(7.3) == pytest.approx(math.gamma(7.3), rel=1e-12)


def test_gamma_poles():
    for x in (0.0, -1.0, -4.0):
        with pytest.raises(PoleError):
            gamma_fn(x)
        assert rgamma(x) == 0.0
    # the hierarchy doubles as the builtin
    with pytest.raises(ValueError):
        gamma_fn(-2.0)


def test_pochhammer():
    assert pochhammer(3, 4) == 360.0
    assert pochhammer(0.5, 0) == 1.0
    with pytest.raises(ValueError):
        pochhammer(1.0, -1)


def test_params_are_ordered():
    p = HypergeomParams(1.0, 2.0, 3.0)
    assert (p.alpha, p.beta) == (2.0, 1.0)
    with pytest.raises(PoleError):
        HypergeomParams(1.0, 2.0, -1.0)


def test_series_coefficients():
    # F(1, 1, 2; x) = -log(1 - x) / x
    np.testing.assert_allclose(series_coefficients(1.0, 1.0, 2.0, 5), [1.0, 1 / 2, 1 / 3, 1 / 4, 1 / 5], rtol=1e-15)


def test_disk_series_closed_form():
    p = HypergeomParams(1.0, 1.0, 2.0)
    result = hyp2f1_disk(p, 0.5)
    assert result.value == pytest.approx(-math.log(0.5) / 0.5, rel=1e-13)
    assert result.condition == pytest.approx(1.0)


def test_disk_series_rejects_outer_points():
    with pytest.raises(DomainError):
        hyp2f1_disk(HypergeomParams(1.0, 1.0, 2.0), 0.97)


@pytest.mark.parametrize("lam", [0.5, 1.0, 1.5, 3.3])
def test_gauss_identity(lam):
    p = hypergeom_params_of(lam)
    expected = gauss_half_value(p)
    value = hyp2f1_disk(p, 0.5).value
    assert abs(value - expected) / abs(expected) < 1e-10


def test_gauss_identity_needs_matching_gamma():
    with pytest.raises(DomainError):
        gauss_half_value(HypergeomParams(1.0, 2.0, 3.0))


def test_continuation_on_negative_axis():
    p = HypergeomParams(1.3, 0.4, 2.1)
    value = complex(hyp2f1(p, -3.0))
    assert value.real == pytest.approx(special.hyp2f1(1.3, 0.4, 2.1, -3.0), rel=1e-10)
    assert abs(value.imag) < 1e-12


@pytest.mark.parametrize("x", [complex(0.5, 2.0), complex(0.5, -2.0), complex(-1.5, 0.7)])
def test_continuation_off_axis(x):
    p = HypergeomParams(1.3, 0.4, 2.1)
    assert complex(hyp2f1(p, x)) == pytest.approx(complex(special.hyp2f1(1.3, 0.4, 2.1, x)), rel=1e-8)


def test_bridge_matches_continuation_just_outside_the_unit_circle():
    p = hypergeom_params_of(1.0)
    x = 1.06 * cmath.exp(2j * math.pi / 3)
    bridge = complex(hyp2f1_bridge(p, x))
    continued = complex(hyp2f1_continued(p, x))
    assert abs(bridge - continued) / abs(continued) < 1e-9


def test_bridge_on_the_annulus():
    p = HypergeomParams(1.3, 0.4, 2.1)
    x = complex(0.5, 0.85)
    assert complex(hyp2f1(p, x)) == pytest.approx(complex(special.hyp2f1(1.3, 0.4, 2.1, x)), rel=1e-8)


def test_continuation_errors():
    with pytest.raises(DegenerateParametersError):
        hyp2f1_continued(HypergeomParams(2.5, 0.5, 3.0), -3.0)
    with pytest.raises(BranchCutError):
        hyp2f1_continued(HypergeomParams(1.3, 0.4, 2.1), 2.0)
    with pytest.raises(NeckError):
        hyp2f1_continued(HypergeomParams(1.3, 0.4, 2.1), 2.0)


def test_derivative_rule():
    p = HypergeomParams(1.3, 0.4, 2.1)
    x, step = complex(0.5, 0.3), 1e-5
    difference = (complex(hyp2f1(p, x + step)) - complex(hyp2f1(p, x - step))) / (2.0 * step)
    assert complex(hyp2f1_derivative(p, x)) == pytest.approx(difference, rel=1e-8)
