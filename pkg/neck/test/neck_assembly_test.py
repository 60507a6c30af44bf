import math
from dataclasses import replace

import numpy as np
import pytest

from neck.neck_assembly import (
    UNIT_SOURCE,
    FieldGrid,
    SingularChart,
    build_neck,
    degree_integral_D_slice,
    degree_integral_sphere,
    deltah_equation_residual,
    exact_family_profile,
    corrected_h,
    linearized_residual,
    maineqn1_residual,
    maineqn2_residual,
    maineqn3_residual,
    outer_h,
    singular_leading_terms,
    smoothstep,
    write_field_dump,
    zone_labels,
)
from neck.utils.errors import NeckParameterError, SingularityError, ZoneOverlapError


def test_smoothstep_endpoints():
    s, ds = smoothstep(np.array([-0.5, 0.0, 0.5, 1.0, 2.0]))
    np.testing.assert_allclose(s, [0.0, 0.0, 0.5, 1.0, 1.0])
    assert ds[1] == 0.0 and ds[3] == 0.0


def test_zone_labels():
    labels = zone_labels(np.array([-0.5, -0.06, -0.01, 0.01, 0.07, 0.2]), 10.0, 1.0)
    assert list(labels) == ['outer', 'blend', 'inner', 'inner', 'blend', 'outer']


def test_outer_h_derivative():
    z = np.array([-0.8, -0.3, 0.2, 0.45])
    step = 1e-6
    h, h_z = outer_h(z, 0, -1, 25.0)
    difference = (outer_h(z + step, 0, -1, 25.0)[0] - outer_h(z - step, 0, -1, 25.0)[0]) / (2.0 * step)
    np.testing.assert_allclose(h_z, difference, rtol=1e-6)
    assert np.all(h > 0.0)


def test_parameter_checks(torus):
    with pytest.raises(ZoneOverlapError):
        build_neck(torus, 2.0)
    with pytest.raises(NeckParameterError):
        build_neck(torus, 25.0, 1, 1)
    with pytest.raises(NeckParameterError):
        build_neck(torus, 25.0, lambda_max=5.0)


@pytest.mark.parametrize("a,c", [(0.0, 0.01), (1.0, 0.05)])
def test_exact_family_solves_the_reduced_equation(a, c):
    profile = exact_family_profile(a, c)
    z = np.linspace(-0.9, 0.5, 401)
    z = z[z != 0.0]
    assert profile.T == pytest.approx(c**-0.5)
    assert np.max(np.abs(maineqn1_residual(profile, z))) < 1e-12 * max(1.0, np.max(np.abs(2.0 * profile.h(z) * z)))


def test_exact_family_rejects_nonpositive_c():
    with pytest.raises(NeckParameterError):
        exact_family_profile(0.0, 0.0)


def test_singular_leading_terms():
    chart = SingularChart.on_axis(np.array([0.5, 2.0]))
    h_lead, chi_lead = singular_leading_terms(chart, 10.0, UNIT_SOURCE)
    np.testing.assert_allclose(h_lead, 10.0 / (2.0 * chart.r_w))
    np.testing.assert_allclose(chi_lead, 1.0 / (2.0 * 10.0 * chart.r_w))
    with pytest.raises(SingularityError):
        singular_leading_terms(SingularChart.on_axis(np.array([0.0])), 10.0)


def test_sphere_degree_integral():
    for eps in (0.05, 0.025):
        value = degree_integral_sphere(None, 50.0, eps)
        assert value == pytest.approx(-1.0 + 17.0 / 15.0 * eps**2, abs=1e-12)
    coarse, fine = degree_integral_sphere(None, 50.0, 0.05), degree_integral_sphere(None, 50.0, 0.025)
    assert abs(fine + 1.0) < abs(coarse + 1.0) < 0.01


def test_source_normalization(small_neck):
    assert small_neck.source_total == pytest.approx(-4.0 * math.pi**2)
    assert small_neck.source_charge == pytest.approx(2.0 * math.pi)
    assert small_neck.g_inf == -0.5


def test_D_slice_degree(small_neck):
    assert degree_integral_D_slice(small_neck, -0.5, nodes=32) == pytest.approx(0.0, abs=1e-8)
    assert degree_integral_D_slice(small_neck, 0.25, nodes=32) == pytest.approx(-1.0, abs=1e-8)
    with pytest.raises(ValueError):
        degree_integral_D_slice(small_neck, 0.01)


def test_delta_h_equation_off_the_base_point(small_neck):
    t1, t2, z = np.meshgrid([1.0, 2.5], [1.0, 4.0], [-0.5, -0.2, 0.1, 0.3], indexing='ij')
    t1, t2, z = t1.ravel(), t2.ravel(), z.ravel()
    residual = deltah_equation_residual(small_neck, t1, t2, z)
    scale = np.max(np.abs(small_neck.delta_h(t1, t2, z)))
    assert np.max(np.abs(residual)) < 1e-3 * scale


def test_linearized_equation(small_neck):
    t1, t2 = np.array([0.7, 2.0, 3.5]), np.array([0.2, 1.1, 5.0])
    z = np.array([-0.3, 0.04, 0.2])
    residual = linearized_residual(small_neck, t1, t2, z)
    scale = np.max(np.abs(small_neck.delta_h(t1, t2, z)))
    assert np.max(np.abs(residual)) < 1e-6 * scale


def test_h_is_the_outer_closed_form_away_from_the_neck(small_neck):
    h = corrected_h(small_neck)
    z = np.array([-0.9, -0.4, 0.3])
    h_out, _ = outer_h(z, 0, -1, small_neck.T)
    np.testing.assert_allclose(h(1.0, 2.0, z), h_out, rtol=1e-15)
    # the degree-0 end is h_0 itself
    z = np.array([-0.9, -0.4])
    np.testing.assert_allclose(h(1.0, 2.0, z), 1.0 / (z * z + small_neck.T**-2), rtol=1e-14)


def test_corrected_h_is_positive(torus):
    h = corrected_h(build_neck(torus, 50.0, 0, -1, lambda_max=1.5))
    t1, t2, z = np.meshgrid(np.linspace(0.0, 6.0, 10), np.linspace(0.0, 6.0, 10), np.linspace(-1.0, 0.5, 100), indexing='ij')
    assert np.all(h(t1.ravel(), t2.ravel(), z.ravel()) > 0.0)


def test_blend_zone_departs_from_h0_plus_delta_h_like_1_over_T(torus):
    gaps = []
    for T in (20.0, 40.0, 80.0):
        nd = build_neck(torus, T, 0, -1, lambda_max=0.0)
        z = np.array([-0.75 * nd.C2 / T])
        inner = 1.0 / (z * z + T**-2) + nd.delta_h(1.0, 2.0, z)
        gaps.append(float(np.abs(corrected_h(nd)(1.0, 2.0, z) - inner)[0]) / T**2)
    orders = np.diff(np.log(gaps)) / math.log(2.0)
    np.testing.assert_allclose(orders, -1.0, atol=0.05)


def test_corrected_h_needs_separated_zones(small_neck):
    with pytest.raises(ZoneOverlapError):
        corrected_h(replace(small_neck, T=1.5))


def test_reduced_residuals_shrink_with_T(torus, small_neck):
    larger = build_neck(torus, 20.0, 0, -1, lambda_max=1.5)
    z = np.array([-0.3, -0.1, 0.1, 0.3])
    second, third = [], []
    for nd in (small_neck, larger):
        second.append(float(np.max(np.abs(maineqn2_residual(nd, 2.0, 1.5, z)))))
        third.append(float(np.max(np.abs(maineqn3_residual(nd, 2.0, 1.5, z)))))
    assert all(np.isfinite(second + third))
    # chi_zz + Delta_D h loses the zero mode exactly; the nonzero modes fall off at least like T^-2
    assert math.log(second[1] / second[0]) / math.log(2.0) < -1.5
    # chi - 1 - z chi_z keeps the O(1/T) constants the nonzero modes leave on chi
    assert -1.3 < math.log(third[1] / third[0]) / math.log(2.0) < -0.7


def test_evaluation_is_deterministic(small_neck):
    t1, t2, z = np.array([0.3, 1.9]), np.array([2.2, 0.4]), np.array([-0.03, 0.02])
    first = small_neck.h_eval(t1, t2, z)
    second = small_neck.h_eval(t1, t2, z)
    assert np.array_equal(first, second)


def test_zero_mode_profile_is_D_invariant(small_neck):
    profile = small_neck.zero_mode_profile()
    assert profile.T == small_neck.T
    assert profile.potential_offset == pytest.approx(-math.log(small_neck.T**2))
    zero_mode = small_neck.zero_mode_only()
    assert all(group.lam == 0.0 for group in zero_mode.delta_h.groups)
    z = np.array([-0.3, 0.02])
    np.testing.assert_allclose(profile.h(z), zero_mode.h_eval(2.0, 5.0, z), rtol=1e-13)


def test_field_dump(small_neck, tmp_path):
    path = tmp_path / "assemble.csv"
    grid = FieldGrid(np.array([0.5, 2.0]), np.array([1.0]), np.array([-0.5, 0.2]))
    write_field_dump(small_neck, str(path), grid, ["command=assemble"])

    lines = path.read_text().splitlines()
    assert "# T=10" in lines
    assert "# grid=2x1x2" in lines
    header = lines.index("theta1,theta2,z,h,chi,delta_h,delta_chi")
    assert len(lines) - header - 1 == 4
