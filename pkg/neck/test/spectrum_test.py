import math

import numpy as np
import pytest

from neck.spectrum import (
    TWO_PI,
    DPoint,
    ProviderTag,
    export_spectrum_csv,
    fd_laplacian,
    import_spectrum_csv,
    inner_product,
    reproducing_kernel,
    synthetic_weyl_spectrum,
    torus_sigma_values,
    torus_spectrum,
    weyl_count_check,
)


def test_point_wraps_onto_the_torus():
    p = DPoint(TWO_PI + 1.0, -1.0)
    assert p.theta1 == pytest.approx(1.0)
    assert p.theta2 == pytest.approx(TWO_PI - 1.0)


def test_torus_spectrum_layout():
    s = torus_spectrum(4, DPoint(0.0, 0.0))
    lambdas = [pair.lam for pair in s.eigenpairs]
    assert len(lambdas) == 81
    assert lambdas[0] == 0.0
    assert s.psi0 == pytest.approx(1.0 / TWO_PI)
    assert lambdas == sorted(lambdas)
    assert s.provider_tag is ProviderTag.TORUS
    assert s.area == pytest.approx(4.0 * math.pi**2)


def test_eigenfunctions_are_signed_at_the_base_point():
    p = DPoint(1.0, 2.0)
    for pair in torus_spectrum(3, p).eigenpairs:
        assert pair.psi_at_p >= 0.0
        assert float(pair.psi_eval(p.theta1, p.theta2)) == pytest.approx(pair.psi_at_p, abs=1e-14)


def test_orthonormal_on_the_grid():
    pairs = torus_spectrum(2, DPoint(0.3, 0.7)).eigenpairs[:9]
    gram = np.array([[inner_product(first, second, 64) for second in pairs] for first in pairs])
    np.testing.assert_allclose(gram, np.eye(len(pairs)), atol=1e-12)


def test_eigenfunctions_solve_the_laplace_equation():
    s = torus_spectrum(3, DPoint(0.0, 0.0))
    t1, t2 = np.array([0.4, 2.0, 5.1]), np.array([1.3, 0.2, 3.3])
    for pair in s.eigenpairs[1:12]:
        lap = fd_laplacian(pair.psi_eval, t1, t2)
        np.testing.assert_allclose(lap, -pair.lam**2 * pair.psi_eval(t1, t2), atol=1e-5)


def test_reproducing_kernel_at_the_base_point():
    s = torus_spectrum(2, DPoint(0.0, 0.0))
    # cos(t1) and cos(t2), each 1 / (sqrt 2 pi) at p; the sines vanish there
    assert float(reproducing_kernel(s, 1.0, 0.0, 0.0)) == pytest.approx(1.0 / math.pi**2)
    with pytest.raises(ValueError):
        reproducing_kernel(s, 1.2, 0.0, 0.0)


def test_torus_weyl_counts():
    report = weyl_count_check(torus_spectrum(8, DPoint(0.0, 0.0)))
    assert report.holds
    assert report.cutoff == 8.0
    # [0, 1) holds the constant, [1, 2) holds lam = 1 and sqrt 2 with four eigenfunctions each
    assert report.bin_counts[:2] == (1, 8)


def test_synthetic_spectrum_obeys_its_counting_bound():
    s = synthetic_weyl_spectrum(60, 2.0, seed=11)
    assert len(s.eigenpairs) == 60
    assert s.provider_tag is ProviderTag.SYNTHETIC
    assert weyl_count_check(s, C_weyl=2.0).holds
    psi = [pair.psi_at_p for pair in s.eigenpairs[1:]]
    assert max(psi) <= 1.0


def test_synthetic_spectrum_is_seeded():
    first = [pair.lam for pair in synthetic_weyl_spectrum(30, 2.0, seed=3).eigenpairs]
    second = [pair.lam for pair in synthetic_weyl_spectrum(30, 2.0, seed=3).eigenpairs]
    assert first == second
    with pytest.raises(ValueError):
        synthetic_weyl_spectrum(30, 0.5, seed=3)


def test_torus_sigma_values():
    assert torus_sigma_values(8.0) == pytest.approx([2.0, math.sqrt(10.0), math.sqrt(18.0), math.sqrt(40.0)])


def test_spectrum_csv_rebuilds_eigenfunctions(tmp_path):
    s = torus_spectrum(2, DPoint(0.5, 1.5))
    path = tmp_path / "spectrum.csv"
    export_spectrum_csv(s, str(path), ["command=test"])

    text = path.read_text()
    assert text.startswith("# tool=neck")
    assert "# provider=torus" in text

    loaded = import_spectrum_csv(str(path))
    assert loaded.base_point == s.base_point
    assert loaded.complete_below == s.complete_below
    t1, t2 = np.array([0.1, 4.0]), np.array([2.2, 5.9])
    for original, rebuilt in zip(s.eigenpairs, loaded.eigenpairs):
        assert rebuilt.lam == original.lam
        np.testing.assert_allclose(rebuilt.psi_eval(t1, t2), original.psi_eval(t1, t2), atol=1e-15)
