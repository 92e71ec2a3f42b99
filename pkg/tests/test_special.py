import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import digamma as scipy_digamma

from fermipole.special import (
    EllipticAccuracyWarning,
    agm,
    complete_elliptic_k,
    digamma_complex,
    elliptic_modulus,
    fermi_scalar,
    jacobi_sn_cn_dn,
)

EULER_GAMMA = 0.5772156649015329


def simpson_elliptic_k(k, n=200_001):
    """Independent quadrature oracle for K(k)."""
    theta = np.linspace(0.0, np.pi / 2, n)
    f = 1.0 / np.sqrt(1.0 - (k * np.sin(theta)) ** 2)
    h = theta[1] - theta[0]
    return h / 3 * (f[0] + f[-1] + 4 * np.sum(f[1:-1:2]) + 2 * np.sum(f[2:-1:2]))


class TestCompleteEllipticK:
    def test_k_zero(self):
        assert complete_elliptic_k(0.0) == pytest.approx(np.pi / 2, rel=1e-15)

    def test_half(self):
        # frozen from the quadrature oracle (also AGM fixed point)
        assert complete_elliptic_k(0.5) == pytest.approx(1.6857503548125960, rel=1e-14)
        assert complete_elliptic_k(0.5) == pytest.approx(simpson_elliptic_k(0.5), rel=1e-12)

    def test_small_modulus_series(self):
        # K(k) - pi/2 ~ (pi/8) k^2 for k -> 0
        assert complete_elliptic_k(1e-4) - np.pi / 2 == pytest.approx(
            3.9269908390765654e-9, rel=1e-6
        )

    @pytest.mark.parametrize("k", [0.1, 0.3, 0.7, 0.95])
    def test_against_quadrature(self, k):
        assert complete_elliptic_k(k) == pytest.approx(simpson_elliptic_k(k), rel=1e-12)

    @pytest.mark.parametrize("bad", [-0.1, 1.0, 1.5])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            complete_elliptic_k(bad)

    def test_agm_duality(self):
        # K(k) * agm(1, k') = pi/2
        for k in (0.1, 0.5, 0.9, 1 - 1e-6):
            mod = elliptic_modulus(k)
            assert mod.K * agm(1.0, mod.k_complement) == pytest.approx(np.pi / 2, rel=1e-13)


class TestEllipticModulus:
    @pytest.mark.parametrize("k", [0.1, 0.5, 0.9, 1 - 1e-6])
    def test_complement_consistency(self, k):
        mod = elliptic_modulus(k)
        assert mod.k**2 + mod.k_complement**2 == pytest.approx(1.0, rel=1e-14)

    def test_k_prime_is_complementary_K(self):
        mod = elliptic_modulus(0.6)
        assert mod.K_prime == pytest.approx(complete_elliptic_k(0.8), rel=1e-14)


class TestJacobi:
    def test_origin(self):
        mod = elliptic_modulus(0.5)
        sn, cn, dn = jacobi_sn_cn_dn(0.0 + 0.0j, mod)
        assert abs(sn) < 1e-15
        assert cn == pytest.approx(1.0, abs=1e-15)
        assert dn == pytest.approx(1.0, abs=1e-15)

    def test_quarter_period(self):
        # sn(K) = 1, cn(K) = 0, dn(K) = k'
        for k in (0.3, 0.7, 0.95):
            mod = elliptic_modulus(k)
            sn, cn, dn = jacobi_sn_cn_dn(complex(mod.K), mod)
            assert sn.real == pytest.approx(1.0, rel=1e-12)
            assert abs(cn) < 1e-12
            assert dn.real == pytest.approx(mod.k_complement, rel=1e-12)

    def test_complex_point_reference(self):
        # frozen 30-digit reference values at t = 0.3 K + 0.4 K' i, k = 0.7
        mod = elliptic_modulus(0.7)
        t = 0.3 * mod.K + 0.4j * mod.K_prime
        sn, cn, dn = jacobi_sn_cn_dn(t, mod)
        assert sn == pytest.approx(0.7257740247530651 + 0.6312666347312117j, rel=1e-12)
        assert cn == pytest.approx(1.0335603674930949 - 0.4432802771767034j, rel=1e-12)
        assert dn == pytest.approx(0.9940623942435278 - 0.2258378298271965j, rel=1e-12)

    @pytest.mark.parametrize("k", [0.1, 0.5, 0.9, 1 - 1e-6])
    def test_identities_on_stripe(self, k):
        # sn^2 + cn^2 = 1 and dn^2 + k^2 sn^2 = 1 on a 50 x 20 grid
        mod = elliptic_modulus(k)
        x = np.linspace(-0.98 * mod.K, 0.98 * mod.K, 50)
        y = np.linspace(0.02 * mod.K_prime, 0.9 * mod.K_prime, 20)
        t = x[:, None] + 1j * y[None, :]
        sn, cn, dn = jacobi_sn_cn_dn(t, mod)
        assert np.max(np.abs(sn**2 + cn**2 - 1.0)) < 1e-12
        assert np.max(np.abs(dn**2 + (k * sn) ** 2 - 1.0)) < 1e-12

    def test_pole_warning(self):
        mod = elliptic_modulus(0.5)
        with pytest.warns(EllipticAccuracyWarning):
            jacobi_sn_cn_dn(1e-9 + 1j * mod.K_prime, mod)


class TestDigamma:
    def test_at_one(self):
        assert digamma_complex(1.0 + 0.0j) == pytest.approx(-EULER_GAMMA, rel=1e-14)

    def test_recurrence_at_two(self):
        assert digamma_complex(2.0 + 0.0j) == pytest.approx(1.0 - EULER_GAMMA, rel=1e-14)

    def test_large_complex_reference(self):
        # frozen high-precision value; exercises the asymptotic branch
        val = digamma_complex(100.5 + 1000j)
        assert val == pytest.approx(6.9127304039715025 + 1.4711276661345981j, rel=1e-13)

    def test_recurrence_property(self, rng):
        # absolute tolerance: psi values are O(10), so the difference of two
        # evaluations carries a few 1e-15 regardless of how small 1/z is
        re = rng.uniform(0.5, 200.0, 100)
        im = rng.uniform(-1e4, 1e4, 100)
        z = re + 1j * im
        lhs = digamma_complex(z + 1.0) - digamma_complex(z)
        assert np.max(np.abs(lhs - 1.0 / z)) < 1e-13

    def test_against_scipy(self, rng):
        z = rng.uniform(0.5, 50, 40) + 1j * rng.uniform(-100, 100, 40)
        ours = digamma_complex(z)
        ref = scipy_digamma(z)
        assert np.max(np.abs(ours - ref) / np.abs(ref)) < 1e-13

    def test_pole_rejected(self):
        with pytest.raises(ValueError):
            digamma_complex(0.0 + 0.0j)
        with pytest.raises(ValueError):
            digamma_complex(-3.0 + 0.0j)


class TestFermiScalar:
    def test_zero(self):
        assert fermi_scalar(0.0) == 1.0

    def test_saturation(self):
        assert fermi_scalar(1e5) == 0.0
        assert fermi_scalar(-1e5) == 2.0
        assert np.isfinite(fermi_scalar(1e6))

    def test_reference_value(self):
        # frozen from 2 / (1 + e^2) at 30 digits
        assert fermi_scalar(2.0) == pytest.approx(0.23840584404423511, rel=1e-15)

    @given(st.floats(min_value=-700, max_value=700, allow_nan=False))
    def test_particle_hole_symmetry(self, x):
        assert fermi_scalar(x) + fermi_scalar(-x) == pytest.approx(2.0, abs=1e-15)

    def test_vectorized(self):
        x = np.array([-2.0, 0.0, 2.0])
        out = fermi_scalar(x)
        assert out.shape == (3,)
        assert out[1] == 1.0
