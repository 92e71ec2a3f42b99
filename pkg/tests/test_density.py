import numpy as np
import pytest

from fermipole.contour import eval_scalar, gapless_pole_set, gapped_pole_set, sign_pole_set
from fermipole.density import (
    NpoleSearchPolicy,
    apply_pole_expansion,
    delta_rho_rel,
    exact_density,
    minimal_npole,
    spectral_density,
)
from fermipole.lattice import LatticeSpec, build_hamiltonian
from fermipole.linalg import matrix_function, sym_eig
from fermipole.multipole import (
    MultipoleConfig,
    build_simple_pole_expansion,
    chebyshev_tail_fit,
    eval_tail_cheb,
)
from fermipole.special import fermi_scalar


def random_symmetric(n, rng, lo=0.0, hi=4.0):
    w = np.sort(rng.uniform(lo, hi, n))
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (q * w) @ q.T


@pytest.fixture(scope="module")
def small_system():
    rng = np.random.default_rng(77)
    H = random_symmetric(48, rng)
    return H, sym_eig(H)


class TestExactDensity:
    def test_diagonal_sums_to_occupation(self, small_system):
        H, eig = small_system
        mu = 2.0
        res = exact_density(eig, mu, 40.0)
        assert res.electron_count == pytest.approx(
            float(np.sum(fermi_scalar(40.0 * (eig.eigenvalues - mu)))), rel=1e-13
        )
        assert np.sum(res.diagonal) == pytest.approx(res.electron_count, rel=1e-12)

    def test_two_by_two_hand_check(self):
        H = np.array([[1.0, 0.0], [0.0, 3.0]])
        res = exact_density(H, 2.0, 5.0)
        assert res.diagonal == pytest.approx(
            [fermi_scalar(-5.0), fermi_scalar(5.0)], rel=1e-14
        )

    def test_zero_temperature_step(self, small_system):
        H, eig = small_system
        mu = 0.5 * (eig.eigenvalues[19] + eig.eigenvalues[20])
        res = exact_density(eig, mu, np.inf)
        assert res.electron_count == pytest.approx(40.0, abs=1e-12)

    def test_projector_limit(self, small_system):
        # P/2 is a projector at effectively zero temperature
        H, eig = small_system
        mu = 0.5 * (eig.eigenvalues[19] + eig.eigenvalues[20])
        beta = 1e8
        P = matrix_function(eig, lambda w: fermi_scalar(beta * (w - mu)))
        assert np.max(np.abs(P @ (P - 2.0 * np.eye(48)))) < 1e-6

    def test_occupations_within_range(self, small_system):
        H, eig = small_system
        res = exact_density(eig, 1.7, 90.0)
        assert np.all(res.diagonal >= 0.0)
        assert np.all(res.diagonal <= 2.0 + 1e-4)


class TestApplyPoleExpansion:
    def test_spectrum_at_mu_gives_unit_density(self):
        # all eigenvalues at mu: the density saturates at fermi(0) = 1
        H = 1.3 * np.eye(12)
        ps = gapless_pole_set(1.0, 500.0, 24)
        res = apply_pole_expansion(H, 1.3, ps)
        assert res.diagonal == pytest.approx(np.ones(12), abs=1e-7)

    def test_diagonal_reduction_contour(self, rng):
        # diagonal H: matrix route equals the scalar rational function
        w = np.sort(rng.uniform(-3.5, 3.5, 32))
        H = np.diag(w)
        ps = gapped_pole_set(0.1, 4.0, 200.0, 20)
        res = apply_pole_expansion(H, 0.0, ps)
        assert np.max(np.abs(res.diagonal - eval_scalar(ps, w))) < 1e-12

    def test_solve_equals_spectral(self, small_system):
        H, eig = small_system
        mu = 1.9
        ps = gapped_pole_set(0.05, 4.2, 300.0, 16)
        a = apply_pole_expansion(H, mu, ps)
        b = spectral_density(eig, mu, ps)
        assert np.max(np.abs(a.diagonal - b.diagonal)) < 1e-12

    def test_matsubara_route_with_tail(self, small_system):
        H, eig = small_system
        mu, beta = 1.9, 120.0
        cfg = MultipoleConfig(P=16, n_groups=7)
        ps = build_simple_pole_expansion(cfg)
        lim = 1.05 * beta * 4.2
        tail = chebyshev_tail_fit(cfg.m_pole, (-lim, lim), 1e-7, beta=beta)
        res = apply_pole_expansion(H, mu, ps, tail=tail)
        oracle = exact_density(eig, mu, beta)
        assert np.max(np.abs(res.diagonal - oracle.diagonal)) < 1e-6
        spectral = spectral_density(eig, mu, ps, tail, beta=beta)
        assert np.max(np.abs(res.diagonal - spectral.diagonal)) < 1e-12

    def test_matsubara_requires_tail(self):
        ps = build_simple_pole_expansion(MultipoleConfig(P=4, n_groups=5))
        with pytest.raises(ValueError):
            apply_pole_expansion(np.eye(4), 0.0, ps, tail=None, beta=10.0)

    def test_contour_rejects_tail(self):
        ps = gapped_pole_set(0.1, 4.0, 100.0, 6)
        tail = chebyshev_tail_fit(127, (-500.0, 500.0), 1e-7)
        with pytest.raises(ValueError):
            apply_pole_expansion(np.eye(4), 0.0, ps, tail=tail)

    def test_worker_count_does_not_change_result(self, small_system):
        H, _ = small_system
        ps = sign_pole_set(0.05, 4.2, 18)
        a = apply_pole_expansion(H, 1.9, ps, workers=1)
        b = apply_pole_expansion(H, 1.9, ps, workers=4)
        assert np.array_equal(a.diagonal, b.diagonal)

    def test_full_matrix_mode(self, small_system):
        H, eig = small_system
        mu, beta = 2.1, 150.0
        ps = gapped_pole_set(0.03, 4.3, beta, 24)
        res = apply_pole_expansion(H, mu, ps, diagonal_only=False)
        oracle = matrix_function(eig, lambda w: fermi_scalar(beta * (w - mu)))
        assert res.full_matrix is not None
        assert np.max(np.abs(res.full_matrix - oracle)) < 1e-8

    def test_result_is_real_valued(self, small_system):
        H, _ = small_system
        ps = gapped_pole_set(0.05, 4.2, 300.0, 16)
        res = apply_pole_expansion(H, 1.9, ps)
        assert res.diagonal.dtype == np.float64


class TestDeltaRho:
    def test_zero_for_identical(self, small_system):
        H, eig = small_system
        a = exact_density(eig, 2.0, 50.0)
        assert delta_rho_rel(a, a, 10.0) == 0.0

    def test_single_site_arithmetic(self):
        a = np.zeros(1024)
        b = np.zeros(1024)
        b[17] = 1e-6
        ra = exact_density(np.diag(a), -1.0, 1.0)
        from fermipole.density import DensityResult

        rb = DensityResult(diagonal=ra.diagonal + (b - a), electron_count=0.0, method_tag="x", n_pole_used=0)
        assert delta_rho_rel(ra, rb, 1024.0) == pytest.approx(9.765625e-10, rel=1e-12)

    def test_dimension_mismatch(self):
        from fermipole.density import DensityResult

        a = DensityResult(np.zeros(3), 0.0, "x", 0)
        b = DensityResult(np.zeros(4), 0.0, "x", 0)
        with pytest.raises(ValueError):
            delta_rho_rel(a, b, 1.0)


class TestMinimalNpole:
    def test_finds_documented_counts(self, bench16):
        beta = bench16.beta_for(4208.0)
        mu = bench16.mu_for("gapped_default", beta)
        from fermipole.lattice import spectral_window

        w = spectral_window(bench16.eig.eigenvalues, mu, beta)

        def build(n):
            return gapped_pole_set(w.e_gap, w.e_max, beta, n // 2), None

        n, err = minimal_npole(bench16.eig, mu, beta, build, tol=1e-6)
        assert n == 40
        assert err <= 1e-6

    def test_error_metric_improves_with_poles(self, bench16):
        beta = bench16.beta_for(4208.0)
        mu = bench16.mu_for("gapped_default", beta)
        from fermipole.lattice import spectral_window

        w = spectral_window(bench16.eig.eigenvalues, mu, beta)
        oracle = exact_density(bench16.eig, mu, beta)
        errs = []
        for q in (6, 12, 18, 24):
            ps = gapped_pole_set(w.e_gap, w.e_max, beta, q)
            approx = spectral_density(bench16.eig, mu, ps, site_weights=bench16.site_weights)
            errs.append(delta_rho_rel(approx, oracle, oracle.electron_count))
        assert errs[-1] < errs[0] * 1e-3

    def test_builder_count_mismatch_rejected(self, bench16):
        beta = bench16.beta_for(4208.0)
        mu = bench16.mu_for("gapped_default", beta)

        def bad_build(n):
            return gapped_pole_set(0.01, 4.0, beta, 3), None

        with pytest.raises(ValueError):
            minimal_npole(bench16.eig, mu, beta, bad_build, tol=1e-6)

    def test_cap_exceeded_reported(self, bench16):
        beta = bench16.beta_for(4208.0)
        mu = bench16.mu_for("gapped_default", beta)

        def build(n):
            return gapped_pole_set(1e-9, 4.0, beta, n // 2), None

        with pytest.raises(RuntimeError):
            minimal_npole(
                bench16.eig, mu, beta, build, tol=1e-12, search=NpoleSearchPolicy(4, 4, 16)
            )


class TestTailMatrixEvaluation:
    def test_clenshaw_matrix_matches_scalar(self, rng):
        w = np.sort(rng.uniform(-200.0, 200.0, 20))
        tail = chebyshev_tail_fit(63, (-260.0, 260.0), 1e-9)
        from fermipole.density import _clenshaw_matrix

        T = _clenshaw_matrix(tail, np.diag(w))
        assert np.max(np.abs(np.diagonal(T) - eval_tail_cheb(tail, w))) < 1e-13
