import numpy as np
import pytest
from scipy import stats as scipy_stats

from ldinfomax.datagen import (
    ScenarioConfig,
    add_noise,
    copula_t_uniforms,
    load_scenario,
    make_scenario,
    mixing_matrix,
    save_scenario,
    sources_in_polytope,
    toeplitz_correlation,
)
from ldinfomax.polytopes import contains, preset


class TestToeplitzCorrelation:
    def test_identity_at_zero(self):
        assert np.allclose(toeplitz_correlation(2, 0.0), np.eye(2))

    def test_first_row(self):
        c = toeplitz_correlation(5, 0.5)
        assert np.allclose(c[0], [1.0, 0.5, 0.5, 0.5, 0.5])
        assert np.allclose(c, c.T)

    def test_eigenvalues_high_correlation(self):
        w = np.sort(np.linalg.eigvalsh(toeplitz_correlation(3, 0.9)))
        assert np.allclose(w, [0.1, 0.1, 2.8], atol=1e-12)

    def test_rejects_non_pd(self):
        with pytest.raises(ValueError):
            toeplitz_correlation(3, -0.6)
        with pytest.raises(ValueError):
            toeplitz_correlation(3, 1.0)


class TestCopulaUniforms:
    def test_range(self):
        u = copula_t_uniforms(4, 500, 0.3, 4, seed=0)
        assert u.shape == (4, 500)
        assert u.min() >= 0.0 and u.max() <= 1.0

    def test_uniform_marginals_uncorrelated(self):
        u = copula_t_uniforms(5, 10000, 0.0, 4, seed=1)
        for i in range(5):
            ks = scipy_stats.kstest(u[i], "uniform").statistic
            assert ks < 0.02

    def test_pairwise_correlation_at_half(self):
        u = copula_t_uniforms(5, 10000, 0.5, 4, seed=2)
        corr = np.corrcoef(u)
        off = corr[np.triu_indices(5, 1)]
        assert np.all(off >= 0.35) and np.all(off <= 0.60)

    def test_deterministic(self):
        a = copula_t_uniforms(3, 100, 0.4, 4, seed=7)
        b = copula_t_uniforms(3, 100, 0.4, 4, seed=7)
        assert np.array_equal(a, b)


class TestSourcesInPolytope:
    def test_nonneg_box_is_identity(self):
        u = np.random.default_rng(3).random((3, 50))
        out = sources_in_polytope(u, preset("linf_nonneg", 3))
        assert np.array_equal(out, u)

    def test_signed_box_mapping(self):
        u = np.array([[0.0, 0.5, 1.0]])
        out = sources_in_polytope(u, preset("linf", 1))
        assert np.allclose(out, [[-1.0, 0.0, 1.0]])

    def test_rejection_acceptance_rate_two_dims(self):
        # for any radially symmetric copula P(u1 + u2 <= 1) = 1/2
        u = copula_t_uniforms(2, 100000, 0.0, 4, seed=4)
        rate = np.mean(u.sum(axis=0) <= 1.0)
        assert abs(rate - 0.5) < 0.05

    def test_rejection_fills_target_count(self):
        rng = np.random.default_rng(5)
        p = preset("l1_nonneg", 3)
        out = sources_in_polytope(
            rng.random((3, 400)), p, mode="reject", draw=lambda k: rng.random((3, k))
        )
        assert out.shape == (3, 400)
        assert contains(p, out, tol=1e-12)

    def test_rejection_without_draw_errors(self):
        u = np.full((3, 10), 0.9)
        with pytest.raises(RuntimeError):
            sources_in_polytope(u, preset("l1_nonneg", 3), mode="reject")

    def test_scale_mode_feasible(self):
        rng = np.random.default_rng(6)
        p = preset("l1_nonneg", 4)
        out = sources_in_polytope(rng.random((4, 300)), p, mode="scale")
        assert contains(p, out, tol=0.0)
        assert out.shape == (4, 300)

    def test_low_acceptance_aborts_with_guidance(self):
        rng = np.random.default_rng(7)
        p = preset("l1_nonneg", 12)
        with pytest.raises(RuntimeError, match="scale"):
            sources_in_polytope(
                rng.random((12, 1000)), p, mode="reject",
                draw=lambda k: rng.random((12, k)),
            )


class TestMixingMatrix:
    def test_reproducible(self):
        assert np.array_equal(mixing_matrix(8, 5, seed=1), mixing_matrix(8, 5, seed=1))

    def test_law_of_large_numbers(self):
        h = mixing_matrix(100, 100, seed=2)
        assert abs(h.mean()) < 3 / np.sqrt(100 * 100)
        assert abs(h.var() - 1.0) < 0.2

    def test_full_rank(self):
        for seed in range(5):
            assert np.linalg.matrix_rank(mixing_matrix(8, 5, seed=seed)) == 5

    def test_rejects_underdetermined(self):
        with pytest.raises(ValueError):
            mixing_matrix(3, 5, seed=0)


class TestAddNoise:
    def test_noiseless_sentinels(self):
        y = np.random.default_rng(8).standard_normal((3, 20))
        for snr in (None, np.inf):
            out, sigma = add_noise(y, snr, seed=0)
            assert sigma == 0.0
            assert np.array_equal(out, y)

    def test_zero_db_matches_signal_power(self):
        y = np.random.default_rng(9).standard_normal((4, 5000))
        _, sigma = add_noise(y, 0.0, seed=1)
        power = np.mean(y**2)
        assert sigma**2 == pytest.approx(power, rel=1e-12)

    def test_realized_snr(self):
        y = np.random.default_rng(10).standard_normal((5, 10000))
        noisy, _ = add_noise(y, 20.0, seed=2)
        realized = 10 * np.log10(np.mean(y**2) / np.mean((noisy - y) ** 2))
        assert abs(realized - 20.0) < 0.2

    def test_zero_signal_rejected(self):
        with pytest.raises(ValueError):
            add_noise(np.zeros((2, 4)), 10.0, seed=0)


class TestMakeScenario:
    def test_noiseless_exact_product(self):
        cfg = ScenarioConfig(
            r=3, m=5, n=200, rho=0.2, snr_db=None,
            polytope=preset("l1_nonneg", 3), seed=3,
        )
        sc = make_scenario(cfg)
        assert np.allclose(sc.y, sc.h_mix @ sc.s_true, atol=1e-12)
        assert sc.noise_sigma == 0.0

    def test_columns_feasible(self):
        cfg = ScenarioConfig(
            r=4, m=6, n=300, rho=0.4, polytope=preset("l1_nonneg", 4), seed=4
        )
        sc = make_scenario(cfg)
        assert contains(cfg.polytope, sc.s_true, tol=1e-9)

    def test_bit_for_bit_determinism(self):
        cfg = ScenarioConfig(
            r=3, m=5, n=150, rho=0.5, polytope=preset("l1_nonneg", 3), seed=5
        )
        a, b = make_scenario(cfg), make_scenario(cfg)
        assert np.array_equal(a.s_true, b.s_true)
        assert np.array_equal(a.h_mix, b.h_mix)
        assert np.array_equal(a.y, b.y)

    def test_uniform_iid_uncorrelated(self):
        n = 4000
        cfg = ScenarioConfig(
            r=3, m=4, n=n, rho=0.0, snr_db=None,
            polytope=preset("linf", 3), seed=6, source_mode="uniform_iid",
        )
        sc = make_scenario(cfg)
        corr = np.corrcoef(sc.s_true)
        off = corr[np.triu_indices(3, 1)]
        assert np.all(np.abs(off) < 3 / np.sqrt(n))

    def test_validation(self):
        with pytest.raises(ValueError):
            ScenarioConfig(r=5, m=3, n=100, polytope=preset("l1_nonneg", 5))
        with pytest.raises(ValueError):
            ScenarioConfig(r=3, m=5, n=100, polytope=preset("l1_nonneg", 4))


class TestScenarioRoundtrip:
    def test_save_load(self, tmp_path):
        cfg = ScenarioConfig(
            r=3, m=5, n=120, rho=0.3, polytope=preset("l1_nonneg", 3), seed=9
        )
        sc = make_scenario(cfg)
        save_scenario(sc, tmp_path)
        back = load_scenario(tmp_path)
        assert np.allclose(back.s_true, sc.s_true, rtol=1e-11, atol=1e-14)
        assert np.allclose(back.h_mix, sc.h_mix, rtol=1e-11, atol=1e-14)
        assert np.allclose(back.y, sc.y, rtol=1e-11, atol=1e-14)
        assert back.noise_sigma == pytest.approx(sc.noise_sigma, rel=1e-11)

    def test_save_twice_identical(self, tmp_path):
        cfg = ScenarioConfig(
            r=2, m=4, n=80, rho=0.0, polytope=preset("linf_nonneg", 2), seed=10
        )
        sc = make_scenario(cfg)
        save_scenario(sc, tmp_path / "a")
        save_scenario(sc, tmp_path / "b")
        for name in ("sources.csv", "mixing.csv", "mixtures.csv", "scenario_meta.cfg"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
