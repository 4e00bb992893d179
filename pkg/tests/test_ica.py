import numpy as np
import pytest

from ldinfomax.datagen import ScenarioConfig, make_scenario
from ldinfomax.evaluation import sinr_db
from ldinfomax.ica import (
    IcaConfig,
    IcaDivergenceError,
    ica_infomax,
    ica_separate,
    rescale_into_polytope,
    whiten,
)
from ldinfomax.polytopes import contains, preset
from ldinfomax.stats import sample_covariance


def unit_uniform_sources(r, n, seed):
    """Independent zero-mean unit-variance uniform rows."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-np.sqrt(3), np.sqrt(3), (r, n))


class TestWhiten:
    def test_identity_covariance(self):
        rng = np.random.default_rng(0)
        y = rng.standard_normal((6, 4)) @ rng.standard_normal((4, 2000))
        z, _ = whiten(y, 4)
        assert np.allclose(sample_covariance(z), np.eye(4), atol=1e-8)

    def test_linear_map(self):
        rng = np.random.default_rng(1)
        y = rng.standard_normal((5, 500))
        z, w_white = whiten(y, 3)
        yc = y - y.mean(axis=1, keepdims=True)
        assert np.allclose(z, w_white @ yc, atol=1e-12)

    def test_energy_ordering(self):
        rng = np.random.default_rng(2)
        y = np.diag([10.0, 5.0, 1.0, 0.1]) @ rng.standard_normal((4, 5000))
        _, w_white = whiten(y, 2)
        cov = sample_covariance(y)
        w, v = np.linalg.eigh(cov)
        top2 = v[:, np.argsort(w)[::-1][:2]]
        # retained subspace spans the top-variance eigenvectors
        proj = top2 @ top2.T
        for row in w_white:
            assert np.linalg.norm(proj @ row - row) < 1e-6 * np.linalg.norm(row)

    def test_rank_deficiency_rejected(self):
        rng = np.random.default_rng(3)
        y = np.outer(rng.standard_normal(4), rng.standard_normal(300))
        with pytest.raises(ValueError):
            whiten(y, 2)


class TestIcaInfomax:
    def test_already_separated_input(self):
        # whitening rotates near-isotropic sources arbitrarily; the unmixing
        # has to undo that rotation, so score against the original sources
        s = unit_uniform_sources(3, 5000, seed=4)
        z, _ = whiten(s, 3)
        w = ica_infomax(z, IcaConfig())
        assert sinr_db(w @ z, s) > 25.0

    def test_deterministic(self):
        s = unit_uniform_sources(3, 1000, seed=5)
        z, _ = whiten(s, 3)
        assert np.array_equal(ica_infomax(z, IcaConfig()), ica_infomax(z, IcaConfig()))

    def test_unmixing_well_conditioned(self):
        rng = np.random.default_rng(6)
        s = unit_uniform_sources(3, 3000, seed=6)
        y = rng.standard_normal((5, 3)) @ s
        z, _ = whiten(y, 3)
        w = ica_infomax(z, IcaConfig())
        assert np.linalg.cond(w) < 1e6

    def test_divergence_detected(self):
        s = unit_uniform_sources(3, 500, seed=7)
        z, _ = whiten(s, 3)
        with pytest.raises(IcaDivergenceError):
            ica_infomax(z, IcaConfig(learning_rate=1e6, max_iter=50))

    def test_adaptive_switch_runs(self):
        s = unit_uniform_sources(3, 2000, seed=8)
        z, _ = whiten(s, 3)
        w = ica_infomax(z, IcaConfig(n_subgauss=1, max_iter=100))
        assert np.all(np.isfinite(w))


class TestIcaSeparate:
    def test_composition_consistency(self):
        rng = np.random.default_rng(9)
        s = unit_uniform_sources(3, 2000, seed=9)
        y = rng.standard_normal((5, 3)) @ s
        cfg = IcaConfig()
        z, w_white = whiten(y, 3)
        w = ica_infomax(z, cfg)
        assert np.allclose(ica_separate(y, 3, cfg), w @ w_white @ (y - y.mean(axis=1, keepdims=True)), atol=1e-12)

    def test_deterministic(self):
        rng = np.random.default_rng(10)
        y = rng.standard_normal((4, 3)) @ unit_uniform_sources(3, 800, seed=10)
        cfg = IcaConfig()
        assert np.array_equal(ica_separate(y, 3, cfg), ica_separate(y, 3, cfg))

    def test_independent_uniform_benchmark(self):
        rng = np.random.default_rng(11)
        s = unit_uniform_sources(3, 5000, seed=11)
        y = rng.standard_normal((5, 3)) @ s
        assert sinr_db(ica_separate(y, 3, IcaConfig()), s) > 25.0

    def test_separation_rate_over_seeds(self):
        good = 0
        for seed in range(20):
            rng = np.random.default_rng(500 + seed)
            s = unit_uniform_sources(3, 5000, seed=500 + seed)
            y = rng.standard_normal((5, 3)) @ s
            if sinr_db(ica_separate(y, 3, IcaConfig()), s) >= 25.0:
                good += 1
        assert good >= 18


class TestRescaleIntoPolytope:
    def test_output_feasible(self):
        cfg = ScenarioConfig(r=3, m=5, n=1500, rho=0.3, polytope=preset("l1_nonneg", 3), seed=12)
        scenario = make_scenario(cfg)
        s_est = ica_separate(scenario.y, 3, IcaConfig())
        fitted = rescale_into_polytope(s_est, cfg.polytope)
        assert contains(cfg.polytope, fitted, tol=1e-9)

    def test_recovers_affine_transform(self):
        # skewed truth rows in [0, 1] (orientation is read from skewness, so
        # symmetric rows would keep a reflection ambiguity); estimate rows are
        # affinely distorted copies, one of them negated
        rng = np.random.default_rng(13)
        truth = rng.random((2, 4000)) ** 2
        p = preset("linf_nonneg", 2)
        distorted = np.vstack([3.0 * truth[0] - 1.0, -0.5 * truth[1] + 2.0])
        fitted = rescale_into_polytope(distorted, p)
        assert sinr_db(fitted, truth) > 20.0


class TestIcaConfigValidation:
    def test_bad_values(self):
        with pytest.raises(ValueError):
            IcaConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            IcaConfig(max_iter=0)
        with pytest.raises(ValueError):
            IcaConfig(tol=0.0)
