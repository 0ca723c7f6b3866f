"""Monte Carlo diagnostics backing the statistical claims the package relies on.

These are property-style substitutes for closed-form tail bounds: they check
empirical frequencies against conservative thresholds at moderate sizes.
"""

import numpy as np
import pytest

from censparse.covariance import (
    build_neighbor_model,
    pairwise_covariance,
    population_neighbor_model,
)
from censparse.data import CensoredMatrix
from censparse.experiments import EXP1_TAG, SupportPathLambda
from censparse.imputation import impute_top_neighbor
from censparse.lasso import LassoConfig
from censparse.synth import (
    Equicorrelation,
    FractionMask,
    GenerationConfig,
    apply_mask,
    make_mask,
    make_sigma,
    sample_dataset,
    sample_ground_truth,
    substream,
)
from censparse.witness import (
    PopulationModel,
    WitnessTruth,
    construct_witness,
    lambda_bound,
    score_separation_condition,
)


class TestScoreSeparationConsistency:
    """Features whose top score clears the separation margin keep their top
    neighbor under empirical estimation, with rate improving in n."""

    # heterogeneous scales: only feature 0 satisfies the separation margin
    SIGMA = np.array(
        [[100.0, 9.9, 0.0], [9.9, 1.0, 0.0], [0.0, 0.0, 0.01]]
    )

    def test_condition_identifies_feature_zero(self):
        model = PopulationModel(sigma=self.SIGMA, support=(0,))
        cond = score_separation_condition(model)
        assert cond[0]
        assert not cond[1] and not cond[2]

    def test_agreement_rate_grows_and_exceeds_95(self):
        pop = population_neighbor_model(self.SIGMA)
        chol = np.linalg.cholesky(self.SIGMA)
        rates = {}
        for n in (100, 1000):
            agree = 0
            trials = 200
            for t in range(trials):
                rng = np.random.default_rng(np.random.SeedSequence([55, n, t]))
                x = rng.standard_normal((n, 3)) @ chol.T
                cov = pairwise_covariance(CensoredMatrix(x, np.ones((n, 3), dtype=bool)))
                nbm = build_neighbor_model(cov)
                agree += int(nbm.top[0] == pop.top[0])
            rates[n] = agree / trials
        assert rates[1000] >= rates[100]
        assert rates[1000] >= 0.95


def _witness_instance(seed, n=1000, p=20, s=3, theta=0.2):
    config = GenerationConfig(n=n, p=p, s=s, sigma_spec=Equicorrelation(0.8),
                              sigma_eps=0.1, seed=seed)
    truth = sample_ground_truth(config, substream(seed, EXP1_TAG, 0))
    sigma = make_sigma(config.sigma_spec, p)
    ds = sample_dataset(config, sigma, truth, substream(seed, EXP1_TAG, 1))
    mask = make_mask(FractionMask(theta), n, p, substream(seed, EXP1_TAG, 2))
    data = apply_mask(ds.x_true, mask)
    nbm = build_neighbor_model(pairwise_covariance(data))
    imp = impute_top_neighbor(data, nbm)
    model = PopulationModel(sigma=sigma, support=truth.support,
                            sigma_x2=1.0, sigma_eps2=config.sigma_eps**2)
    return config, truth, ds, mask, nbm, imp, model


class TestDualPartBounds:
    def test_correlation_part_bounded_with_high_frequency(self):
        # |z_b|_inf <= 1 - gamma/4 should hold in well over 90% of trials
        trials, ok = 30, 0
        for t in range(trials):
            config, truth, ds, mask, nbm, imp, model = _witness_instance(9000 + t)
            rep = construct_witness(
                imp.xhat, ds.y, truth.support, lam=0.05,
                truth=WitnessTruth(truth.w_star, ds.epsilon, imp.xhat - ds.x_true),
            )
            ok += int(np.abs(rep.z_b).max() <= 1 - model.gamma / 4)
        assert ok / trials > 0.9

    def test_projection_part_small_above_threshold_lambda(self):
        # with lambda above the variance-proxy threshold, |z_a|_inf < gamma/4
        trials, ok = 30, 0
        for t in range(trials):
            config, truth, ds, mask, nbm, imp, model = _witness_instance(9100 + t)
            pop = population_neighbor_model(model.sigma)
            bound = lambda_bound(model, mask, truth.w_star, pop.top,
                                 nbm.ratio, pop.ratio)
            lam = 1.05 * max(bound.lambda_min, 1e-8)
            rep = construct_witness(
                imp.xhat, ds.y, truth.support, lam,
                truth=WitnessTruth(truth.w_star, ds.epsilon, imp.xhat - ds.x_true),
            )
            ok += int(np.abs(rep.z_a).max() < model.gamma / 4)
        assert ok / trials > 0.9
