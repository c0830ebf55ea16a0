"""Synthetic sampling, its calibration against the conditional oracle, and alignment."""

import numpy as np
import pytest

import plmodel as pm
from conftest import philox

A_ = pm.ABSTAIN


class TestSampleEdgeCases:
    def test_zero_propensity_always_abstains(self):
        rng = philox(1)
        specs = pm.random_plf_specs(pm.LabelSpace(3), 3, rng)
        params = pm.ModelParams(
            np.zeros((3, 3)), np.full(3, -40.0), np.full(3, 1 / 3)
        )  # beta ~ 0 under the logistic map
        data = pm.sample(specs, params, 500, 0)
        assert np.all(data.votes.votes == A_)

    def test_perfect_labeler_always_contains_truth(self):
        rng = philox(2)
        specs = pm.random_plf_specs(pm.LabelSpace(4), 4, rng)
        params = pm.ModelParams(
            np.full((4, 4), 40.0), np.full(4, 40.0), np.full(4, 0.25)
        )  # alpha ~ 1, beta ~ 1
        data = pm.sample(specs, params, 500, 1)
        for i, spec in enumerate(specs):
            col = data.votes.votes[:, i]
            assert np.all(col != A_)
            memb = spec.membership
            assert np.all(memb[col, data.true_labels])

    def test_negative_m_rejected(self):
        specs = [pm.traditional_lf(pm.LabelSpace(2))]
        params = pm.default_params(1, 2)
        with pytest.raises(ValueError):
            pm.sample(specs, params, -1, 0)

    def test_invalid_spec_rejected(self):
        bad = pm.PlfSpec.from_sets("bad", [[0, 1], [0, 2]], 3)
        with pytest.raises(pm.SpecValidationError):
            pm.sample([bad], pm.default_params(1, 3), 10, 0)


class TestSampleCalibration:
    def test_outcome_frequencies_match_conditionals(self):
        # Empirical per-class outcome frequencies against the conditional
        # distribution, within 3 standard errors at m = 1e6 (seeded, so
        # deterministic).
        spec = pm.PlfSpec.from_sets("g", [[0, 1], [2], [0, 2]], 3)
        rng = philox(3)
        alpha = rng.uniform(0.6, 0.9, size=(1, 3))
        beta = np.array([0.8])
        params = pm.from_probability(alpha, beta, np.array([0.5, 0.3, 0.2]))
        m = 1_000_000
        data = pm.sample([spec], params, m, 123)

        a, b = pm.to_probability(params)
        for j in range(3):
            mask = data.true_labels == j
            mj = int(mask.sum())
            col = data.votes.votes[mask, 0]
            outcomes = [None] + list(spec.codomain)
            for idx, vote in enumerate(outcomes):
                p = pm.conditional_prob(spec, a[0], b[0], vote, j)
                observed = float((col == (A_ if vote is None else idx - 1)).mean())
                se = np.sqrt(p * (1 - p) / mj)
                assert abs(observed - p) <= 3 * se, (
                    f"class {j}, outcome {vote}: {observed} vs {p} (se {se})"
                )

    def test_abstain_rate_matches_propensity(self):
        rng = philox(4)
        specs = pm.random_plf_specs(pm.LabelSpace(3), 4, rng)
        params = pm.random_params(4, 3, rng, beta_range=(0.3, 0.9))
        m = 100_000
        data = pm.sample(specs, params, m, 7)
        _, beta = pm.to_probability(params)
        voted = (data.votes.votes != A_).mean(axis=0)
        se = np.sqrt(beta * (1 - beta) / m)
        assert np.all(np.abs(voted - beta) <= 3 * se)

    def test_class_frequencies_match_balance(self):
        rng = philox(5)
        specs = pm.random_plf_specs(pm.LabelSpace(4), 2, rng)
        params = pm.random_params(2, 4, rng, uniform_balance=False)
        m = 100_000
        data = pm.sample(specs, params, m, 9)
        freq = np.bincount(data.true_labels, minlength=4) / m
        se = np.sqrt(params.class_balance * (1 - params.class_balance) / m)
        assert np.all(np.abs(freq - params.class_balance) <= 3 * se)

    def test_deterministic_given_seed(self):
        rng = philox(6)
        specs = pm.random_plf_specs(pm.LabelSpace(3), 3, rng)
        params = pm.random_params(3, 3, rng)
        d1 = pm.sample(specs, params, 1000, 42)
        d2 = pm.sample(specs, params, 1000, 42)
        assert np.array_equal(d1.true_labels, d2.true_labels)
        assert d1.votes == d2.votes
        d3 = pm.sample(specs, params, 1000, 43)
        assert not np.array_equal(d1.votes.votes, d3.votes.votes)


class TestAlignLabels:
    def build(self, seed, k=3, n=5):
        rng = philox(seed)
        return pm.random_params(n, k, rng, uniform_balance=False)

    def test_identity_for_equal_params(self):
        truth = self.build(1)
        aligned = pm.align_labels(truth, truth)
        assert aligned.permutation == (0, 1, 2)
        assert aligned.max_abs_alpha_err == 0.0
        assert aligned.max_abs_beta_err == 0.0

    def test_recovers_permutation(self):
        truth = self.build(2)
        perm = (2, 0, 1)
        est = pm.permute_classes_params(truth, perm)
        aligned = pm.align_labels(truth, est)
        assert aligned.permutation == perm
        assert aligned.max_abs_alpha_err <= 1e-12
        assert aligned.max_abs_balance_err <= 1e-12

    def test_permutation_with_noise(self):
        rng = philox(3)
        truth = self.build(3)
        alpha, beta = pm.to_probability(truth)
        noisy = pm.from_probability(
            np.clip(alpha + rng.normal(scale=0.01, size=alpha.shape), 0.01, 0.99),
            beta,
            truth.class_balance,
        )
        est = pm.permute_classes_params(noisy, (1, 2, 0))
        aligned = pm.align_labels(truth, est)
        assert aligned.permutation == (1, 2, 0)
        assert aligned.max_abs_alpha_err <= 0.05

    def test_large_k_uses_assignment(self):
        truth = self.build(4, k=10, n=3)
        perm = tuple(np.roll(np.arange(10), 3).tolist())
        est = pm.permute_classes_params(truth, perm)
        aligned = pm.align_labels(truth, est)
        assert aligned.permutation == perm
        assert aligned.max_abs_alpha_err <= 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(pm.ShapeMismatchError):
            pm.align_labels(self.build(5), self.build(5, k=4))


class TestConfoundedClasses:
    def test_unseparable_pair_defeats_recovery(self):
        # Every codomain keeps classes 0 and 1 together, so their conditional
        # outcome distributions differ only through accuracies that enter the
        # mixture linearly; the fit can recover their average at best. The
        # tripartition check flags exactly this.
        k = 3
        sets = [[[0, 1], [2]]] * 6
        specs = [pm.PlfSpec.from_sets(f"fused{i}", s, k) for i, s in enumerate(sets)]
        space = pm.LabelSpace(k)
        assert pm.check_identifiability(specs, space).status == "unsatisfied"

        rng = philox(11)
        alpha = np.empty((6, 3))
        alpha[:, 0] = 0.95
        alpha[:, 1] = 0.50
        alpha[:, 2] = rng.uniform(0.7, 0.9, size=6)
        beta = rng.uniform(0.6, 0.9, size=6)
        truth = pm.from_probability(alpha, beta, np.full(3, 1 / 3))
        data = pm.sample(specs, truth, 10_000, 0)
        config = pm.TrainConfig(epochs=12, optimizer="adam", initial_lr=0.05, seed=0)
        report = pm.fit(specs, data.votes, config)
        aligned = pm.align_labels(truth, report.params)
        est_alpha, _ = pm.to_probability(report.params)
        confounded_err = np.abs(
            alpha[:, [0, 1]] - est_alpha[:, list(aligned.permutation)][:, [0, 1]]
        ).max()
        assert confounded_err > 0.2
