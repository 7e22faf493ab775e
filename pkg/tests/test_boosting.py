import numpy as np
import pytest
from oracles import scalar_newton_boosting

from cascadeforest import LearnerConfig, fit_boosted_trees, predict_proba


class TestNullBoosting:
    def test_zero_learning_rate_uniform(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(20, 3))
        y = rng.integers(0, 4, size=20)
        cfg = LearnerConfig("boosted_trees", n_rounds=3, learning_rate=0.0,
                            max_depth=3, seed=0)
        model = fit_boosted_trees(X, y, cfg)
        proba = predict_proba(model, X)
        assert np.array_equal(proba, np.full((20, 4), 0.25))

    def test_zero_scores_balanced_two_class(self):
        # zero initial scores: softmax of zeros is 0.5/0.5 everywhere
        X = np.array([[0.0], [1.0]])
        y = np.array([0, 1])
        cfg = LearnerConfig("boosted_trees", n_rounds=1, learning_rate=0.0, seed=0)
        proba = predict_proba(fit_boosted_trees(X, y, cfg), X)
        assert np.array_equal(proba, np.full((2, 2), 0.5))


class TestSeparableBoosting:
    def test_matches_scalar_oracle(self):
        x = np.array([-4.0, -3.0, -2.0, -1.0, 1.0, 2.0, 3.0, 4.0])
        y = (x > 0).astype(int)
        expected = scalar_newton_boosting(x, y, n_rounds=50, learning_rate=0.1,
                                          l2_penalty=1.0)
        cfg = LearnerConfig("boosted_trees", n_rounds=50, learning_rate=0.1,
                            max_depth=1, l2_penalty=1.0, max_features="all", seed=0)
        model = fit_boosted_trees(x.reshape(-1, 1), y, cfg)
        proba = predict_proba(model, x.reshape(-1, 1))
        assert np.allclose(proba, expected, atol=1e-10)
        assert np.array_equal(np.argmax(proba, axis=1), y)  # training accuracy 1.0

    def test_probabilities_sharpen_with_rounds(self):
        x = np.array([-2.0, -1.0, 1.0, 2.0])
        y = (x > 0).astype(int)
        margins = []
        for rounds in (1, 10, 50):
            cfg = LearnerConfig("boosted_trees", n_rounds=rounds, learning_rate=0.1,
                                max_depth=1, seed=0)
            proba = predict_proba(fit_boosted_trees(x.reshape(-1, 1), y, cfg),
                                  x.reshape(-1, 1))
            margins.append(float(np.min(proba[np.arange(4), y])))
        assert margins[0] < margins[1] < margins[2]


class TestValidation:
    def test_zero_rounds_rejected(self):
        with pytest.raises(ValueError, match="n_rounds"):
            LearnerConfig("boosted_trees", n_rounds=0)

    def test_negative_learning_rate_rejected(self):
        with pytest.raises(ValueError, match="learning_rate"):
            LearnerConfig("boosted_trees", learning_rate=-0.1)

    def test_learning_rate_above_one_rejected(self):
        with pytest.raises(ValueError, match="learning_rate"):
            LearnerConfig("boosted_trees", learning_rate=1.5)

    def test_equal_seeds_bit_identical(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(30, 4))
        y = rng.integers(0, 3, size=30)
        cfg = LearnerConfig("boosted_trees", n_rounds=5, max_depth=2, seed=3)
        a = predict_proba(fit_boosted_trees(X, y, cfg), X)
        b = predict_proba(fit_boosted_trees(X, y, cfg), X)
        assert np.array_equal(a, b)
