import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mimgan.anomaly import (
    AUTO,
    AnomalyConfig,
    ScoredSample,
    _initial_latent,
    anomaly_score,
    best_f1_threshold,
    classify,
    invert_latent,
    read_score_report,
    reconstruction_loss,
    score_samples,
    sigmoid_cross_entropy,
    summary,
    write_score_report,
)
from mimgan.nn import LayerSpec, MlpModel, mlp_specs
from mimgan.tensor import ShapeError, Tensor

LN2 = math.log(2.0)


def linear(w, b, act="identity"):
    w = np.atleast_2d(np.asarray(w, dtype=float))
    spec = LayerSpec(w.shape[0], w.shape[1], act)
    return MlpModel([spec], [Tensor(w, True)], [Tensor(np.reshape(b, (1, -1)).astype(float), True)])


def identity_g(dim=2):
    return linear(np.eye(dim), np.zeros(dim))


def zero_d(dim=2):
    """Discriminator whose output is identically 0."""
    return linear(np.zeros((dim, 1)), [0.0])


class TestCrossEntropy:
    def test_values(self):
        assert sigmoid_cross_entropy(0.0, 1.0) == pytest.approx(0.693147, abs=1e-6)
        assert sigmoid_cross_entropy(0.5, 1.0) == pytest.approx(0.474077, abs=1e-6)
        assert sigmoid_cross_entropy(0.0, 0.0) == pytest.approx(LN2)

    @given(st.floats(-50, 50), st.floats(0, 1))
    def test_non_negative(self, d, beta):
        assert sigmoid_cross_entropy(d, beta) >= 0.0


class TestReconstructionLoss:
    def test_exact_reconstruction(self):
        cfg = AnomalyConfig(lam=0.1)
        j = reconstruction_loss([0.3, -0.4], [0.3, -0.4], identity_g(), zero_d(), cfg)
        assert j == pytest.approx(0.0693147, abs=1e-7)

    def test_three_four_five(self):
        G = linear(np.eye(2), [-3.0, -4.0])  # x - G(z) = [3, 4] at z = x
        j = reconstruction_loss([1.0, 1.0], [1.0, 1.0], G, zero_d(), AnomalyConfig(lam=0.5))
        assert j == pytest.approx(0.5 * 5 + 0.5 * LN2, abs=1e-6)

    def test_small_lambda_is_the_norm(self):
        j = reconstruction_loss([3.0, 4.0], [0.0, 0.0], identity_g(), zero_d(),
                                AnomalyConfig(lam=1e-12))
        assert j == pytest.approx(5.0, abs=1e-9)

    def test_one_norm(self):
        j = reconstruction_loss([3.0, -4.0], [0.0, 0.0], identity_g(), zero_d(),
                                AnomalyConfig(lam=1e-12, p_norm=1))
        assert j == pytest.approx(7.0, abs=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            reconstruction_loss([1.0, 2.0, 3.0], [0.0, 0.0], identity_g(), zero_d(), AnomalyConfig())


class TestInversion:
    def test_identity_generator_recovers_x(self):
        # Adam moves each coordinate at most about lr per step, so only
        # starts within lr * iters (1.5) of x can converge; 1.2 leaves margin
        x = np.array([1.0, 2.0])
        reachable = 0
        for seed in range(8):
            cfg = AnomalyConfig(lam=1e-9, seed=seed)
            z0 = _initial_latent([0], 2, seed, 0)[0]
            z = invert_latent(x, identity_g(), zero_d(), cfg)
            if np.abs(z0 - x).max() <= 1.2:
                reachable += 1
                assert np.linalg.norm(z - x) < 1e-2
            assert np.linalg.norm(z - x) <= np.linalg.norm(z0 - x)
        assert reachable >= 1

    def test_zero_iterations_returns_init(self):
        cfg = AnomalyConfig(inversion_iters=0, seed=5)
        z = invert_latent([[0.1, 0.2]], identity_g(), zero_d(), cfg, ids=[7])
        np.testing.assert_array_equal(z, _initial_latent([7], 2, 5, 0))

    @given(st.integers(0, 2 ** 32), st.lists(st.floats(-1, 1), min_size=3, max_size=3))
    def test_best_seen_never_worse_than_init(self, seed, x):
        G = MlpModel.init(mlp_specs((2, 5, 3), "leaky-relu", "tanh"), seed=seed % 97)
        D = MlpModel.init(mlp_specs((3, 4, 1), "leaky-relu", "sigmoid"), seed=seed % 89)
        cfg = AnomalyConfig(inversion_iters=20, seed=seed)
        z0 = _initial_latent([0], 2, seed, 0)
        z = invert_latent([x], G, D, cfg)
        assert reconstruction_loss([x], z, G, D, cfg)[0] <= reconstruction_loss([x], z0, G, D, cfg)[0]

    def test_row_order_invariance(self, rng):
        G = MlpModel.init(mlp_specs((2, 5, 3), "leaky-relu", "tanh"), seed=1)
        D = MlpModel.init(mlp_specs((3, 4, 1), "leaky-relu", "sigmoid"), seed=2)
        x = rng.uniform(-1, 1, size=(6, 3))
        cfg = AnomalyConfig(inversion_iters=30)
        fwd = score_samples(x, G, D, cfg, ids=list(range(6)))
        perm = [4, 2, 0, 5, 1, 3]
        rev = score_samples(x[perm], G, D, cfg, ids=perm)
        by_id = {s.id: s.score for s in rev}
        assert all(by_id[s.id] == s.score for s in fwd)


class TestScore:
    def test_hand_value(self):
        # J = 2 via x - G(z) = [2, 0] with a tiny lam; D(x) = 0
        cfg = AnomalyConfig(lam=1e-12, eta=0.05)
        s = anomaly_score([2.0, 0.0], [0.0, 0.0], identity_g(), zero_d(), cfg)
        assert s == pytest.approx(0.95 * 2 + 0.05 * LN2, abs=1e-6)

    def test_eta_limits(self):
        G, D = identity_g(), zero_d()
        x, z = [2.0, 1.0], [0.5, 0.5]
        j = reconstruction_loss(x, z, G, D, AnomalyConfig())
        low = anomaly_score(x, z, G, D, AnomalyConfig(eta=1e-12))
        high = anomaly_score(x, z, G, D, AnomalyConfig(eta=1 - 1e-12))
        assert low == pytest.approx(j, abs=1e-9)
        assert high == pytest.approx(LN2, abs=1e-9)

    def test_monotone_in_residual(self):
        G, D, cfg = identity_g(), zero_d(), AnomalyConfig()
        a = anomaly_score([1.0, 0.0], [0.0, 0.0], G, D, cfg)
        b = anomaly_score([2.0, 0.0], [0.0, 0.0], G, D, cfg)
        assert b > a

    def test_config_ranges(self):
        for bad in (dict(lam=0.0), dict(lam=1.0), dict(eta=0.0), dict(eta=1.0), dict(p_norm=0)):
            with pytest.raises(ValueError):
                AnomalyConfig(**bad)


class TestClassify:
    def samples(self, scores, truth=None):
        truth = truth or [None] * len(scores)
        return [ScoredSample(i, s, None, t) for i, (s, t) in enumerate(zip(scores, truth))]

    def test_threshold(self):
        out, g = classify(self.samples([0.1, 0.9]), 0.5)
        assert [s.decision for s in out] == [0, 1] and g == 0.5

    def test_strict_inequality(self):
        out, _ = classify(self.samples([0.5]), 0.5)
        assert out[0].decision == 0

    def test_empty(self):
        assert classify([], 0.3) == ([], 0.3)

    def test_idempotent(self):
        once, g = classify(self.samples([0.2, 0.6, 0.4]), 0.45)
        twice, _ = classify(once, g)
        assert once == twice

    def test_auto_maximizes_f1(self):
        samples = self.samples([0.1, 0.2, 0.7, 0.3, 0.9], [0, 0, 1, 0, 1])
        out, g = classify(samples, AUTO)
        assert [s.decision for s in out] == [0, 0, 1, 0, 1]
        assert 0.3 <= g < 0.7

    def test_auto_needs_labels(self):
        with pytest.raises(ValueError, match="labeled"):
            classify(self.samples([0.1, 0.2]), AUTO)

    def test_auto_can_flag_everything(self):
        assert best_f1_threshold([0.5, 0.5], [1, 1]) < 0.5

    def test_non_finite_score(self):
        with pytest.raises(ValueError):
            classify(self.samples([float("nan")]), 0.1)


class TestReport:
    def test_round_trip(self, tmp_path):
        samples = [ScoredSample(0, 0.25, 0, 0), ScoredSample(1, 1.5, 1, None)]
        write_score_report(samples, tmp_path / "s.csv")
        assert read_score_report(tmp_path / "s.csv") == samples
        assert (tmp_path / "s.csv").read_text().splitlines()[0] == "id,score,decision,truth"

    def test_summary(self):
        s = summary([ScoredSample(0, 1.0, 1, 1), ScoredSample(1, 0.0, 0, 0)], 0.5, AnomalyConfig())
        assert s["flagged"] == 1 and s["true_anomalies"] == 1 and s["threshold"] == 0.5
