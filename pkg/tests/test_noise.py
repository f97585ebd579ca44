import numpy as np
import pytest

from fashionkb.model.autodiff import Tensor
from fashionkb.model.noise import NoiseModel, apply_noise
from fashionkb.synthetic import pairflip_matrices, task_labels, task_names


class TestApplyNoise:
    def test_identity_matrix_preserves_distribution(self):
        p = Tensor(np.array([0.2, 0.5, 0.3]))
        out = apply_noise(p, Tensor(np.eye(3)))
        assert np.array_equal(out.data, p.data)

    def test_uniform_rows_absorb_everything(self):
        t = Tensor(np.full((3, 3), 1.0 / 3.0))
        for p in ([1.0, 0.0, 0.0], [0.2, 0.5, 0.3]):
            out = apply_noise(Tensor(np.array(p)), t)
            assert np.allclose(out.data, 1.0 / 3.0, atol=1e-15)

    def test_hand_computed_example(self):
        # (0.8, 0.2) @ [[0.9, 0.1], [0.3, 0.7]]:
        #   j=0: 0.8*0.9 + 0.2*0.3 = 0.78;  j=1: 0.8*0.1 + 0.2*0.7 = 0.22
        p = Tensor(np.array([0.8, 0.2]))
        t = Tensor(np.array([[0.9, 0.1], [0.3, 0.7]]))
        out = apply_noise(p, t)
        assert np.allclose(out.data, [0.78, 0.22], atol=1e-15)

    def test_batch_form(self):
        p = Tensor(np.array([[0.8, 0.2], [0.5, 0.5]]))
        t = Tensor(np.array([[0.9, 0.1], [0.3, 0.7]]))
        out = apply_noise(p, t)
        assert out.data.shape == (2, 2)
        assert np.allclose(out.data[0], [0.78, 0.22])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            apply_noise(Tensor(np.array([0.5, 0.5])), Tensor(np.eye(3)))
        with pytest.raises(ValueError):
            apply_noise(Tensor(np.array([0.5, 0.5])), Tensor(np.ones((2, 3))))

    def test_normalization_drift_below_1e_12(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            c = int(rng.integers(2, 30))
            p = rng.dirichlet(np.ones(c))
            rows = rng.dirichlet(np.ones(c), size=c)
            out = apply_noise(Tensor(p), Tensor(rows))
            assert abs(out.data.sum() - 1.0) <= 1e-12


class TestNoiseModel:
    def test_initial_self_mass(self, tiny_vocab):
        noise = NoiseModel(tiny_vocab, init_self_mass=0.9)
        for task, t in noise.realized().items():
            assert np.allclose(np.diag(t), 0.9, atol=1e-12), task

    def test_rows_stochastic_and_positive_after_updates(self, tiny_vocab):
        noise = NoiseModel(tiny_vocab)
        rng = np.random.default_rng(1)
        for task, score in noise.scores.items():
            score.data += rng.normal(0, 3.0, score.data.shape)  # simulate updates
        for task, t in noise.realized().items():
            assert np.all(t > 0)
            assert np.abs(t.sum(axis=1) - 1.0).max() <= 1e-9

    def test_fixed_matrices_not_trainable(self, tiny_vocab):
        noise = NoiseModel.fixed(tiny_vocab, pairflip_matrices(tiny_vocab, 0.3))
        assert not noise.trainable
        assert noise.params() == {}
        t = noise.matrix("occasion")
        assert np.allclose(np.diag(t.data), 0.7)

    def test_fixed_matrices_must_be_stochastic(self, tiny_vocab):
        bad = {t: np.eye(len(task_labels(tiny_vocab, t))) * 2 for t in task_names(tiny_vocab)}
        with pytest.raises(ValueError, match="row-stochastic"):
            NoiseModel.fixed(tiny_vocab, bad)

    def test_identity_factory(self, tiny_vocab):
        noise = NoiseModel.identity(tiny_vocab)
        for t in noise.realized().values():
            assert np.array_equal(t, np.eye(t.shape[0]))

    def test_one_matrix_per_task(self, vocab):
        noise = NoiseModel(vocab)
        assert len(noise.tasks) == 2 + len(vocab.attributes)  # occasion, category, attrs
        for task in noise.tasks:
            c = len(task_labels(vocab, task))
            assert noise.matrix(task).data.shape == (c, c)
