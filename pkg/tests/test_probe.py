"""Linear probing, evaluation-phase mixing, and 2-D projection."""

import numpy as np
import pytest
import torch

from pathbt.core import EncoderSpec, encoder_registry
from pathbt.probe import (
    ProbeConfig,
    balanced_split,
    cutmix_batch,
    encoder_checksum,
    eval_phase_mix,
    extract_embeddings,
    mixup_batch,
    project_2d,
    train_probe,
)


def gaussian_blobs(n_per_class=120, d=16, k=2, spread=0.45, seed=0):
    gen = np.random.default_rng(seed)
    centers = gen.normal(size=(k, d)) * 3.0
    feats = np.concatenate([centers[c] + spread * gen.normal(size=(n_per_class, d)) for c in range(k)])
    labels = np.repeat(np.arange(k), n_per_class)
    return feats.astype(np.float32), labels


class TestTrainProbe:
    def test_separable_blobs_reach_99(self):
        feats, labels = gaussian_blobs()
        cfg = ProbeConfig(epochs=50, train_per_class=80, test_per_class=40, seed=0)
        res = train_probe(feats, labels, cfg)
        assert res.metrics.top1_acc >= 99.0

    def test_shuffled_labels_hit_chance(self):
        feats, labels = gaussian_blobs(n_per_class=200, k=4, seed=1)
        gen = np.random.default_rng(2)
        shuffled = gen.permutation(labels)
        cfg = ProbeConfig(epochs=30, train_per_class=120, test_per_class=60, seed=0)
        res = train_probe(feats, shuffled, cfg)
        assert abs(res.metrics.top1_acc - 25.0) <= 5.0

    def test_single_class_rejected(self):
        feats = np.random.default_rng(0).normal(size=(50, 8)).astype(np.float32)
        with pytest.raises(ValueError, match="at least 2 classes"):
            train_probe(feats, np.zeros(50, dtype=int), ProbeConfig(train_per_class=10, test_per_class=5))


class TestBalancedSplit:
    def test_exact_counts_when_available(self):
        labels = np.array([0] * 50 + [1] * 50)
        train, test = balanced_split(labels, 30, 10, np.random.default_rng(0))
        assert len(train) == 60 and len(test) == 20
        for c in (0, 1):
            assert (labels[train] == c).sum() == 30
            assert (labels[test] == c).sum() == 10
        assert not set(train) & set(test)

    def test_deficient_classes_listed_in_error(self):
        labels = np.array([0] * 50 + [1] * 5)
        with pytest.raises(ValueError, match="1 has 5"):
            balanced_split(labels, 30, 10, np.random.default_rng(0))


class TestFrozenEncoder:
    def test_probe_never_mutates_encoder(self, palette_tiles):
        encoder = encoder_registry(EncoderSpec(family="small_conv"), seed=0)
        before = encoder_checksum(encoder)
        feats = extract_embeddings(encoder, palette_tiles.images, input_size=64)
        labels = np.asarray([palette_tiles.class_names.index(l) for l in palette_tiles.labels])
        train_probe(feats, labels, ProbeConfig(epochs=10, train_per_class=30, test_per_class=15))
        assert encoder_checksum(encoder) == before

    def test_extract_embeddings_is_deterministic_and_ordered(self, palette_tiles):
        encoder = encoder_registry(EncoderSpec(family="small_conv"), seed=0)
        images = palette_tiles.images[:8] + palette_tiles.images[:1]  # duplicate row
        a = extract_embeddings(encoder, images, input_size=64)
        b = extract_embeddings(encoder, images, input_size=64)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(a[0], a[8])
        assert a.shape == (9, 128)

    def test_empty_dataset_gives_empty_matrix(self):
        encoder = encoder_registry(EncoderSpec(family="small_conv"), seed=0)
        assert extract_embeddings(encoder, [], input_size=64).shape[0] == 0


class TestEvalPhaseMix:
    def test_mixup_labels_sum_to_one(self):
        gen = np.random.default_rng(0)
        x = torch.randn(10, 4)
        y = torch.eye(5)[torch.randint(0, 5, (10,))]
        mixed, labels = mixup_batch(x, y, alpha=0.4, rng=gen)
        np.testing.assert_allclose(labels.sum(dim=1).numpy(), 1.0, atol=1e-6)

    def test_mixup_half_coefficient_is_pixel_mean(self):
        class HalfBeta:
            def beta(self, a, b):
                return 0.5

            def permutation(self, n):
                return np.arange(n)[::-1].copy()

        x = torch.arange(8, dtype=torch.float32).reshape(2, 4)
        y = torch.eye(2)
        mixed, labels = mixup_batch(x, y, alpha=1.0, rng=HalfBeta())
        np.testing.assert_allclose(mixed.numpy(), 0.5 * (x + x.flip(0)).numpy())
        np.testing.assert_allclose(labels.numpy(), [[0.5, 0.5], [0.5, 0.5]])

    def test_cutmix_zero_area_is_identity(self):
        class ZeroBeta:
            def beta(self, a, b):
                return 1.0  # lam 1 -> zero-area rectangle

            def permutation(self, n):
                return np.arange(n)[::-1].copy()

        x = torch.randn(4, 3, 8, 8)
        y = torch.eye(4)
        mixed, labels = cutmix_batch(x, y, alpha=1.0, rng=ZeroBeta())
        np.testing.assert_array_equal(mixed.numpy(), x.numpy())
        np.testing.assert_array_equal(labels.numpy(), y.numpy())

    def test_cutmix_label_mix_matches_area(self):
        gen = np.random.default_rng(4)
        x = torch.zeros(6, 3, 16, 16)
        y = torch.eye(6)
        mixed, labels = cutmix_batch(x, y, alpha=1.0, rng=gen)
        np.testing.assert_allclose(labels.sum(dim=1).numpy(), 1.0, atol=1e-6)

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError, match="unknown mix mode"):
            eval_phase_mix("cutout")

    def test_mix_fn_plugs_into_probe(self):
        feats, labels = gaussian_blobs()
        cfg = ProbeConfig(epochs=30, train_per_class=80, test_per_class=40, seed=0)
        res = train_probe(feats, labels, cfg, mix_fn=eval_phase_mix("mixup", alpha=1.0))
        assert res.metrics.top1_acc >= 90.0  # easy blobs survive mixing


class TestProject2D:
    def test_planar_data_reconstructs_exactly(self):
        # rank-2 data: the two components carry all variance, residual ~ 0
        gen = np.random.default_rng(5)
        basis = np.linalg.qr(gen.normal(size=(10, 2)))[0].T  # 2 x 10 orthonormal
        coords_true = gen.normal(size=(100, 2)) * (4.0, 1.5)
        data = coords_true @ basis
        coords = project_2d(data)
        centered = data - data.mean(axis=0, keepdims=True)
        residual = (centered**2).sum() - (coords**2).sum()
        assert abs(residual) <= 1e-8

    def test_separated_classes_stay_separated(self):
        feats, labels = gaussian_blobs(n_per_class=80, d=12, k=2, spread=0.3, seed=6)
        coords = project_2d(feats)
        c0 = coords[labels == 0].mean(axis=0)
        c1 = coords[labels == 1].mean(axis=0)
        within = max(coords[labels == 0].std(), coords[labels == 1].std())
        assert np.linalg.norm(c0 - c1) > within

    def test_deterministic_sign_convention(self):
        gen = np.random.default_rng(7)
        data = gen.normal(size=(50, 6))
        a = project_2d(data)
        b = project_2d(data.copy())
        np.testing.assert_allclose(a, b)

    def test_writes_csv_and_png(self, tmp_path):
        gen = np.random.default_rng(8)
        data = gen.normal(size=(30, 5))
        project_2d(data, labels=np.repeat([0, 1, 2], 10), out_prefix=tmp_path / "proj")
        assert (tmp_path / "proj.csv").exists()
        assert (tmp_path / "proj.png").exists()
        assert "linear-pca" in (tmp_path / "proj.csv").read_text().splitlines()[0]

    def test_too_few_rows_rejected(self):
        with pytest.raises(ValueError):
            project_2d(np.ones((2, 4)))
