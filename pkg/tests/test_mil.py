"""Attention pooling, bag training, prediction, and heatmap export."""

import numpy as np
import pytest
import torch

from pathbt.mil import (
    AttentionBag,
    AttentionMILClassifier,
    GatedAttentionPool,
    bag_assemble,
    heatmap_export,
    predict_slide,
    train_mil,
)
from pathbt.mil.train import MILConfig


def synth_bags(n_per_class=12, instances=20, d=32, min_signal=2, seed=0):
    """Bags of Gaussian instances; positive bags contain >= min_signal
    instances drawn from a shifted signal cluster."""
    gen = np.random.default_rng(seed)
    signal_mu = np.zeros(d)
    signal_mu[:4] = 3.0
    bags = []
    for label, positive in (("neg", False), ("pos", True)):
        for b in range(n_per_class):
            inst = gen.normal(size=(instances, d))
            n_signal = 0
            if positive:
                n_signal = int(gen.integers(min_signal, 6))
                inst[:n_signal] += signal_mu
            coords = [(i * 16, 0, 16) for i in range(instances)]
            bag = AttentionBag(
                slide_id=f"{label}_{b}", instances=inst.astype(np.float32), tile_coords=coords, label=label
            )
            bag.n_signal = n_signal
            bags.append(bag)
    return bags


class TestGatedAttention:
    def test_single_instance_gets_full_attention(self):
        pool = GatedAttentionPool(8)
        _, att = pool(torch.randn(1, 8))
        np.testing.assert_allclose(att.detach().numpy(), [1.0])

    def test_identical_instances_get_uniform_attention(self):
        pool = GatedAttentionPool(8)
        inst = torch.ones(5, 8)
        _, att = pool(inst)
        np.testing.assert_allclose(att.detach().numpy(), np.full(5, 0.2), atol=1e-6)

    def test_attention_is_a_distribution(self):
        pool = GatedAttentionPool(16)
        _, att = pool(torch.randn(11, 16))
        att = att.detach().numpy()
        assert (att >= 0).all()
        assert abs(att.sum() - 1.0) <= 1e-6

    def test_permuting_instances_permutes_attention(self):
        torch.manual_seed(0)
        pool = GatedAttentionPool(8)
        inst = torch.randn(7, 8)
        perm = torch.randperm(7)
        _, att = pool(inst)
        _, att_p = pool(inst[perm])
        np.testing.assert_allclose(att_p.detach().numpy(), att[perm].detach().numpy(), atol=1e-6)


class TestTrainMIL:
    @pytest.fixture(scope="class")
    def trained(self):
        bags = synth_bags(seed=3)
        result = train_mil(bags, MILConfig(epochs=40, seed=0))
        return bags, result

    def test_signal_bags_classified(self, trained):
        _, result = trained
        assert result.metrics.auc >= 0.95

    def test_attention_localizes_signal_instances(self, trained):
        bags, result = trained
        ratios = []
        for bag in bags:
            if bag.label != "pos":
                continue
            _, att = predict_slide(result.model, bag)
            signal = att[: bag.n_signal].mean()
            background = att[bag.n_signal :].mean()
            ratios.append(signal / background)
        assert np.mean(ratios) >= 2.0

    def test_prediction_is_permutation_invariant(self, trained):
        bags, result = trained
        bag = bags[-1]
        scores, _ = predict_slide(result.model, bag)
        gen = np.random.default_rng(1)
        perm = gen.permutation(bag.size)
        shuffled = AttentionBag(
            slide_id="shuffled",
            instances=bag.instances[perm],
            tile_coords=[bag.tile_coords[i] for i in perm],
            label=bag.label,
        )
        scores_p, _ = predict_slide(result.model, shuffled)
        np.testing.assert_allclose(scores_p, scores, atol=1e-6)

    def test_scores_sum_to_one(self, trained):
        bags, result = trained
        scores, _ = predict_slide(result.model, bags[0])
        assert abs(scores.sum() - 1.0) <= 1e-6

    def test_label_shuffled_bags_are_chance(self):
        bags = synth_bags(n_per_class=14, seed=5)
        gen = np.random.default_rng(6)
        labels = [b.label for b in bags]
        for bag, label in zip(bags, gen.permutation(labels)):
            bag.label = str(label)
        result = train_mil(bags, MILConfig(epochs=25, seed=0))
        assert abs(result.metrics.auc - 0.5) <= 0.25

    def test_single_class_rejected(self):
        bags = [b for b in synth_bags() if b.label == "pos"]
        with pytest.raises(ValueError, match="at least 2 classes"):
            train_mil(bags, MILConfig(epochs=1))

    def test_thin_class_rejected(self):
        bags = synth_bags(n_per_class=3)
        bags = [b for b in bags if b.label == "neg"] + [b for b in bags if b.label == "pos"][:1]
        with pytest.raises(ValueError, match="degenerate split"):
            train_mil(bags, MILConfig(epochs=1))

    def test_split_accounting(self, trained):
        bags, result = trained
        assert len(result.train_slides) + len(result.test_slides) == len(bags)

    def test_instance_loss_branch_runs(self):
        bags = synth_bags(n_per_class=4, instances=10, seed=9)
        result = train_mil(bags, MILConfig(epochs=2, instance_loss_weight=0.3, seed=0))
        assert len(result.history) == 2


class TestBagAssemble:
    def test_groups_embeds_and_skips(self, palette_tiles):
        import torch.nn as nn

        class FlatEncoder(nn.Module):
            def forward(self, x):
                return x.mean(dim=(2, 3))

        tiles = palette_tiles.records[:12]
        images = palette_tiles.images[:12]
        labels = {t.slide_id for t in tiles}
        slide_labels = {sid: "X" for sid in labels}
        slide_labels["ghost_slide"] = "X"
        assembly = bag_assemble(tiles, images, FlatEncoder(), slide_labels=slide_labels)
        assert assembly.skipped == ["ghost_slide"]
        assert sum(b.size for b in assembly.bags) == 12
        # duplicated tile embeds identically
        bag = assembly.bags[0]
        dup = bag_assemble(tiles[:1] * 2, images[:1] * 2, FlatEncoder())
        inst = dup.bags[0].instances
        np.testing.assert_array_equal(inst[0], inst[1])

    def test_empty_tiles_means_all_skipped(self):
        import torch.nn as nn

        assembly = bag_assemble([], [], nn.Identity(), slide_labels={"a": "X"})
        assert assembly.bags == []
        assert assembly.skipped == ["a"]


class TestHeatmapExport:
    def make_bag(self, attention):
        m = len(attention)
        bag = AttentionBag(
            slide_id="slide0",
            instances=np.zeros((m, 4), dtype=np.float32),
            tile_coords=[(i * 32, 0, 32) for i in range(m)],
            label="pos",
        )
        bag.attention = np.asarray(attention, dtype=np.float64)
        return bag

    def test_uniform_attention_gives_uniform_overlay(self, tmp_path):
        bag = self.make_bag([0.25, 0.25, 0.25, 0.25])
        thumb = np.full((8, 32, 3), 255, dtype=np.uint8)
        meta = heatmap_export(bag, thumb, tmp_path, downsample=4.0)
        from PIL import Image

        overlay = np.asarray(Image.open(meta["overlay"]))
        tiles = [overlay[:, i * 8 : (i + 1) * 8] for i in range(4)]
        for t in tiles[1:]:
            np.testing.assert_array_equal(t, tiles[0])

    def test_single_hot_attention_colors_one_tile(self, tmp_path):
        bag = self.make_bag([0.0, 1.0, 0.0, 0.0])
        thumb = np.full((8, 32, 3), 255, dtype=np.uint8)
        meta = heatmap_export(bag, thumb, tmp_path, downsample=4.0)
        from PIL import Image

        overlay = np.asarray(Image.open(meta["overlay"]))
        changed = [
            not np.array_equal(overlay[:, i * 8 : (i + 1) * 8], thumb[:, i * 8 : (i + 1) * 8])
            for i in range(4)
        ]
        assert changed == [False, True, False, False]

    def test_csv_attention_sums_to_one(self, tmp_path):
        import csv

        bag = self.make_bag([0.1, 0.2, 0.3, 0.4])
        thumb = np.full((8, 32, 3), 255, dtype=np.uint8)
        meta = heatmap_export(bag, thumb, tmp_path, downsample=4.0)
        with open(meta["csv"]) as f:
            rows = list(csv.DictReader(f))
        assert abs(sum(float(r["attention"]) for r in rows) - 1.0) <= 1e-6

    def test_out_of_bounds_tile_named_in_error(self, tmp_path):
        bag = self.make_bag([0.5, 0.5])
        thumb = np.full((8, 8, 3), 255, dtype=np.uint8)  # fits tile 0 only
        with pytest.raises(ValueError, match="tile 1"):
            heatmap_export(bag, thumb, tmp_path, downsample=4.0)

    def test_top_k_tiles_written(self, tmp_path):
        bag = self.make_bag([0.1, 0.6, 0.3])
        thumb = np.full((8, 24, 3), 255, dtype=np.uint8)
        tile_images = [np.full((32, 32, 3), i * 20, dtype=np.uint8) for i in range(3)]
        meta = heatmap_export(bag, thumb, tmp_path, downsample=4.0, top_k=2, tile_images=tile_images)
        assert len(meta["top_tiles"]) == 2
        from PIL import Image

        best = np.asarray(Image.open(meta["top_tiles"][0]))
        np.testing.assert_array_equal(best, tile_images[1])
