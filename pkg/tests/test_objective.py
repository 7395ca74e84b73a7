"""Objective math against naive oracles and finite differences."""

import numpy as np
import pytest
import torch

from pathbt.core import bt_loss, bt_loss_from_raw, cross_correlation, standardize


def naive_cross_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Double-loop oracle for C = a^T b / N."""
    n, d = a.shape
    c = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            for k in range(n):
                c[i, j] += a[k, i] * b[k, j]
    return c / n


class TestStandardize:
    def test_constant_column_maps_to_zeros(self):
        raw = torch.tensor([[3.0, 1.0], [3.0, 2.0], [3.0, 3.0]], dtype=torch.float64)
        out = standardize(raw)
        assert torch.all(out.values[:, 0] == 0)

    def test_two_point_column_is_already_standard(self):
        # population std of {-1, +1} is 1, so the column passes through
        raw = torch.tensor([[-1.0], [1.0]], dtype=torch.float64)
        out = standardize(raw)
        np.testing.assert_allclose(out.values.numpy(), [[-1.0], [1.0]])

    def test_idempotent(self):
        raw = torch.randn(16, 5, dtype=torch.float64, generator=torch.Generator().manual_seed(0))
        once = standardize(raw).values
        twice = standardize(once).values
        np.testing.assert_allclose(once.numpy(), twice.numpy(), atol=1e-6)

    def test_statistics_are_stored(self):
        raw = torch.randn(32, 4, dtype=torch.float64)
        out = standardize(raw)
        np.testing.assert_allclose(out.mean.numpy(), raw.mean(dim=0).numpy())
        assert np.all(np.abs(out.values.mean(dim=0).numpy()) <= 1e-6)
        np.testing.assert_allclose(out.values.std(dim=0, unbiased=False).numpy(), 1.0, atol=1e-4)

    def test_single_row_rejected(self):
        with pytest.raises(ValueError, match="at least 2"):
            standardize(torch.ones(1, 3))


class TestCrossCorrelation:
    def test_self_pair_has_unit_diagonal(self):
        raw = torch.randn(64, 8, dtype=torch.float64, generator=torch.Generator().manual_seed(1))
        a = standardize(raw)
        c = cross_correlation(a, a).matrix
        np.testing.assert_allclose(np.diag(c.numpy()), 1.0, atol=1e-5)

    def test_negated_pair_has_minus_one_diagonal(self):
        raw = torch.randn(64, 8, dtype=torch.float64, generator=torch.Generator().manual_seed(2))
        a = standardize(raw)
        b = standardize(-raw)
        c = cross_correlation(a, b).matrix
        np.testing.assert_allclose(np.diag(c.numpy()), -1.0, atol=1e-5)

    def test_matches_naive_double_loop(self):
        gen = np.random.default_rng(3)
        for _ in range(100):
            n = int(gen.integers(2, 17))
            d = int(gen.integers(1, 9))
            a = standardize(torch.tensor(gen.normal(size=(n, d))))
            b = standardize(torch.tensor(gen.normal(size=(n, d))))
            c = cross_correlation(a, b).matrix.numpy()
            oracle = naive_cross_correlation(a.values.numpy(), b.values.numpy())
            np.testing.assert_allclose(c, oracle, atol=1e-10)

    def test_dimension_mismatch_rejected(self):
        a = standardize(torch.randn(8, 3, dtype=torch.float64))
        b = standardize(torch.randn(8, 4, dtype=torch.float64))
        with pytest.raises(ValueError, match="shapes differ"):
            cross_correlation(a, b)

    def test_entries_bounded_for_standardized_inputs(self):
        gen = torch.Generator().manual_seed(4)
        a = standardize(torch.randn(32, 6, dtype=torch.float64, generator=gen))
        b = standardize(torch.randn(32, 6, dtype=torch.float64, generator=gen))
        c = cross_correlation(a, b).matrix.numpy()
        assert np.all(np.abs(c) <= 1.0 + 1e-4)


class TestBTLoss:
    def test_identity_matrix_gives_zero(self):
        terms = bt_loss(torch.eye(16, dtype=torch.float64), 0.0051)
        assert abs(float(terms.total)) <= 1e-9

    def test_hand_case(self):
        c = torch.tensor([[0.5, 0.2], [0.2, 0.5]], dtype=torch.float64)
        terms = bt_loss(c, 0.0051)
        assert abs(float(terms.total) - 0.500408) <= 1e-9
        assert abs(float(terms.invariance) - 0.5) <= 1e-12
        assert abs(float(terms.redundancy) - 0.08) <= 1e-12

    def test_zero_matrix_gives_dimension(self):
        terms = bt_loss(torch.zeros(7, 7, dtype=torch.float64), 0.0051)
        assert abs(float(terms.invariance) - 7.0) <= 1e-12
        assert abs(float(terms.redundancy)) == 0.0

    def test_non_square_rejected(self):
        with pytest.raises(ValueError, match="square"):
            bt_loss(torch.zeros(3, 4), 0.1)

    def test_loss_nonnegative_and_zero_only_at_identity(self):
        gen = np.random.default_rng(6)
        for _ in range(50):
            c = torch.tensor(gen.normal(size=(5, 5)))
            total = float(bt_loss(c, 0.0051).total)
            assert total >= 0.0
            if total == 0.0:
                np.testing.assert_allclose(c.numpy(), np.eye(5))


class TestGradient:
    def test_matches_central_finite_differences(self):
        gen = np.random.default_rng(8)
        h = 1e-4
        lam = 0.0051
        for trial in range(20):
            a = torch.tensor(gen.normal(size=(8, 4)), requires_grad=True)
            b = torch.tensor(gen.normal(size=(8, 4)), requires_grad=True)
            bt_loss_from_raw(a, b, lam).total.backward()
            for t, grad in ((a, a.grad), (b, b.grad)):
                base_a = a.detach().clone()
                base_b = b.detach().clone()
                for i in range(8):
                    for j in range(4):
                        for sign, store in ((+1, "fp"), (-1, "fm")):
                            pa, pb = base_a.clone(), base_b.clone()
                            (pa if t is a else pb)[i, j] += sign * h
                            val = float(bt_loss_from_raw(pa, pb, lam).total)
                            if store == "fp":
                                fp = val
                            else:
                                fm = val
                        fd = (fp - fm) / (2 * h)
                        an = float(grad[i, j])
                        rel = abs(fd - an) / max(abs(fd), abs(an), 1e-12)
                        assert rel <= 1e-4, f"trial {trial} ({i},{j}): {an} vs {fd}"

    def test_loss_invariant_under_joint_column_permutation(self):
        gen = torch.Generator().manual_seed(9)
        a = torch.randn(16, 6, dtype=torch.float64, generator=gen)
        b = torch.randn(16, 6, dtype=torch.float64, generator=gen)
        perm = torch.randperm(6, generator=gen)
        base = float(bt_loss_from_raw(a, b, 0.0051).total)
        permuted = float(bt_loss_from_raw(a[:, perm], b[:, perm], 0.0051).total)
        assert abs(base - permuted) <= 1e-10

    def test_loss_invariant_under_positive_column_scaling(self):
        gen = torch.Generator().manual_seed(10)
        a = torch.randn(16, 6, dtype=torch.float64, generator=gen)
        b = torch.randn(16, 6, dtype=torch.float64, generator=gen)
        scale = torch.tensor([0.5, 2.0, 10.0, 1.0, 0.01, 3.0], dtype=torch.float64)
        base = float(bt_loss_from_raw(a, b, 0.0051).total)
        scaled = float(bt_loss_from_raw(a * scale, b, 0.0051).total)
        assert abs(base - scaled) <= 1e-8
