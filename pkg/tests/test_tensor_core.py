"""Tests for biquad/tensor_core.py: storage, contractions, eigenpair verification."""

from __future__ import annotations

import numpy as np
import pytest

from biquad.tensor_core import (
    BiquadraticTensor,
    DimensionError,
    EigenClass,
    InvalidTensorError,
    MEigenPair,
    VectorPair,
    block_symmetrize,
    check_m_eigenpair,
    contract_g,
    contract_h,
    eval_f,
    is_nonnegative,
    is_symmetric,
    is_weakly_symmetric,
    oriented,
    support,
)

E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


def _random_pair(rng: np.random.Generator, m: int, n: int) -> VectorPair:
    return VectorPair(rng.standard_normal(m), rng.standard_normal(n))


class TestBiquadraticTensor:
    def test_shape_properties(self) -> None:
        t = BiquadraticTensor.zeros(2, 3)
        assert (t.m, t.n) == (2, 3)

    def test_rejects_non_finite(self) -> None:
        data = np.zeros((2, 2, 2, 2))
        data[0, 0, 0, 0] = np.nan
        with pytest.raises(InvalidTensorError):
            BiquadraticTensor(data)

    def test_rejects_bad_shape(self) -> None:
        with pytest.raises(DimensionError):
            BiquadraticTensor(np.zeros((2, 3, 3, 2)))
        with pytest.raises(DimensionError):
            BiquadraticTensor(np.zeros((2, 2, 2)))

    def test_entries_are_read_only(self, example: BiquadraticTensor) -> None:
        with pytest.raises(ValueError):
            example.entries[0, 0, 0, 0] = 5.0

    def test_from_entries_out_of_range(self) -> None:
        with pytest.raises(DimensionError):
            BiquadraticTensor.from_entries(2, 2, [(2, 0, 0, 0, 1.0)])

    def test_arithmetic_checks_dimensions(self) -> None:
        with pytest.raises(DimensionError):
            _ = BiquadraticTensor.zeros(2, 2) + BiquadraticTensor.zeros(2, 3)

    def test_nonzero_entries_sorted(self, example: BiquadraticTensor) -> None:
        records = example.nonzero_entries()
        keys = [r[:4] for r in records]
        assert keys == sorted(keys)
        assert len(records) == 7


class TestEvalF:
    def test_example(self, example: BiquadraticTensor) -> None:
        assert eval_f(example, VectorPair(E1, E2)) == 3.0

    def test_zero(self, zero: BiquadraticTensor) -> None:
        assert eval_f(zero, VectorPair(E1, E2)) == 0.0

    def test_single_entry(self) -> None:
        t = BiquadraticTensor.from_entries(2, 2, [(0, 0, 0, 0, 1.0)])
        assert eval_f(t, VectorPair(E1, E1)) == 1.0

    def test_dimension_mismatch(self, example: BiquadraticTensor) -> None:
        with pytest.raises(DimensionError):
            eval_f(example, VectorPair(np.ones(3), E1))

    def test_slot_swap_invariance_for_weakly_symmetric(self) -> None:
        rng = np.random.default_rng(7)
        t = block_symmetrize(BiquadraticTensor(rng.random((3, 2, 3, 2))))
        swapped = BiquadraticTensor(t.entries.transpose(2, 3, 0, 1))
        p = _random_pair(rng, 3, 2)
        assert eval_f(swapped, p) == pytest.approx(eval_f(t, p), rel=1e-12)


class TestContractions:
    def test_example_g_h(self, example: BiquadraticTensor) -> None:
        p = VectorPair(E1, E2)
        np.testing.assert_allclose(contract_g(example, p), [3.0, 0.0])
        np.testing.assert_allclose(contract_h(example, p), [0.0, 3.0])

    def test_zero(self, zero: BiquadraticTensor) -> None:
        p = VectorPair(E1, E2)
        np.testing.assert_array_equal(contract_g(zero, p), [0.0, 0.0])
        np.testing.assert_array_equal(contract_h(zero, p), [0.0, 0.0])

    def test_isotropic(self, isotropic: BiquadraticTensor) -> None:
        p = VectorPair(np.array([0.6, 0.8]), np.array([2.0, 1.0, 2.0]) / 3.0)
        np.testing.assert_allclose(contract_g(isotropic, p), 1.5 * p.x)
        np.testing.assert_allclose(contract_h(isotropic, p), 1.5 * p.y)

    @pytest.mark.parametrize("seed", range(10))
    def test_homogeneity(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        t = BiquadraticTensor(rng.uniform(-1e3, 1e3, (3, 4, 3, 4)))
        p = _random_pair(rng, 3, 4)
        f = eval_f(t, p)
        assert contract_g(t, p) @ p.x == pytest.approx(f, rel=1e-12)
        assert contract_h(t, p) @ p.y == pytest.approx(f, rel=1e-12)

    @pytest.mark.parametrize("seed", range(50))
    def test_gradient_matches_finite_differences(self, seed: int) -> None:
        rng = np.random.default_rng(100 + seed)
        m, n = 3, 2
        t = BiquadraticTensor(rng.random((m, n, m, n)))
        p = _random_pair(rng, m, n)
        step = 1e-6
        grad_x = np.array(
            [
                eval_f(t, VectorPair(p.x + step * e, p.y)) - eval_f(t, VectorPair(p.x - step * e, p.y))
                for e in np.eye(m)
            ]
        ) / (2 * step)
        grad_y = np.array(
            [
                eval_f(t, VectorPair(p.x, p.y + step * e)) - eval_f(t, VectorPair(p.x, p.y - step * e))
                for e in np.eye(n)
            ]
        ) / (2 * step)
        np.testing.assert_allclose(2 * contract_g(t, p), grad_x, atol=1e-5)
        np.testing.assert_allclose(2 * contract_h(t, p), grad_y, atol=1e-5)

    def test_block_symmetrize_preserves_contractions(self) -> None:
        rng = np.random.default_rng(3)
        t = BiquadraticTensor(rng.standard_normal((2, 3, 2, 3)))
        s = block_symmetrize(t)
        p = _random_pair(rng, 2, 3)
        assert is_weakly_symmetric(s, tol=1e-15)
        assert eval_f(s, p) == pytest.approx(eval_f(t, p), rel=1e-12)
        np.testing.assert_allclose(contract_g(s, p), contract_g(t, p), rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(contract_h(s, p), contract_h(t, p), rtol=1e-12, atol=1e-14)


class TestCheckMEigenpair:
    def test_lambda_three(self, example: BiquadraticTensor) -> None:
        cand = MEigenPair(3.0, VectorPair(E1, E2))
        assert check_m_eigenpair(example, cand, 1e-10)
        assert cand.residual == 0.0

    def test_perturbed_eigenvalue(self, example: BiquadraticTensor) -> None:
        cand = MEigenPair(2.5, VectorPair(E1, E2))
        assert not check_m_eigenpair(example, cand, 1e-10)
        assert cand.residual == pytest.approx(0.5)

    def test_lambda_zero(self, example: BiquadraticTensor) -> None:
        assert check_m_eigenpair(example, MEigenPair(0.0, VectorPair(E2, E1)), 1e-10)

    def test_rejects_nonpositive_tol(self, example: BiquadraticTensor) -> None:
        with pytest.raises(ValueError):
            check_m_eigenpair(example, MEigenPair(3.0, VectorPair(E1, E2)), 0.0)

    def test_monotone_in_tol(self, example: BiquadraticTensor) -> None:
        cand = MEigenPair(3.0 + 1e-7, VectorPair(E1, E2))
        assert not check_m_eigenpair(example, cand, 1e-8)
        assert check_m_eigenpair(example, cand, 1e-6)
        assert check_m_eigenpair(example, cand, 1e-3)

    def test_independent_sign_flips_are_eigenpairs(self, example: BiquadraticTensor) -> None:
        base = VectorPair(E1, E2)
        for flip_x in (False, True):
            for flip_y in (False, True):
                cand = MEigenPair(3.0, base.flipped(flip_x, flip_y))
                assert check_m_eigenpair(example, cand, 1e-12)

    def test_dimension_mismatch(self, example: BiquadraticTensor) -> None:
        with pytest.raises(DimensionError):
            check_m_eigenpair(example, MEigenPair(3.0, VectorPair(np.ones(3), E2)))


class TestPredicates:
    def test_example_weakly_symmetric(self, example: BiquadraticTensor) -> None:
        assert is_weakly_symmetric(example)

    def test_negative_entry(self) -> None:
        t = BiquadraticTensor.from_entries(2, 2, [(0, 0, 0, 0, -1.0)])
        assert not is_nonnegative(t)

    def test_symmetric_needs_index_swaps(self) -> None:
        t = BiquadraticTensor.from_entries(2, 2, [(0, 0, 1, 1, 1.0), (1, 1, 0, 0, 1.0)])
        assert is_weakly_symmetric(t)
        assert not is_symmetric(t)

    def test_symmetry_tolerance(self) -> None:
        t = BiquadraticTensor.from_entries(2, 2, [(0, 0, 1, 1, 1.0), (1, 1, 0, 0, 1.0 + 1e-13)])
        assert not is_weakly_symmetric(t)
        assert is_weakly_symmetric(t, tol=1e-12)


class TestHelpers:
    def test_support_uses_threshold_after_normalization(self) -> None:
        assert support(np.array([1e-9, 2.0])) == [1]
        assert support(np.array([1e-6, 1e-6])) == [0, 1]
        assert support(np.zeros(3)) == []

    def test_oriented_prefers_nonnegative(self) -> None:
        np.testing.assert_array_equal(oriented(np.array([-1.0, 0.0])), [1.0, -0.0])
        np.testing.assert_array_equal(oriented(np.array([0.5, 0.5])), [0.5, 0.5])

    def test_normalized_rejects_zero(self) -> None:
        with pytest.raises(DimensionError):
            VectorPair(np.zeros(2), E1).normalized()

    def test_class_labels(self) -> None:
        tags = EigenClass.M | EigenClass.M_PLUS | EigenClass.M_ZERO
        assert tags.labels() == ["M", "M_PLUS", "M_ZERO"]
