"""Tests for biquad/oracle.py: exhaustive M-eigenpair enumeration for m, n <= 3."""

from __future__ import annotations

import numpy as np
import pytest

from biquad.config import SolverConfig
from biquad.oracle import enumerate_m_eigenpairs_small
from biquad.spectra import solve_lambda_max
from biquad.structure import structure_report
from biquad.tensor_core import (
    BiquadraticTensor,
    DimensionError,
    EigenClass,
    MEigenPair,
    check_m_eigenpair,
)

FAST = SolverConfig(restarts=8, threads=1)
FULL = SolverConfig(threads=1)
EXAMPLE_LAMBDA_MAX = 1.5 + np.sqrt(2.5)


def _plus_pairs(pairs: list[MEigenPair]) -> list[MEigenPair]:
    return [p for p in pairs if EigenClass.M_PLUS in p.tags]


class TestExampleTensor:
    def test_coordinate_m_plus_pairs(self, example: BiquadraticTensor) -> None:
        plus = _plus_pairs(enumerate_m_eigenpairs_small(example))
        boundary = [p for p in plus if EigenClass.M_ZERO in p.tags]
        expected = [
            (0.0, [0.0, 1.0], [1.0, 0.0]),
            (1.0, [1.0, 0.0], [1.0, 0.0]),
            (2.0, [0.0, 1.0], [0.0, 1.0]),
            (3.0, [1.0, 0.0], [0.0, 1.0]),
        ]
        assert len(boundary) == 4
        for pair, (lam, x, y) in zip(boundary, expected, strict=True):
            assert pair.eigenvalue == pytest.approx(lam, abs=1e-8)
            np.testing.assert_allclose(pair.pair.x, x, atol=1e-8)
            np.testing.assert_allclose(pair.pair.y, y, atol=1e-8)
            assert check_m_eigenpair(example, pair, 1e-10)

    def test_interior_maximum(self, example: BiquadraticTensor) -> None:
        plus = _plus_pairs(enumerate_m_eigenpairs_small(example))
        interior = [p for p in plus if EigenClass.M_PLUSPLUS in p.tags]
        assert len(interior) == 1
        assert interior[0].eigenvalue == pytest.approx(EXAMPLE_LAMBDA_MAX, abs=1e-8)
        assert len(plus) == 5

    def test_mixed_sign_pair_below_zero(self, example: BiquadraticTensor) -> None:
        pairs = enumerate_m_eigenpairs_small(example)
        assert min(p.eigenvalue for p in pairs) == pytest.approx(1.5 - np.sqrt(2.5), abs=1e-8)

    def test_sorted_and_verified(self, example: BiquadraticTensor) -> None:
        pairs = enumerate_m_eigenpairs_small(example, grid=181)
        values = [p.eigenvalue for p in pairs]
        assert values == sorted(values)
        assert all(p.residual <= 1e-9 for p in pairs)


class TestDegenerateSpectra:
    def test_zero(self, zero: BiquadraticTensor) -> None:
        pairs = enumerate_m_eigenpairs_small(zero, grid=91)
        assert [p.eigenvalue for p in pairs] == [0.0]

    def test_isotropic(self, isotropic: BiquadraticTensor) -> None:
        pairs = enumerate_m_eigenpairs_small(isotropic, grid=91)
        assert len(pairs) == 1
        assert pairs[0].eigenvalue == pytest.approx(1.5, abs=1e-12)
        assert EigenClass.M_PLUS in pairs[0].tags

    def test_size_one_factor(self) -> None:
        t = BiquadraticTensor.from_entries(1, 2, [(0, 0, 0, 0, 1.0), (0, 1, 0, 1, 4.0)])
        values = [p.eigenvalue for p in enumerate_m_eigenpairs_small(t, grid=91)]
        assert values == pytest.approx([1.0, 4.0], abs=1e-10)


class TestValidation:
    def test_rejects_large_tensors(self) -> None:
        with pytest.raises(DimensionError, match="solve_lambda_max"):
            enumerate_m_eigenpairs_small(BiquadraticTensor.zeros(4, 2))

    def test_rejects_tiny_grid(self, example: BiquadraticTensor) -> None:
        with pytest.raises(ValueError):
            enumerate_m_eigenpairs_small(example, grid=2)

    def test_rejects_nonpositive_tol(self, example: BiquadraticTensor) -> None:
        with pytest.raises(ValueError):
            enumerate_m_eigenpairs_small(example, tol=0.0)


class TestAgainstSolver:
    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(200))
    def test_two_by_two(self, seed: int) -> None:
        t = BiquadraticTensor(np.random.default_rng(seed).random((2, 2, 2, 2)))
        oracle_max = max(p.eigenvalue for p in enumerate_m_eigenpairs_small(t, grid=181))
        assert solve_lambda_max(t, FULL).best.eigenvalue == pytest.approx(oracle_max, abs=1e-6)

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(50))
    def test_three_by_three(self, seed: int) -> None:
        t = BiquadraticTensor(np.random.default_rng(500 + seed).random((3, 3, 3, 3)))
        pairs = enumerate_m_eigenpairs_small(t)
        assert _plus_pairs(pairs)
        oracle_max = max(p.eigenvalue for p in pairs)
        assert solve_lambda_max(t, FULL).best.eigenvalue == pytest.approx(oracle_max, abs=1e-5)

    def test_three_by_three_finds_perron_pair(self) -> None:
        t = BiquadraticTensor(np.random.default_rng(500).random((3, 3, 3, 3)))
        plus = _plus_pairs(enumerate_m_eigenpairs_small(t))
        assert max(p.eigenvalue for p in plus) == pytest.approx(4.476139, abs=1e-6)

    def test_coarse_grid_keeps_largest_eigenvalue(self) -> None:
        t = BiquadraticTensor(np.random.default_rng(501).random((3, 3, 3, 3)))
        fine = max(p.eigenvalue for p in enumerate_m_eigenpairs_small(t))
        coarse = max(p.eigenvalue for p in enumerate_m_eigenpairs_small(t, grid=13))
        assert coarse == pytest.approx(fine, abs=1e-8)


class TestPerronFrobeniusProperties:
    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(100))
    def test_irreducible_m_plus_pairs_are_positive(self, seed: int) -> None:
        rng = np.random.default_rng(700 + seed)
        t = BiquadraticTensor(rng.random((3, 3, 3, 3)))
        while not structure_report(t).irreducible:
            t = BiquadraticTensor(rng.random((3, 3, 3, 3)))
        plus = _plus_pairs(enumerate_m_eigenpairs_small(t))
        assert plus
        lam = solve_lambda_max(t, FULL).best.eigenvalue
        assert max(p.eigenvalue for p in plus) == pytest.approx(lam, abs=1e-5)
        for pair in plus:
            assert pair.pair.x.min() > 1e-8
            assert pair.pair.y.min() > 1e-8

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(100))
    def test_quasi_irreducible_dichotomy(self, seed: int) -> None:
        rng = np.random.default_rng(900 + seed)
        data = rng.random((2, 2, 2, 2))
        # Cut the i-vertices apart for j = 0: x-reducible, still quasi-irreducible.
        data[0, 0, 1, 0] = data[1, 0, 0, 0] = 0.0
        t = BiquadraticTensor(data)
        report = structure_report(t)
        assert report.x_reducible
        assert report.quasi_irreducible
        plus = _plus_pairs(enumerate_m_eigenpairs_small(t, grid=181))
        assert plus
        for pair in plus:
            assert EigenClass.M_ZERO in pair.tags or EigenClass.M_PLUSPLUS in pair.tags
