from __future__ import annotations

import pytest

from biquad.graph import BipartiteTwoGraph, Edge
from biquad.tensor_core import BiquadraticTensor, example_tensor


@pytest.fixture
def example() -> BiquadraticTensor:
    """2 x 2 tensor, reducible but quasi-irreducible; M+ eigenvalues 0, 1, 2, 3 and 3/2 + sqrt(5/2)."""
    return example_tensor()


@pytest.fixture
def isotropic() -> BiquadraticTensor:
    return BiquadraticTensor.isotropic(2, 3, 1.5)


@pytest.fixture
def zero() -> BiquadraticTensor:
    return BiquadraticTensor.zeros(2, 2)


@pytest.fixture
def single_edge() -> BipartiteTwoGraph:
    """m = n = 2 with the one edge ({1, 2}, {1, 2}) (0-based ({0, 1}, {0, 1}))."""
    return BipartiteTwoGraph(2, 2, (Edge((0, 1), (0, 1)),))
