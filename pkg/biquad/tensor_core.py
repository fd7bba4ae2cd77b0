"""Biquadratic tensors: storage, contractions and M-eigenpair verification.

A biquadratic tensor is a dense order-4 array indexed ``(i1, j1, i2, j2)`` with
``i1, i2`` in ``range(m)`` and ``j1, j2`` in ``range(n)``. All indices here are
0-based; 1-based indices only exist in the external formats (see documents.py).

The eigen system uses the folded convention ``g(x, y) = lambda * x`` and
``h(x, y) = lambda * y`` with the factor 1/2 already inside g and h.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import numpy.typing as npt

if TYPE_CHECKING:
    from collections.abc import Iterable

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

DEFAULT_RESIDUAL_TOL = 1e-9
# Coordinates with |x_i| above this (after normalization) are in supp(x).
SUPPORT_THRESHOLD = 1e-8
INGESTED_SYMMETRY_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when operand sizes are incompatible or below an analysis minimum."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class InvalidTensorError(ValueError):
    """Raised when tensor entries are not finite reals."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


@dataclass(frozen=True, eq=False)
class BiquadraticTensor:
    """Dense m x n x m x n real tensor. Immutable once built."""

    entries: FloatArray

    def __post_init__(self) -> None:
        data = np.array(self.entries, dtype=np.float64, copy=True)
        if data.ndim != 4:
            raise DimensionError(f"biquadratic tensor needs 4 axes, got {data.ndim}")
        m, n, m2, n2 = data.shape
        if m != m2 or n != n2:
            raise DimensionError(f"shape {data.shape} is not of the form (m, n, m, n)")
        if m < 1 or n < 1:
            raise DimensionError(f"mode sizes must be positive, got m={m}, n={n}")
        if not np.all(np.isfinite(data)):
            raise InvalidTensorError("tensor entries must be finite (no NaN/Inf)")
        data.setflags(write=False)
        object.__setattr__(self, "entries", data)

    @property
    def m(self) -> int:
        return int(self.entries.shape[0])

    @property
    def n(self) -> int:
        return int(self.entries.shape[1])

    @classmethod
    def zeros(cls, m: int, n: int) -> BiquadraticTensor:
        return cls(np.zeros((m, n, m, n)))

    @classmethod
    def isotropic(cls, m: int, n: int, c: float) -> BiquadraticTensor:
        """Tensor with a_{ijij} = c, whose form is constant c on unit pairs."""
        data = np.zeros((m, n, m, n))
        for i in range(m):
            for j in range(n):
                data[i, j, i, j] = c
        return cls(data)

    @classmethod
    def from_entries(
        cls, m: int, n: int, entries: Iterable[tuple[int, int, int, int, float]]
    ) -> BiquadraticTensor:
        """Build from 0-based ``(i1, j1, i2, j2, value)`` records; omitted entries are 0."""
        data = np.zeros((m, n, m, n))
        for i1, j1, i2, j2, value in entries:
            if not (0 <= i1 < m and 0 <= i2 < m and 0 <= j1 < n and 0 <= j2 < n):
                raise DimensionError(
                    f"index ({i1}, {j1}, {i2}, {j2}) out of range for m={m}, n={n}"
                )
            data[i1, j1, i2, j2] = value
        return cls(data)

    def scaled(self, c: float) -> BiquadraticTensor:
        return BiquadraticTensor(self.entries * c)

    def _check_same_shape(self, other: BiquadraticTensor) -> None:
        if (self.m, self.n) != (other.m, other.n):
            raise DimensionError(
                f"incompatible operands: ({self.m}, {self.n}) vs ({other.m}, {other.n})"
            )

    def __add__(self, other: BiquadraticTensor) -> BiquadraticTensor:
        self._check_same_shape(other)
        return BiquadraticTensor(self.entries + other.entries)

    def __sub__(self, other: BiquadraticTensor) -> BiquadraticTensor:
        self._check_same_shape(other)
        return BiquadraticTensor(self.entries - other.entries)

    def nonzero_entries(self) -> list[tuple[int, int, int, int, float]]:
        """Nonzero entries as 0-based records in lexicographic index order."""
        return [
            (int(i1), int(j1), int(i2), int(j2), float(self.entries[i1, j1, i2, j2]))
            for i1, j1, i2, j2 in np.argwhere(self.entries != 0)
        ]


def example_tensor() -> BiquadraticTensor:
    """The 2 x 2 worked example: reducible and quasi-irreducible.

    Its M+ eigenvalues are 0, 1, 2, 3 at coordinate pairs plus 3/2 + sqrt(5/2) at an
    interior pair, which is lambda_max.
    """
    return BiquadraticTensor.from_entries(
        2,
        2,
        [
            (0, 0, 0, 0, 1.0),
            (1, 1, 1, 1, 2.0),
            (0, 1, 0, 1, 3.0),
            (0, 0, 1, 1, 1.0),
            (0, 1, 1, 0, 1.0),
            (1, 0, 0, 1, 1.0),
            (1, 1, 0, 0, 1.0),
        ],
    )


def block_symmetrize(a: BiquadraticTensor) -> BiquadraticTensor:
    """Weakly symmetric part: 1/2 (a_{i1j1i2j2} + a_{i2j2i1j1}). Same f, g and h as ``a``."""
    return BiquadraticTensor(0.5 * (a.entries + a.entries.transpose(2, 3, 0, 1)))


@dataclass(frozen=True, eq=False)
class VectorPair:
    x: FloatArray
    y: FloatArray

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=np.float64, copy=True).reshape(-1)
        y = np.array(self.y, dtype=np.float64, copy=True).reshape(-1)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return int(self.x.shape[0])

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    def normalized(self) -> VectorPair:
        nx = float(np.linalg.norm(self.x))
        ny = float(np.linalg.norm(self.y))
        if nx == 0.0 or ny == 0.0:
            raise DimensionError("cannot normalize a pair with a zero vector")
        return VectorPair(self.x / nx, self.y / ny)

    def flipped(self, flip_x: bool, flip_y: bool) -> VectorPair:
        return VectorPair(-self.x if flip_x else self.x, -self.y if flip_y else self.y)


class EigenClass(enum.Flag):
    """Eigenpair class tags. A pair may carry several, e.g. ``M_PLUS | M_ZERO``."""

    M = enum.auto()
    M_PLUS = enum.auto()
    M_PLUSPLUS = enum.auto()
    M_ZERO = enum.auto()

    def labels(self) -> list[str]:
        return [member.name for member in EigenClass if member in self and member.name]


@dataclass
class MEigenPair:
    eigenvalue: float
    pair: VectorPair
    residual: float = float("inf")
    tags: EigenClass = EigenClass.M


def _check_dims(a: BiquadraticTensor, p: VectorPair) -> None:
    if p.m != a.m or p.n != a.n:
        raise DimensionError(
            f"incompatible operands: tensor is ({a.m}, {a.n}), vectors are ({p.m}, {p.n})"
        )


def eval_f(a: BiquadraticTensor, p: VectorPair) -> float:
    """f(x, y) = sum a_{i1j1i2j2} x_{i1} y_{j1} x_{i2} y_{j2}."""
    _check_dims(a, p)
    return float(np.einsum("ajbk,a,j,b,k->", a.entries, p.x, p.y, p.x, p.y))


def contract_g(a: BiquadraticTensor, p: VectorPair) -> FloatArray:
    """g = 1/2 (A . y x y + A x y . y); satisfies g . x = f(x, y)."""
    _check_dims(a, p)
    first = np.einsum("ajib,a,j,b->i", a.entries, p.x, p.y, p.y)
    second = np.einsum("ijab,j,a,b->i", a.entries, p.y, p.x, p.y)
    return np.asarray(0.5 * (first + second), dtype=np.float64)


def contract_h(a: BiquadraticTensor, p: VectorPair) -> FloatArray:
    """h = 1/2 (A x . x y + A x y x .); satisfies h . y = f(x, y)."""
    _check_dims(a, p)
    first = np.einsum("ajbi,a,j,b->i", a.entries, p.x, p.y, p.x)
    second = np.einsum("aibk,a,b,k->i", a.entries, p.x, p.x, p.y)
    return np.asarray(0.5 * (first + second), dtype=np.float64)


def eigen_residual(a: BiquadraticTensor, cand: MEigenPair) -> float:
    """Max-norm of the defects of g = lambda x, h = lambda y, |x| = |y| = 1."""
    p = cand.pair
    lam = cand.eigenvalue
    defects = (
        float(np.max(np.abs(contract_g(a, p) - lam * p.x))),
        float(np.max(np.abs(contract_h(a, p) - lam * p.y))),
        abs(float(np.linalg.norm(p.x)) - 1.0),
        abs(float(np.linalg.norm(p.y)) - 1.0),
    )
    return max(defects)


def check_m_eigenpair(
    a: BiquadraticTensor, cand: MEigenPair, tol: float = DEFAULT_RESIDUAL_TOL
) -> bool:
    """Verify an M-eigenpair candidate and record the achieved residual on it."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    cand.residual = eigen_residual(a, cand)
    return cand.residual <= tol


def is_weakly_symmetric(a: BiquadraticTensor, tol: float = 0.0) -> bool:
    return bool(np.all(np.abs(a.entries - a.entries.transpose(2, 3, 0, 1)) <= tol))


def is_symmetric(a: BiquadraticTensor, tol: float = 0.0) -> bool:
    if not is_weakly_symmetric(a, tol):
        return False
    swap_i = a.entries.transpose(2, 1, 0, 3)
    swap_j = a.entries.transpose(0, 3, 2, 1)
    return bool(
        np.all(np.abs(a.entries - swap_i) <= tol) and np.all(np.abs(a.entries - swap_j) <= tol)
    )


def is_nonnegative(a: BiquadraticTensor) -> bool:
    return bool(np.all(a.entries >= 0))


def support(v: FloatArray, threshold: float = SUPPORT_THRESHOLD) -> list[int]:
    """Indices of coordinates above the support threshold, after normalization."""
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return []
    return [int(i) for i in np.flatnonzero(np.abs(v / norm) > threshold)]


def oriented(v: FloatArray) -> FloatArray:
    """The sign of v whose smallest coordinate is largest (nonnegative vectors stay as they are)."""
    return v if float(np.min(v)) >= float(np.min(-v)) else -v
