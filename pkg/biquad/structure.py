"""Reducibility and quasi-reducibility of biquadratic tensors, and eigenpair class tags.

Each predicate reduces an exponential quantifier over index partitions to a
connectivity scan: for a fixed choice of the other-side indices, join two
vertices whenever their pair-sum is nonzero. The predicate holds iff some such
graph is disconnected, and any component is a valid partition witness.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from biquad.tensor_core import (
    DEFAULT_RESIDUAL_TOL,
    SUPPORT_THRESHOLD,
    BiquadraticTensor,
    DimensionError,
    EigenClass,
    FloatArray,
    MEigenPair,
    oriented,
    support,
)
from biquad.unionfind import split_witness

logger = logging.getLogger(__name__)


class NotAnEigenpairError(ValueError):
    """Raised when a pair handed to the classifier is not a verified eigenpair."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


@dataclass(frozen=True)
class ReducibilityWitness:
    """Fixed opposite-side index and the subset J it separates."""

    index: int
    subset: tuple[int, ...]


@dataclass(frozen=True)
class QuasiWitness:
    """Ordered distinct opposite-side indices and the subset J they separate."""

    first: int
    second: int
    subset: tuple[int, ...]


@dataclass(frozen=True)
class StructureReport:
    x_reducible: bool
    x_reducible_witness: ReducibilityWitness | None
    y_reducible: bool
    y_reducible_witness: ReducibilityWitness | None
    x_quasi_reducible: bool
    x_quasi_witness: QuasiWitness | None
    y_quasi_reducible: bool
    y_quasi_witness: QuasiWitness | None

    @property
    def irreducible(self) -> bool:
        return not (self.x_reducible or self.y_reducible)

    @property
    def quasi_irreducible(self) -> bool:
        return not (self.x_quasi_reducible or self.y_quasi_reducible)


def _require(a: BiquadraticTensor, *, need_m: bool, need_n: bool) -> None:
    if need_m and a.m < 2:
        raise DimensionError(f"this analysis needs m >= 2, got m={a.m}")
    if need_n and a.n < 2:
        raise DimensionError(f"this analysis needs n >= 2, got n={a.n}")


def _linked(pair_sums: FloatArray, zero_tol: float) -> list[tuple[int, int]]:
    """Vertex pairs {u, v}, u < v, whose symmetric pair-sum matrix entry is nonzero."""
    size = pair_sums.shape[0]
    return [
        (u, v)
        for u, v in itertools.combinations(range(size), 2)
        if abs(pair_sums[u, v]) > zero_tol
    ]


def is_x_reducible(
    a: BiquadraticTensor, zero_tol: float = 0.0
) -> tuple[bool, ReducibilityWitness | None]:
    """Some j and J_x with a_{i2 j i1 j} + a_{i1 j i2 j} = 0 across the cut."""
    _require(a, need_m=True, need_n=False)
    t = a.entries
    for j in range(a.n):
        block = t[:, j, :, j]
        part = split_witness(a.m, _linked(block + block.T, zero_tol))
        if part is not None:
            return True, ReducibilityWitness(index=j, subset=part)
    return False, None


def is_y_reducible(
    a: BiquadraticTensor, zero_tol: float = 0.0
) -> tuple[bool, ReducibilityWitness | None]:
    """Some i and J_y with a_{i j1 i j2} + a_{i j2 i j1} = 0 across the cut."""
    _require(a, need_m=False, need_n=True)
    t = a.entries
    for i in range(a.m):
        block = t[i, :, i, :]
        part = split_witness(a.n, _linked(block + block.T, zero_tol))
        if part is not None:
            return True, ReducibilityWitness(index=i, subset=part)
    return False, None


def is_x_quasi_reducible(
    a: BiquadraticTensor, zero_tol: float = 0.0
) -> tuple[bool, QuasiWitness | None]:
    """Some ordered j1 != j2 and J_x with a_{i2 j1 i1 j2} + a_{i1 j1 i2 j2} = 0 across the cut."""
    _require(a, need_m=True, need_n=True)
    t = a.entries
    for j1, j2 in itertools.permutations(range(a.n), 2):
        block = t[:, j1, :, j2]
        part = split_witness(a.m, _linked(block + block.T, zero_tol))
        if part is not None:
            return True, QuasiWitness(first=j1, second=j2, subset=part)
    return False, None


def is_y_quasi_reducible(
    a: BiquadraticTensor, zero_tol: float = 0.0
) -> tuple[bool, QuasiWitness | None]:
    """Some ordered i1 != i2 and J_y with a_{i1 j1 i2 j2} + a_{i1 j2 i2 j1} = 0 across the cut."""
    _require(a, need_m=True, need_n=True)
    t = a.entries
    for i1, i2 in itertools.permutations(range(a.m), 2):
        block = t[i1, :, i2, :]
        part = split_witness(a.n, _linked(block + block.T, zero_tol))
        if part is not None:
            return True, QuasiWitness(first=i1, second=i2, subset=part)
    return False, None


def structure_report(a: BiquadraticTensor, zero_tol: float = 0.0) -> StructureReport:
    _require(a, need_m=True, need_n=True)
    x_red, x_red_w = is_x_reducible(a, zero_tol)
    y_red, y_red_w = is_y_reducible(a, zero_tol)
    xq, xq_w = is_x_quasi_reducible(a, zero_tol)
    yq, yq_w = is_y_quasi_reducible(a, zero_tol)
    report = StructureReport(
        x_reducible=x_red,
        x_reducible_witness=x_red_w,
        y_reducible=y_red,
        y_reducible_witness=y_red_w,
        x_quasi_reducible=xq,
        x_quasi_witness=xq_w,
        y_quasi_reducible=yq,
        y_quasi_witness=yq_w,
    )
    logger.info(
        "structure: irreducible=%s quasi_irreducible=%s",
        report.irreducible,
        report.quasi_irreducible,
    )
    return report


def is_irreducible(a: BiquadraticTensor) -> bool:
    return not (is_x_reducible(a)[0] or is_y_reducible(a)[0])


def is_quasi_irreducible(a: BiquadraticTensor) -> bool:
    return not (is_x_quasi_reducible(a)[0] or is_y_quasi_reducible(a)[0])


def classify_eigenpair(
    pair: MEigenPair,
    tol: float = SUPPORT_THRESHOLD,
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
) -> EigenClass:
    """Tag a verified eigenpair with its M / M+ / M++ / M0 classes.

    x and y are sign-normalized independently; every sign flip of either vector
    solves the same eigen equations.
    """
    if not pair.residual <= residual_tol:
        raise NotAnEigenpairError(
            f"pair has residual {pair.residual:.3g} > {residual_tol:.3g}; "
            "verify it with check_m_eigenpair first"
        )
    x = oriented(pair.pair.x)
    y = oriented(pair.pair.y)

    tags = EigenClass.M
    if float(np.min(x)) >= -tol and float(np.min(y)) >= -tol:
        tags |= EigenClass.M_PLUS
        if float(np.min(x)) > tol and float(np.min(y)) > tol:
            tags |= EigenClass.M_PLUSPLUS
    if len(support(x)) == 1 or len(support(y)) == 1:
        tags |= EigenClass.M_ZERO
    pair.tags = tags
    return tags
