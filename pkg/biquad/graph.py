"""Bipartite 2-graphs and their biquadratic tensors.

An edge joins an unordered pair of S-vertices with an unordered pair of
T-vertices. The adjacency tensor places the edge weight on the four index
arrangements consistent with full symmetry, so every edge contributes
``4 w x_p x_q y_r y_s`` to the biquadratic form.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from biquad.tensor_core import BiquadraticTensor, DimensionError
from biquad.unionfind import split_witness

if TYPE_CHECKING:
    from biquad.tensor_core import VectorPair

logger = logging.getLogger(__name__)

# eval_f(Q) = LEMMA_CONSTANT * sum a (x_i1 + x_i2)^2 (y_j1 + y_j2)^2, same for L with minus signs.
LEMMA_CONSTANT = 0.25


class GraphError(ValueError):
    """Raised for malformed edges or graphs."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


@dataclass(frozen=True)
class Edge:
    s_pair: tuple[int, int]
    t_pair: tuple[int, int]
    weight: float = 1.0

    def __post_init__(self) -> None:
        i1, i2 = self.s_pair
        j1, j2 = self.t_pair
        if i1 == i2:
            raise GraphError(f"S-pair needs two distinct vertices, got {self.s_pair}")
        if j1 == j2:
            raise GraphError(f"T-pair needs two distinct vertices, got {self.t_pair}")
        if not self.weight >= 0:
            raise GraphError(f"edge weight must be nonnegative, got {self.weight}")
        object.__setattr__(self, "s_pair", (min(i1, i2), max(i1, i2)))
        object.__setattr__(self, "t_pair", (min(j1, j2), max(j1, j2)))

    @property
    def active(self) -> bool:
        return self.weight > 0


@dataclass(frozen=True)
class BipartiteTwoGraph:
    m: int
    n: int
    edges: tuple[Edge, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise DimensionError(f"vertex counts must be positive, got m={self.m}, n={self.n}")
        edges = tuple(self.edges)
        seen: set[tuple[tuple[int, int], tuple[int, int]]] = set()
        for e in edges:
            if not (0 <= e.s_pair[0] and e.s_pair[1] < self.m):
                raise DimensionError(f"S-pair {e.s_pair} out of range for m={self.m}")
            if not (0 <= e.t_pair[0] and e.t_pair[1] < self.n):
                raise DimensionError(f"T-pair {e.t_pair} out of range for n={self.n}")
            key = (e.s_pair, e.t_pair)
            if key in seen:
                raise GraphError(f"duplicate edge {e.s_pair} x {e.t_pair}")
            seen.add(key)
        object.__setattr__(self, "edges", edges)


@dataclass(frozen=True)
class SeparabilityWitness:
    """Opposite-side pair plus one side of the partition it fails to connect."""

    pair: tuple[int, int]
    part: tuple[int, ...]


@dataclass(frozen=True)
class SeparabilityReport:
    t_separable: bool
    s_separable: bool
    t_witness: SeparabilityWitness | None
    s_witness: SeparabilityWitness | None

    @property
    def bi_separable(self) -> bool:
        return self.t_separable or self.s_separable


def random_graph(
    m: int,
    n: int,
    edge_probability: float,
    rng: np.random.Generator,
    *,
    weighted: bool = False,
) -> BipartiteTwoGraph:
    """Uniform-random ensemble: each possible edge present independently."""
    edges: list[Edge] = []
    for s_pair in itertools.combinations(range(m), 2):
        for t_pair in itertools.combinations(range(n), 2):
            if rng.random() < edge_probability:
                weight = float(rng.random()) if weighted else 1.0
                edges.append(Edge(s_pair, t_pair, weight))
    return BipartiteTwoGraph(m, n, tuple(edges))


def adjacency_tensor(graph: BipartiteTwoGraph) -> BiquadraticTensor:
    data = np.zeros((graph.m, graph.n, graph.m, graph.n))
    for e in graph.edges:
        p, q = e.s_pair
        r, s = e.t_pair
        data[p, r, q, s] = e.weight
        data[p, s, q, r] = e.weight
        data[q, r, p, s] = e.weight
        data[q, s, p, r] = e.weight
    return BiquadraticTensor(data)


def degree_tensors(
    graph: BipartiteTwoGraph,
) -> tuple[BiquadraticTensor, BiquadraticTensor, BiquadraticTensor]:
    """Return (D0, Dx, Dy) built from the adjacency tensor."""
    a = adjacency_tensor(graph).entries
    m, n = graph.m, graph.n

    d0 = np.zeros_like(a)
    row_sums = a.sum(axis=(2, 3))
    for i in range(m):
        for j in range(n):
            d0[i, j, i, j] = row_sums[i, j]

    dx = np.zeros_like(a)
    # dx_{i j1 i j2} = sum_{i2'} a_{i j1 i2' j2}
    x_sums = a.sum(axis=2)
    for i in range(m):
        dx[i, :, i, :] = x_sums[i]

    dy = np.zeros_like(a)
    # dy_{i1 j i2 j} = sum_{j2'} a_{i1 j i2 j2'}
    y_sums = a.sum(axis=3)
    for j in range(n):
        dy[:, j, :, j] = y_sums[:, j, :]

    return BiquadraticTensor(d0), BiquadraticTensor(dx), BiquadraticTensor(dy)


def signless_laplacian(graph: BipartiteTwoGraph) -> BiquadraticTensor:
    """Q = D0 + Dx + Dy + A."""
    d0, dx, dy = degree_tensors(graph)
    return d0 + dx + dy + adjacency_tensor(graph)


def laplacian(graph: BipartiteTwoGraph) -> BiquadraticTensor:
    """L = D0 - Dx - Dy + A."""
    d0, dx, dy = degree_tensors(graph)
    return d0 - dx - dy + adjacency_tensor(graph)


def quadratic_form_sum(graph: BipartiteTwoGraph, pair: VectorPair, *, signless: bool) -> float:
    """sum a_{i1j1i2j2} (x_i1 +- x_i2)^2 (y_j1 +- y_j2)^2 over all index quadruples."""
    a = adjacency_tensor(graph).entries
    x, y = pair.x, pair.y
    sign = 1.0 if signless else -1.0
    xx = (x[:, None] + sign * x[None, :]) ** 2
    yy = (y[:, None] + sign * y[None, :]) ** 2
    return float(np.einsum("ajbk,ab,jk->", a, xx, yy))


def _require_two_by_two(graph: BipartiteTwoGraph) -> None:
    if graph.m < 2 or graph.n < 2:
        raise DimensionError(
            f"separability needs |S| >= 2 and |T| >= 2, got m={graph.m}, n={graph.n}"
        )


def _separable(
    size: int,
    opposite: int,
    links: dict[tuple[int, int], list[tuple[int, int]]],
) -> tuple[bool, SeparabilityWitness | None]:
    for pair in itertools.combinations(range(opposite), 2):
        part = split_witness(size, links.get(pair, []))
        if part is not None:
            return True, SeparabilityWitness(pair=pair, part=part)
    return False, None


def is_T_separable(graph: BipartiteTwoGraph) -> tuple[bool, SeparabilityWitness | None]:
    """S is T-separable: some T-pair leaves the S-vertices disconnected."""
    _require_two_by_two(graph)
    links: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for e in graph.edges:
        if e.active:
            links.setdefault(e.t_pair, []).append(e.s_pair)
    return _separable(graph.m, graph.n, links)


def is_S_separable(graph: BipartiteTwoGraph) -> tuple[bool, SeparabilityWitness | None]:
    """T is S-separable: some S-pair leaves the T-vertices disconnected."""
    _require_two_by_two(graph)
    links: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for e in graph.edges:
        if e.active:
            links.setdefault(e.s_pair, []).append(e.t_pair)
    return _separable(graph.n, graph.m, links)


def is_bi_separable(graph: BipartiteTwoGraph) -> bool:
    return is_T_separable(graph)[0] or is_S_separable(graph)[0]


def separability_report(graph: BipartiteTwoGraph) -> SeparabilityReport:
    t_sep, t_witness = is_T_separable(graph)
    s_sep, s_witness = is_S_separable(graph)
    logger.debug("separability: T-separable=%s S-separable=%s", t_sep, s_sep)
    return SeparabilityReport(
        t_separable=t_sep, s_separable=s_sep, t_witness=t_witness, s_witness=s_witness
    )
