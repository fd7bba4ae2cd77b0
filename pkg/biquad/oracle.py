"""Exhaustive M-eigenpair enumeration for tensors with m, n <= 3.

Each unit sphere is charted up to sign (a half circle for size 2, a hemisphere
for size 3) and the eigen defect and f are scanned over the product grid.
Newton solves of the KKT system start from every local minimum of the defect,
every local extremum of f and every coordinate pair. Sign flips of x or y give
the same eigenpair and are merged.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from biquad.kernel import ContractionKernel, NewtonResult
from biquad.structure import NotAnEigenpairError, classify_eigenpair
from biquad.tensor_core import (
    BiquadraticTensor,
    DimensionError,
    FloatArray,
    MEigenPair,
    VectorPair,
    check_m_eigenpair,
    oriented,
)

logger = logging.getLogger(__name__)

MAX_FACTOR_SIZE = 3
DEDUP_DISTANCE = 1e-6
# Polar rings of a size-3 chart; the azimuth gets twice as many points.
# A 3 x 3 product grid at this cap has about 700k points.
SPHERE_POLAR_POINTS = 21


def _chart(size: int, grid: int) -> tuple[FloatArray, tuple[int, ...]]:
    """Unit vectors covering the sphere up to sign, and the chart's grid shape."""
    if size == 1:
        return np.ones((1, 1)), (1,)
    if size == 2:
        theta = np.linspace(0.0, np.pi, grid, endpoint=False)
        return np.stack([np.cos(theta), np.sin(theta)], axis=1), (grid,)
    polar_count = min(grid, SPHERE_POLAR_POINTS)
    azimuth_count = 2 * (polar_count - 1)
    phi = np.linspace(0.0, np.pi / 2, polar_count)
    psi = np.linspace(0.0, 2 * np.pi, azimuth_count, endpoint=False)
    pp, ss = np.meshgrid(phi, psi, indexing="ij")
    points = np.stack(
        [np.sin(pp) * np.cos(ss), np.sin(pp) * np.sin(ss), np.cos(pp)], axis=-1
    ).reshape(-1, 3)
    return points, (polar_count, azimuth_count)


def _grid_scan(
    kernel: ContractionKernel, xs: FloatArray, ys: FloatArray
) -> tuple[FloatArray, FloatArray]:
    """f and the defect |g - f x|^2 + |h - f y|^2 on every (x, y) of the product grid."""
    g, h = kernel.grid_gh(xs, ys)
    f = np.einsum("pqi,pi->pq", g, xs)
    rx = g - f[:, :, None] * xs[:, None, :]
    ry = h - f[:, :, None] * ys[None, :, :]
    defect = (rx**2).sum(axis=2) + (ry**2).sum(axis=2)
    return np.asarray(f, dtype=np.float64), np.asarray(defect, dtype=np.float64)


def _local_minima(values: FloatArray, shape: tuple[int, ...]) -> set[int]:
    """Flat indices of grid points no larger than any axis neighbour."""
    field = values.reshape(shape)
    mask = np.ones(shape, dtype=bool)
    for axis, length in enumerate(shape):
        if length < 2:
            continue
        mask &= field <= np.roll(field, 1, axis=axis)
        mask &= field <= np.roll(field, -1, axis=axis)
    return {int(k) for k in np.flatnonzero(mask.reshape(-1))}


def _sign_distance(u: FloatArray, v: FloatArray) -> float:
    return min(float(np.linalg.norm(u - v)), float(np.linalg.norm(u + v)))


def _is_duplicate(result: NewtonResult, kept: list[NewtonResult]) -> bool:
    for other in kept:
        if abs(result.eigenvalue - other.eigenvalue) >= DEDUP_DISTANCE:
            continue
        if result.degenerate and other.degenerate:
            return True
        if (
            _sign_distance(result.x, other.x) < DEDUP_DISTANCE
            and _sign_distance(result.y, other.y) < DEDUP_DISTANCE
        ):
            return True
    return False


def _positivity(result: NewtonResult) -> float:
    return min(float(np.min(oriented(result.x))), float(np.min(oriented(result.y))))


def enumerate_m_eigenpairs_small(
    a: BiquadraticTensor,
    grid: int = 721,
    tol: float = 1e-9,
    *,
    workers: int = 1,
) -> list[MEigenPair]:
    """All distinct M-eigenpairs of a small tensor, sorted by eigenvalue.

    ``grid`` is the number of angles per half circle. A size-3 factor uses
    ``min(grid, SPHERE_POLAR_POINTS)`` polar rings. The grid maximum of f is
    always among the seeds, and Newton from there reaches the lambda_max pair
    whenever the grid resolves its basin.

    Vectors are reported with the sign that makes them as nonnegative as
    possible. Non-isolated solution sets (for example every pair of the zero
    or isotropic tensor) are represented once per eigenvalue.
    """
    if a.m > MAX_FACTOR_SIZE or a.n > MAX_FACTOR_SIZE:
        raise DimensionError(
            f"the enumeration oracle handles m, n <= {MAX_FACTOR_SIZE}, got m={a.m}, n={a.n}; "
            "use solve_lambda_max for larger tensors"
        )
    if grid < 3:
        raise ValueError(f"grid needs at least 3 points per angle, got {grid}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    kernel = ContractionKernel(a)
    xs, x_shape = _chart(a.m, grid)
    ys, y_shape = _chart(a.n, grid)
    f, defect = _grid_scan(kernel, xs, ys)
    shape = x_shape + y_shape
    defect_minima = _local_minima(defect, shape)
    f_extrema = _local_minima(f, shape) | _local_minima(-f, shape)
    seeds = [divmod(k, len(ys)) for k in sorted(defect_minima | f_extrema)]
    seed_pairs = [(xs[p], ys[q]) for p, q in seeds]
    seed_pairs += [(np.eye(a.m)[i], np.eye(a.n)[j]) for i in range(a.m) for j in range(a.n)]
    logger.debug(
        "oracle grid %s x %s: %d seeds (%d defect minima, %d extrema of f)",
        x_shape,
        y_shape,
        len(seed_pairs),
        len(defect_minima),
        len(f_extrema),
    )

    def polish(seed: tuple[FloatArray, FloatArray]) -> NewtonResult:
        return kernel.newton_refine(seed[0], seed[1])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(polish, seed_pairs))
    else:
        results = [polish(s) for s in seed_pairs]

    solved = [r for r in results if r.residual <= tol]
    # Most positive representative first, so a merged degenerate set keeps its M+ member.
    solved.sort(key=lambda r: (round(r.eigenvalue / DEDUP_DISTANCE), -_positivity(r)))
    kept: list[NewtonResult] = []
    for result in solved:
        if not _is_duplicate(result, kept):
            kept.append(result)

    pairs: list[MEigenPair] = []
    for result in kept:
        pair = MEigenPair(
            eigenvalue=result.eigenvalue,
            pair=VectorPair(oriented(result.x), oriented(result.y)),
        )
        check_m_eigenpair(a, pair, tol)
        try:
            classify_eigenpair(pair, residual_tol=tol)
        except NotAnEigenpairError:
            logger.warning(
                "Newton solution at lambda=%.12g fails re-verification (residual %.3g)",
                pair.eigenvalue,
                pair.residual,
            )
            continue
        pairs.append(pair)
    pairs.sort(key=lambda p: (p.eigenvalue, tuple(p.pair.x), tuple(p.pair.y)))
    logger.info(
        "oracle found %d M-eigenpairs (%d Newton solves converged)", len(pairs), len(solved)
    )
    return pairs
