"""Largest M-eigenvalue of nonnegative biquadratic tensors, Collatz bounds and PSD probing.

The solver runs a shifted alternating power iteration

    x <- normalize(g(x, y) + tau x),    y <- normalize(h(x, y) + tau y)

from several starts, tracking the Collatz bounds v <= lambda_max <= u each
sweep, then polishes the iterate by monotone projected gradient ascent on f
over the product of unit spheres and a Newton step on the eigen system.
Any f value at a unit pair is a valid lower bound on lambda_max.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, TypeVar

import numpy as np

from biquad.config import SolverConfig
from biquad.kernel import ContractionKernel
from biquad.structure import NotAnEigenpairError, classify_eigenpair
from biquad.tensor_core import (
    SUPPORT_THRESHOLD,
    BiquadraticTensor,
    DimensionError,
    EigenClass,
    FloatArray,
    MEigenPair,
    VectorPair,
    check_m_eigenpair,
    contract_g,
    contract_h,
    is_nonnegative,
)

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

logger = logging.getLogger(__name__)

T = TypeVar("T")

_ARMIJO = 1e-4
_MIN_STEP = 1e-14


class NegativeInputError(ValueError):
    """Raised when an NBQ-only routine receives negative entries or vectors."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


@dataclass
class SolverOutcome:
    best: MEigenPair
    lower_bound: float
    upper_bound: float
    converged: bool
    iterations_used: int
    restart_values: list[float]
    trace: list[tuple[float, float]] = field(default_factory=list)


@dataclass
class ProbeOutcome:
    value: float
    witness: MEigenPair
    converged: bool
    start_values: list[float]


@dataclass
class _RestartResult:
    x: FloatArray
    y: FloatArray
    value: float
    residual: float
    converged: bool
    iterations: int
    trace: list[tuple[float, float]]


def _require_nbq(a: BiquadraticTensor) -> None:
    if not is_nonnegative(a):
        raise NegativeInputError("tensor has negative entries; this routine needs A in NBQ(m, n)")


def _require_two(a: BiquadraticTensor) -> None:
    if a.m < 2 or a.n < 2:
        raise DimensionError(f"this routine needs m, n >= 2, got m={a.m}, n={a.n}")


def _ratio_bounds(
    g: FloatArray, h: FloatArray, x: FloatArray, y: FloatArray
) -> tuple[float, float]:
    """(v, u) over coordinates of the unit pair (x, y) above the support threshold."""
    xs = x > SUPPORT_THRESHOLD
    ys = y > SUPPORT_THRESHOLD
    ratios = np.concatenate([g[xs] / x[xs], h[ys] / y[ys]])
    return float(ratios.min()), float(ratios.max())


def collatz_bounds(a: BiquadraticTensor, p: VectorPair) -> tuple[float, float]:
    """Collatz bounds (v, u): min and max of g_i/x_i and h_j/y_j over the positive support.

    The pair is normalized first; the ratios are only defined on the unit spheres.
    """
    _require_nbq(a)
    if np.any(p.x < 0) or np.any(p.y < 0):
        raise NegativeInputError("Collatz bounds need nonnegative x and y")
    if not np.any(p.x > 0) or not np.any(p.y > 0):
        raise DimensionError("Collatz bounds need x != 0 and y != 0")
    unit = p.normalized()
    return _ratio_bounds(contract_g(a, unit), contract_h(a, unit), unit.x, unit.y)


def _default_shift(kernel: ContractionKernel) -> float:
    diagonal = [kernel.sym[i, j, i, j] for i in range(kernel.m) for j in range(kernel.n)]
    return float(np.max(np.abs(diagonal))) + 1.0


def _unit(v: FloatArray) -> FloatArray:
    return v / np.linalg.norm(v)


def _unit_plus(v: FloatArray) -> FloatArray:
    clipped = np.clip(v, 0.0, None)
    norm = float(np.linalg.norm(clipped))
    if norm == 0.0:
        return _unit(np.abs(v))
    return clipped / norm


def _ascend(
    kernel: ContractionKernel,
    x: FloatArray,
    y: FloatArray,
    *,
    sign: float,
    nonnegative: bool,
    max_steps: int,
    tol: float,
) -> tuple[FloatArray, FloatArray]:
    """Projected gradient ascent of sign * f over the sphere product, Armijo backtracking.

    Accepted steps never decrease sign * f.
    """
    project = _unit_plus if nonnegative else _unit
    scale = max(1.0, float(np.abs(kernel.matrix).sum(axis=1).max()))
    step = 1.0 / (4.0 * scale)
    current = sign * kernel.value(x, y)
    for _ in range(max_steps):
        g, h = kernel.gh(x, y)
        f = float(x @ g)
        dx = sign * 2.0 * (g - f * x)
        dy = sign * 2.0 * (h - f * y)
        if max(float(np.max(np.abs(dx))), float(np.max(np.abs(dy)))) <= tol:
            break
        slope = float(dx @ dx + dy @ dy)
        while step >= _MIN_STEP:
            xn = project(x + step * dx)
            yn = project(y + step * dy)
            trial = sign * kernel.value(xn, yn)
            if trial >= current + _ARMIJO * step * slope:
                x, y, current = xn, yn, trial
                step *= 2.0
                break
            step /= 2.0
        else:
            break
    return x, y


def _refine(
    kernel: ContractionKernel,
    x: FloatArray,
    y: FloatArray,
    *,
    sign: float,
    nonnegative: bool,
) -> tuple[FloatArray, FloatArray]:
    """Newton-clean an iterate, keeping the result only if it improves the defect without losing value."""
    value = kernel.value(x, y)
    residual = kernel.residual(x, y, value)
    result = kernel.newton_refine(x, y, value)
    nx, ny = result.x, result.y
    if nonnegative:
        if min(float(nx.min()), float(ny.min())) < -SUPPORT_THRESHOLD:
            nx, ny = -nx if nx.sum() < 0 else nx, -ny if ny.sum() < 0 else ny
        nx, ny = _unit_plus(nx), _unit_plus(ny)
    new_value = kernel.value(nx, ny)
    new_residual = kernel.residual(nx, ny, new_value)
    slack = 1e-12 * max(1.0, abs(value))
    if new_residual < residual and sign * new_value >= sign * value - slack:
        return nx, ny
    logger.debug(
        "Newton refinement rejected (residual %.3g -> %.3g, value %.12g -> %.12g)",
        residual,
        new_residual,
        value,
        new_value,
    )
    return x, y


def _starts(m: int, n: int, count: int, seed: int, *, nonnegative: bool) -> list[tuple[FloatArray, FloatArray]]:
    """First start is the uniform positive pair; start r >= 1 is drawn from seed + r."""
    starts = [(np.full(m, 1.0 / np.sqrt(m)), np.full(n, 1.0 / np.sqrt(n)))]
    for r in range(1, count):
        rng = np.random.default_rng(seed + r)
        x = rng.standard_normal(m)
        y = rng.standard_normal(n)
        if nonnegative:
            x, y = np.abs(x), np.abs(y)
        starts.append((_unit(x), _unit(y)))
    return starts


def _map(fn: Callable[[T], _RestartResult], items: Sequence[T], workers: int) -> list[_RestartResult]:
    """Order-preserving map, threaded when more than one worker is allowed."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _power_restart(
    kernel: ContractionKernel,
    start: tuple[FloatArray, FloatArray],
    tau: float,
    cfg: SolverConfig,
) -> _RestartResult:
    x, y = start
    trace: list[tuple[float, float]] = []
    gap_closed = False
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        g, h = kernel.gh(x, y)
        v, u = _ratio_bounds(g, h, x, y)
        trace.append((v, u))
        if u - v <= cfg.tol:
            gap_closed = True
            break
        x = _unit_plus(g + tau * x)
        y = _unit_plus(h + tau * y)

    x, y = _ascend(
        kernel, x, y, sign=1.0, nonnegative=True, max_steps=cfg.polish_steps, tol=cfg.tol
    )
    x, y = _refine(kernel, x, y, sign=1.0, nonnegative=True)
    value = kernel.value(x, y)
    residual = kernel.residual(x, y, value)
    return _RestartResult(
        x=x,
        y=y,
        value=value,
        residual=residual,
        converged=gap_closed or residual <= 10 * cfg.tol,
        iterations=iterations,
        trace=trace,
    )


def _tag(a: BiquadraticTensor, pair: MEigenPair, tol: float) -> None:
    check_m_eigenpair(a, pair, tol)
    try:
        classify_eigenpair(pair, residual_tol=tol)
    except NotAnEigenpairError:
        pair.tags = EigenClass.M


def solve_lambda_max(a: BiquadraticTensor, cfg: SolverConfig | None = None) -> SolverOutcome:
    """Estimate lambda_max = rho_M of A in NBQ(m, n) by multi-start Collatz-tracked iteration.

    The returned eigenvalue is f at a unit pair, so it never exceeds the true
    lambda_max by more than rounding. Reaching lambda_max itself is heuristic.
    """
    cfg = cfg or SolverConfig()
    _require_nbq(a)
    _require_two(a)
    kernel = ContractionKernel(a)
    tau = cfg.shift if cfg.shift is not None else _default_shift(kernel)
    starts = _starts(a.m, a.n, cfg.restarts, cfg.seed, nonnegative=True)

    results = _map(lambda s: _power_restart(kernel, s, tau, cfg), starts, cfg.workers())
    values = [r.value for r in results]
    best_index = int(np.argmax(values))
    best_run = results[best_index]
    for index, run in enumerate(results):
        logger.debug(
            "restart %d: lambda=%.12g residual=%.3g iterations=%d converged=%s",
            index,
            run.value,
            run.residual,
            run.iterations,
            run.converged,
        )

    best = MEigenPair(eigenvalue=best_run.value, pair=VectorPair(best_run.x, best_run.y))
    _tag(a, best, 10 * cfg.tol)
    v, u = collatz_bounds(a, best.pair)

    peak_v = max((t[0] for t in best_run.trace), default=v)
    if peak_v > best.eigenvalue + cfg.tol:
        logger.warning(
            "bound sandwich violated: traced v=%.12g exceeds final lambda=%.12g",
            peak_v,
            best.eigenvalue,
        )
    if not best_run.converged:
        logger.warning(
            "solver did not converge in %d sweeps; returning best-so-far lambda=%.12g (residual %.3g)",
            cfg.max_iter,
            best.eigenvalue,
            best.residual,
        )
    logger.info(
        "lambda_max=%.12g (bounds [%.12g, %.12g], %d restarts, tags %s)",
        best.eigenvalue,
        v,
        u,
        cfg.restarts,
        "|".join(best.tags.labels()),
    )
    return SolverOutcome(
        best=best,
        lower_bound=v,
        upper_bound=u,
        converged=best_run.converged,
        iterations_used=best_run.iterations,
        restart_values=values,
        trace=best_run.trace,
    )


def _sample_bounds(
    a: BiquadraticTensor,
    samples: int,
    seed: int,
    include: VectorPair | None,
    cfg: SolverConfig | None,
) -> tuple[FloatArray, FloatArray]:
    _require_nbq(a)
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    if include is None:
        solver_cfg = cfg or SolverConfig(seed=seed)
        include = solve_lambda_max(a, solver_cfg).best.pair
    if np.any(include.x < 0) or np.any(include.y < 0):
        raise NegativeInputError("the included pair must be nonnegative")
    if not np.any(include.x > 0) or not np.any(include.y > 0):
        raise DimensionError("the included pair needs x != 0 and y != 0")

    rng = np.random.default_rng(seed)
    xs = np.abs(rng.standard_normal((samples, a.m)))
    ys = np.abs(rng.standard_normal((samples, a.n)))
    xs = np.vstack([xs, include.x])
    ys = np.vstack([ys, include.y])
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    ys /= np.linalg.norm(ys, axis=1, keepdims=True)

    g, h = ContractionKernel(a).batch_gh(xs, ys)
    xmask = xs > SUPPORT_THRESHOLD
    ymask = ys > SUPPORT_THRESHOLD
    safe_x = np.where(xmask, xs, 1.0)
    safe_y = np.where(ymask, ys, 1.0)
    gx = g / safe_x
    hy = h / safe_y
    v = np.minimum(
        np.where(xmask, gx, np.inf).min(axis=1), np.where(ymask, hy, np.inf).min(axis=1)
    )
    u = np.maximum(
        np.where(xmask, gx, -np.inf).max(axis=1), np.where(ymask, hy, -np.inf).max(axis=1)
    )
    return v, u


def estimate_rho_star(
    a: BiquadraticTensor,
    samples: int,
    seed: int = 0,
    *,
    include: VectorPair | None = None,
    cfg: SolverConfig | None = None,
) -> float:
    """Max of v over random nonnegative unit pairs plus the solver's (or given) pair."""
    v, _ = _sample_bounds(a, samples, seed, include, cfg)
    return float(v.max())


def estimate_rho_lower(
    a: BiquadraticTensor,
    samples: int,
    seed: int = 0,
    *,
    include: VectorPair | None = None,
    cfg: SolverConfig | None = None,
) -> float:
    """Min of u over the same sample set. Instrumentation only; no bound is claimed."""
    _, u = _sample_bounds(a, samples, seed, include, cfg)
    return float(u.min())


def _descent_run(
    kernel: ContractionKernel, start: tuple[FloatArray, FloatArray], cfg: SolverConfig
) -> _RestartResult:
    x, y = _ascend(
        kernel,
        start[0],
        start[1],
        sign=-1.0,
        nonnegative=False,
        max_steps=cfg.max_iter,
        tol=cfg.tol,
    )
    x, y = _refine(kernel, x, y, sign=-1.0, nonnegative=False)
    value = kernel.value(x, y)
    residual = kernel.residual(x, y, value)
    return _RestartResult(
        x=x,
        y=y,
        value=value,
        residual=residual,
        converged=residual <= 10 * cfg.tol,
        iterations=0,
        trace=[],
    )


def min_m_eigenvalue_probe(
    a: BiquadraticTensor, cfg: SolverConfig | None = None
) -> ProbeOutcome:
    """Least stationary value of f found by multi-start projected gradient descent.

    A heuristic upper bound on the smallest M-eigenvalue: a negative value is a
    certificate that A is not PSD, a nonnegative one is only consistent with PSD.
    """
    cfg = cfg or SolverConfig()
    kernel = ContractionKernel(a)
    starts = _starts(a.m, a.n, cfg.restarts, cfg.seed, nonnegative=False)
    for i in range(a.m):
        for j in range(a.n):
            starts.append((np.eye(a.m)[i], np.eye(a.n)[j]))

    results = _map(lambda s: _descent_run(kernel, s, cfg), starts, cfg.workers())
    values = [r.value for r in results]
    best_run = results[int(np.argmin(values))]
    witness = MEigenPair(eigenvalue=best_run.value, pair=VectorPair(best_run.x, best_run.y))
    _tag(a, witness, 10 * cfg.tol)
    if not best_run.converged:
        logger.warning(
            "PSD probe did not reach a stationary point (residual %.3g); value %.12g is best-so-far",
            best_run.residual,
            best_run.value,
        )
    logger.info("min M-eigenvalue probe: %.12g over %d starts", best_run.value, len(starts))
    return ProbeOutcome(
        value=best_run.value,
        witness=witness,
        converged=best_run.converged,
        start_values=values,
    )
