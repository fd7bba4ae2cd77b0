from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Annotated

import typer

from biquad.config import AppConfig, ConfigError, dump_config, load_config, with_overrides
from biquad.documents import (
    DocumentParseError,
    document_to_tensor,
    read_edge_list,
    read_tensor_document,
    serialize_document,
    tensor_to_document,
)
from biquad.graph import (
    GraphError,
    adjacency_tensor,
    degree_tensors,
    laplacian,
    separability_report,
    signless_laplacian,
)
from biquad.logging_config import setup_logging
from biquad.models import (
    AnalysisReport,
    EigenpairRow,
    OracleReport,
    PsdVerdict,
    SeparabilitySummary,
    SolverSummary,
    StructureSummary,
)
from biquad.oracle import MAX_FACTOR_SIZE, enumerate_m_eigenpairs_small
from biquad.spectra import (
    NegativeInputError,
    estimate_rho_star,
    min_m_eigenvalue_probe,
    solve_lambda_max,
)
from biquad.structure import structure_report
from biquad.tensor_core import BiquadraticTensor, DimensionError, InvalidTensorError

if TYPE_CHECKING:
    from collections.abc import Iterator

logger = logging.getLogger(__name__)

# Verdict threshold of the psd command when --verdict-tol is not given.
PSD_TOL = 1e-9

app = typer.Typer(
    name="biquad",
    help="Structure and M-eigenvalue analysis of biquadratic tensors and bipartite 2-graphs.",
    no_args_is_help=True,
)


class Emit(str, Enum):
    adjacency = "adjacency"
    d0 = "d0"
    dx = "dx"
    dy = "dy"
    signless_laplacian = "q"
    laplacian = "l"
    report = "report"


TensorFile = Annotated[
    Path, typer.Argument(exists=True, dir_okay=False, help="TensorDocument JSON file.")
]
TolOpt = Annotated[float | None, typer.Option("--tol", help="Convergence / residual tolerance.")]
RestartsOpt = Annotated[int | None, typer.Option("--restarts", help="Solver restarts.")]
MaxIterOpt = Annotated[int | None, typer.Option("--max-iter", help="Sweeps per restart.")]
SeedOpt = Annotated[int | None, typer.Option("--seed", help="Seed for random starts.")]
SamplesOpt = Annotated[int | None, typer.Option("--samples", help="Random pairs for rho*.")]
GridOpt = Annotated[int | None, typer.Option("--grid", help="Oracle points per angle.")]
JsonOpt = Annotated[bool, typer.Option("--json", help="Emit JSON instead of text.")]
ConfigOpt = Annotated[
    Path | None, typer.Option("--config", dir_okay=False, help="YAML config file.")
]


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Map domain errors to the exit-code contract: 1 config, 2 parse, 3 dimension/domain."""
    try:
        yield
    except ConfigError as e:
        typer.echo(f"Config error: {e.message}", err=True)
        raise typer.Exit(1) from None
    except DocumentParseError as e:
        typer.echo(f"Parse error: {e.location()}{e.message}", err=True)
        raise typer.Exit(2) from None
    except (DimensionError, NegativeInputError, GraphError, InvalidTensorError) as e:
        typer.echo(f"Invalid input: {e.message}", err=True)
        raise typer.Exit(3) from None
    except typer.Exit:
        raise
    except Exception as e:
        typer.echo(f"Unexpected error ({type(e).__name__}): {e}", err=True)
        raise typer.Exit(1) from None


def _settings(
    config_path: Path | None,
    *,
    tol: float | None = None,
    restarts: int | None = None,
    max_iter: int | None = None,
    seed: int | None = None,
    samples: int | None = None,
    grid: int | None = None,
) -> AppConfig:
    cfg = with_overrides(
        load_config(config_path),
        samples=samples,
        grid=grid,
        tol=tol,
        restarts=restarts,
        max_iter=max_iter,
        seed=seed,
    )
    setup_logging(cfg.log_level, cfg.log_file)
    return cfg


def _fmt(value: float) -> str:
    return repr(float(value))


def _vector(values: list[float]) -> str:
    return "(" + ", ".join(_fmt(v) for v in values) + ")"


def _row_text(row: EigenpairRow) -> str:
    return (
        f"lambda={_fmt(row.eigenvalue)} x={_vector(row.x)} y={_vector(row.y)} "
        f"classes={'|'.join(row.classes)} residual={row.residual:.3g}"
    )


def _structure_text(s: StructureSummary) -> list[str]:
    lines = [
        f"x_reducible: {s.x_reducible}",
        f"y_reducible: {s.y_reducible}",
        f"x_quasi_reducible: {s.x_quasi_reducible}",
        f"y_quasi_reducible: {s.y_quasi_reducible}",
        f"irreducible: {s.irreducible}",
        f"quasi_irreducible: {s.quasi_irreducible}",
    ]
    if s.x_reducible_witness is not None:
        w = s.x_reducible_witness
        lines.append(f"  x-reducible witness: j={w.index} J={w.subset}")
    if s.y_reducible_witness is not None:
        w = s.y_reducible_witness
        lines.append(f"  y-reducible witness: i={w.index} J={w.subset}")
    if s.x_quasi_witness is not None:
        q = s.x_quasi_witness
        lines.append(f"  x-quasi witness: j1={q.first} j2={q.second} J={q.subset}")
    if s.y_quasi_witness is not None:
        q = s.y_quasi_witness
        lines.append(f"  y-quasi witness: i1={q.first} i2={q.second} J={q.subset}")
    return lines


def _solver_text(s: SolverSummary) -> list[str]:
    return [
        f"lambda_max: {_fmt(s.eigenpair.eigenvalue)}",
        f"  eigenpair: {_row_text(s.eigenpair)}",
        f"  collatz bounds: [{_fmt(s.lower_bound)}, {_fmt(s.upper_bound)}]",
        f"  converged: {s.converged} ({s.iterations_used} sweeps)",
    ]


def _load_tensor(path: Path, *, nonnegative: bool) -> BiquadraticTensor:
    tensor = document_to_tensor(read_tensor_document(path))
    if nonnegative and (tensor.entries < 0).any():
        raise NegativeInputError(f"{path.name} has negative entries; this command needs A >= 0")
    return tensor


@app.command()
def analyze(
    tensor_file: TensorFile,
    oracle: Annotated[
        bool, typer.Option("--oracle", help="Also enumerate all M-eigenpairs (m, n <= 3).")
    ] = False,
    timing: Annotated[bool, typer.Option("--timing", help="Report per-phase milliseconds.")] = False,
    tol: TolOpt = None,
    restarts: RestartsOpt = None,
    max_iter: MaxIterOpt = None,
    seed: SeedOpt = None,
    samples: SamplesOpt = None,
    grid: GridOpt = None,
    json_output: JsonOpt = False,
    config: ConfigOpt = None,
) -> None:
    """Structure flags, lambda_max with Collatz bounds, rho* estimate and (optionally) the oracle table."""
    with _exit_codes():
        cfg = _settings(
            config,
            tol=tol,
            restarts=restarts,
            max_iter=max_iter,
            seed=seed,
            samples=samples,
            grid=grid,
        )
        tensor = _load_tensor(tensor_file, nonnegative=True)
        phases: dict[str, float] = {}

        start = time.perf_counter()
        structure = structure_report(tensor)
        phases["structure"] = (time.perf_counter() - start) * 1000

        start = time.perf_counter()
        outcome = solve_lambda_max(tensor, cfg.solver)
        phases["lambda_max"] = (time.perf_counter() - start) * 1000

        start = time.perf_counter()
        rho_star = estimate_rho_star(
            tensor, cfg.samples, cfg.solver.seed, include=outcome.best.pair, cfg=cfg.solver
        )
        phases["rho_star"] = (time.perf_counter() - start) * 1000

        table: list[EigenpairRow] = []
        if oracle:
            if tensor.m <= MAX_FACTOR_SIZE and tensor.n <= MAX_FACTOR_SIZE:
                start = time.perf_counter()
                pairs = enumerate_m_eigenpairs_small(
                    tensor, cfg.oracle.grid, cfg.oracle.tol, workers=cfg.solver.workers()
                )
                phases["oracle"] = (time.perf_counter() - start) * 1000
                table = [EigenpairRow.from_pair(p) for p in pairs]
            else:
                logger.warning(
                    "--oracle skipped: it needs m, n <= %d (got m=%d, n=%d)",
                    MAX_FACTOR_SIZE,
                    tensor.m,
                    tensor.n,
                )

    report = AnalysisReport(
        m=tensor.m,
        n=tensor.n,
        structure=StructureSummary.from_report(structure),
        lambda_max=SolverSummary.from_outcome(outcome),
        rho_star_estimate=rho_star,
        eigenpair_table=table,
        timing=phases if timing else None,
    )

    if json_output:
        exclude = None if timing else {"timing"}
        typer.echo(report.model_dump_json(indent=2, exclude=exclude))
        return

    lines = [f"tensor: m={report.m} n={report.n}", *_structure_text(report.structure)]
    lines += _solver_text(report.lambda_max)
    lines.append(f"rho_star estimate: {_fmt(report.rho_star_estimate)}")
    if oracle:
        lines.append(f"M-eigenpairs ({len(table)}):")
        lines += [f"  {_row_text(row)}" for row in table]
    if report.timing is not None:
        lines += [f"timing {name}: {ms:.1f} ms" for name, ms in report.timing.items()]
    typer.echo("\n".join(lines))


@app.command()
def eig(
    tensor_file: TensorFile,
    tol: TolOpt = None,
    restarts: RestartsOpt = None,
    max_iter: MaxIterOpt = None,
    seed: SeedOpt = None,
    json_output: JsonOpt = False,
    config: ConfigOpt = None,
) -> None:
    """Largest M-eigenvalue of a nonnegative tensor."""
    with _exit_codes():
        cfg = _settings(config, tol=tol, restarts=restarts, max_iter=max_iter, seed=seed)
        tensor = _load_tensor(tensor_file, nonnegative=True)
        summary = SolverSummary.from_outcome(solve_lambda_max(tensor, cfg.solver))

    if json_output:
        typer.echo(summary.model_dump_json(indent=2))
    else:
        typer.echo("\n".join(_solver_text(summary)))


@app.command("oracle")
def oracle_command(
    tensor_file: TensorFile,
    grid: GridOpt = None,
    tol: Annotated[
        float | None, typer.Option("--tol", help="Residual tolerance for accepted pairs.")
    ] = None,
    json_output: JsonOpt = False,
    config: ConfigOpt = None,
) -> None:
    """Every M-eigenpair of a tensor with m, n <= 3."""
    with _exit_codes():
        cfg = _settings(config, grid=grid)
        oracle_tol = tol if tol is not None else cfg.oracle.tol
        tensor = _load_tensor(tensor_file, nonnegative=False)
        pairs = enumerate_m_eigenpairs_small(
            tensor, cfg.oracle.grid, oracle_tol, workers=cfg.solver.workers()
        )

    report = OracleReport(
        m=tensor.m,
        n=tensor.n,
        grid=cfg.oracle.grid,
        eigenpairs=[EigenpairRow.from_pair(p) for p in pairs],
    )
    if json_output:
        typer.echo(report.model_dump_json(indent=2))
        return
    lines = [f"M-eigenpairs ({len(report.eigenpairs)}):"]
    lines += [f"  {_row_text(row)}" for row in report.eigenpairs]
    typer.echo("\n".join(lines))


@app.command()
def psd(
    tensor_file: TensorFile,
    tol: TolOpt = None,
    restarts: RestartsOpt = None,
    max_iter: MaxIterOpt = None,
    seed: SeedOpt = None,
    verdict_tol: Annotated[
        float, typer.Option("--verdict-tol", help="NOT-PSD threshold on the probe value.")
    ] = PSD_TOL,
    json_output: JsonOpt = False,
    config: ConfigOpt = None,
) -> None:
    """One-sided PSD check: NOT-PSD is a certificate, PSD-CONSISTENT is not a proof."""
    with _exit_codes():
        if verdict_tol < 0:
            raise ConfigError(f"--verdict-tol must be >= 0, got {verdict_tol}")
        cfg = _settings(config, tol=tol, restarts=restarts, max_iter=max_iter, seed=seed)
        tensor = _load_tensor(tensor_file, nonnegative=False)
        probe = min_m_eigenvalue_probe(tensor, cfg.solver)

    verdict = PsdVerdict.from_probe(probe, verdict_tol)
    if json_output:
        typer.echo(verdict.model_dump_json(indent=2))
        return
    lines = [
        f"verdict: {verdict.verdict}",
        f"probe value: {_fmt(verdict.probe_value)}",
        f"PD-CONSISTENT: {verdict.positive_definite_consistent}",
    ]
    if not verdict.converged:
        lines.append("probe did not reach a stationary point; value is best-so-far")
    if verdict.witness is not None:
        lines.append(f"witness: {_row_text(verdict.witness)}")
    typer.echo("\n".join(lines))


@app.command()
def graph(
    edge_file: Annotated[
        Path, typer.Argument(exists=True, dir_okay=False, help="Edge list file.")
    ],
    emit: Annotated[Emit, typer.Option("--emit", help="Tensor or report to emit.")] = Emit.report,
    config: ConfigOpt = None,
) -> None:
    """Tensors of a bipartite 2-graph as TensorDocument JSON, or its separability report."""
    with _exit_codes():
        _settings(config)
        g = read_edge_list(edge_file)
        if emit is Emit.report:
            out = SeparabilitySummary.from_report(separability_report(g)).model_dump_json(indent=2)
        else:
            if emit is Emit.adjacency:
                tensor = adjacency_tensor(g)
            elif emit is Emit.signless_laplacian:
                tensor = signless_laplacian(g)
            elif emit is Emit.laplacian:
                tensor = laplacian(g)
            else:
                d0, dx, dy = degree_tensors(g)
                tensor = {Emit.d0: d0, Emit.dx: dx, Emit.dy: dy}[emit]
            metadata = {"source": edge_file.name, "tensor": emit.value}
            out = serialize_document(tensor_to_document(tensor, metadata)).rstrip("\n")
    typer.echo(out)


@app.command("config")
def show_config(config: ConfigOpt = None) -> None:
    """Print the effective configuration (file, BIQ_THREADS) as YAML."""
    with _exit_codes():
        cfg = load_config(config)
    typer.echo(dump_config(cfg).rstrip("\n"))
