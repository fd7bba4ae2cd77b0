"""Input documents and report models. Every index here is 1-based."""

from __future__ import annotations

import math
from typing import Literal

from pydantic import BaseModel, field_validator

from biquad.graph import SeparabilityReport, SeparabilityWitness
from biquad.spectra import ProbeOutcome, SolverOutcome
from biquad.structure import QuasiWitness, ReducibilityWitness, StructureReport
from biquad.tensor_core import MEigenPair


class TensorEntry(BaseModel):
    i1: int
    j1: int
    i2: int
    j2: int
    value: float

    @field_validator("i1", "j1", "i2", "j2")
    @classmethod
    def validate_index(cls, v: int) -> int:
        if v < 1:
            msg = "indices are 1-based"
            raise ValueError(msg)
        return v

    @field_validator("value")
    @classmethod
    def validate_value(cls, v: float) -> float:
        if not math.isfinite(v):
            msg = "entry values must be finite"
            raise ValueError(msg)
        return v

    def key(self) -> tuple[int, int, int, int]:
        return (self.i1, self.j1, self.i2, self.j2)


class TensorDocument(BaseModel):
    m: int
    n: int
    entries: list[TensorEntry] = []
    metadata: dict[str, str] = {}

    @field_validator("m", "n")
    @classmethod
    def validate_size(cls, v: int) -> int:
        if v < 1:
            msg = "dimensions must be positive"
            raise ValueError(msg)
        return v


class ReducibilityWitnessModel(BaseModel):
    index: int
    subset: list[int]

    @classmethod
    def from_witness(cls, w: ReducibilityWitness | None) -> ReducibilityWitnessModel | None:
        if w is None:
            return None
        return cls(index=w.index + 1, subset=[k + 1 for k in w.subset])


class QuasiWitnessModel(BaseModel):
    first: int
    second: int
    subset: list[int]

    @classmethod
    def from_witness(cls, w: QuasiWitness | None) -> QuasiWitnessModel | None:
        if w is None:
            return None
        return cls(first=w.first + 1, second=w.second + 1, subset=[k + 1 for k in w.subset])


class StructureSummary(BaseModel):
    x_reducible: bool
    y_reducible: bool
    x_quasi_reducible: bool
    y_quasi_reducible: bool
    irreducible: bool
    quasi_irreducible: bool
    x_reducible_witness: ReducibilityWitnessModel | None = None
    y_reducible_witness: ReducibilityWitnessModel | None = None
    x_quasi_witness: QuasiWitnessModel | None = None
    y_quasi_witness: QuasiWitnessModel | None = None

    @classmethod
    def from_report(cls, r: StructureReport) -> StructureSummary:
        return cls(
            x_reducible=r.x_reducible,
            y_reducible=r.y_reducible,
            x_quasi_reducible=r.x_quasi_reducible,
            y_quasi_reducible=r.y_quasi_reducible,
            irreducible=r.irreducible,
            quasi_irreducible=r.quasi_irreducible,
            x_reducible_witness=ReducibilityWitnessModel.from_witness(r.x_reducible_witness),
            y_reducible_witness=ReducibilityWitnessModel.from_witness(r.y_reducible_witness),
            x_quasi_witness=QuasiWitnessModel.from_witness(r.x_quasi_witness),
            y_quasi_witness=QuasiWitnessModel.from_witness(r.y_quasi_witness),
        )


class EigenpairRow(BaseModel):
    eigenvalue: float
    x: list[float]
    y: list[float]
    classes: list[str]
    residual: float

    @classmethod
    def from_pair(cls, p: MEigenPair) -> EigenpairRow:
        return cls(
            eigenvalue=p.eigenvalue,
            x=[float(v) for v in p.pair.x],
            y=[float(v) for v in p.pair.y],
            classes=p.tags.labels(),
            residual=p.residual,
        )


class SolverSummary(BaseModel):
    eigenpair: EigenpairRow
    lower_bound: float
    upper_bound: float
    converged: bool
    iterations_used: int
    restart_values: list[float]

    @classmethod
    def from_outcome(cls, o: SolverOutcome) -> SolverSummary:
        return cls(
            eigenpair=EigenpairRow.from_pair(o.best),
            lower_bound=o.lower_bound,
            upper_bound=o.upper_bound,
            converged=o.converged,
            iterations_used=o.iterations_used,
            restart_values=o.restart_values,
        )


class AnalysisReport(BaseModel):
    m: int
    n: int
    structure: StructureSummary
    lambda_max: SolverSummary
    rho_star_estimate: float
    eigenpair_table: list[EigenpairRow] = []
    timing: dict[str, float] | None = None


class OracleReport(BaseModel):
    m: int
    n: int
    grid: int
    eigenpairs: list[EigenpairRow]


class SeparabilityWitnessModel(BaseModel):
    pair: list[int]
    part: list[int]

    @classmethod
    def from_witness(cls, w: SeparabilityWitness | None) -> SeparabilityWitnessModel | None:
        if w is None:
            return None
        return cls(pair=[k + 1 for k in w.pair], part=[k + 1 for k in w.part])


class SeparabilitySummary(BaseModel):
    T_separable: bool
    S_separable: bool
    bi_separable: bool
    T_witness: SeparabilityWitnessModel | None = None
    S_witness: SeparabilityWitnessModel | None = None

    @classmethod
    def from_report(cls, r: SeparabilityReport) -> SeparabilitySummary:
        return cls(
            T_separable=r.t_separable,
            S_separable=r.s_separable,
            bi_separable=r.bi_separable,
            T_witness=SeparabilityWitnessModel.from_witness(r.t_witness),
            S_witness=SeparabilityWitnessModel.from_witness(r.s_witness),
        )


class PsdVerdict(BaseModel):
    verdict: Literal["PSD-CONSISTENT", "NOT-PSD"]
    positive_definite_consistent: bool
    probe_value: float
    converged: bool
    witness: EigenpairRow | None = None

    @classmethod
    def from_probe(cls, probe: ProbeOutcome, tol: float) -> PsdVerdict:
        not_psd = probe.value < -tol
        return cls(
            verdict="NOT-PSD" if not_psd else "PSD-CONSISTENT",
            positive_definite_consistent=probe.value > tol,
            probe_value=probe.value,
            converged=probe.converged,
            witness=EigenpairRow.from_pair(probe.witness) if not_psd else None,
        )
