"""Request/response shapes for the HTTP API."""

from __future__ import annotations

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from ..schemes import DEFAULT_COMPARISON


class GridSpec(BaseModel):
    """Log-spaced p_e grid."""

    min: float = Field(1e-3, gt=0.0, lt=1.0)
    max: float = Field(0.5, gt=0.0, lt=1.0)
    points: int = Field(21, ge=1, le=500)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.min < self.max:
            raise ValueError("grid needs min < max")
        return self


class SearchRequest(BaseModel):
    scheme: str = "hybrid_sw"
    k_max: Optional[int] = Field(None, ge=1)
    elementary_only: bool = False


class SearchResponse(BaseModel):
    scheme: str
    M: int
    k_max: int
    counts: Dict[str, object]
    relations: dict        # full relation-set document


class AnalyzeRequest(BaseModel):
    schemes: List[str] = Field(default_factory=lambda: list(DEFAULT_COMPARISON))
    pe: Optional[float] = Field(None, ge=0.0, le=1.0)
    grid: Optional[GridSpec] = None
    peel_coverage: bool = False

    @model_validator(mode="after")
    def _one_eval_mode(self):
        if self.pe is not None and self.grid is not None:
            raise ValueError("give either pe or grid, not both")
        return self


class TheoryPoint(BaseModel):
    p_e: float
    p_f: float


class AnalyzeSchemeReport(BaseModel):
    scheme: str
    M: int
    source: Literal["closed_form", "exhaustive"]
    fc: List[int]
    binom: List[int]
    crosscheck_ok: Optional[bool] = None   # replication schemes only
    theory: Optional[List[TheoryPoint]] = None
    peel_coverage: Optional[Dict[str, int]] = None


class AnalyzeResponse(BaseModel):
    schemes: List[AnalyzeSchemeReport]
    crosscheck_ok: bool


class SimulateRequest(BaseModel):
    schemes: List[str] = Field(default_factory=lambda: list(DEFAULT_COMPARISON))
    grid: Optional[GridSpec] = None
    trials: int = Field(10_000, ge=1, le=10_000_000)
    seed: int = Field(0, ge=0)


class CurvePoint(BaseModel):
    p_e: float
    p_f_theory: float
    p_f_mc: float
    stderr: float
    trials: int
    seed: int


class CurveReport(BaseModel):
    scheme: str
    M: int
    rows: List[CurvePoint]


class OrderingReport(BaseModel):
    """Sanity checks across the standard comparison curves (when present)."""

    psmm_not_worse_than_2copy: Optional[bool] = None
    max_log10_gap_to_3copy: Optional[float] = None
    detail: str = ""


class SimulateResponse(BaseModel):
    curves: List[CurveReport]
    ordering: OrderingReport


class RunRequest(BaseModel):
    scheme: str = "hybrid_sw_2psmm"
    size: int = Field(8, ge=2, le=4096)
    pe: float = Field(0.0, ge=0.0, le=1.0)
    seed: int = Field(0, ge=0)
    fail: Optional[List[str]] = None
    decoder: Literal["linear", "peel"] = "linear"

    @model_validator(mode="after")
    def _even_size(self):
        if self.size % 2:
            raise ValueError("size must be even")
        return self


class RunResponse(BaseModel):
    schema_version: int
    scheme: str
    M: int
    shape: List[int]
    p_e: float
    seed: int
    decoder: str
    forced: bool
    pattern: Dict[str, object]
    decodable: bool
    decoded: bool
    verified: bool
    max_rel_error: float
    timings_s: Dict[str, float]


class BatchRequest(BaseModel):
    scheme: str = "hybrid_sw_2psmm"
    size: int = Field(8, ge=2, le=512)
    pe: float = Field(0.1, ge=0.0, le=1.0)
    trials: int = Field(1000, ge=1, le=100_000)
    seed: int = Field(0, ge=0)
    decoder: Literal["linear", "peel"] = "linear"

    @model_validator(mode="after")
    def _even_size(self):
        if self.size % 2:
            raise ValueError("size must be even")
        return self


class BatchTrialRow(BaseModel):
    trial: int
    pattern_hex: str
    decoded: bool
    verified: bool


class BatchResponse(BaseModel):
    schema_version: int
    scheme: str
    size: int
    p_e: float
    trials: int
    seed: int
    decoder: str
    decode_failures: int
    verify_failures: int
    failure_fraction: float
    rows: List[BatchTrialRow]


class HealthResponse(BaseModel):
    status: str
    version: str


class SchemesResponse(BaseModel):
    schemes: List[dict]
