"""FastAPI application: relation search, reliability analysis, simulation, runs.

Everything heavy lives in the core package; handlers validate, dispatch, and
shape responses.  Scheme construction errors surface as 400s.
"""

from __future__ import annotations

from math import comb, log10
from typing import List, Optional, Sequence

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..reliability import (
    SchemeCurve,
    census_profile,
    curve,
    default_grid,
    grid_points,
    p_fail_theoretical,
    profile_for,
)
from ..relations import search_lp
from ..schemes import (
    SCHEME_KINDS,
    attach_relations,
    build_scheme,
    peel_coverage,
)
from ..simulate import batch as run_batch
from ..simulate import random_int_matrices
from ..simulate import run as run_trip
from .models import (
    AnalyzeRequest,
    AnalyzeResponse,
    AnalyzeSchemeReport,
    BatchRequest,
    BatchResponse,
    CurvePoint,
    CurveReport,
    GridSpec,
    HealthResponse,
    OrderingReport,
    RunRequest,
    RunResponse,
    SchemesResponse,
    SearchRequest,
    SearchResponse,
    SimulateRequest,
    SimulateResponse,
    TheoryPoint,
)


def _scheme(kind: str):
    try:
        return build_scheme(kind)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from None


def _grid(spec: Optional[GridSpec]):
    if spec is None:
        return default_grid()
    return grid_points(spec.min, spec.max, spec.points)


def _ordering(curves: Sequence[SchemeCurve]) -> OrderingReport:
    """Cross-curve checks: parity scheme vs 2-copy, log-distance to 3-copy."""
    by_id = {c.scheme_id: c for c in curves}
    psmm = by_id.get("hybrid_sw_2psmm")
    two = by_id.get("strassen_2copy")
    three = by_id.get("strassen_3copy")
    notes: List[str] = []
    not_worse = None
    max_gap = None
    if psmm is not None and two is not None:
        not_worse = all(a.p_f_theory <= b.p_f_theory * (1 + 1e-12) + 1e-300
                        for a, b in zip(psmm.rows, two.rows))
        notes.append(
            "hybrid_sw_2psmm theory failure probability is "
            + ("<= strassen_2copy at every grid point"
               if not_worse else "ABOVE strassen_2copy somewhere"))
    if psmm is not None and three is not None:
        gaps = [abs(log10(a.p_f_theory) - log10(b.p_f_theory))
                for a, b in zip(psmm.rows, three.rows)
                if a.p_f_theory > 0 and b.p_f_theory > 0]
        if gaps:
            max_gap = max(gaps)
            notes.append(f"max |log10 gap| to strassen_3copy = {max_gap:.3f} decades")
    return OrderingReport(
        psmm_not_worse_than_2copy=not_worse,
        max_log10_gap_to_3copy=max_gap,
        detail="; ".join(notes),
    )


def create_app() -> FastAPI:
    app = FastAPI(title="ftmm", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.get("/schemes", response_model=SchemesResponse)
    def schemes():
        return SchemesResponse(
            schemes=[build_scheme(k).to_json() for k in SCHEME_KINDS])

    @app.post("/search", response_model=SearchResponse)
    def search(req: SearchRequest):
        scheme = _scheme(req.scheme)
        if req.k_max is not None:
            k_max = min(req.k_max, scheme.M)
        else:
            k_max = scheme.M if scheme.M <= 16 else 6
        rs = search_lp(scheme.terms, k_max=k_max,
                       elementary_only=req.elementary_only, scheme_id=scheme.id)
        doc = rs.to_json()
        return SearchResponse(scheme=scheme.id, M=scheme.M, k_max=k_max,
                              counts=doc["counts"], relations=doc)

    @app.post("/analyze", response_model=AnalyzeResponse)
    def analyze(req: AnalyzeRequest):
        reports = []
        all_ok = True
        for kind in req.schemes:
            scheme = _scheme(kind)
            profile = profile_for(scheme)
            crosscheck = None
            if profile.source == "closed_form":
                crosscheck = tuple(census_profile(scheme).fc) == tuple(profile.fc)
                all_ok = all_ok and crosscheck
            theory = None
            if req.pe is not None:
                theory = [TheoryPoint(p_e=req.pe,
                                      p_f=p_fail_theoretical(profile, req.pe))]
            elif req.grid is not None:
                theory = [TheoryPoint(p_e=float(p),
                                      p_f=p_fail_theoretical(profile, float(p)))
                          for p in _grid(req.grid)]
            cov = None
            if req.peel_coverage:
                if scheme.M > 16:
                    raise HTTPException(
                        status_code=400,
                        detail="peel coverage sweep is bounded to M <= 16")
                try:
                    cov = peel_coverage(attach_relations(scheme))
                except ValueError as exc:
                    raise HTTPException(status_code=400, detail=str(exc)) from None
            reports.append(AnalyzeSchemeReport(
                scheme=scheme.id,
                M=scheme.M,
                source=profile.source,
                fc=list(profile.fc),
                binom=[comb(scheme.M, k) for k in range(scheme.M + 1)],
                crosscheck_ok=crosscheck,
                theory=theory,
                peel_coverage=cov,
            ))
        return AnalyzeResponse(schemes=reports, crosscheck_ok=all_ok)

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        schemes = [_scheme(k) for k in req.schemes]
        curves = curve(schemes, grid=_grid(req.grid),
                       trials=req.trials, seed=req.seed)
        return SimulateResponse(
            curves=[CurveReport(scheme=c.scheme_id, M=c.M,
                                rows=[CurvePoint(**vars(r)) for r in c.rows])
                    for c in curves],
            ordering=_ordering(curves),
        )

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest):
        scheme = _scheme(req.scheme)
        if req.decoder == "peel":
            scheme = attach_relations(scheme)
        A, B = random_int_matrices(req.size, req.seed)
        try:
            report = run_trip(scheme, A, B, p_e=req.pe, seed=req.seed,
                              decoder=req.decoder, fail=req.fail)
        except (ValueError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return RunResponse(**report.to_json())

    @app.post("/batch", response_model=BatchResponse)
    def batch(req: BatchRequest):
        scheme = _scheme(req.scheme)
        if req.decoder == "peel":
            scheme = attach_relations(scheme)
        try:
            result = run_batch(scheme, size=req.size, p_e=req.pe,
                               trials=req.trials, seed=req.seed,
                               decoder=req.decoder)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return BatchResponse(**result.to_json())

    return app
