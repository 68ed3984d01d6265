"""HTTP service exposing the package operations.

Every endpoint is a stateless computation: the request carries the full
model/initial data (same schema as the CLI config file) and the response is
plain JSON with complex numbers as ``[re, im]`` pairs.  Tabular results come
back as ``columns`` + ``rows`` so clients can serialize them verbatim.

Input validation failures map to HTTP 422, numeric failures (past-extinction
evaluation, loss of positivity, singular coupling) to HTTP 409.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .chern import calabi_eckmann_realization, verify_chern_tensors
from .config import (
    ComplexPair,
    InitialConfig,
    MetricConfig,
    ModelConfig,
    build_initial,
    build_metric,
    build_model,
    matrix_to_pairs,
)
from .cspace import CSpaceModel, InvariantMetric
from ._linalg import hermitian_inverse
from .errors import InputError, NumericFailure, PastExtinction, ThetaSingular
from .flow import (
    closed_form_solution,
    extinction_time,
    fiber_inverse_closed_form,
    integrate_rk4,
)
from .limits import (
    collapse_structure_ce,
    limit_form,
    normalized_state,
    static_metric,
    static_residual,
)
from .roots import catalog_families, catalog_lookup, grassmannian_realization, verify_root_identities


# -- request bodies -----------------------------------------------------------

class SimulateRequest(BaseModel):
    model: ModelConfig
    initial: InitialConfig = InitialConfig()
    t_end: float | None = None
    steps: int = Field(default=1000, ge=1)
    cross_check: bool = False


class LimitRequest(BaseModel):
    model: ModelConfig
    initial: InitialConfig = InitialConfig()
    tie_tol: float = Field(default=1e-12, ge=0)
    near_samples: int = Field(default=20, ge=1, le=30)


class StaticRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    model: ModelConfig
    lam: float | None = Field(default=None, alias="lambda")
    check: MetricConfig | None = None


class NormalizeRequest(BaseModel):
    model: ModelConfig
    initial: InitialConfig = InitialConfig()
    V: float = Field(default=1.0, gt=0)
    samples: int = Field(default=20, ge=1, le=40)
    tie_tol: float = Field(default=1e-12, ge=0)


class VerifyRequest(BaseModel):
    grassmannians: list[tuple[int, int]] = [(1, 2), (2, 2), (1, 3)]
    ce: bool = True
    ce_factors: tuple[tuple[int, int], tuple[int, int]] = ((1, 2), (1, 2))
    ce_metrics: list[MetricConfig] | None = None
    random_count: int = Field(default=5, ge=1, le=50)
    seed: int = 0


# -- responses ----------------------------------------------------------------

class TableResponse(BaseModel):
    columns: list[str]
    rows: list[list[float]]
    meta: dict = {}


class CollapseResponse(BaseModel):
    sigma: list[int]
    I1: list[int]
    I2: list[int]
    p_set: list[int]
    description: str


class LimitResponse(BaseModel):
    T: float
    p_set: list[int]
    base_limits: list[float]
    fiber_rank: int
    mu: list[float]
    Zp_basis: list[list[ComplexPair]]           # orthonormal kernel columns
    fiber_limit: list[list[ComplexPair]]
    kernel_description: str
    collapsing_subgroup: str
    fiber_realizable: bool
    near_extinction: list[dict]
    collapse: CollapseResponse | None = None


class StaticResponse(BaseModel):
    mode: str                                   # "construct" or "check"
    residual: float
    lam: float | None = None
    h: list[float] | None = None
    H: list[list[ComplexPair]] | None = None
    lambda_fit: float | None = None


class NormalizeResponse(BaseModel):
    table: TableResponse
    xi_limit: float
    lam: float
    static_h: list[float]
    static_H: list[list[ComplexPair]]
    V: float


class ReportResponse(BaseModel):
    residuals: dict[str, float]
    max_residual: float


class RootReportResponse(ReportResponse):
    p: int
    q: int


class TensorReportResponse(ReportResponse):
    h: list[float]
    H: list[list[ComplexPair]]


class VerifyResponse(BaseModel):
    root_reports: list[RootReportResponse]
    tensor_reports: list[TensorReportResponse]
    max_residual: float


class CatalogResponse(BaseModel):
    families: list[dict]
    entry: dict | None = None


# -- table builders -------------------------------------------------------------

def _metric_columns(s: int, k: int, prefix: str = "") -> list[str]:
    cols = [f"{prefix}h_{i + 1}" for i in range(s)]
    for i in range(k):
        for j in range(i, k):
            cols += [f"{prefix}H_{i}_{j}_re", f"{prefix}H_{i}_{j}_im"]
    cols.append(f"{prefix}det_H")
    return cols


def _metric_row(metric: InvariantMetric) -> list[float]:
    row = [float(x) for x in metric.h_base]
    H = metric.H_fiber
    k = metric.k
    for i in range(k):
        for j in range(i, k):
            row += [float(H[i, j].real), float(H[i, j].imag)]
    row.append(float(np.linalg.det(H).real))
    return row


def simulate_table(model: CSpaceModel, init: InvariantMetric, t_end: float,
                   steps: int, cross_check: bool) -> TableResponse:
    T, _ = extinction_time(init.h_base)
    if t_end >= T:
        raise PastExtinction(
            f"t_end={t_end:g} is not before the extinction time T={T:g}")
    times = np.linspace(0.0, t_end, steps + 1)
    columns = ["t"] + _metric_columns(model.s, model.k)
    closed_rows = [_metric_row(closed_form_solution(model, init, float(t)))
                   for t in times]
    rows = [[float(t)] + r for t, r in zip(times, closed_rows)]
    meta: dict = {"T": extinction_time(init.h_base)[0], "method": "closed-form"}
    if cross_check:
        traj = integrate_rk4(model, init, t_end, steps)
        columns += _metric_columns(model.s, model.k, prefix="rk4_")
        err = 0.0
        for row, state in zip(rows, traj.states):
            extra = _metric_row(state)
            base = row[1:]
            err = max(err, max(abs(a - b) for a, b in zip(base, extra)))
            row.extend(extra)
        meta["max_cross_check_error"] = err
        meta["method"] = "closed-form+rk4"
    return TableResponse(columns=columns, rows=rows, meta=meta)


def _near_extinction_grid(T: float, n_max: int) -> list[float]:
    """Geometric grid ``t = T (1 - 2^-n)`` resolving the blow-up in log scale."""
    return [T * (1.0 - 2.0 ** (-n)) for n in range(1, n_max + 1)]


# -- app -------------------------------------------------------------------------

def create_app() -> FastAPI:
    app = FastAPI(
        title="hcflow",
        version=__version__,
        description="Invariant Hermitian curvature flow on torus-fibered "
                    "homogeneous models: flow solutions, extinction limits, "
                    "static metrics, and structural verification.")

    @app.exception_handler(InputError)
    def _input_error(request: Request, exc: InputError):
        return JSONResponse(
            status_code=422,
            content={"detail": {"type": type(exc).__name__, "message": str(exc)}})

    @app.exception_handler(NumericFailure)
    def _numeric_error(request: Request, exc: NumericFailure):
        return JSONResponse(
            status_code=409,
            content={"detail": {"type": type(exc).__name__, "message": str(exc)}})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/catalog", response_model=CatalogResponse)
    def catalog(kind: str | None = None, p: int | None = None,
                q: int | None = None, n: int | None = None):
        entry = None
        if kind is not None:
            e = catalog_lookup(kind, p=p, q=q, n=n)
            entry = {"kind": e.kind.value, "params": e.params, "dim_n": e.dim_n,
                     "admissible": e.admissible, "reason": e.reason, "note": e.note}
        return CatalogResponse(families=catalog_families(), entry=entry)

    @app.post("/simulate", response_model=TableResponse)
    def simulate(req: SimulateRequest):
        if req.t_end is None:
            raise InputError("run.t_end is required for simulate")
        model = build_model(req.model)
        init = build_initial(model, req.initial)
        return simulate_table(model, init, req.t_end, req.steps, req.cross_check)

    @app.post("/limit", response_model=LimitResponse)
    def limit(req: LimitRequest):
        model = build_model(req.model)
        init = build_initial(model, req.initial)
        lf = limit_form(model, init, tie_tol=req.tie_tol)
        near = []
        for t in _near_extinction_grid(lf.T, req.near_samples):
            Hinv, _ = fiber_inverse_closed_form(model, init, t)
            H, cond = hermitian_inverse(Hinv)
            near.append({"t": t,
                         "max_deviation": float(np.max(np.abs(H - lf.fiber_limit))),
                         "condition": cond})
        collapse = None
        if model.ce_blocks is not None:
            cr = collapse_structure_ce(model, init, tie_tol=req.tie_tol)
            collapse = CollapseResponse(
                sigma=list(cr.sigma), I1=list(cr.I1), I2=list(cr.I2),
                p_set=list(cr.p_set), description=cr.description)
        return LimitResponse(
            T=lf.T, p_set=list(lf.p_set), base_limits=list(lf.base_limits),
            fiber_rank=lf.fiber_rank, mu=list(lf.mu),
            Zp_basis=matrix_to_pairs(lf.Zp_basis),
            fiber_limit=matrix_to_pairs(lf.fiber_limit),
            kernel_description=lf.kernel_description,
            collapsing_subgroup=lf.collapsing_subgroup,
            fiber_realizable=model.fiber_realizable,
            near_extinction=near, collapse=collapse)

    @app.post("/static", response_model=StaticResponse)
    def static(req: StaticRequest):
        model = build_model(req.model)
        if (req.lam is None) == (req.check is None):
            raise InputError("give exactly one of 'lambda' or 'check'")
        if req.lam is not None:
            sm = static_metric(model, req.lam)
            return StaticResponse(
                mode="construct", lam=sm.lam, residual=sm.residual,
                h=list(sm.metric.h_base), H=matrix_to_pairs(sm.metric.H_fiber))
        metric = build_metric(req.check)
        residual, lam_fit = static_residual(model, metric)
        return StaticResponse(mode="check", residual=residual, lambda_fit=lam_fit)

    @app.post("/normalize", response_model=NormalizeResponse)
    def normalize(req: NormalizeRequest):
        model = build_model(req.model)
        init = build_initial(model, req.initial)
        T, _ = extinction_time(init.h_base, tie_tol=req.tie_tol)
        columns = (["t", "xi", "c"] + [f"ch_{i + 1}" for i in range(model.s)])
        k = model.k
        for i in range(k):
            for j in range(i, k):
                columns += [f"cH_{i}_{j}_re", f"cH_{i}_{j}_im"]
        rows = []
        xi_limit = None
        for n in range(0, req.samples + 1):
            t = T * (1.0 - 2.0 ** (-n))
            ns = normalized_state(model, init, t, V=req.V, tie_tol=req.tie_tol)
            xi_limit = ns.xi_limit
            row = [t, ns.xi_of_t, ns.c_of_t]
            row += [float(x) for x in ns.normalized_metric.h_base]
            cH = ns.normalized_metric.H_fiber
            for i in range(k):
                for j in range(i, k):
                    row += [float(cH[i, j].real), float(cH[i, j].imag)]
            rows.append(row)
        if xi_limit <= 0.0:
            raise ThetaSingular(
                "normalized flow has no static limit: total coupling matrix is singular")
        sm = static_metric(model, 1.0 / xi_limit)
        return NormalizeResponse(
            table=TableResponse(columns=columns, rows=rows,
                                meta={"T": T, "V": req.V}),
            xi_limit=xi_limit, lam=1.0 / xi_limit,
            static_h=list(sm.metric.h_base),
            static_H=matrix_to_pairs(sm.metric.H_fiber), V=req.V)

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest):
        root_reports = []
        for (p, q) in req.grassmannians:
            rep = verify_root_identities(grassmannian_realization(p, q))
            root_reports.append(RootReportResponse(
                p=p, q=q, residuals=rep.values, max_residual=rep.max_residual))
        tensor_reports = []
        if req.ce:
            ce = calabi_eckmann_realization(*req.ce_factors)
            if req.ce_metrics is not None:
                metrics = [build_metric(mc) for mc in req.ce_metrics]
            else:
                rng = np.random.default_rng(req.seed)
                metrics = [InvariantMetric((1.0, 1.0), np.eye(ce.fiber.k))]
                for _ in range(req.random_count - 1):
                    w = rng.uniform(0.1, 5.0, size=ce.fiber.k)
                    metrics.append(InvariantMetric(
                        tuple(rng.uniform(0.2, 4.0, size=2)), np.diag(w).astype(complex)))
            for metric in metrics:
                rep = verify_chern_tensors(ce, metric)
                tensor_reports.append(TensorReportResponse(
                    h=list(metric.h_base), H=matrix_to_pairs(metric.H_fiber),
                    residuals=rep.values, max_residual=rep.max_residual))
        overall = max([r.max_residual for r in root_reports + tensor_reports],
                      default=0.0)
        return VerifyResponse(root_reports=root_reports,
                              tensor_reports=tensor_reports,
                              max_residual=overall)

    return app


app = create_app()
