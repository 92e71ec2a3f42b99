"""FastAPI service wrapping the pole-expansion library.

Endpoints build pole sets, evaluate scalar densities, produce figure
data and run the benchmark experiments.  All responses are plain JSON;
pole sets travel in the same document layout the CLI writes to disk.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..contour import eval_scalar, gapless_pole_set, gapped_pole_set, sign_pole_set
from ..experiments import (
    BenchmarkSystem,
    ExperimentConfig,
    REFERENCE_TABLE2,
    REFERENCE_TABLE3,
    emit_pole_figure_data,
    run_identity_check,
    run_sign_convergence,
    run_table1,
    run_table2,
    run_table3,
)
from ..lattice import LatticeSpec, occupation, spectral_window
from ..multipole import (
    MultipoleConfig,
    TikhonovParams,
    build_simple_pole_expansion,
    chebyshev_tail_fit,
    eval_tail_cheb,
)
from ..poleio import pole_set_from_dict, pole_set_to_dict
from .schemas import (
    ContourPoleRequest,
    ExperimentRequest,
    FigureRequest,
    IdentityCheckRequest,
    IdentityCheckResponse,
    MatsubaraPoleRequest,
    PoleSetDoc,
    ScalarEvalRequest,
    ScalarEvalResponse,
    SignCurveResponse,
    SpectrumRequest,
    SpectrumResponse,
    TableResponse,
    TableRowDoc,
)

app = FastAPI(
    title="fermipole",
    version=__version__,
    description="Pole expansions of the Fermi-Dirac operator function",
)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/poles/contour", response_model=PoleSetDoc)
def poles_contour(req: ContourPoleRequest):
    try:
        if req.scheme == "gapped":
            ps = gapped_pole_set(req.e_gap, req.e_max, req.beta, req.q)
        elif req.scheme == "sign":
            ps = sign_pole_set(req.e_gap, req.e_max, req.q)
        else:
            ps = gapless_pole_set(req.e_max, req.beta, req.q)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return pole_set_to_dict(ps)


@app.post("/poles/matsubara", response_model=PoleSetDoc)
def poles_matsubara(req: MatsubaraPoleRequest):
    try:
        config = MultipoleConfig(P=req.p, n_groups=req.n_groups)
        ps = build_simple_pole_expansion(config, TikhonovParams(lam_rel=req.tikhonov_lam_rel))
        tail = None
        if req.tail_interval is not None:
            tail = chebyshev_tail_fit(
                config.m_pole, req.tail_interval, req.cheb_target, beta=req.beta
            )
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return pole_set_to_dict(ps, tail)


@app.post("/eval/scalar", response_model=ScalarEvalResponse)
def eval_scalar_endpoint(req: ScalarEvalRequest):
    ps, tail = pole_set_from_dict(req.pole_set.model_dump())
    x = np.asarray(req.x, dtype=float)
    values = eval_scalar(ps, x)
    if tail is not None:
        values = values - eval_tail_cheb(tail, x)
    return ScalarEvalResponse(values=[float(v) for v in np.atleast_1d(values)])


@app.post("/figures/poles")
def figures_poles(req: FigureRequest) -> dict:
    try:
        return emit_pole_figure_data(req.figure, **req.overrides)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.post("/spectrum", response_model=SpectrumResponse)
def spectrum(req: SpectrumRequest):
    system = BenchmarkSystem(LatticeSpec(L=req.size, seed=req.seed))
    beta = system.beta_for(req.beta_delta_e)
    mu = system.mu_for(req.mu_policy, beta)
    window = spectral_window(system.eig.eigenvalues, mu, beta)
    return SpectrumResponse(
        n=system.spec.n,
        e_min=float(system.eig.eigenvalues[0]),
        e_max_abs=float(system.eig.eigenvalues[-1]),
        delta_e=system.delta_e,
        mu=mu,
        e_gap=window.e_gap,
        e_max=window.e_max,
        beta=beta,
        n_electron=occupation(system.eig.eigenvalues, beta, mu),
    )


def _config(req: ExperimentRequest, sweep: dict, mu_policy: str = "gapped_default") -> ExperimentConfig:
    values = sorted(sweep)
    if not req.full:
        values = [v for v in values if v <= 269312]
    return ExperimentConfig(
        size=req.size,
        seed=req.seed,
        tol=req.tol,
        beta_delta_e=tuple(float(v) for v in values),
        mu_policy=mu_policy,
        workers=req.workers,
        full=req.full,
    )


def _system_info(req: ExperimentRequest) -> dict:
    system = BenchmarkSystem(LatticeSpec(L=req.size, seed=req.seed))
    return {"n": float(system.spec.n), "delta_e": system.delta_e}


def _rows_doc(rows) -> list[TableRowDoc]:
    return [TableRowDoc(**r.as_dict()) for r in rows]


@app.post("/experiments/table1", response_model=TableResponse)
def experiments_table1(req: ExperimentRequest):
    rows = run_table1(_config(req, {4208 * 2**i: None for i in range(7)}))
    return TableResponse(
        name="table1",
        rows=_rows_doc(rows),
        all_rows_passed=all(r.passed for r in rows),
        system=_system_info(req),
    )


@app.post("/experiments/table2", response_model=TableResponse)
def experiments_table2(req: ExperimentRequest):
    rows, fit = run_table2(_config(req, REFERENCE_TABLE2, "gapless_at_eigenvalue"))
    return TableResponse(
        name="table2",
        rows=_rows_doc(rows),
        all_rows_passed=all(r.passed for r in rows),
        fit=fit,
        system=_system_info(req),
    )


@app.post("/experiments/table3", response_model=TableResponse)
def experiments_table3(req: ExperimentRequest):
    rows = run_table3(_config(req, REFERENCE_TABLE3, "gapless_at_eigenvalue"))
    return TableResponse(
        name="table3",
        rows=_rows_doc(rows),
        all_rows_passed=all(r.passed for r in rows),
        system=_system_info(req),
    )


@app.post("/experiments/sign", response_model=SignCurveResponse)
def experiments_sign(req: ExperimentRequest):
    cfg = ExperimentConfig(size=req.size, seed=req.seed, tol=req.tol, mu_policy="gap_1e-6")
    curve, fit = run_sign_convergence(cfg)
    return SignCurveResponse(curve=curve, fit=fit, system=_system_info(req))


@app.post("/checks/identity", response_model=IdentityCheckResponse)
def checks_identity(req: IdentityCheckRequest):
    result = run_identity_check(xs=tuple(req.xs), ms=tuple(req.ms))
    return IdentityCheckResponse(**result)
