"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class ContourPoleRequest(BaseModel):
    scheme: Literal["gapped", "sign", "gapless"]
    e_gap: float = Field(default=0.0, ge=0.0, description="spectral gap around mu")
    e_max: float = Field(gt=0.0, description="max |E - mu| over the spectrum")
    beta: Optional[float] = Field(default=None, gt=0.0, description="inverse temperature")
    q: int = Field(ge=1, description="quadrature points per contour loop")

    @model_validator(mode="after")
    def _scheme_requirements(self):
        if self.scheme in ("gapped", "sign") and self.e_gap <= 0.0:
            raise ValueError(f"{self.scheme} scheme requires e_gap > 0")
        if self.scheme in ("gapped", "gapless") and self.beta is None:
            raise ValueError(f"{self.scheme} scheme requires beta")
        return self


class MatsubaraPoleRequest(BaseModel):
    p: int = Field(ge=1, description="terms per group; power of two")
    n_groups: int = Field(ge=1)
    beta: Optional[float] = Field(default=None, gt=0.0)
    tail_interval: Optional[tuple[float, float]] = Field(
        default=None, description="x-interval for the tail fit; omit to skip the tail"
    )
    cheb_target: float = Field(default=1e-7, gt=0.0)
    tikhonov_lam_rel: float = Field(default=1e-12, ge=0.0)


class TailDoc(BaseModel):
    M_pole: int
    interval: tuple[float, float]
    cheb_coeffs: list[float]
    target_accuracy: float
    beta: Optional[float] = None


class PoleSetDoc(BaseModel):
    """Wire format of a pole set; mirrors the JSON file layout."""

    scheme: str
    Q: int
    beta: Optional[float] = None
    E_g: Optional[float] = None
    E_M: Optional[float] = None
    poles: list[tuple[float, float]]
    weights: list[tuple[float, float]]
    constant: float
    variable: str = "energy"
    tail: Optional[TailDoc] = None


class ScalarEvalRequest(BaseModel):
    pole_set: PoleSetDoc
    x: list[float]


class ScalarEvalResponse(BaseModel):
    values: list[float]


class FigureRequest(BaseModel):
    figure: Literal["gapped-loops", "sign-loop", "dumbbell", "matsubara-groups"]
    overrides: dict[str, float] = Field(default_factory=dict)


class ExperimentRequest(BaseModel):
    size: int = Field(default=16, ge=2)
    seed: int = 0
    tol: float = Field(default=1e-6, gt=0.0)
    full: bool = Field(default=False, description="include the largest sweep rows")
    workers: int = Field(default=1, ge=1)


class TableRowDoc(BaseModel):
    beta_delta_e: float
    m_pole: Optional[int] = None
    n_pole: int
    n_cheb: Optional[int] = None
    delta_rho_rel: float
    reference_n_pole: Optional[int] = None
    reference_error: Optional[float] = None
    passed: bool


class TableResponse(BaseModel):
    name: str
    rows: list[TableRowDoc]
    all_rows_passed: bool
    fit: Optional[dict[str, float]] = None
    system: dict[str, float]


class SignCurveResponse(BaseModel):
    curve: list[tuple[int, float]]
    fit: dict[str, float]
    system: dict[str, float]


class IdentityCheckRequest(BaseModel):
    xs: list[float] = Field(default=[-100.0, -10.0, -1.0, 0.0, 0.5, 3.0, 40.0, 100.0])
    ms: list[int] = Field(default=[0, 1, 31, 511, 4095])


class IdentityCheckResponse(BaseModel):
    max_residual: float
    passed: bool


class SpectrumRequest(BaseModel):
    size: int = Field(default=16, ge=2)
    seed: int = 0
    mu_policy: Literal[
        "gapped_default", "half_filling", "gapless_at_eigenvalue", "gap_1e-6"
    ] = "gapped_default"
    beta_delta_e: float = Field(default=4208.0, gt=0.0)


class SpectrumResponse(BaseModel):
    n: int
    e_min: float
    e_max_abs: float
    delta_e: float
    mu: float
    e_gap: float
    e_max: float
    beta: float
    n_electron: float
