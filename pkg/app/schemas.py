"""
MeanLab Pydantic Schemas
Value types for operators, quadrature, constants, reports and experiment configs
"""
from pydantic import BaseModel, Field, validator
from typing import Optional, List, Dict, Any, Tuple
from enum import Enum

from app.config import settings


# Enums
class VariantEnum(str, Enum):
    plus = "plus"
    minus = "minus"
    auto = "auto"


class FieldKindEnum(str, Enum):
    gaussian = "gaussian"
    cone = "cone"
    bump = "bump"
    windowed_poly = "windowed_poly"
    cosine = "cosine"
    linear = "linear"
    constant = "constant"


class CommandEnum(str, Enum):
    eval = "eval"
    verify = "verify"
    limit = "limit"
    appendix = "appendix"
    constants = "constants"
    corpus = "corpus"


class OutputFormatEnum(str, Enum):
    csv = "csv"
    json = "json"
    both = "both"


# ============ Quadrature Schemas ============

class QuadratureSpec(BaseModel):
    """Node counts, cutoffs and tolerances shared by every quadrature engine"""
    jacobi_nodes: int = Field(default_factory=lambda: settings.JACOBI_NODES, ge=2)
    smooth_nodes: int = Field(default_factory=lambda: settings.SMOOTH_NODES, ge=2)
    sphere_order: int = Field(default_factory=lambda: settings.SPHERE_ORDER, ge=2)
    inner_cutoff: Optional[float] = Field(default_factory=lambda: settings.INNER_CUTOFF, gt=0)
    truncation_tol: float = Field(default_factory=lambda: settings.TRUNCATION_TOL, gt=0)
    max_radius_cap: float = Field(default_factory=lambda: settings.MAX_RADIUS_CAP, gt=0)
    near_origin_refinements: int = Field(default_factory=lambda: settings.NEAR_ORIGIN_REFINEMENTS, ge=0)
    breakpoint_grading: int = Field(default_factory=lambda: settings.BREAKPOINT_GRADING, ge=0)
    self_check: bool = False

    class Config:
        frozen = True

    @classmethod
    def default(cls) -> "QuadratureSpec":
        return cls()

    def scaled(self, factor: float) -> "QuadratureSpec":
        """Same spec with every node count scaled (at least 2 nodes each)"""
        return self.model_copy(update={
            "jacobi_nodes": max(2, int(round(self.jacobi_nodes * factor))),
            "smooth_nodes": max(2, int(round(self.smooth_nodes * factor))),
            "sphere_order": max(2, 2 * int(round(self.sphere_order * factor / 2))),
            "self_check": False,
        })

    @property
    def polar_order(self) -> int:
        return max(2, self.sphere_order // 2)


# ============ Operator Parameter Schemas ============

class OperatorParams(BaseModel):
    """Dimension, order, exponent, evaluation point and kernel radius"""
    n: int = Field(..., ge=1, le=3)
    s: float = Field(..., gt=0, lt=1)
    p: float = Field(default=2.0, ge=2)
    x: List[float]
    r: Optional[float] = Field(None, gt=0)

    class Config:
        frozen = True

    @validator("x")
    def point_matches_dimension(cls, v, values):
        n = values.get("n")
        if n is not None and len(v) != n:
            raise ValueError(f"x has {len(v)} coordinates, expected n={n}")
        return v


class LocalMeanParams(BaseModel):
    """Radius, exponent and critical-point variant of a local mean kernel"""
    r: float = Field(..., gt=0)
    p: float = Field(default=2.0, ge=2)
    variant: VariantEnum = VariantEnum.auto

    class Config:
        frozen = True


# ============ Constants Schemas ============

class Constants(BaseModel):
    """Every normalizer and moment used by the kernels, for one (n, s, p)"""
    n: int
    s: float
    p: float
    C_ns: float
    c_ns: float
    c_s: float
    c_s_infinity: float
    gamma_p: float
    gamma_p_prime: float
    C_np: float
    tilde_c_np: float
    tilde_c_np_printed: float
    c_p: Optional[float] = None
    alpha_p: Optional[float] = None
    beta_p: Optional[float] = None
    gamma_cap: Optional[float] = None

    class Config:
        frozen = True

    @property
    def C_sp(self) -> Optional[float]:
        """Normalizer of the cap mean kernel, c_s * gamma_cap"""
        if self.gamma_cap is None:
            return None
        return self.c_s * self.gamma_cap


# ============ Sweep Schemas ============

class SweepOptions(BaseModel):
    """Expected order and acceptance rule of an r-sweep"""
    label: str = "residual"
    expected_slope: float
    tolerance: float = Field(default_factory=lambda: settings.NONLOCAL_SLOPE_TOL, gt=0)
    two_sided: bool = False
    window: Optional[Tuple[int, int]] = None
    quadrature: Optional[Dict[str, Any]] = None

    class Config:
        frozen = True


class LimitOptions(BaseModel):
    """Scaling and acceptance rule of an s-sweep toward 1"""
    label: str = "operator"
    target_name: str = "target"
    scaled: bool = True
    tolerance: float = Field(default=0.05, gt=0)
    quadrature: Optional[Dict[str, Any]] = None

    class Config:
        frozen = True


# ============ Report Schemas ============

class ExpansionReport(BaseModel):
    """An r-sweep of a residual with its fitted log-log slope"""
    operator: str
    abscissae: List[float]
    residuals: List[float]
    fitted_slope: Optional[float] = None
    slope_ci: Optional[float] = None
    intercept: Optional[float] = None
    expected_slope: float
    tolerance: float
    two_sided: bool = False
    window: Tuple[int, int]
    passed: bool
    saturated: bool = False
    faster_than_expected: bool = False
    quadrature: Optional[Dict[str, Any]] = None
    notes: List[str] = []

    class Config:
        frozen = True

    @validator("abscissae")
    def strictly_monotone(cls, v):
        diffs = [b - a for a, b in zip(v, v[1:])]
        if diffs and not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
            raise ValueError("abscissae must be strictly monotone")
        return v

    @validator("window")
    def window_not_empty(cls, v):
        if v[1] <= v[0]:
            raise ValueError("window must be non-empty")
        return v


class LimitReport(BaseModel):
    """An s-sweep toward 1 compared with the local target"""
    operator: str
    target_name: str
    abscissae: List[float]
    values: List[float]
    target: float
    scaled: bool
    relative_errors: List[float]
    extrapolated_limit: Optional[float] = None
    extrapolated_error: Optional[float] = None
    tolerance: float
    passed: bool
    diagnostics: Dict[str, List[float]] = {}
    quadrature: Optional[Dict[str, Any]] = None

    class Config:
        frozen = True


class AppendixReport(BaseModel):
    s: float
    r_grid: List[float]
    eun: List[float]
    eun_closed_form: List[float]
    eun_spread: float
    eun_bounded: bool
    trois: List[float]
    trois_over_r2: List[float]
    trois_leading: float
    trois_relative_error: float
    trois_passed: bool
    qutr_s: List[float]
    qutr: List[float]
    qutr_passed: bool
    passed: bool

    class Config:
        frozen = True


class MeanConvergenceReport(BaseModel):
    s: float
    p: float
    r_grid: List[float]
    deviations: List[float]
    in_proven_range: bool
    expected_slope: float
    fitted_slope: Optional[float] = None
    monotone: bool
    asserted: bool
    passed: bool

    class Config:
        frozen = True


# ============ Experiment Config Schemas ============

class FieldConfig(BaseModel):
    kind: FieldKindEnum = FieldKindEnum.gaussian
    params: Dict[str, Any] = {}


class OutputConfig(BaseModel):
    format: OutputFormatEnum = OutputFormatEnum.both
    path: Optional[str] = None


class ExperimentConfig(BaseModel):
    """Declarative description of one evaluation or sweep"""
    command: CommandEnum = CommandEnum.eval
    field: FieldConfig = FieldConfig()
    operator: Optional[str] = None
    n: int = Field(default=1, ge=1, le=3)
    s: float = Field(default=0.5, gt=0, lt=1)
    p: float = Field(default=2.0, ge=2)
    r: Optional[float] = Field(None, gt=0)
    x: Optional[List[float]] = None
    variant: VariantEnum = VariantEnum.auto
    r_grid: Optional[List[float]] = None
    s_grid: Optional[List[float]] = None
    quadrature: Dict[str, Any] = {}
    output: OutputConfig = OutputConfig()

    @validator("x")
    def point_matches_dimension(cls, v, values):
        n = values.get("n")
        if v is not None and n is not None and len(v) != n:
            raise ValueError(f"x has {len(v)} coordinates, expected n={n}")
        return v

    @validator("r_grid")
    def grid_positive(cls, v):
        if v is not None and any(r <= 0 for r in v):
            raise ValueError("r_grid entries must be positive")
        return v

    @validator("s_grid")
    def s_grid_in_range(cls, v):
        if v is not None and any(not 0 < s < 1 for s in v):
            raise ValueError("s_grid entries must lie in (0,1)")
        return v

    def point(self) -> List[float]:
        return self.x if self.x is not None else [0.0] * self.n

    def quadrature_spec(self) -> QuadratureSpec:
        return QuadratureSpec(**self.quadrature)


class EvaluationResult(BaseModel):
    operator: str
    value: float
    params: Dict[str, Any]
    notes: List[str] = []
