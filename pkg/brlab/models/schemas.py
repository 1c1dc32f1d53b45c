"""Report and run-configuration schemas"""
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Command(str, Enum):
    """CLI subcommands"""
    BESSEL = "bessel"
    MULTIPLIER = "multiplier"
    CAPS = "caps"
    KERNEL = "kernel"
    APPLY = "apply"
    VERIFY = "verify"
    REPORT = "report"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    BIN = "bin"


class Experiment(str, Enum):
    """Verification experiments runnable through ``verify``"""
    BESSEL = "bessel"
    KEY_OBSERVATION = "key-observation"
    M_PLUS = "m-plus"
    LAMBDA = "lambda"
    PARTITION = "partition"
    GEOMETRY = "geometry"
    UV_SPLIT = "uv-split"
    LEMMA_ONE = "lemma-one"
    PROP_ONE = "prop-one"
    PROP_TWO = "prop-two"
    REMARK32 = "remark32"
    OPERATOR = "operator"
    NONVANISHING = "nonvanishing"
    SUBTRACTION = "subtraction"


class TaskStatus(str, Enum):
    """Experiment job status"""
    PENDING = "pending"
    PROCESSING = "processing"
    COMPLETED = "completed"
    FAILED = "failed"


class DecayFitReport(BaseModel):
    """Sweep series with its base-2 log-linear fit"""
    model_config = ConfigDict(populate_by_name=True)

    experiment: str
    params: Dict[str, Any] = {}
    sweep_variable: str = "j"
    series: List[List[float]]
    slope: float
    intercept: float
    r2: float
    threshold: float
    min_r2: float = 0.9
    passed: bool = Field(alias="pass")
    target: str = ""
    notes: List[str] = []

    def to_report(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "sweep_variable": self.sweep_variable,
            "series": self.series,
            "fit": {"slope": self.slope, "intercept": self.intercept, "r2": self.r2},
            "threshold": self.threshold,
            "min_r2": self.min_r2,
            "target": self.target,
            "pass": self.passed,
            "notes": self.notes,
        }

    def rows(self) -> List[Dict[str, Any]]:
        return [{"experiment": self.experiment, self.sweep_variable: x, "value": y}
                for x, y in self.series]


class ResidualReport(BaseModel):
    """Per-probe residuals against a tolerance"""
    experiment: str
    params: Dict[str, Any] = {}
    rows: List[Dict[str, Any]] = []
    max_residual: float
    tolerance: float
    passed: bool
    notes: List[str] = []

    def to_report(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "rows": self.rows,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "notes": self.notes,
        }


class GeometryReport(BaseModel):
    """Outcome of the cap-separation and rectangle-disjointness checks"""
    n: int
    j: int
    sigma: float
    c: float
    kappa: float
    m: int
    samples: int
    pairs_available: bool
    cap_pair_violations: int = 0
    cap_pair_min_margin: Optional[float] = None
    rectangle_violations: int = 0
    rectangle_min_margin: Optional[float] = None
    overlap_count: int = 0
    notes: List[str] = []

    @property
    def vacuous(self) -> bool:
        return not self.pairs_available

    @property
    def passed(self) -> bool:
        return (self.cap_pair_violations == 0 and self.rectangle_violations == 0
                and self.overlap_count == 0)

    def to_report(self) -> Dict[str, Any]:
        data = self.model_dump()
        data["vacuous"] = self.vacuous
        data["pass"] = self.passed
        return data


OPERATORS = ("bochner-riesz", "bochner-riesz-kernel", "i-alpha")


class RunConfig(BaseModel):
    """Resolved CLI configuration (file values overridden by flags)"""
    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    command: Command
    n: int = 2
    j: Optional[int] = None
    j_range: Optional[str] = None
    sigma: float = 0.1
    c: float = 8.0
    alpha_re: float = 0.8
    alpha_im: float = 0.0
    beta_re: float = 0.6
    beta_im: float = 0.0
    delta: float = 0.5
    m: int = 1
    ell: int = 1
    variant: str = "sharp"
    operator: str = "bochner-riesz"
    z: float = 0.5
    order_re: float = 0.0
    order_im: float = 0.0
    rho: Optional[str] = None
    side: Optional[int] = None
    extent: Optional[float] = None
    out: Optional[str] = None
    format: OutputFormat = OutputFormat.JSON
    experiment: Optional[Experiment] = None
    inputs: List[str] = []
    samples: int = 10_000
    r_max: float = 2.0 ** 14
    averaging: int = 8
    j_max: int = 2
    panels_per_unit: int = 16
    gauss_order: int = 8
    seed: int = 20240601
    threads: Optional[int] = None

    @field_validator("n")
    @classmethod
    def _dimension(cls, v: int) -> int:
        if v not in (1, 2, 3):
            raise ValueError("requires n ∈ {1, 2, 3}")
        return v

    @field_validator("sigma")
    @classmethod
    def _sigma(cls, v: float) -> float:
        if not 0.0 < v < 0.5:
            raise ValueError("requires 0 < σ < 1/2")
        return v

    @field_validator("panels_per_unit", "gauss_order")
    @classmethod
    def _quadrature(cls, v: int) -> int:
        if v < 1:
            raise ValueError("quadrature settings must be ≥ 1")
        return v

    @field_validator("c")
    @classmethod
    def _separation(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("requires c > 0")
        return v

    @field_validator("samples", "averaging", "m", "ell")
    @classmethod
    def _positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be ≥ 1")
        return v

    @field_validator("variant")
    @classmethod
    def _variant(cls, v: str) -> str:
        if v not in ("standard", "sharp", "flat", "analytic"):
            raise ValueError("variant must be one of standard, sharp, flat, analytic")
        return v

    @field_validator("j_range")
    @classmethod
    def _j_range(cls, v: Optional[str]) -> Optional[str]:
        if v is not None:
            parse_int_range(v)
        return v

    @field_validator("operator")
    @classmethod
    def _operator(cls, v: str) -> str:
        if v not in OPERATORS:
            raise ValueError(f"operator must be one of {', '.join(OPERATORS)}")
        return v

    @model_validator(mode="after")
    def _required(self) -> "RunConfig":
        if self.command is Command.VERIFY and self.experiment is None:
            raise ValueError("verify requires --experiment")
        if self.command in (Command.MULTIPLIER, Command.CAPS, Command.KERNEL, Command.APPLY) \
                and not self.out:
            raise ValueError(f"{self.command.value} requires --out")
        if self.command in (Command.MULTIPLIER, Command.CAPS, Command.KERNEL) and self.j is None:
            raise ValueError(f"{self.command.value} requires --j")
        if self.command is Command.REPORT and not self.inputs:
            raise ValueError("report requires at least one input report")
        return self

    @property
    def alpha(self) -> complex:
        return complex(self.alpha_re, self.alpha_im)

    @property
    def beta(self) -> complex:
        return complex(self.beta_re, self.beta_im)

    @property
    def order(self) -> complex:
        return complex(self.order_re, self.order_im)

    def j_values(self, default: str) -> List[int]:
        return parse_int_range(self.j_range or default)

    def resolved(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def parse_int_range(text: str) -> List[int]:
    """'4..8' or '4,5,7' to a sorted list of ints"""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    values = sorted({int(part) for part in text.split(",") if part.strip()})
    if not values:
        raise ValueError(f"empty range {text!r}")
    return values


def parse_float_list(text: str) -> List[float]:
    return [float(part) for part in text.split(",") if part.strip()]
