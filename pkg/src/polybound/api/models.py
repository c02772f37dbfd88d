"""Request and response models for the verification service.

RunConfig is the single request body shared by every command endpoint; the
endpoint path decides what runs, the body supplies parameters, and every
response echoes the full config plus the tool version so any output file is
reproducible from its own contents.
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

Command = Literal["eval", "verify", "report", "search", "threshold"]
EvalFn = Literal["digamma", "polygamma", "root_norm", "exp_neg_psi", "digamma_inverse"]


class RunConfig(BaseModel):
    """Everything a run needs, fully serializable.

    Grid fields left as None fall back to the default sweep grid (10^4
    log-spaced plus 10^3 seeded-random points on [1e-3, 1e3]); numeric inputs
    may be decimal strings to stay exact at any working precision.
    """

    model_config = ConfigDict(extra="forbid")

    command: Command | None = None
    bounds: str = "all"
    fn: EvalFn | None = None
    x: str | float | None = None
    n: int | None = None
    k: int | None = None
    n_max: int | None = Field(None, ge=1)
    k_max: int | None = Field(None, ge=1)
    n_cap: int = Field(64, ge=3)
    order: str | float = -1.0
    exploratory: bool = False
    x_min: str | float | None = None
    x_max: str | float | None = None
    points: int | None = Field(None, ge=2)
    spacing: Literal["log", "linear", "random"] | None = None
    seed: int | None = None
    digits: int | None = Field(None, ge=20)
    out: str | None = None
    format: Literal["json", "csv"] = "json"


class HealthResponse(BaseModel):
    status: Literal["ok"]
    version: str


class BoundInfo(BaseModel):
    """Registry metadata for one bound, as served by GET /bounds."""

    code: str
    slug: str
    description: str
    two_sided: bool
    needs_n: bool
    needs_k: bool
    n_min: int
    n_max: int | None
    k_min: int
    k_window: bool
    x_min: str


class EvalResponse(BaseModel):
    version: str
    config: RunConfig
    fn: EvalFn
    value: str
    err: str
    pretty: str


class CaseRef(BaseModel):
    name: str
    n: int | None
    k: int | None
    side: str
    exploratory: bool


class CounterexampleModel(BaseModel):
    x: str
    margin: str
    bracket: list[str] | None


class ReportModel(BaseModel):
    label: str
    case: CaseRef | None
    samples: int
    skipped: int
    uncertified_count: int
    min_margin: str
    argmin_x: str
    counterexamples: list[CounterexampleModel]
    errors: list[str]


class VerifyResponse(BaseModel):
    version: str
    config: RunConfig
    all_certified: bool
    counterexample_count: int
    uncertified_count: int
    reports: list[ReportModel]


class EstimateModel(BaseModel):
    name: str
    value: str
    bracket: list[str]
    argext_x: str
    grid_meta: str
    boundary_attained: bool
    skipped: int


class SearchResponse(BaseModel):
    version: str
    config: RunConfig
    estimates: list[EstimateModel]


class ThresholdResponse(BaseModel):
    version: str
    config: RunConfig
    n_failed: int | None
    largest_holding: int | None
    n_cap: int
    grid_meta: str
    witness: CounterexampleModel | None
