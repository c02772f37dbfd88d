"""HTTP service wiring the engine, catalog, verifier, and search together.

Every response embeds the tool version and the full request config, and all
numeric payloads are deterministic decimal strings, so two runs with the same
config produce byte-identical bodies.  CSV responses carry the same
provenance in a single leading '#' comment line.
"""

import functools
import io

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from mpmath import mp, mpf

from .. import __version__
from ..catalog import exp_neg_psi, get_bound, list_bounds, make_cases, root_norm
from ..engine import (
    DEFAULT_CONFIG,
    ParameterError,
    PrecisionConfig,
    digamma,
    digamma_inverse,
    polygamma,
)
from ..search import (
    best_nk_constants,
    best_shift_constants,
    critical_shift_curve,
    estimate_to_dict,
    threshold_n,
    threshold_to_dict,
    write_curve_csv,
)
from ..verifier import (
    DEFAULT_SEED,
    SampleGrid,
    format_real,
    report_to_dict,
    sweep,
    write_margin_csv,
)
from .models import (
    BoundInfo,
    EvalResponse,
    HealthResponse,
    ReportModel,
    RunConfig,
    SearchResponse,
    ThresholdResponse,
    VerifyResponse,
)

app = FastAPI(title="polybound", version=__version__)

# bounds-expansion caps when the request names no n/k limits
DEFAULT_N_MAX = 4
DEFAULT_K_MAX = 3


def _guard(handler):
    """Translate engine/solver rejections into HTTP 400s."""

    @functools.wraps(handler)
    def wrapped(*args, **kwargs):
        try:
            return handler(*args, **kwargs)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    return wrapped


def _precision(run: RunConfig) -> PrecisionConfig:
    if run.digits is None:
        return DEFAULT_CONFIG
    return PrecisionConfig(working_digits=run.digits)


def _grid(run: RunConfig) -> SampleGrid | None:
    """Build the sample grid, or None for the default sweep grid."""
    if (run.x_min, run.x_max, run.points, run.spacing, run.seed) == (None,) * 5:
        return None
    spacing = run.spacing or "log"
    seed = run.seed
    if spacing == "random" and seed is None:
        seed = DEFAULT_SEED
    return SampleGrid(
        x_min=run.x_min if run.x_min is not None else "0.001",
        x_max=run.x_max if run.x_max is not None else "1000",
        count=run.points if run.points is not None else 10_000,
        spacing=spacing,
        seed=seed,
    )


def _expand_cases(run: RunConfig) -> list:
    """Turn a bounds selection plus n/k windows into concrete cases.

    A named bound propagates parameter violations; the "all" selection skips
    combinations a bound does not admit (e.g. an explicit n beyond its cap).
    """
    strict = run.bounds.strip().lower() != "all"
    if strict:
        bounds = [get_bound(code) for code in run.bounds.split(",")]
    else:
        bounds = list(list_bounds())
    cases = []
    for bound in bounds:
        explore = run.exploratory and bound.code == "B06"
        if bound.needs_n:
            if run.n is not None:
                ns = [run.n]
            else:
                cap = run.n_max if run.n_max is not None else DEFAULT_N_MAX
                if bound.n_max is not None and not explore:
                    cap = min(cap, bound.n_max)
                ns = range(bound.n_min, cap + 1)
        else:
            ns = [None]
        for n in ns:
            if bound.needs_k:
                if run.k is not None:
                    ks = [run.k]
                else:
                    k_cap = run.k_max if run.k_max is not None else DEFAULT_K_MAX
                    if bound.k_window:
                        k_cap = min(k_cap, n - 1)
                    ks = range(bound.k_min, k_cap + 1)
            else:
                ks = [None]
            for k in ks:
                try:
                    cases.extend(make_cases(bound, n=n, k=k, exploratory=explore))
                except ParameterError:
                    if strict:
                        raise
    if not cases:
        raise ParameterError(f"selection {run.bounds!r} produced no cases")
    return cases


def _csv_preamble(run: RunConfig) -> str:
    return f"# polybound {__version__} config={run.model_dump_json()}\n"


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.get("/bounds", response_model=list[BoundInfo])
def bounds() -> list[BoundInfo]:
    return [
        BoundInfo(
            code=b.code,
            slug=b.slug,
            description=b.description,
            two_sided=b.two_sided,
            needs_n=b.needs_n,
            needs_k=b.needs_k,
            n_min=b.n_min,
            n_max=b.n_max,
            k_min=b.k_min,
            k_window=b.k_window,
            x_min=b.x_min,
        )
        for b in list_bounds()
    ]


_EVAL_NEEDS_N = {"polygamma", "root_norm"}


@app.post("/eval", response_model=EvalResponse)
@_guard
def eval_value(run: RunConfig) -> EvalResponse:
    if run.fn is None:
        raise ParameterError("eval requires fn")
    if run.x is None:
        raise ParameterError("eval requires x")
    cfg = _precision(run)
    with mp.workdps(cfg.working_digits + 10):
        x = mpf(str(run.x))
    if run.fn in _EVAL_NEEDS_N and run.n is None:
        raise ParameterError(f"fn={run.fn} requires n")
    if run.fn == "digamma":
        result = digamma(x, cfg)
    elif run.fn == "polygamma":
        result = polygamma(run.n, x, cfg)
    elif run.fn == "root_norm":
        result = root_norm(run.n, x, cfg)
    elif run.fn == "exp_neg_psi":
        result = exp_neg_psi(x, cfg)
    else:
        result = digamma_inverse(x, cfg)
    with mp.workdps(cfg.working_digits):
        pretty = f"{mp.nstr(result.value, 11)} ± {mp.nstr(result.err, 3)}"
    return EvalResponse(
        version=__version__,
        config=run,
        fn=run.fn,
        value=format_real(result.value),
        err=format_real(result.err),
        pretty=pretty,
    )


@app.post("/verify", response_model=VerifyResponse)
@_guard
def verify(run: RunConfig) -> VerifyResponse:
    cfg = _precision(run)
    grid = _grid(run)
    reports = [sweep(case, grid, cfg) for case in _expand_cases(run)]
    counterexample_count = sum(len(r.counterexamples) for r in reports)
    uncertified_count = sum(r.uncertified_count for r in reports)
    return VerifyResponse(
        version=__version__,
        config=run,
        all_certified=counterexample_count == 0 and uncertified_count == 0,
        counterexample_count=counterexample_count,
        uncertified_count=uncertified_count,
        reports=[ReportModel(**report_to_dict(r)) for r in reports],
    )


@app.post("/report")
@_guard
def report(run: RunConfig) -> PlainTextResponse:
    cfg = _precision(run)
    grid = _grid(run)
    buf = io.StringIO()
    buf.write(_csv_preamble(run))
    write_margin_csv(buf, _expand_cases(run), grid, cfg)
    return PlainTextResponse(buf.getvalue(), media_type="text/csv")


@app.post("/search")
@_guard
def search(run: RunConfig):
    if run.n is None:
        raise ParameterError("search requires n")
    cfg = _precision(run)
    grid = _grid(run)
    if run.format == "csv":
        if run.k is not None:
            raise ParameterError("curve CSV export covers the plain shift family only")
        curve = critical_shift_curve(run.n, run.order, grid, cfg)
        buf = io.StringIO()
        buf.write(_csv_preamble(run))
        write_curve_csv(buf, curve)
        return PlainTextResponse(buf.getvalue(), media_type="text/csv")
    if run.k is None:
        estimates = best_shift_constants(run.n, run.order, grid, cfg)
    else:
        estimates = best_nk_constants(run.n, run.k, run.order, grid, cfg)
    return SearchResponse(
        version=__version__,
        config=run,
        estimates=[estimate_to_dict(e) for e in estimates],
    )


@app.post("/threshold", response_model=ThresholdResponse)
@_guard
def threshold(run: RunConfig) -> ThresholdResponse:
    cfg = _precision(run)
    grid = _grid(run)
    result = threshold_n(grid, run.n_cap, cfg)
    return ThresholdResponse(version=__version__, config=run, **threshold_to_dict(result))
