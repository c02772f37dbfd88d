"""Grid sweeps, margin reports, and counterexample hunting for bound cases.

A sweep evaluates one bound case at every grid point and aggregates the
margins.  Indecisive points -- margin within the error envelope -- are
retried on a fixed precision-escalation ladder, so bounds that get extremely
tight in part of their domain still certify instead of drowning in rounding
noise.  Negative margins beyond the error envelope are re-certified at
doubled precision before being reported as counterexamples, so a report
never cries wolf.  Structural checks (the decreasing root-norm chain, the
reciprocal limit, finite-order complete monotonicity of e^(1/t) - psi'(t))
reuse the same report shape.

Sweeps never abort: points outside a case's validity domain are counted as
skipped, and unexpected evaluation failures are recorded as report entries.
"""

import csv
import random
from dataclasses import dataclass
from functools import lru_cache

from mpmath import mp, mpf

from .catalog import BoundCase, evaluate_bound, make_cases, root_norm
from .engine import (
    ApproxReal,
    DomainError,
    ParameterError,
    PrecisionConfig,
    _GUARD_DIGITS,
    _validate_config,
    exp_inv_derivative,
    polygamma,
)
from .means import BracketError

__all__ = [
    "CSV_COLUMNS",
    "Counterexample",
    "DEFAULT_SEED",
    "SampleGrid",
    "VerificationReport",
    "chain_check",
    "complete_monotonicity_check",
    "default_grid_points",
    "format_real",
    "limit_check",
    "margin_rows",
    "refine_counterexample",
    "report_to_dict",
    "sweep",
    "write_margin_csv",
]

DEFAULT_SEED = 1729
_GRID_DPS = 30  # grid points are generated at fixed precision for determinism


def format_real(value) -> str:
    """Deterministic decimal rendering used by reports and CSV rows."""
    # mpf values pass through untouched: re-wrapping them would round to the
    # ambient precision, which may be far below the precision they carry.
    if not isinstance(value, mpf):
        with mp.workdps(_GRID_DPS + 10):
            value = mpf(value)
    return mp.nstr(value, 36)


# ---------------------------------------------------------------------------
# sampling grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleGrid:
    """A deterministic set of positive sample points.

    ``spacing`` is one of ``log``, ``linear``, or ``random`` (log-uniform,
    driven by ``seed``).  Points are generated at a fixed internal precision
    so the same grid reproduces bit-for-bit regardless of ambient settings.
    """

    x_min: mpf
    x_max: mpf
    count: int
    spacing: str = "log"
    seed: int | None = None

    def __post_init__(self) -> None:
        with mp.workdps(_GRID_DPS):
            lo = mpf(self.x_min)
            hi = mpf(self.x_max)
        object.__setattr__(self, "x_min", lo)
        object.__setattr__(self, "x_max", hi)
        if mp.isnan(lo) or mp.isinf(lo) or lo <= 0:
            raise ParameterError(f"x_min must be a positive real, got {lo}")
        if mp.isnan(hi) or mp.isinf(hi) or hi <= lo:
            raise ParameterError(f"x_max must exceed x_min, got [{lo}, {hi}]")
        if not isinstance(self.count, int) or isinstance(self.count, bool) or self.count < 2:
            raise ParameterError(f"count must be an integer >= 2, got {self.count!r}")
        if self.spacing not in ("log", "linear", "random"):
            raise ParameterError(f"spacing must be log, linear, or random, got {self.spacing!r}")
        if self.spacing == "random":
            if not isinstance(self.seed, int) or isinstance(self.seed, bool):
                raise ParameterError("random spacing requires an integer seed")
        elif self.seed is not None:
            raise ParameterError(f"seed is only meaningful for random spacing, got {self.seed!r}")

    def points(self) -> tuple:
        """The sample points, ascending."""
        with mp.workdps(_GRID_DPS):
            lo, hi, n = self.x_min, self.x_max, self.count
            if self.spacing == "linear":
                step = (hi - lo) / (n - 1)
                pts = [lo + i * step for i in range(n)]
            else:
                log_lo, log_hi = mp.log(lo), mp.log(hi)
                span = log_hi - log_lo
                if self.spacing == "log":
                    pts = [mp.exp(log_lo + span * i / (n - 1)) for i in range(n)]
                else:
                    rng = random.Random(self.seed)
                    fractions = sorted(rng.random() for _ in range(n))
                    pts = [mp.exp(log_lo + span * mpf(u)) for u in fractions]
            pts[0], pts[-1] = lo, hi
            if self.spacing == "random":
                pts.sort()
            return tuple(pts)


@lru_cache(maxsize=1)
def default_grid_points() -> tuple:
    """The default sweep grid: 10^4 log-spaced points on [1e-3, 1e3] plus
    10^3 seeded log-uniform random points, merged ascending."""
    log_part = SampleGrid("0.001", "1000", 10_000, "log").points()
    random_part = SampleGrid("0.001", "1000", 1_000, "random", seed=DEFAULT_SEED).points()
    return tuple(sorted(log_part + random_part))


def _resolve_points(grid) -> tuple:
    if grid is None:
        return default_grid_points()
    if isinstance(grid, SampleGrid):
        return grid.points()
    try:
        pts = tuple(mpf(p) for p in grid)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"grid must be a SampleGrid or a sequence of reals: {exc}") from None
    if not pts:
        raise ParameterError("grid must contain at least one point")
    for p in pts:
        if mp.isnan(p) or mp.isinf(p) or p <= 0:
            raise ParameterError(f"grid points must be positive reals, got {p}")
    return tuple(sorted(pts))


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Counterexample:
    """A certified violation: the margin at x is negative beyond all error.

    ``bracket``, when present, encloses a sign change of the margin next to
    the violation.
    """

    x: mpf
    margin: mpf
    bracket: tuple | None = None

    def __post_init__(self) -> None:
        if not self.margin < 0:
            raise ParameterError(f"a counterexample needs a negative margin, got {self.margin}")
        if self.bracket is not None:
            lo, hi = self.bracket
            if not lo < hi:
                raise ParameterError(f"bracket must be ascending, got {self.bracket}")


@dataclass(frozen=True)
class VerificationReport:
    """Aggregated sweep outcome for one case (or one structural check)."""

    case: BoundCase | None
    label: str
    samples: int
    min_margin: mpf
    argmin_x: mpf
    uncertified_count: int
    counterexamples: tuple = ()
    skipped: int = 0
    errors: tuple = ()

    @property
    def clean(self) -> bool:
        """True when nothing failed: no counterexamples and no errors."""
        return not self.counterexamples and not self.errors


def _scaled(cfg: PrecisionConfig, factor: int) -> PrecisionConfig:
    """Copy of cfg with working precision scaled up by an integer factor.

    The series depth scales along with the digits: a deeper asymptotic tail
    is what keeps the argument-shift threshold bounded when the precision
    target grows, so a scaled config stays about as fast per digit as the
    original instead of shifting arguments astronomically far.
    """
    return PrecisionConfig(
        working_digits=factor * cfg.working_digits,
        shift_threshold_base=cfg.shift_threshold_base,
        asymptotic_terms=factor * cfg.asymptotic_terms,
    )


#: Precision ladder for indecisive margins, as multiples of the working config.
#: Some bounds become so tight in part of their domain (relative gaps shrinking
#: like exp(-1/t)) that no fixed precision can separate the sides everywhere;
#: the top rung covers the tightest in-domain points of the stock catalog.
_ESCALATION_FACTORS = (2, 4, 8)


def _certified_eval(case: BoundCase, x, cfg: PrecisionConfig) -> tuple:
    """Evaluate a case at x, escalating precision while the margin is indecisive.

    Returns (evaluation, factor).  Escalation stops as soon as the margin is
    certified in either direction -- strictly positive or strictly negative
    beyond the combined error radii -- or the ladder is exhausted.  The ladder
    is fixed, so results stay deterministic for identical inputs.
    """
    cfg = _validate_config(cfg)
    ev = evaluate_bound(case, x, cfg)
    factor = 1
    for next_factor in _ESCALATION_FACTORS:
        if ev.certified or ev.margin < -(ev.lhs.err + ev.rhs.err):
            break
        factor = next_factor
        ev = evaluate_bound(case, x, _scaled(cfg, factor))
    return ev, factor


def _neighbor_bracket(margins, index) -> tuple | None:
    """Bracket a sign change using the nearest grid neighbor with margin > 0."""
    x, _ = margins[index]
    for j in range(index - 1, -1, -1):
        xj, mj = margins[j]
        if mj is None:
            break
        if mj > 0:
            return (xj, x)
    for j in range(index + 1, len(margins)):
        xj, mj = margins[j]
        if mj is None:
            break
        if mj > 0:
            return (x, xj)
    return None


def sweep(case: BoundCase, grid=None, config: PrecisionConfig | None = None) -> VerificationReport:
    """Evaluate a bound case at every grid point and aggregate the margins.

    Never aborts: out-of-domain points are skipped, other failures are
    recorded.  Points whose margin is smaller than the error envelope are
    retried at escalated precision until certified one way or the other, so
    near-equalities count as uncertified only when the ladder tops out.
    Candidate violations (margin certified negative) are re-certified at twice
    the precision that found them before being reported.
    """
    if not isinstance(case, BoundCase):
        raise ParameterError(f"case must be a BoundCase, got {type(case)!r}")
    cfg = _validate_config(config)
    points = _resolve_points(grid)

    margins = []  # (x, margin | None) in grid order, for bracketing
    errors = []
    candidates = []
    evaluated = skipped = uncertified = 0
    min_margin = mp.inf
    argmin_x = mp.nan
    for x in points:
        try:
            ev, factor = _certified_eval(case, x, cfg)
        except DomainError:
            skipped += 1
            margins.append((x, None))
            continue
        except ValueError as exc:
            errors.append(f"x={format_real(x)}: {exc}")
            margins.append((x, None))
            continue
        evaluated += 1
        margins.append((x, ev.margin))
        if ev.margin < min_margin:
            min_margin, argmin_x = ev.margin, x
        if not ev.certified:
            uncertified += 1
            if ev.margin < -(ev.lhs.err + ev.rhs.err):
                candidates.append((len(margins) - 1, factor))

    counterexamples = []
    for index, factor in candidates:
        x, _ = margins[index]
        re_ev = evaluate_bound(case, x, _scaled(cfg, 2 * factor))
        if re_ev.margin < -(re_ev.lhs.err + re_ev.rhs.err):
            counterexamples.append(
                Counterexample(x=x, margin=re_ev.margin, bracket=_neighbor_bracket(margins, index))
            )
        else:
            errors.append(
                f"x={format_real(x)}: negative margin failed re-certification at doubled precision"
            )
    return VerificationReport(
        case=case,
        label=case.describe(),
        samples=evaluated,
        min_margin=min_margin,
        argmin_x=argmin_x,
        uncertified_count=uncertified,
        counterexamples=tuple(counterexamples),
        skipped=skipped,
        errors=tuple(errors),
    )


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------


def chain_check(n_max: int, grid=None, config: PrecisionConfig | None = None) -> VerificationReport:
    """Certify root_norm(n+1, x) < root_norm(n, x) for 1 <= n < n_max."""
    if not isinstance(n_max, int) or isinstance(n_max, bool) or n_max < 2:
        raise ParameterError(f"n_max must be an integer >= 2, got {n_max!r}")
    cfg = _validate_config(config)
    points = _resolve_points(grid)

    evaluated = uncertified = 0
    min_margin = mp.inf
    argmin_x = mp.nan
    counterexamples = []
    errors = []
    recheck_cfg = _scaled(cfg, 2)
    for n in range(1, n_max):
        (case,) = make_cases("B11", n=n)
        for x in points:
            ev = evaluate_bound(case, x, cfg)
            evaluated += 1
            if ev.margin < min_margin:
                min_margin, argmin_x = ev.margin, x
            if not ev.certified:
                uncertified += 1
                if ev.margin < -(ev.lhs.err + ev.rhs.err):
                    re_ev = evaluate_bound(case, x, recheck_cfg)
                    if re_ev.margin < -(re_ev.lhs.err + re_ev.rhs.err):
                        counterexamples.append(Counterexample(x=x, margin=re_ev.margin))
                        errors.append(f"n={n}: chain order fails at x={format_real(x)}")
    return VerificationReport(
        case=None,
        label=f"root-norm-chain[n_max={n_max}]",
        samples=evaluated,
        min_margin=min_margin,
        argmin_x=argmin_x,
        uncertified_count=uncertified,
        counterexamples=tuple(counterexamples),
        errors=tuple(errors),
    )


def limit_check(x, k: int, config: PrecisionConfig | None = None) -> mpf:
    """Deviation |x * root_norm(k, x) - 1| from the k -> infinity limit 1/x."""
    if not isinstance(k, int) or isinstance(k, bool) or k < 2:
        raise ParameterError(f"k must be an integer >= 2, got {k!r}")
    cfg = _validate_config(config)
    rn = root_norm(k, x, cfg)
    with mp.workdps(cfg.working_digits + _GUARD_DIGITS):
        return abs(mpf(x) * rn.value - 1)


def complete_monotonicity_check(
    k_max: int = 6, grid=None, config: PrecisionConfig | None = None
) -> VerificationReport:
    """Certify (-1)^k * h^(k)(t) > 0 for h(t) = e^(1/t) - psi'(t), k <= k_max.

    h^(k)(t) = exp_inv_derivative(k, t) - psi^(k+1)(t).  Finite order only:
    this is a spot check of complete monotonicity, not a proof.
    """
    if not isinstance(k_max, int) or isinstance(k_max, bool) or not 0 <= k_max <= 8:
        raise ParameterError(f"k_max must be an integer in [0, 8], got {k_max!r}")
    cfg = _validate_config(config)
    points = _resolve_points(grid)

    evaluated = uncertified = 0
    min_margin = mp.inf
    argmin_x = mp.nan
    counterexamples = []
    errors = []
    for k in range(k_max + 1):
        sign = 1 if k % 2 == 0 else -1
        for t in points:
            margin, err = _cm_margin(k, sign, t, cfg)
            evaluated += 1
            if margin < min_margin:
                min_margin, argmin_x = margin, t
            if not margin > err:
                uncertified += 1
                if margin < -err:
                    re_margin, re_err = _cm_margin(k, sign, t, _scaled(cfg, 2))
                    if re_margin < -re_err:
                        counterexamples.append(Counterexample(x=t, margin=re_margin))
                        errors.append(f"k={k}: sign violation at t={format_real(t)}")
    return VerificationReport(
        case=None,
        label=f"complete-monotonicity[k_max={k_max}]",
        samples=evaluated,
        min_margin=min_margin,
        argmin_x=argmin_x,
        uncertified_count=uncertified,
        counterexamples=tuple(counterexamples),
        errors=tuple(errors),
    )


def _cm_margin(k: int, sign: int, t, cfg: PrecisionConfig) -> tuple:
    """Signed derivative margin (-1)^k * h^(k)(t) with its error radius."""
    with mp.workdps(cfg.working_digits + _GUARD_DIGITS):
        tv = mpf(t)
        e_val = exp_inv_derivative(k, tv)
        # Horner over ~2k+2 same-sign terms: a few ulp each, no cancellation
        e_term = ApproxReal(e_val, (2 * k + 4) * mpf(10) ** (1 - mp.dps) * abs(e_val))
        h = e_term - polygamma(k + 1, tv, cfg)
        return sign * h.value, h.err


def refine_counterexample(target, bracket, config: PrecisionConfig | None = None) -> Counterexample:
    """Bisect a sign change of the margin down to relative width 1e-10.

    ``target`` is a BoundCase (margins come from evaluate_bound) or a callable
    x -> margin for synthetic checks.  The endpoints must have certified
    margins of opposite sign, else BracketError.
    """
    cfg = _validate_config(config)
    if isinstance(target, BoundCase):
        def margin_of(x):
            ev = evaluate_bound(target, x, cfg)
            return ev.margin, ev.lhs.err + ev.rhs.err
    elif callable(target):
        def margin_of(x):
            return mpf(target(x)), mpf(0)
    else:
        raise ParameterError(f"target must be a BoundCase or callable, got {type(target)!r}")

    with mp.workdps(cfg.working_digits + _GUARD_DIGITS):
        lo, hi = mpf(bracket[0]), mpf(bracket[1])
        if not 0 < lo < hi:
            raise ParameterError(f"bracket must satisfy 0 < lo < hi, got {bracket}")
        m_lo, e_lo = margin_of(lo)
        m_hi, e_hi = margin_of(hi)
        if not (abs(m_lo) > e_lo and abs(m_hi) > e_hi) or (m_lo < 0) == (m_hi < 0):
            raise BracketError(
                "bracket endpoints must carry certified margins of opposite sign: "
                f"margin({format_real(lo)})={format_real(m_lo)}, "
                f"margin({format_real(hi)})={format_real(m_hi)}"
            )
        negative_low = m_lo < 0
        tol = mpf("1e-10")
        for _ in range(200):
            if hi - lo <= tol * hi:
                break
            mid = (lo + hi) / 2
            m_mid, _ = margin_of(mid)
            if (m_mid < 0) == negative_low:
                lo = mid
            else:
                hi = mid
        x_neg = lo if negative_low else hi
        m_neg, _ = margin_of(x_neg)
        return Counterexample(x=x_neg, margin=m_neg, bracket=(lo, hi))


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("bound_id", "n", "k", "x", "lhs", "rhs", "margin", "certified")


def report_to_dict(report: VerificationReport) -> dict:
    """JSON-ready dict with deterministic decimal strings."""
    case = report.case
    return {
        "label": report.label,
        "case": None
        if case is None
        else {
            "name": case.name,
            "n": case.n,
            "k": case.k,
            "side": case.side,
            "exploratory": case.exploratory,
        },
        "samples": report.samples,
        "skipped": report.skipped,
        "uncertified_count": report.uncertified_count,
        "min_margin": format_real(report.min_margin),
        "argmin_x": format_real(report.argmin_x),
        "counterexamples": [
            {
                "x": format_real(ce.x),
                "margin": format_real(ce.margin),
                "bracket": None if ce.bracket is None else [format_real(ce.bracket[0]), format_real(ce.bracket[1])],
            }
            for ce in report.counterexamples
        ],
        "errors": list(report.errors),
    }


def margin_rows(cases, grid=None, config: PrecisionConfig | None = None):
    """Yield one CSV row dict per (case, in-domain grid point).

    Rows use the same precision-escalation ladder as sweep, so a row's
    certified flag agrees with what a sweep over the same grid reports.
    """
    cfg = _validate_config(config)
    points = _resolve_points(grid)
    for case in cases:
        for x in points:
            try:
                ev, _ = _certified_eval(case, x, cfg)
            except DomainError:
                continue
            yield {
                "bound_id": case.name,
                "n": "" if case.n is None else case.n,
                "k": "" if case.k is None else case.k,
                "x": format_real(x),
                "lhs": format_real(ev.lhs.value),
                "rhs": format_real(ev.rhs.value),
                "margin": format_real(ev.margin),
                "certified": "true" if ev.certified else "false",
            }


def write_margin_csv(fileobj, cases, grid=None, config: PrecisionConfig | None = None) -> int:
    """Stream per-sample margins as CSV; returns the number of rows written."""
    writer = csv.DictWriter(fileobj, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    rows = 0
    for row in margin_rows(cases, grid, config):
        writer.writerow(row)
        rows += 1
    return rows
