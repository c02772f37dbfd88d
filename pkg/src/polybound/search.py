"""Numerical search for best shift constants and the root-norm failure threshold.

The mean-shifted lower bound e^(-psi(M(p; x, x+q))) < root_norm(n, x) tightens
as q grows, so for each x there is a critical shift q_crit(x) at which it
becomes an equality.  The bound holds for every x exactly when q >= sup
q_crit, and the matching upper bound holds exactly when q <= inf q_crit, so
the best uniform constants are grid extrema of the critical-shift curve.
Everything here reports estimates with explicit brackets - a grid extremum is
evidence, not a closed form.

The threshold scan answers a different open question: the smallest n at which
the log-mean lower bound (B06) acquires a certified counterexample on a grid.
"""

import csv
from dataclasses import dataclass

from mpmath import mp, mpf

from .catalog import make_cases, root_norm
from .engine import (
    ParameterError,
    PrecisionConfig,
    _GUARD_DIGITS,
    _validate_config,
    _validate_x,
    digamma_inverse,
)
from .means import _order_value, solve_shift
from .verifier import (
    Counterexample,
    _GRID_DPS,
    _resolve_points,
    format_real,
    sweep,
)

__all__ = [
    "ConstantEstimate",
    "CriticalShiftCurve",
    "SHIFT_LIMIT",
    "ThresholdResult",
    "best_nk_constants",
    "best_shift_constants",
    "critical_shift",
    "critical_shift_curve",
    "critical_shift_nk",
    "estimate_to_dict",
    "threshold_n",
    "threshold_to_dict",
    "write_curve_csv",
]

SHIFT_LIMIT = 4  # largest shift the solver will consider; all known shifts are <= 1


def _validate_n(n, minimum=1) -> int:
    if not isinstance(n, int) or isinstance(n, bool) or n < minimum:
        raise ParameterError(f"n must be an integer >= {minimum}, got {n!r}")
    return n


def critical_shift(n, order, x, config: PrecisionConfig | None = None) -> mpf:
    """The shift q with e^(-psi(M(order; x, x+q))) = root_norm(n, x).

    Monotone in q, so the equality shift is unique; raises BracketError when
    even q = SHIFT_LIMIT cannot reach the target mean.
    """
    _validate_n(n)
    cfg = _validate_config(config)
    xm = _validate_x(x)
    with mp.workdps(cfg.working_digits + _GUARD_DIGITS):
        rn = root_norm(n, xm, cfg)
        target = digamma_inverse(-mp.log(rn.value), cfg)
        return solve_shift(order, xm, target.value, SHIFT_LIMIT, cfg)


def _root_norm_inverse(k: int, target, cfg: PrecisionConfig) -> mpf:
    """Solve root_norm(k, y) = target for y; strictly decreasing, so bisect."""
    with mp.workdps(cfg.working_digits + _GUARD_DIGITS):
        tm = mpf(target)
        # large-order limit root_norm ~ 1/y makes 1/target a good first bracket
        lo = hi = 1 / tm
        for _ in range(2000):
            if root_norm(k, hi, cfg).value <= tm:
                break
            hi *= 2
        for _ in range(2000):
            if root_norm(k, lo, cfg).value >= tm:
                break
            lo /= 2
        tol = mpf(10) ** (-(cfg.working_digits - 8))
        while hi - lo > tol * hi:
            mid = (lo + hi) / 2
            if root_norm(k, mid, cfg).value > tm:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2


def critical_shift_nk(n, k, order, x, config: PrecisionConfig | None = None) -> mpf:
    """The shift q with |psi^(k)(M(order; x, x+q))|/(k-1)! = root_norm(n, x)^k.

    Equivalently root_norm(k, M) = root_norm(n, x): the lower-order root norm
    taken at the shifted mean matches the higher-order one at x.
    """
    _validate_n(n, minimum=2)
    if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= n - 1:
        raise ParameterError(f"k must be an integer in [1, n-1], got k={k!r} with n={n}")
    cfg = _validate_config(config)
    xm = _validate_x(x)
    with mp.workdps(cfg.working_digits + _GUARD_DIGITS):
        rn = root_norm(n, xm, cfg)
        target_mean = _root_norm_inverse(k, rn.value, cfg)
        return solve_shift(order, xm, target_mean, SHIFT_LIMIT, cfg)


# ---------------------------------------------------------------------------
# curves and extrema
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CriticalShiftCurve:
    """Critical shift sampled along a grid: points are (x, q_crit(x)) pairs."""

    n: int
    order: mpf
    points: tuple
    skipped: tuple = ()


def critical_shift_curve(
    n, order, grid=None, config: PrecisionConfig | None = None
) -> CriticalShiftCurve:
    """Sample x -> critical_shift(n, order, x) over a grid.

    Points where the solver cannot bracket the target are recorded in
    ``skipped`` rather than aborting the curve.
    """
    _validate_n(n)
    order_p = _order_value(order)
    cfg = _validate_config(config)
    points = []
    skipped = []
    for x in _resolve_points(grid):
        try:
            points.append((x, critical_shift(n, order_p, x, cfg)))
        except ValueError:
            skipped.append(x)
    return CriticalShiftCurve(n=n, order=order_p, points=tuple(points), skipped=tuple(skipped))


@dataclass(frozen=True)
class ConstantEstimate:
    """A grid extremum offered as evidence for a best-constant value.

    ``bracket`` is [estimate, estimate +/- largest neighbor gap]: the true
    extremum of a smooth curve sampled this densely should fall inside it.
    ``boundary_attained`` flags an extremum at the outermost sample, where
    the bracket says nothing about the limit beyond.
    """

    name: str
    value: mpf
    bracket: tuple
    argext_x: mpf
    grid_meta: str
    boundary_attained: bool = False
    skipped: int = 0

    def __post_init__(self) -> None:
        lo, hi = self.bracket
        if not (lo <= self.value <= hi):
            raise ParameterError(f"bracket {self.bracket} must contain the value {self.value}")


_BOUNDARY_PROBES = ("0.000001", "1000000.0")


def _probed_points(grid) -> tuple:
    base = _resolve_points(grid)
    with mp.workdps(_GRID_DPS):
        probes = tuple(mpf(raw) for raw in _BOUNDARY_PROBES)
    return tuple(sorted(set(base + probes)))


def _extremum(name: str, xs, values, pick_max: bool, grid_meta: str, skipped: int) -> ConstantEstimate:
    best = 0
    for i in range(1, len(values)):
        if (values[i] > values[best]) if pick_max else (values[i] < values[best]):
            best = i
    gaps = []
    if best > 0:
        gaps.append(abs(values[best] - values[best - 1]))
    if best < len(values) - 1:
        gaps.append(abs(values[best] - values[best + 1]))
    gap = max(gaps) if gaps else mpf(0)
    value = values[best]
    if pick_max:
        bracket = (value, value + gap)
    else:
        bracket = (max(mpf(0), value - gap), value)  # shifts are never negative
    return ConstantEstimate(
        name=name,
        value=value,
        bracket=bracket,
        argext_x=xs[best],
        grid_meta=grid_meta,
        boundary_attained=best in (0, len(values) - 1),
        skipped=skipped,
    )


def _best_constants(solver, names, grid, cfg) -> tuple:
    points = _probed_points(grid)
    xs = []
    values = []
    skipped = 0
    for x in points:
        try:
            values.append(solver(x))
        except ValueError:
            skipped += 1
            continue
        xs.append(x)
    if len(values) < 2:
        raise ParameterError("best-constant search needs at least two solvable grid points")
    meta = (
        f"{len(values)} solved points in [{format_real(points[0])}, {format_real(points[-1])}]"
        f" including boundary probes at 1e-6 and 1e6; {skipped} skipped"
    )
    name_sup, name_inf = names
    return (
        _extremum(name_sup, xs, values, True, meta, skipped),
        _extremum(name_inf, xs, values, False, meta, skipped),
    )


def _shift_names(prefix_args: str, order_p) -> tuple:
    suffix = "" if order_p == -1 else f"; order={mp.nstr(order_p, 8)}"
    return (f"q({prefix_args}{suffix})", f"p({prefix_args}{suffix})")


def best_shift_constants(
    n, order, grid=None, config: PrecisionConfig | None = None
) -> tuple:
    """Grid sup/inf of the critical-shift curve, as (sup, inf) estimates.

    The sup names the smallest uniform shift q(n) for which the mean-shifted
    lower bound holds everywhere on the grid; the inf names the largest p(n)
    for the matching upper bound.
    """
    _validate_n(n)
    order_p = _order_value(order)
    cfg = _validate_config(config)
    return _best_constants(
        lambda x: critical_shift(n, order_p, x, cfg),
        _shift_names(f"{n}", order_p),
        grid,
        cfg,
    )


def best_nk_constants(
    n, k, order, grid=None, config: PrecisionConfig | None = None
) -> tuple:
    """Same sup/inf construction for the order-k-at-the-mean variant."""
    _validate_n(n, minimum=2)
    if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= n - 1:
        raise ParameterError(f"k must be an integer in [1, n-1], got k={k!r} with n={n}")
    order_p = _order_value(order)
    cfg = _validate_config(config)
    return _best_constants(
        lambda x: critical_shift_nk(n, k, order_p, x, cfg),
        _shift_names(f"{n},{k}", order_p),
        grid,
        cfg,
    )


# ---------------------------------------------------------------------------
# failure threshold for the log-mean lower bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdResult:
    """Smallest derivative order whose sweep certifies a counterexample."""

    n_failed: int | None
    witness: Counterexample | None
    n_cap: int
    grid_meta: str

    @property
    def found(self) -> bool:
        return self.n_failed is not None

    @property
    def largest_holding(self) -> int | None:
        """Largest n below the failure, grid-relative; None when nothing failed."""
        return None if self.n_failed is None else self.n_failed - 1


def threshold_n(grid=None, n_cap: int = 64, config: PrecisionConfig | None = None) -> ThresholdResult:
    """Scan n = 3, 4, ... for the first certified B06 counterexample.

    Orders 1 and 2 are provably safe, so the scan starts at 3.  Absence up to
    n_cap is a valid result, reported with n_failed = None.
    """
    if not isinstance(n_cap, int) or isinstance(n_cap, bool) or n_cap < 3:
        raise ParameterError(f"n_cap must be an integer >= 3, got {n_cap!r}")
    cfg = _validate_config(config)
    points = _resolve_points(grid)
    meta = f"{len(points)} points in [{format_real(points[0])}, {format_real(points[-1])}]"
    for n in range(3, n_cap + 1):
        (case,) = make_cases("B06", n=n, exploratory=True)
        report = sweep(case, points, cfg)
        if report.counterexamples:
            witness = min(report.counterexamples, key=lambda ce: ce.margin)
            return ThresholdResult(n_failed=n, witness=witness, n_cap=n_cap, grid_meta=meta)
    return ThresholdResult(n_failed=None, witness=None, n_cap=n_cap, grid_meta=meta)


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def write_curve_csv(fileobj, curve: CriticalShiftCurve) -> int:
    """Stream a critical-shift curve as CSV (x, q_crit); returns row count."""
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(("x", "q_crit"))
    for x, q in curve.points:
        writer.writerow((format_real(x), format_real(q)))
    return len(curve.points)


def estimate_to_dict(estimate: ConstantEstimate) -> dict:
    """JSON-ready rendering of a best-constant estimate."""
    return {
        "name": estimate.name,
        "value": format_real(estimate.value),
        "bracket": [format_real(estimate.bracket[0]), format_real(estimate.bracket[1])],
        "argext_x": format_real(estimate.argext_x),
        "grid_meta": estimate.grid_meta,
        "boundary_attained": estimate.boundary_attained,
        "skipped": estimate.skipped,
    }


def threshold_to_dict(result: ThresholdResult) -> dict:
    """JSON-ready rendering of a threshold scan result."""
    witness = result.witness
    return {
        "n_failed": result.n_failed,
        "largest_holding": result.largest_holding,
        "n_cap": result.n_cap,
        "grid_meta": result.grid_meta,
        "witness": None
        if witness is None
        else {
            "x": format_real(witness.x),
            "margin": format_real(witness.margin),
            "bracket": None
            if witness.bracket is None
            else [format_real(witness.bracket[0]), format_real(witness.bracket[1])],
        },
    }
