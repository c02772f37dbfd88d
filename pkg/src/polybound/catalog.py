"""Catalog of strict polygamma inequalities as machine-checkable bound cases.

Every catalogued bound is a strict inequality between two quantities built
from the digamma/polygamma engine.  Evaluating a case at a point returns both
sides as :class:`~polybound.engine.ApproxReal` enclosures together with the
margin ``rhs.value - lhs.value``; the case is *certified* at that point when
the margin exceeds the summed error radii, i.e. the inequality holds for the
exact real numbers and not merely for their approximations.

Double-sided sandwiches are split into independent ``L``/``R`` cases so that
every margin is a scalar.  Identifiers are stable strings (``B01``..``B21``)
with descriptive slugs; the full case name, e.g.
``B06.root-norm-log-mean-lower``, is what reports and the CLI print.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

from mpmath import mp, mpf

from .engine import (
    DEFAULT_CONFIG,
    ApproxReal,
    DomainError,
    ParameterError,
    PrecisionConfig,
    _GUARD_DIGITS,
    _round_slack,
    _validate_config,
    _validate_x,
    digamma,
    polygamma,
)
from .means import log_mean

__all__ = [
    "BoundCase",
    "BoundEval",
    "BoundId",
    "bernoulli_power_bounds",
    "evaluate_bound",
    "exp_neg_psi",
    "get_bound",
    "list_bounds",
    "make_cases",
    "root_norm",
]


def _rounded(value) -> ApproxReal:
    """Wrap a freshly computed scalar with its rounding allowance."""
    return ApproxReal(value, _round_slack(value))


_ONE = ApproxReal.exact(1)
_TWO = ApproxReal.exact(2)


# ---------------------------------------------------------------------------
# factorials (exact up to 20, log-space beyond)
# ---------------------------------------------------------------------------


def _factorial_mpf(m: int) -> mpf:
    return mpf(math.factorial(m))


@lru_cache(maxsize=None)
def _log_factorial_cached(m: int, prec: int) -> ApproxReal:
    if m <= 1:
        return ApproxReal.exact(0)
    if m <= 20:
        return _rounded(mp.log(_factorial_mpf(m)))
    v = mp.fsum(mp.log(mpf(j)) for j in range(2, m + 1))
    # one rounding per log plus the summation itself
    return ApproxReal(v, (m + 2) * mpf(10) ** (1 - mp.dps) * (abs(v) + 1))


def _log_factorial(m: int) -> ApproxReal:
    return _log_factorial_cached(m, mp.prec)


# ---------------------------------------------------------------------------
# derived engine quantities
# ---------------------------------------------------------------------------


def root_norm(n: int, x, config: PrecisionConfig | None = None) -> ApproxReal:
    """(|psi^(n)(x)| / (n-1)!)^(1/n) with a propagated error envelope.

    Computed in log space, exp((ln |psi^(n)(x)| - ln (n-1)!)/n), so that large
    n neither overflows nor washes out the envelope.  Strictly decreasing in n
    at fixed x, with limit 1/x.

    Raises:
        ParameterError: n < 1 or not an integer.
        DomainError: x outside (0, inf).
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParameterError(f"order n must be an integer >= 1, got {n!r}")
    cfg = _validate_config(config)
    xm = _validate_x(x)
    return _root_norm_cached(n, xm._mpf_, cfg)


@lru_cache(maxsize=None)
def _root_norm_cached(n: int, x_raw, cfg: PrecisionConfig) -> ApproxReal:
    with mp.workdps(cfg.working_digits + _GUARD_DIGITS):
        x = mpf(x_raw)
        p = polygamma(n, x, cfg)
        magnitude = ApproxReal(abs(p.value), p.err)
        log_r = (magnitude.log() - _log_factorial(n - 1)) / ApproxReal.exact(n)
        return log_r.exp()


def exp_neg_psi(x, config: PrecisionConfig | None = None) -> ApproxReal:
    """e^(-psi(x)) with a propagated error envelope."""
    cfg = _validate_config(config)
    xm = _validate_x(x)
    return _exp_neg_psi_cached(xm._mpf_, cfg)


@lru_cache(maxsize=None)
def _exp_neg_psi_cached(x_raw, cfg: PrecisionConfig) -> ApproxReal:
    with mp.workdps(cfg.working_digits + _GUARD_DIGITS):
        return (-digamma(mpf(x_raw), cfg)).exp()


def bernoulli_power_bounds(alpha, x) -> tuple:
    """Rational sandwich for (1+x)^alpha on x > -1 with 0 <= alpha <= 1.

    Returns ``(1 + alpha*x/(1 + (1-alpha)*x), 1 + alpha*x)``; the power lies
    between the two, with equality only at alpha in {0, 1} or x = 0.
    """
    a = mpf(alpha)
    xv = mpf(x)
    if mp.isnan(a) or not 0 <= a <= 1:
        raise DomainError(f"alpha must lie in [0, 1], got {a}")
    if mp.isnan(xv) or not xv > -1:
        raise DomainError(f"x must exceed -1, got {xv}")
    lower = 1 + a * xv / (1 + (1 - a) * xv)
    upper = 1 + a * xv
    return (lower, upper)


# ---------------------------------------------------------------------------
# evaluation at computed (inexact) arguments
# ---------------------------------------------------------------------------
#
# Several bounds evaluate psi-family functions at points that are themselves
# computed, e.g. 1/ln(1+1/x).  The argument's error radius is folded into the
# result through closed-form slope bounds valid on all of (0, inf):
#
#     |psi^(m)(y)| <  (m-1)!/y^m + m!/y^(m+1)        (upper)
#     |psi^(m)(y)| >  (m-1)!/y^m + m!/(2 y^(m+1))    (lower, m >= 1)
#
# so e.g. |d/dy psi(y)| = psi'(y) < 1/y + 1/y^2.


def _polygamma_upper(m: int, y) -> mpf:
    return _factorial_mpf(m - 1) / y**m + _factorial_mpf(m) / y ** (m + 1)


def _polygamma_lower(m: int, y) -> mpf:
    return _factorial_mpf(m - 1) / y**m + _factorial_mpf(m) / (2 * y ** (m + 1))


def _digamma_at(arg: ApproxReal, cfg: PrecisionConfig) -> ApproxReal:
    base = digamma(arg.value, cfg)
    if arg.err == 0:
        return base
    return ApproxReal(base.value, base.err + _polygamma_upper(1, arg.value) * arg.err)


def _polygamma_at(n: int, arg: ApproxReal, cfg: PrecisionConfig) -> ApproxReal:
    base = polygamma(n, arg.value, cfg)
    if arg.err == 0:
        return base
    return ApproxReal(base.value, base.err + _polygamma_upper(n + 1, arg.value) * arg.err)


def _exp_neg_psi_at(arg: ApproxReal, cfg: PrecisionConfig) -> ApproxReal:
    return (-_digamma_at(arg, cfg)).exp()


def _root_norm_at(k: int, arg: ApproxReal, cfg: PrecisionConfig) -> ApproxReal:
    base = root_norm(k, arg.value, cfg)
    if arg.err == 0:
        return base
    y = arg.value
    # |d ln root_norm / dy| = |psi^(k+1)| / (k |psi^(k)|)
    slope = _polygamma_upper(k + 1, y) / (_polygamma_lower(k, y) * k)
    amp = (base.value + base.err) * slope * arg.err
    return ApproxReal(base.value, base.err + amp)


def _inv_log_mean(x) -> ApproxReal:
    """1/ln(1+1/x): the point where the sharpest lower bounds are anchored."""
    v = 1 / mp.log1p(1 / x)
    return _rounded(v)


def _unit_log_mean(x) -> ApproxReal:
    """log_mean(x, x+1), numerically identical to 1/ln(1+1/x)."""
    return _rounded(log_mean(x, x + 1))


def _expm1_inv(t) -> ApproxReal:
    """e^(1/t) - 1 with the argument rounding folded in."""
    u = 1 / t
    v = mp.expm1(u)
    arg_err = abs(u) * mpf(10) ** (1 - mp.dps)
    return ApproxReal(v, (v + 1) * arg_err + _round_slack(v))


# ---------------------------------------------------------------------------
# bound identifiers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundId:
    """Metadata for one catalogued inequality.

    ``two_sided`` bounds expand to ``L`` and ``R`` cases.  ``n_max`` caps the
    proven order domain (B06 and B17 hold for n in {1, 2} only); the
    exploratory flag on a :class:`BoundCase` lifts the cap for B06, whose
    failure order is the subject of the threshold search.
    """

    code: str
    slug: str
    description: str
    two_sided: bool = False
    needs_n: bool = False
    needs_k: bool = False
    n_min: int = 1
    n_max: int | None = None
    k_window: bool = False  # requires 1 <= k <= n-1
    k_min: int = 1
    x_min: str = "0"

    def validate_params(self, n, k, exploratory: bool = False) -> None:
        if exploratory and self.code != "B06":
            raise ParameterError(f"exploratory evaluation is only defined for B06, not {self.code}")
        if self.needs_n:
            if not isinstance(n, int) or isinstance(n, bool) or n < self.n_min:
                raise ParameterError(f"{self.code} needs an integer n >= {self.n_min}, got {n!r}")
            if self.n_max is not None and n > self.n_max and not exploratory:
                raise ParameterError(
                    f"{self.code} is catalogued for {self.n_min} <= n <= {self.n_max}, got n={n}"
                )
        elif n is not None:
            raise ParameterError(f"{self.code} takes no order parameter n")
        if self.needs_k:
            if not isinstance(k, int) or isinstance(k, bool) or k < self.k_min:
                raise ParameterError(f"{self.code} needs an integer k >= {self.k_min}, got {k!r}")
            if self.k_window and k > n - 1:
                raise ParameterError(f"{self.code} requires 1 <= k <= n-1, got k={k} with n={n}")
        elif k is not None:
            raise ParameterError(f"{self.code} takes no order parameter k")

    @property
    def name(self) -> str:
        return f"{self.code}.{self.slug}"


_REGISTRY: dict[str, BoundId] = {
    b.code: b
    for b in (
        BoundId(
            "B01",
            "trigamma-exp-digamma",
            "psi'(x) * e^(psi(x)) < 1",
        ),
        BoundId(
            "B02",
            "trigamma-sq-dominates",
            "|psi''(x)| < psi'(x)^2",
        ),
        BoundId(
            "B03",
            "root-norm-exp-digamma-unit-window",
            "e^(-psi(x+1)) < root_norm(n, x) < e^(-psi(x))",
            two_sided=True,
            needs_n=True,
        ),
        BoundId(
            "B04",
            "root-norm-exp-digamma-half-window",
            "e^(-psi(x+1/2)) < root_norm(n, x) < e^(-psi(x))",
            two_sided=True,
            needs_n=True,
        ),
        BoundId(
            "B05",
            "root-norm-lower-order-window",
            "root_norm(k, x+1/2) < root_norm(n, x) < root_norm(k, x)",
            two_sided=True,
            needs_n=True,
            needs_k=True,
            n_min=2,
            k_window=True,
        ),
        BoundId(
            "B06",
            "root-norm-log-mean-lower",
            "e^(-psi(1/ln(1+1/x))) < root_norm(n, x), n in {1, 2}",
            needs_n=True,
            n_max=2,
        ),
        BoundId(
            "B07",
            "root-norm-lower-order-log-mean",
            "root_norm(k, 1/ln(1+1/x)) < root_norm(n, x)",
            needs_n=True,
            needs_k=True,
            n_min=2,
            k_window=True,
        ),
        BoundId(
            "B08",
            "digamma-log-window",
            "ln(x) - 1/x < psi(x) < ln(x) - 1/(2x)",
            two_sided=True,
        ),
        BoundId(
            "B09",
            "polygamma-power-window",
            "(k-1)!/x^k + k!/(2x^(k+1)) < |psi^(k)(x)| < (k-1)!/x^k + k!/x^(k+1)",
            two_sided=True,
            needs_k=True,
        ),
        BoundId(
            "B10",
            "trigamma-exp-reciprocal",
            "psi'(t) < e^(1/t) - 1",
        ),
        BoundId(
            "B11",
            "root-norm-decreasing",
            "root_norm(n+1, x) < root_norm(n, x)",
            needs_n=True,
        ),
        BoundId(
            "B12",
            "reciprocal-exp-digamma-log-mean",
            "1/x < e^(-psi(1/ln(1+1/x)))",
        ),
        BoundId(
            "B13",
            "digamma-log-expm1-negative",
            "psi(t) + ln(e^(1/t) - 1) < 0",
        ),
        BoundId(
            "B14",
            "tetragamma-trigamma-log-mean",
            "psi'(1/ln(1+1/x))^2 < |psi''(x)|",
        ),
        BoundId(
            "B15",
            "root-norm-expm1-sandwich",
            "m*(k*m/2+1)^(1/k) < root_norm(k, 1/m) < m*(k*m+1)^(1/k), m = e^(1/t)-1",
            two_sided=True,
            needs_k=True,
            x_min="0.002",
        ),
        BoundId(
            "B16",
            "trigamma-log-mean-window",
            "e^(-psi(log_mean(x, x+1))) < psi'(x) < e^(-psi(x))",
            two_sided=True,
        ),
        BoundId(
            "B17",
            "expm1-power-dominates",
            "2*u^n*e^(n*u) < (e^u - 1)^n * (n*(e^u - 1) + 2), u = 1/x, n in {1, 2}",
            needs_n=True,
            n_max=2,
        ),
        BoundId(
            "B18",
            "exp-reciprocal-gap-chain",
            "1/t^2 < (6t(t+1)^3 + 1)/(6t^3(t+1)^3) < e^(1/t) - e^(1/(t+1))",
            two_sided=True,
        ),
        BoundId(
            "B19",
            "log-mean-half-window",
            "x < 1/ln(1+1/x) < x + 1/2",
            two_sided=True,
        ),
        BoundId(
            "B20",
            "power-binomial-window",
            "1 + x/(k + (k-1)x) < (1+x)^(1/k) < 1 + x/k",
            two_sided=True,
            needs_k=True,
            k_min=2,
        ),
        BoundId(
            "B21",
            "exp-secant-ratio-positive",
            "0 < (e^(2u) - 2u*e^u - 1)/((e^u - 1)(u*e^u - e^u + 1)), u = 1/x",
        ),
    )
}


def list_bounds() -> tuple:
    """All 21 bound identifiers in code order."""
    return tuple(_REGISTRY.values())


def get_bound(code) -> BoundId:
    """Look up a bound by code ("B06") or full name ("B06.<slug>")."""
    if isinstance(code, BoundId):
        return code
    if not isinstance(code, str):
        raise ParameterError(f"bound code must be a string, got {code!r}")
    key = code.strip().upper().split(".", 1)[0]
    bound = _REGISTRY.get(key)
    if bound is None:
        raise ParameterError(f"unknown bound code {code!r}")
    if "." in code and code.strip() != bound.name and code.strip().upper() != key:
        raise ParameterError(f"bound name {code!r} does not match {bound.name!r}")
    return bound


# ---------------------------------------------------------------------------
# bound cases and evaluations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCase:
    """One evaluable inequality: a bound id, a side, and its parameters."""

    bound: BoundId
    side: str = ""
    n: int | None = None
    k: int | None = None
    exploratory: bool = False

    def __post_init__(self) -> None:
        if self.bound.two_sided:
            if self.side not in ("L", "R"):
                raise ParameterError(f"{self.bound.code} is two-sided; side must be 'L' or 'R'")
        elif self.side != "":
            raise ParameterError(f"{self.bound.code} is single-sided; side must be ''")
        self.bound.validate_params(self.n, self.k, self.exploratory)

    @property
    def name(self) -> str:
        base = self.bound.name
        return f"{base}.{self.side}" if self.side else base

    def describe(self) -> str:
        params = []
        if self.n is not None:
            params.append(f"n={self.n}")
        if self.k is not None:
            params.append(f"k={self.k}")
        if self.exploratory:
            params.append("exploratory")
        return f"{self.name}[{','.join(params)}]" if params else self.name


def make_cases(bound, n: int | None = None, k: int | None = None, exploratory: bool = False) -> tuple:
    """Expand a bound id into its evaluable cases (one per side)."""
    bid = get_bound(bound)
    if bid.two_sided:
        return (
            BoundCase(bid, "L", n, k, exploratory),
            BoundCase(bid, "R", n, k, exploratory),
        )
    return (BoundCase(bid, "", n, k, exploratory),)


@dataclass(frozen=True)
class BoundEval:
    """Both sides of a bound case at one point, with certified strictness.

    ``certified`` is True only when margin > lhs.err + rhs.err, which makes
    the strict inequality a statement about the exact values.
    """

    case: BoundCase
    x: mpf
    lhs: ApproxReal
    rhs: ApproxReal
    margin: mpf
    certified: bool


# -- per-bound evaluators ----------------------------------------------------
#
# Each returns (lhs, rhs) normalised so the catalogued relation is lhs < rhs.


def _eval_b01(case, x, cfg):
    lhs = polygamma(1, x, cfg) * digamma(x, cfg).exp()
    return lhs, _ONE


def _eval_b02(case, x, cfg):
    second = polygamma(2, x, cfg)
    tri = polygamma(1, x, cfg)
    return ApproxReal(abs(second.value), second.err), tri * tri


def _eval_b03(case, x, cfg):
    rn = root_norm(case.n, x, cfg)
    if case.side == "L":
        return exp_neg_psi(x + 1, cfg), rn
    return rn, exp_neg_psi(x, cfg)


def _eval_b04(case, x, cfg):
    rn = root_norm(case.n, x, cfg)
    if case.side == "L":
        return exp_neg_psi(x + mpf("0.5"), cfg), rn
    return rn, exp_neg_psi(x, cfg)


def _eval_b05(case, x, cfg):
    rn = root_norm(case.n, x, cfg)
    if case.side == "L":
        return root_norm(case.k, x + mpf("0.5"), cfg), rn
    return rn, root_norm(case.k, x, cfg)


def _eval_b06(case, x, cfg):
    return _exp_neg_psi_at(_inv_log_mean(x), cfg), root_norm(case.n, x, cfg)


def _eval_b07(case, x, cfg):
    return _root_norm_at(case.k, _inv_log_mean(x), cfg), root_norm(case.n, x, cfg)


def _eval_b08(case, x, cfg):
    psi = digamma(x, cfg)
    log_x = _rounded(mp.log(x))
    if case.side == "L":
        return log_x - _rounded(1 / x), psi
    return psi, log_x - _rounded(1 / (2 * x))


def _eval_b09(case, x, cfg):
    k = case.k
    head = _log_factorial(k - 1) - _rounded(mp.log(x)).scale(k)
    tail = _log_factorial(k) - _rounded(mp.log(x)).scale(k + 1)
    p = polygamma(k, x, cfg)
    mid = ApproxReal(abs(p.value), p.err)
    if case.side == "L":
        return head.exp() + tail.exp().scale(mpf("0.5")), mid
    return mid, head.exp() + tail.exp()


def _eval_b10(case, t, cfg):
    return polygamma(1, t, cfg), _expm1_inv(t)


def _eval_b11(case, x, cfg):
    return root_norm(case.n + 1, x, cfg), root_norm(case.n, x, cfg)


def _eval_b12(case, x, cfg):
    return _rounded(1 / x), _exp_neg_psi_at(_inv_log_mean(x), cfg)


def _eval_b13(case, t, cfg):
    lhs = digamma(t, cfg) + _expm1_inv(t).log()
    return lhs, ApproxReal.exact(0)


def _eval_b14(case, x, cfg):
    tri = _polygamma_at(1, _inv_log_mean(x), cfg)
    second = polygamma(2, x, cfg)
    return tri * tri, ApproxReal(abs(second.value), second.err)


def _eval_b15(case, t, cfg):
    k = case.k
    m = _expm1_inv(t)
    rn = _root_norm_at(k, _ONE / m, cfg)
    if case.side == "L":
        inner = m.scale(mpf(k) / 2) + _ONE
    else:
        inner = m.scale(k) + _ONE
    envelope = m * (inner.log() / ApproxReal.exact(k)).exp()
    if case.side == "L":
        return envelope, rn
    return rn, envelope


def _eval_b16(case, x, cfg):
    tri = polygamma(1, x, cfg)
    if case.side == "L":
        return _exp_neg_psi_at(_unit_log_mean(x), cfg), tri
    return tri, exp_neg_psi(x, cfg)


def _eval_b17(case, x, cfg):
    n = case.n
    u = _rounded(1 / x)
    lhs = u.pow_const(n).scale(2) * u.scale(n).exp()
    em = u.exp() - _ONE
    rhs = em.pow_const(n) * (em.scale(n) + _TWO)
    return lhs, rhs


def _eval_b18(case, t, cfg):
    s = t + 1
    mid_num = 6 * t * s**3 + 1
    mid_den = 6 * t**3 * s**3
    mid = _rounded(mid_num) / _rounded(mid_den)
    if case.side == "L":
        return _rounded(1 / t**2), mid
    gap = _rounded(1 / t).exp() - _rounded(1 / s).exp()
    return mid, gap


def _eval_b19(case, x, cfg):
    ell = _inv_log_mean(x)
    if case.side == "L":
        return ApproxReal.exact(x), ell
    return ell, ApproxReal.exact(x) + ApproxReal.exact(mpf("0.5"))


def _eval_b20(case, x, cfg):
    k = case.k
    xw = ApproxReal.exact(x)
    power = ((_ONE + xw).log() / ApproxReal.exact(k)).exp()
    if case.side == "L":
        lower = _ONE + xw / (ApproxReal.exact(k) + xw.scale(k - 1))
        return lower, power
    return power, _ONE + xw / ApproxReal.exact(k)


def _eval_b21(case, x, cfg):
    u = _rounded(1 / x)
    eu = u.exp()
    numer = u.scale(2).exp() - u.scale(2) * eu - _ONE
    denom = (eu - _ONE) * (u * eu - eu + _ONE)
    return ApproxReal.exact(0), numer / denom


_EVALUATORS = {
    "B01": _eval_b01,
    "B02": _eval_b02,
    "B03": _eval_b03,
    "B04": _eval_b04,
    "B05": _eval_b05,
    "B06": _eval_b06,
    "B07": _eval_b07,
    "B08": _eval_b08,
    "B09": _eval_b09,
    "B10": _eval_b10,
    "B11": _eval_b11,
    "B12": _eval_b12,
    "B13": _eval_b13,
    "B14": _eval_b14,
    "B15": _eval_b15,
    "B16": _eval_b16,
    "B17": _eval_b17,
    "B18": _eval_b18,
    "B19": _eval_b19,
    "B20": _eval_b20,
    "B21": _eval_b21,
}


def evaluate_bound(case: BoundCase, x, config: PrecisionConfig | None = None) -> BoundEval:
    """Evaluate one bound case at x > 0.

    Raises:
        ParameterError: malformed case.
        DomainError: x outside the case's validity domain.
    """
    if not isinstance(case, BoundCase):
        raise ParameterError(f"case must be a BoundCase, got {type(case)!r}")
    cfg = _validate_config(config)
    xv = _validate_x(x)
    floor = mpf(case.bound.x_min)
    if xv < floor:
        raise DomainError(f"{case.bound.code} is catalogued for x >= {case.bound.x_min}, got {xv}")
    with mp.workdps(cfg.working_digits + _GUARD_DIGITS):
        lhs, rhs = _EVALUATORS[case.bound.code](case, mpf(xv), cfg)
        margin = rhs.value - lhs.value
        certified = bool(margin > lhs.err + rhs.err)
    return BoundEval(case=case, x=xv, lhs=lhs, rhs=rhs, margin=margin, certified=certified)
