"""Arbitrary-precision digamma/polygamma evaluation with guaranteed error envelopes.

Every quantity this module produces is an :class:`ApproxReal` — a value together
with an error radius ``err`` such that the true mathematical value is contained
in ``[value - err, value + err]``.  Downstream inequality checking relies on
these envelopes being *sound*, never on them being tight.

Evaluation strategy (digamma and polygamma alike):

1. shift the argument upward by the recurrence ``psi^(n)(x) = psi^(n)(x+1) -
   (-1)^(n+1) n!/x^(n+1)`` until it clears an adaptive threshold,
2. evaluate the Euler-Maclaurin asymptotic series there.  The series has
   alternating Bernoulli-number coefficients and is enveloping for positive
   arguments, so the remainder is bounded by the first omitted term; we charge
   twice that term plus an explicit rounding budget to ``err``.

The shift threshold adapts to the precision target: it is the larger of
``shift_threshold_base + n`` and the smallest abscissa at which the first
omitted series term drops below 10^-(working_digits+2) relative to the leading
term.  Internal arithmetic runs at ``working_digits + 12`` decimal digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from mpmath import mp, mpf

__all__ = [
    "ApproxReal",
    "BernoulliTable",
    "DomainError",
    "ParameterError",
    "PrecisionConfig",
    "DEFAULT_CONFIG",
    "MIN_X",
    "digamma",
    "digamma_inverse",
    "exp_inv_derivative",
    "polygamma",
    "polygamma_oracle",
]

# Arguments below this are rejected outright: far outside any sensible use and
# guaranteed to produce astronomically scaled intermediates.
MIN_X = mpf("1e-300")

_GUARD_DIGITS = 12  # internal digits beyond working_digits
_LN10 = math.log(10)


class DomainError(ValueError):
    """Argument outside the mathematical domain (x <= 0, NaN, infinite, or < MIN_X)."""


class ParameterError(ValueError):
    """Structurally invalid parameter (wrong integer range, bad configuration)."""


@dataclass(frozen=True)
class PrecisionConfig:
    """Precision policy shared by all engine evaluations.

    Attributes:
        working_digits: decimal digits the result is good to; error radii are
            reported relative to this target.  Minimum 20.
        shift_threshold_base: floor for the upward-recurrence threshold; the
            actual threshold is ``max(base + n, adaptive target)``.  Minimum 6.
        asymptotic_terms: number of Bernoulli-series terms used.  Minimum 4.
    """

    working_digits: int = 40
    shift_threshold_base: int = 12
    asymptotic_terms: int = 20

    def __post_init__(self) -> None:
        if self.working_digits < 20:
            raise ParameterError(f"working_digits must be >= 20, got {self.working_digits}")
        if self.shift_threshold_base < 6:
            raise ParameterError(
                f"shift_threshold_base must be >= 6, got {self.shift_threshold_base}"
            )
        if self.asymptotic_terms < 4:
            raise ParameterError(f"asymptotic_terms must be >= 4, got {self.asymptotic_terms}")


DEFAULT_CONFIG = PrecisionConfig()


_SLACK_FACTORS: dict = {}


def _round_slack(value) -> mpf:
    """Per-operation rounding allowance at the ambient precision.

    Floating-point rounding is relative to the result (a few ulp), so the
    allowance scales with |value|; exactly-zero results are exact and get no
    allowance.  The per-dps factor is memoized: this runs on every enclosure
    operation, and an mpf power is ~3x the cost of the whole lookup.
    """
    factor = _SLACK_FACTORS.get(mp.dps)
    if factor is None:
        factor = _SLACK_FACTORS[mp.dps] = mpf(10) ** (2 - mp.dps)
    return factor * abs(value)


@dataclass(frozen=True)
class ApproxReal:
    """A real number known to lie in ``[value - err, value + err]``.

    Arithmetic helpers propagate error radii first-order-soundly: each result's
    radius covers both the propagated input radii and a rounding allowance for
    the operation itself at the ambient mpmath precision.
    """

    value: mpf
    err: mpf

    def __post_init__(self) -> None:
        if self.err < 0 or mp.isnan(self.err):
            raise ParameterError(f"error radius must be >= 0, got {self.err}")

    @classmethod
    def exact(cls, x) -> "ApproxReal":
        return cls(mpf(x), mpf(0))

    @property
    def lower(self) -> mpf:
        return self.value - self.err

    @property
    def upper(self) -> mpf:
        return self.value + self.err

    # -- arithmetic ---------------------------------------------------------

    def __neg__(self) -> "ApproxReal":
        return ApproxReal(-self.value, self.err)

    def __add__(self, other: "ApproxReal") -> "ApproxReal":
        v = self.value + other.value
        return ApproxReal(v, self.err + other.err + _round_slack(v))

    def __sub__(self, other: "ApproxReal") -> "ApproxReal":
        v = self.value - other.value
        return ApproxReal(v, self.err + other.err + _round_slack(v))

    def __mul__(self, other: "ApproxReal") -> "ApproxReal":
        v = self.value * other.value
        e = (
            abs(self.value) * other.err
            + abs(other.value) * self.err
            + self.err * other.err
        )
        return ApproxReal(v, e + _round_slack(v))

    def __truediv__(self, other: "ApproxReal") -> "ApproxReal":
        if other.err >= abs(other.value):
            return ApproxReal(self.value / other.value, mp.inf)
        v = self.value / other.value
        denom_low = abs(other.value) - other.err
        e = (self.err + abs(v) * other.err) / denom_low
        return ApproxReal(v, e + _round_slack(v))

    def scale(self, c) -> "ApproxReal":
        """Multiply by an exact constant."""
        c = mpf(c)
        v = self.value * c
        return ApproxReal(v, self.err * abs(c) + _round_slack(v))

    def exp(self) -> "ApproxReal":
        v = mp.exp(self.value)
        # |e^(v±e) - e^v| <= e^v (e^e - 1)
        return ApproxReal(v, v * mp.expm1(self.err) + _round_slack(v))

    def log(self) -> "ApproxReal":
        if self.value <= 0:
            raise DomainError(f"log of non-positive enclosure centre {self.value}")
        if self.err >= self.value:
            return ApproxReal(mp.log(self.value), mp.inf)
        v = mp.log(self.value)
        # worst case at the lower end of the enclosure
        return ApproxReal(v, -mp.log1p(-self.err / self.value) + _round_slack(v))

    def pow_const(self, c) -> "ApproxReal":
        """Raise to an exact constant power; enclosure must be strictly positive."""
        c = mpf(c)
        if self.value - self.err <= 0:
            raise DomainError("pow_const requires a strictly positive enclosure")
        v = self.value ** c
        lo, hi = self.value - self.err, self.value + self.err
        # monotone in the base, so evaluate at both ends
        a, b = lo ** c, hi ** c
        e = max(abs(a - v), abs(b - v))
        return ApproxReal(v, e + _round_slack(v))


# ---------------------------------------------------------------------------
# Bernoulli numbers (exact)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _bernoulli_even(count: int) -> tuple:
    """Exact even-index Bernoulli numbers ``(B_2, B_4, ..., B_{2*count})``.

    Standard recurrence B_m = -1/(m+1) * sum_{k<m} C(m+1, k) B_k over exact
    rationals (B_1 = -1/2 convention; odd indices > 1 vanish).
    """
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    b = [Fraction(1)]
    for m in range(1, 2 * count + 1):
        acc = Fraction(0)
        for k in range(m):
            acc += math.comb(m + 1, k) * b[k]
        b.append(-acc / (m + 1))
    return tuple(b[2 * j] for j in range(1, count + 1))


@dataclass(frozen=True)
class BernoulliTable:
    """Even Bernoulli numbers ``B_2 .. B_{2*terms}`` as exact rationals."""

    terms: int
    values: tuple

    @classmethod
    def build(cls, terms: int) -> "BernoulliTable":
        table = cls(terms, _bernoulli_even(terms))
        table.self_test()
        return table

    def self_test(self) -> None:
        """Verify anchor values and the alternating sign pattern."""
        anchors = {1: Fraction(1, 6), 2: Fraction(-1, 30), 3: Fraction(1, 42)}
        for j, expected in anchors.items():
            if j <= self.terms and self.values[j - 1] != expected:
                raise ParameterError(f"Bernoulli self-test failed at B_{2 * j}")
        for j, v in enumerate(self.values, start=1):
            if (v > 0) != (j % 2 == 1):
                raise ParameterError(f"Bernoulli sign pattern broken at B_{2 * j}")


# ---------------------------------------------------------------------------
# series coefficients and adaptive shift thresholds
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _series_coeffs_exact(n: int, terms: int) -> tuple:
    """Exact series coefficients, ``terms + 1`` of them (the extra one bounds
    the remainder).

    n == 0 (digamma):   B_{2j} / (2j)
    n >= 1 (polygamma): B_{2j} * (2j + n - 1)! / (2j)!
    """
    bern = _bernoulli_even(terms + 1)
    out = []
    for j in range(1, terms + 2):
        if n == 0:
            out.append(bern[j - 1] / (2 * j))
        else:
            out.append(bern[j - 1] * Fraction(math.factorial(2 * j + n - 1), math.factorial(2 * j)))
    return tuple(out)


@lru_cache(maxsize=None)
def _series_coeffs_mpf(n: int, terms: int, prec: int) -> tuple:
    with mp.workprec(prec):
        return tuple(mpf(c.numerator) / c.denominator for c in _series_coeffs_exact(n, terms))


@lru_cache(maxsize=None)
def _shift_target(n: int, terms: int, working_digits: int, base: int) -> float:
    """Smallest abscissa at which the truncated series meets the precision target.

    Chosen so the first omitted term is <= 10^-(working_digits+2) relative to
    the leading term ((n-1)!/X^n for polygamma, the constant 1 for digamma,
    whose value is >= ln(base) ~ 1 on the shifted domain).
    """
    b_last = _bernoulli_even(terms + 1)[terms]  # B_{2(terms+1)}
    log_b = math.log(abs(b_last.numerator)) - math.log(b_last.denominator)
    if n == 0:
        log_num = log_b - math.log(2 * terms + 2)
    else:
        log_num = (
            log_b
            + math.lgamma(2 * terms + n + 2)
            - math.lgamma(2 * terms + 3)
            - math.lgamma(n)
        )
    log_num += (working_digits + 2) * _LN10
    adaptive = math.exp(log_num / (2 * terms + 2))
    return max(float(base + n), adaptive)


# ---------------------------------------------------------------------------
# argument validation
# ---------------------------------------------------------------------------


def _validate_x(x, name: str = "x") -> mpf:
    xm = mpf(x)
    if mp.isnan(xm) or mp.isinf(xm):
        raise DomainError(f"{name} must be finite, got {xm}")
    if xm <= 0:
        raise DomainError(f"{name} must be positive, got {xm}")
    if xm < MIN_X:
        raise DomainError(f"{name} = {xm} below the supported minimum {MIN_X}")
    return xm


def _validate_config(config) -> PrecisionConfig:
    if config is None:
        return DEFAULT_CONFIG
    if not isinstance(config, PrecisionConfig):
        raise ParameterError(f"config must be a PrecisionConfig, got {type(config)!r}")
    return config


# ---------------------------------------------------------------------------
# digamma / polygamma
# ---------------------------------------------------------------------------


def digamma(x, config: PrecisionConfig | None = None) -> ApproxReal:
    """psi(x) with a guaranteed error envelope.

    err <= 10^-(working_digits-5) * max(1, |value|) for in-range arguments.

    Raises:
        DomainError: x <= 0, non-finite, or below MIN_X.
    """
    cfg = _validate_config(config)
    xm = _validate_x(x)
    return _digamma_cached(xm._mpf_, cfg.working_digits, cfg.shift_threshold_base, cfg.asymptotic_terms)


@lru_cache(maxsize=None)
def _digamma_cached(x_raw, wd: int, base: int, terms: int) -> ApproxReal:
    with mp.workdps(wd + _GUARD_DIGITS):
        x = mpf(x_raw)
        target = _shift_target(0, terms, wd, base)
        m = int(mp.ceil(target - x)) if x < target else 0
        big_x = x + m
        shift_sum = mp.fsum(1 / (x + i) for i in range(m))

        coeffs = _series_coeffs_mpf(0, terms, mp.prec)
        w = 1 / (big_x * big_x)
        series = mpf(0)
        series_mass = mpf(0)
        for c in reversed(coeffs[:terms]):
            series = (series + c) * w
            series_mass = (series_mass + abs(c)) * w

        log_term = mp.log(big_x)
        half_term = 1 / (2 * big_x)
        value = log_term - half_term - series - shift_sum

        trunc = 2 * abs(coeffs[terms]) * w ** (terms + 1)
        abs_mass = abs(log_term) + half_term + series_mass + shift_sum
        err = trunc + mpf(10) ** (-(wd + 6)) * (abs_mass + 1)
        return ApproxReal(value, err)


def polygamma(n: int, x, config: PrecisionConfig | None = None) -> ApproxReal:
    """psi^(n)(x), n >= 1, with a guaranteed error envelope.

    The result carries the analytic sign (-1)^(n+1); its magnitude is
    (n-1)!/x^n at leading order.  err <= 10^-(working_digits-5) * max(1, |value|).

    Raises:
        ParameterError: n < 1 or not an integer.
        DomainError: x <= 0, non-finite, or below MIN_X.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParameterError(f"derivative order n must be an integer >= 1, got {n!r}")
    cfg = _validate_config(config)
    xm = _validate_x(x)
    return _polygamma_cached(n, xm._mpf_, cfg.working_digits, cfg.shift_threshold_base, cfg.asymptotic_terms)


@lru_cache(maxsize=None)
def _polygamma_cached(n: int, x_raw, wd: int, base: int, terms: int) -> ApproxReal:
    with mp.workdps(wd + _GUARD_DIGITS):
        x = mpf(x_raw)
        target = _shift_target(n, terms, wd, base)
        m = int(mp.ceil(target - x)) if x < target else 0
        big_x = x + m

        fact_nm1 = mp.factorial(n - 1)
        fact_n = fact_nm1 * n
        shift_sum = mp.fsum(fact_n / (x + i) ** (n + 1) for i in range(m))

        coeffs = _series_coeffs_mpf(n, terms, mp.prec)
        w = 1 / (big_x * big_x)
        series = mpf(0)
        for c in reversed(coeffs[:terms]):
            series = (series + c) * w
        # all series terms share the magnitude scale X^-n
        scale = big_x ** (-n)
        magnitude = scale * (fact_nm1 + fact_n / (2 * big_x) + series) + shift_sum

        trunc = 2 * abs(coeffs[terms]) * scale * w ** (terms + 1)
        # every contribution is positive, so the magnitude doubles as abs mass
        err = trunc + mpf(10) ** (-(wd + 6)) * (magnitude + 1)
        sign = 1 if n % 2 == 1 else -1
        return ApproxReal(sign * magnitude, err)


_ORACLE_DPS = 35


def polygamma_oracle(n: int, x, terms: int = 1000) -> ApproxReal:
    """Independent check route for :func:`polygamma`: direct series summation.

    |psi^(n)(x)| = n! * sum_{j>=0} (x+j)^-(n+1).  The first ``terms`` terms are
    summed directly; the tail is bracketed by integrals,
    (n-1)!/(x+terms)^n <= tail <= (n-1)!/(x+terms-1)^n, and the bracket
    midpoint/half-width feed value/err.  Shares no code with the asymptotic
    evaluator above.

    Raises:
        ParameterError: n < 1 or terms < 10.
        DomainError: bad x.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParameterError(f"derivative order n must be an integer >= 1, got {n!r}")
    if not isinstance(terms, int) or terms < 10:
        raise ParameterError(f"terms must be an integer >= 10, got {terms!r}")
    xm = _validate_x(x)
    with mp.workdps(_ORACLE_DPS):
        fact_nm1 = mp.factorial(n - 1)
        fact_n = fact_nm1 * n
        partial = fact_n * mp.fsum((xm + j) ** (-(n + 1)) for j in range(terms))
        tail_low = fact_nm1 * (xm + terms) ** (-n)
        tail_high = fact_nm1 * (xm + terms - 1) ** (-n)
        magnitude = partial + (tail_low + tail_high) / 2
        err = (tail_high - tail_low) / 2 + mpf(10) ** (-_ORACLE_DPS + 8) * (magnitude + 1)
        sign = 1 if n % 2 == 1 else -1
        return ApproxReal(sign * magnitude, err)


# ---------------------------------------------------------------------------
# derivatives of exp(1/t)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _exp_inv_poly(k: int) -> tuple:
    """Coefficients of P_k with (e^(1/t))^(k) = P_k(1/t) e^(1/t).

    P_0 = 1 and P_{k+1}(u) = -u^2 (P_k(u) + P_k'(u)); exact rationals, powers
    u^(k+1) .. u^(2k), all coefficients sharing the sign (-1)^k.
    """
    coeffs = {0: Fraction(1)}
    for _ in range(k):
        nxt: dict = {}
        for i, a in coeffs.items():
            nxt[i + 2] = nxt.get(i + 2, Fraction(0)) - a
            if i >= 1:
                nxt[i + 1] = nxt.get(i + 1, Fraction(0)) - i * a
        coeffs = nxt
    top = max(coeffs)
    dense = [coeffs.get(i, Fraction(0)) for i in range(top + 1)]
    return tuple(dense)


def exp_inv_derivative(k: int, t) -> mpf:
    """k-th derivative of exp(1/t) at t > 0, evaluated at the ambient precision.

    Exact-rational polynomial coefficients keep the only rounding in the final
    Horner pass and the exp; all coefficients of P_k share one sign, so there
    is no cancellation and the relative rounding error is a few ulp.
    The sign of the result is (-1)^k.

    Raises:
        ParameterError: k < 0 or not an integer.
        DomainError: bad t.
    """
    if not isinstance(k, int) or isinstance(k, bool) or k < 0:
        raise ParameterError(f"derivative order k must be an integer >= 0, got {k!r}")
    tm = _validate_x(t, name="t")
    with mp.workdps(mp.dps + 10):
        u = 1 / tm
        dense = _exp_inv_poly(k)
        acc = mpf(0)
        for c in reversed(dense):
            acc = acc * u + (mpf(c.numerator) / c.denominator if c else 0)
        return acc * mp.exp(u)


# ---------------------------------------------------------------------------
# digamma inverse
# ---------------------------------------------------------------------------


def digamma_inverse(y, config: PrecisionConfig | None = None) -> ApproxReal:
    """The unique x > 0 with psi(x) = y, by safeguarded Newton iteration.

    The bracket [e^y, e^y + 2] always contains the root (from the two-sided
    bound ln x - 1/x < psi(x) < ln x - 1/(2x)); Newton steps that would leave
    the current bracket fall back to bisection.  Terminates when the certified
    enclosure radius drops below 10^-(working_digits-8).

    Raises:
        DomainError: y is NaN or infinite.
        RuntimeError: no convergence within the iteration cap.
    """
    cfg = _validate_config(config)
    ym = mpf(y)
    if mp.isnan(ym) or mp.isinf(ym):
        raise DomainError(f"y must be finite, got {ym}")
    wd = cfg.working_digits
    # absolute tolerance needs headroom when the root itself is huge (x ~ e^y)
    extra = max(0, int(float(ym) / _LN10) + 4) if ym > 0 else 0
    tol = mpf(10) ** (-(wd - 8))
    with mp.workdps(wd + _GUARD_DIGITS + extra):
        inner_cfg = PrecisionConfig(
            working_digits=wd + extra,
            shift_threshold_base=cfg.shift_threshold_base,
            asymptotic_terms=cfg.asymptotic_terms,
        )
        lo = mp.exp(ym)
        hi = lo + 2
        if lo < MIN_X:
            lo = MIN_X  # root > e^y always; stay inside the engine's domain
        # seed: asymptotic inverse for very negative y, else the bracket centre
        gamma = -_digamma_cached(mpf(1)._mpf_, wd, cfg.shift_threshold_base, cfg.asymptotic_terms).value
        if ym < -2:
            x = -1 / (ym + gamma)
            if not (lo < x < hi):
                x = (lo + hi) / 2
        else:
            x = mp.exp(ym) + mpf("0.5")
        for _ in range(200):
            psi_x = digamma(x, inner_cfg)
            res = psi_x.value - ym
            if res > 0:
                hi = x
            else:
                lo = x
            deriv = polygamma(1, x, inner_cfg)
            step = res / deriv.value
            nxt = x - step
            if not (lo < nxt < hi):
                nxt = (lo + hi) / 2
            # certified enclosure: |x - root| <= (|res| + psi err) / min psi' on
            # the enclosing interval; psi' is decreasing, so evaluate at the
            # right end of the bracket
            deriv_right = polygamma(1, hi, inner_cfg)
            deriv_floor = deriv_right.value - deriv_right.err
            if deriv_floor > 0:
                enclosure = (abs(res) + psi_x.err) / deriv_floor
                if enclosure <= tol * max(1, abs(x)):
                    return ApproxReal(x, enclosure + _round_slack(x))
            x = nxt
        raise RuntimeError(f"digamma_inverse failed to converge for y = {ym}")


# ---------------------------------------------------------------------------


def _self_test() -> int:  # pragma: no cover - manual smoke test
    failures = 0
    with mp.workdps(50):
        checks = [
            ("digamma(1)", digamma(1).value, mpf("-0.5772156649015328606065120900824024310422")),
            ("polygamma(1,1)", polygamma(1, 1).value, mpf("1.644934066848226436472415166646025189219")),
            ("polygamma(2,1)", polygamma(2, 1).value, mpf("-2.404113806319188570799476323022899981530")),
            ("exp_inv_derivative(1,1)", exp_inv_derivative(1, 1), -mp.e),
        ]
        for label, got, want in checks:
            ok = abs(got - want) < mpf("1e-30") * max(1, abs(want))
            print(f"{'PASS' if ok else 'FAIL'}  {label} = {mp.nstr(got, 20)}")
            failures += not ok
    return failures


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(_self_test())
