"""Logarithmic and generalized logarithmic means, plus shift solving.

The one-parameter family implemented here is, for positive a != b,

    M(p; a, b) = [ (b^(p+1) - a^(p+1)) / ((p+1)(b - a)) ]^(1/p)    p not in {-1, 0}
    M(-1; a, b) = (b - a) / (ln b - ln a)                          logarithmic mean
    M(0; a, b)  = (1/e) (b^b / a^a)^(1/(b-a))                      identric mean

with M(p; a, a) = a.  It is strictly increasing in p and lies strictly between
min(a,b) and max(a,b).  The power branch is evaluated in the cancellation-free
form a * [expm1(q*g) / (q * expm1(g))]^(1/p) with q = p+1, g = log1p((b-a)/a),
which stays accurate through q -> 0 and b -> a; the removable singularities at
p = -1 and p = 0 are handled by their own closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpf

from .engine import (
    DEFAULT_CONFIG,
    DomainError,
    ParameterError,
    PrecisionConfig,
    _validate_x,
)

__all__ = ["BracketError", "MeanOrder", "gen_log_mean", "log_mean", "solve_shift"]


class BracketError(ValueError):
    """A root/solve target falls outside the reachable bracket."""


@dataclass(frozen=True)
class MeanOrder:
    """Order parameter p of the generalized logarithmic mean family."""

    p: float

    def __post_init__(self) -> None:
        pm = mpf(self.p)
        if mp.isnan(pm) or mp.isinf(pm):
            raise ParameterError(f"mean order must be finite, got {self.p!r}")


def _order_value(order) -> mpf:
    if isinstance(order, MeanOrder):
        return mpf(order.p)
    pm = mpf(order)
    if mp.isnan(pm) or mp.isinf(pm):
        raise ParameterError(f"mean order must be finite, got {order!r}")
    return pm


def log_mean(a, b) -> mpf:
    """Logarithmic mean (b - a)/(ln b - ln a); equals a when a == b."""
    am = _validate_x(a, name="a")
    bm = _validate_x(b, name="b")
    if am == bm:
        return am
    if am > bm:
        am, bm = bm, am
    with mp.workdps(mp.dps + 10):
        g = mp.log1p((bm - am) / am)
        return (bm - am) / g


def gen_log_mean(p, a, b) -> mpf:
    """Generalized logarithmic mean M(p; a, b); see the module docstring."""
    pm = _order_value(p)
    am = _validate_x(a, name="a")
    bm = _validate_x(b, name="b")
    if am == bm:
        return am
    if am > bm:
        am, bm = bm, am
    # within ~10^-600 of p = 0 the family is indistinguishable from its
    # identric limit at any supported working precision; below 10^-8 the power
    # branch needs extra digits to resolve (b^(p+1) - a^(p+1)) / (p+1)
    abs_p = abs(pm)
    if abs_p != 0 and abs_p < mpf("1e-600"):
        pm = mpf(0)
        abs_p = mpf(0)
    extra = 0
    if 0 < abs_p < mpf("1e-8"):
        extra = int(-mp.log(abs_p) / mp.log(10)) + 15
    with mp.workdps(mp.dps + 10 + extra):
        eps = (bm - am) / am
        g = mp.log1p(eps)
        if pm == -1:
            return (bm - am) / g
        if pm == 0:
            # identric: a * exp((1+eps) * g/eps - 1)
            return am * mp.exp((1 + eps) * (g / eps) - 1)
        q = pm + 1
        base = mp.expm1(q * g) / (q * mp.expm1(g))
        return am * base ** (1 / pm)


def solve_shift(p, x, target, q_max, config: PrecisionConfig | None = None) -> mpf:
    """Solve gen_log_mean(p, x, x + q) = target for the shift q in [0, q_max].

    The mean is strictly increasing in q, so plain bisection is used: 200
    iterations maximum, terminating when the defining equality holds to
    10^-(working_digits-8) * max(1, target).

    Returns exact 0 when target == x.

    Raises:
        BracketError: target below x or beyond gen_log_mean(p, x, x + q_max).
        DomainError / ParameterError: invalid x, target, or order.
    """
    cfg = config if config is not None else DEFAULT_CONFIG
    pm = _order_value(p)
    xm = _validate_x(x)
    tm = mpf(target)
    if mp.isnan(tm) or mp.isinf(tm):
        raise DomainError(f"target must be finite, got {tm}")
    qm = mpf(q_max)
    if not (qm > 0) or mp.isinf(qm):
        raise ParameterError(f"q_max must be finite and positive, got {q_max!r}")
    if tm == xm:
        return mpf(0)
    if tm < xm:
        raise BracketError(f"target {tm} below the left endpoint {xm}")
    with mp.workdps(cfg.working_digits + 12):
        tol = mpf(10) ** (-(cfg.working_digits - 8)) * max(1, tm)
        hi_mean = gen_log_mean(pm, xm, xm + qm)
        if hi_mean < tm:
            raise BracketError(
                f"target {tm} exceeds the mean {hi_mean} reachable with q_max = {qm}"
            )
        lo, hi = mpf(0), qm
        q = qm / 2
        for _ in range(200):
            q = (lo + hi) / 2
            value = gen_log_mean(pm, xm, xm + q)
            if abs(value - tm) <= tol:
                return q
            if value < tm:
                lo = q
            else:
                hi = q
        return q
