"""Engine tests: frozen reference anchors, error-envelope soundness, domain guards.

Reference values were computed independently (direct series summation with
integral tail brackets, plus mpmath's own zeta/digamma at 60 digits as a
second library route) and frozen here as strings.
"""

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpf

from polybound.engine import (
    ApproxReal,
    BernoulliTable,
    DomainError,
    ParameterError,
    PrecisionConfig,
    digamma,
    digamma_inverse,
    exp_inv_derivative,
    polygamma,
    polygamma_oracle,
)

# |psi^(n)(1)| = n! * zeta(n+1), 40 digits
POLYGAMMA_AT_1 = {
    1: "1.644934066848226436472415166646025189219",
    2: "2.40411380631918857079947632302289998153",
    3: "6.493939402266829149096022179247007416649",
    4: "24.88626612344087823195277167496882003337",
    5: "122.0811674381338967657421515749104633482",
    6: "726.0114797149844353246542358918536669119",
    7: "5060.549875237639470468573602083608424905",
    8: "40400.97839874763488532782365545085427878",
}
EULER_GAMMA = "0.577215664901532860606512090082402431042159336"

# digamma inverse anchors: y -> x with psi(x) = y
DIGAMMA_INVERSE_ANCHORS = {
    "-5": "0.2116141986440573183776830374173274",
    "0": "1.4616321449683623412626595423257213",
    "2": "7.8834286311860410394871108449509231",
}

SAMPLE_XS = ["0.001", "0.01", "0.1", "0.5", "1", "1.5", "2", "5", "12.3", "100", "1000"]


@pytest.fixture(autouse=True)
def _high_ambient_precision():
    old = mp.dps
    mp.dps = 60
    yield
    mp.dps = old


def test_bernoulli_table_anchors():
    table = BernoulliTable.build(21)
    assert table.values[0] == mpf(1) / 6 or str(table.values[0]) == "1/6"
    assert str(table.values[0]) == "1/6"
    assert str(table.values[1]) == "-1/30"
    assert str(table.values[2]) == "1/42"
    # alternating signs throughout
    for j, v in enumerate(table.values, start=1):
        assert (v > 0) == (j % 2 == 1)


def test_digamma_at_one_is_minus_gamma():
    r = digamma(1)
    assert abs(r.value + mpf(EULER_GAMMA)) <= mpf("1e-38")
    assert r.err <= mpf("1e-35")


def test_digamma_at_half():
    # psi(1/2) = -gamma - 2 ln 2
    want = -mpf(EULER_GAMMA) - 2 * mp.log(2)
    r = digamma(mpf(1) / 2)
    assert abs(r.value - want) <= mpf("1e-38")


def test_polygamma_anchors_at_one():
    for n, s in POLYGAMMA_AT_1.items():
        want = mpf(s) * (1 if n % 2 == 1 else -1)
        r = polygamma(n, 1)
        assert abs(r.value - want) <= mpf("1e-35") * abs(want), f"n={n}"


def test_error_envelope_postcondition():
    for xs in SAMPLE_XS:
        x = mpf(xs)
        d = digamma(x)
        assert d.err <= mpf("1e-35") * max(1, abs(d.value)), f"digamma x={xs}"
        for n in (1, 2, 5, 8):
            p = polygamma(n, x)
            assert p.err <= mpf("1e-35") * max(1, abs(p.value)), f"n={n} x={xs}"


def test_polygamma_sign_pattern():
    for xs in SAMPLE_XS:
        for n in range(1, 9):
            v = polygamma(n, mpf(xs)).value
            assert (v > 0) == (n % 2 == 1)


def test_digamma_two_sided_log_envelope():
    # ln x - 1/x < psi(x) < ln x - 1/(2x), strict even after widening by err
    for xs in SAMPLE_XS:
        x = mpf(xs)
        r = digamma(x)
        assert r.value - r.err > mp.log(x) - 1 / x
        assert r.value + r.err < mp.log(x) - 1 / (2 * x)


def test_engine_agrees_with_oracle_spot():
    e = polygamma(3, 2)
    o = polygamma_oracle(3, 2, 10**4)
    assert abs(e.value - o.value) <= e.err + o.err


def test_oracle_million_terms_error_budget():
    o = polygamma_oracle(1, 1, 10**6)
    assert o.err <= mpf("1e-6")
    assert abs(o.value - mpf(POLYGAMMA_AT_1[1])) <= o.err


def test_recurrence_residual():
    # psi^(n)(x) = psi^(n)(x+1) + (-1)^(n+1) n! / x^(n+1)
    for xs in ("0.25", "1", "7.5", "200"):
        x = mpf(xs)
        for n in (1, 2, 3, 8):
            left = polygamma(n, x)
            right = polygamma(n, x + 1)
            step = mp.factorial(n) / x ** (n + 1) * (1 if n % 2 == 1 else -1)
            residual = abs(left.value - right.value - step)
            assert residual <= 4 * (left.err + right.err), f"n={n} x={xs}"


def test_digamma_recurrence_residual():
    for xs in ("0.25", "1", "7.5", "200"):
        x = mpf(xs)
        left = digamma(x + 1)
        right = digamma(x)
        residual = abs(left.value - right.value - 1 / x)
        assert residual <= 4 * (left.err + right.err)


def test_custom_precision_configs():
    coarse = PrecisionConfig(working_digits=20, shift_threshold_base=6, asymptotic_terms=4)
    fine = PrecisionConfig(working_digits=60)
    for xs in ("0.5", "3", "50"):
        a = digamma(mpf(xs), coarse)
        b = digamma(mpf(xs), fine)
        assert a.err <= mpf("1e-15") * max(1, abs(a.value))
        assert b.err <= mpf("1e-55") * max(1, abs(b.value))
        assert abs(a.value - b.value) <= a.err + b.err


def test_domain_and_parameter_errors():
    for bad in (0, -1, mpf("nan"), mp.inf, mpf("1e-301")):
        with pytest.raises(DomainError):
            digamma(bad)
        with pytest.raises(DomainError):
            polygamma(1, bad)
    for bad_n in (0, -3, 1.5, "2"):
        with pytest.raises(ParameterError):
            polygamma(bad_n, 1)
    with pytest.raises(ParameterError):
        polygamma_oracle(1, 1, 5)
    with pytest.raises(ParameterError):
        PrecisionConfig(working_digits=19)
    with pytest.raises(ParameterError):
        PrecisionConfig(shift_threshold_base=5)
    with pytest.raises(ParameterError):
        PrecisionConfig(asymptotic_terms=3)
    with pytest.raises(DomainError):
        exp_inv_derivative(2, 0)
    with pytest.raises(ParameterError):
        exp_inv_derivative(-1, 1)
    with pytest.raises(DomainError):
        digamma_inverse(mp.inf)


def test_exp_inv_derivative_anchors():
    assert abs(exp_inv_derivative(0, 1) - mp.e) <= mpf("1e-55") * mp.e
    assert abs(exp_inv_derivative(1, 1) + mp.e) <= mpf("1e-55") * mp.e
    # (e^(1/t))'' = (u^4 + 2u^3) e^u at u = 1/t -> 3e at t = 1
    assert abs(exp_inv_derivative(2, 1) - 3 * mp.e) <= mpf("1e-54") * mp.e


def test_exp_inv_derivative_sign_alternates():
    for ts in ("0.05", "0.7", "1", "13", "500"):
        for k in range(9):
            v = exp_inv_derivative(k, mpf(ts))
            assert (v > 0) == (k % 2 == 0), f"k={k} t={ts}"


def test_exp_inv_derivative_leading_order():
    # for large t the dominant coefficient gives |P_k(u)| ~ k! u^(k+1)
    t = mpf("1e6")
    for k in (1, 2, 3, 6):
        ratio = abs(exp_inv_derivative(k, t)) / (mp.factorial(k) * t ** (-(k + 1)))
        assert abs(ratio - 1) < mpf("1e-4")


def test_digamma_inverse_anchors_and_roundtrip():
    for ys, xs in DIGAMMA_INVERSE_ANCHORS.items():
        y = mpf(ys)
        r = digamma_inverse(y)
        assert abs(r.value - mpf(xs)) <= mpf("1e-30")
        assert mp.exp(y) <= r.value <= mp.exp(y) + 2
        assert r.err <= mpf("1e-32") * max(1, abs(r.value))
        back = digamma(r.value)
        assert abs(back.value - y) <= mpf("1e-30")


def test_caching_returns_identical_enclosures():
    a = polygamma(2, mpf("3.7"))
    b = polygamma(2, mpf("3.7"))
    assert a.value == b.value and a.err == b.err


def test_approx_real_arithmetic_soundness():
    a = ApproxReal(mpf(2), mpf("1e-20"))
    b = ApproxReal(mpf(3), mpf("1e-22"))
    s = a + b
    assert s.err >= a.err + b.err
    p = a * b
    assert p.err >= 3 * a.err + 2 * b.err
    e = a.exp()
    assert e.err >= mp.exp(2) * a.err
    l = a.log()
    assert l.err >= a.err / 2
    q = a.pow_const(mpf(1) / 2)
    assert abs(q.value - mp.sqrt(2)) < mpf("1e-50")
    assert q.err > 0
    with pytest.raises(ParameterError):
        ApproxReal(mpf(1), mpf(-1))


@given(
    n=st.integers(min_value=1, max_value=8),
    exponent=st.floats(min_value=-3, max_value=3),
)
@settings(max_examples=30, deadline=None)
def test_property_engine_oracle_overlap(n, exponent):
    with mp.workdps(60):
        x = mpf(10) ** mpf(exponent)
        e = polygamma(n, x)
        o = polygamma_oracle(n, x, 400)
        assert abs(e.value - o.value) <= e.err + o.err


@given(y=st.floats(min_value=-8, max_value=8))
@settings(max_examples=25, deadline=None)
def test_property_digamma_inverse_roundtrip(y):
    with mp.workdps(60):
        ym = mpf(y)
        r = digamma_inverse(ym)
        assert mp.exp(ym) <= r.value <= mp.exp(ym) + 2
        assert abs(digamma(r.value).value - ym) <= mpf("1e-30")


@given(
    n=st.integers(min_value=1, max_value=6),
    exponent=st.floats(min_value=-2, max_value=2),
)
@settings(max_examples=25, deadline=None)
def test_property_recurrence(n, exponent):
    with mp.workdps(60):
        x = mpf(10) ** mpf(exponent)
        left = polygamma(n, x)
        right = polygamma(n, x + 1)
        step = mp.factorial(n) / x ** (n + 1) * (1 if n % 2 == 1 else -1)
        assert abs(left.value - right.value - step) <= 4 * (left.err + right.err)
