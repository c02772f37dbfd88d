"""Tests for grid sweeps, structural checks, and counterexample refinement."""

import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from polybound.catalog import make_cases
from polybound.engine import ParameterError, exp_inv_derivative, polygamma
from polybound.means import BracketError
from polybound.verifier import (
    CSV_COLUMNS,
    Counterexample,
    SampleGrid,
    chain_check,
    complete_monotonicity_check,
    default_grid_points,
    limit_check,
    margin_rows,
    refine_counterexample,
    report_to_dict,
    sweep,
    write_margin_csv,
)

# |x * root_norm(k, x) - 1| reference values, frozen from a direct
# (k * zeta(k+1, x))^(1/k) evaluation at 50 digits.
LIMIT_DEV_AT_1 = {
    16: "0.189207682638799572934",
    32: "0.114386742599946657926",
    64: "0.06714040067682361817",
    128: "0.0386341019613787906124",
}
LIMIT_DEV_2_64 = "0.0556451783606162341387"

# e^(1/100) - psi'(100), same oracle route
H_AT_100 = "1.00000000042083448614692"

# sign change of the root-norm log-mean lower bound margin at n=40
B06_N40_CROSSING = "0.07869111285340021866"


@pytest.fixture(autouse=True)
def _high_precision():
    old = mp.dps
    mp.dps = 60
    yield
    mp.dps = old


def _case(code, **kwargs):
    cases = make_cases(code, **kwargs)
    assert len(cases) == 1
    return cases[0]


class TestSampleGrid:
    def test_log_points_hit_endpoints(self):
        grid = SampleGrid("0.1", "10", 5)
        pts = grid.points()
        assert len(pts) == 5
        assert pts[0] == grid.x_min and pts[-1] == grid.x_max
        assert all(a < b for a, b in zip(pts, pts[1:]))
        # log-symmetric interval: the middle point is the geometric mean
        assert abs(pts[2] - 1) < mpf("1e-25")

    def test_linear_points_equal_steps(self):
        pts = SampleGrid(1, 3, 5, "linear").points()
        steps = [b - a for a, b in zip(pts, pts[1:])]
        assert all(abs(s - mpf("0.5")) < mpf("1e-25") for s in steps)

    def test_random_points_deterministic(self):
        grid = SampleGrid("0.01", "100", 50, "random", seed=7)
        a = grid.points()
        b = SampleGrid("0.01", "100", 50, "random", seed=7).points()
        c = SampleGrid("0.01", "100", 50, "random", seed=8).points()
        assert a == b
        assert a != c
        assert list(a) == sorted(a)
        assert all(grid.x_min <= p <= grid.x_max for p in a)

    def test_points_independent_of_ambient_precision(self):
        with mp.workdps(15):
            low = SampleGrid("0.001", "1000", 20).points()
        with mp.workdps(60):
            high = SampleGrid("0.001", "1000", 20).points()
        assert low == high

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(x_min=0, x_max=1, count=5),
            dict(x_min=-1, x_max=1, count=5),
            dict(x_min=2, x_max=1, count=5),
            dict(x_min=1, x_max=1, count=5),
            dict(x_min=1, x_max=2, count=1),
            dict(x_min=1, x_max=2, count=5, spacing="cubic"),
            dict(x_min=1, x_max=2, count=5, spacing="random"),
            dict(x_min=1, x_max=2, count=5, spacing="random", seed=True),
            dict(x_min=1, x_max=2, count=5, spacing="log", seed=3),
        ],
    )
    def test_rejects_bad_parameters(self, kwargs):
        with pytest.raises(ParameterError):
            SampleGrid(**kwargs)

    @settings(max_examples=25, deadline=None)
    @given(count=st.integers(2, 40), seed=st.integers(0, 2**32 - 1))
    def test_random_grid_properties(self, count, seed):
        grid = SampleGrid("0.01", "100", count, "random", seed=seed)
        pts = grid.points()
        assert len(pts) == count
        assert list(pts) == sorted(pts)
        assert all(grid.x_min <= p <= grid.x_max for p in pts)

    def test_default_grid(self):
        pts = default_grid_points()
        assert len(pts) == 11_000
        assert abs(pts[0] - mpf("0.001")) < mpf("1e-25")
        assert abs(pts[-1] - 1000) < mpf("1e-25")
        assert all(a <= b for a, b in zip(pts, pts[1:]))


class TestSweep:
    def test_clean_case(self):
        report = sweep(_case("B01"), SampleGrid("0.01", "100", 60))
        assert report.samples == 60
        assert report.skipped == 0
        assert report.uncertified_count == 0
        assert report.counterexamples == ()
        assert report.errors == ()
        assert report.clean
        assert report.min_margin > 0
        assert mpf("0.01") <= report.argmin_x <= 100

    def test_deterministic(self):
        grid = SampleGrid("0.05", "50", 30, "random", seed=11)
        assert sweep(_case("B13"), grid) == sweep(_case("B13"), grid)

    def test_skips_points_below_domain_floor(self):
        case = make_cases("B15", k=1)[0]
        report = sweep(case, SampleGrid("0.001", "0.01", 10))
        assert report.skipped >= 3
        assert report.samples + report.skipped == 10
        assert report.errors == ()
        assert report.counterexamples == ()
        assert report.min_margin > 0

    def test_escalates_precision_for_tight_margins(self):
        # Near its domain floor, the upper expm1-sandwich side is tight to a
        # relative gap of about exp(-1/t): hopeless at 40 digits, certified
        # once the sweep climbs the precision ladder.
        upper = make_cases("B15", k=7)[1]
        report = sweep(upper, SampleGrid("0.0021", "0.01", 8))
        assert report.samples == 8
        assert report.uncertified_count == 0
        assert report.counterexamples == ()
        assert report.errors == ()
        assert report.min_margin > 0

    def test_escalated_csv_rows_agree_with_sweep(self):
        upper = make_cases("B15", k=7)[1]
        rows = list(margin_rows([upper], SampleGrid("0.0021", "0.01", 8)))
        assert len(rows) == 8
        assert all(row["certified"] == "true" for row in rows)

    def test_exploratory_counterexamples_all_negative(self):
        case = _case("B06", n=40, exploratory=True)
        report = sweep(case, SampleGrid("0.01", "0.05", 8))
        assert report.samples == 8
        assert report.uncertified_count == 8
        assert len(report.counterexamples) == 8
        assert not report.clean
        assert report.min_margin < -1
        assert abs(report.argmin_x - mpf("0.01")) < mpf("1e-25")
        for ce in report.counterexamples:
            assert ce.margin < 0
            assert ce.bracket is None  # no positive-margin neighbor in this grid

    def test_counterexample_brackets_enclose_sign_change(self):
        case = _case("B06", n=40, exploratory=True)
        report = sweep(case, SampleGrid("0.02", "1", 10))
        assert report.counterexamples
        assert report.samples == 10
        crossing = mpf(B06_N40_CROSSING)
        xs = [ce.x for ce in report.counterexamples]
        assert xs == sorted(xs)
        assert all(x < crossing for x in xs)
        bracketed = [ce for ce in report.counterexamples if ce.bracket is not None]
        assert bracketed
        for ce in bracketed:
            lo, hi = ce.bracket
            assert lo <= ce.x <= hi
            assert lo < crossing < hi

    def test_rejects_non_case(self):
        with pytest.raises(ParameterError):
            sweep("B01", SampleGrid(1, 2, 3))

    def test_rejects_bad_grid_points(self):
        with pytest.raises(ParameterError):
            sweep(_case("B01"), [1, -2, 3])
        with pytest.raises(ParameterError):
            sweep(_case("B01"), [])


class TestStructuralChecks:
    def test_chain_is_clean(self):
        report = chain_check(5, SampleGrid("0.05", "50", 25))
        assert report.samples == 100
        assert report.uncertified_count == 0
        assert report.clean
        assert report.min_margin > 0
        assert report.case is None
        assert "chain" in report.label

    def test_chain_rejects_small_n_max(self):
        with pytest.raises(ParameterError):
            chain_check(1, SampleGrid(1, 2, 3))
        with pytest.raises(ParameterError):
            chain_check(True, SampleGrid(1, 2, 3))

    def test_limit_deviation_anchors(self):
        for k, expected in LIMIT_DEV_AT_1.items():
            assert abs(limit_check(1, k) - mpf(expected)) < mpf("1e-18")

    def test_limit_deviation_decreases_in_k(self):
        devs = [limit_check(1, k) for k in (16, 32, 64, 128)]
        assert devs == sorted(devs, reverse=True)

    def test_limit_deviation_smaller_at_larger_x(self):
        dev = limit_check(2, 64)
        assert abs(dev - mpf(LIMIT_DEV_2_64)) < mpf("1e-18")
        assert dev < limit_check(1, 32)

    def test_limit_rejects_bad_order(self):
        with pytest.raises(ParameterError):
            limit_check(1, 1)
        with pytest.raises(ParameterError):
            limit_check(1, 2.5)

    def test_complete_monotonicity_clean(self):
        report = complete_monotonicity_check(6, SampleGrid("0.05", "50", 20))
        assert report.samples == 140
        assert report.uncertified_count == 0
        assert report.clean
        assert report.min_margin > 0

    def test_h_at_100_just_above_one(self):
        with mp.workdps(55):
            h = exp_inv_derivative(0, mpf(100)) - polygamma(1, mpf(100)).value
        assert 1 < h < mpf("1.02")
        assert abs(h - mpf(H_AT_100)) < mpf("1e-20")

    @pytest.mark.parametrize("k_max", [-1, 9, 3.5, True])
    def test_complete_monotonicity_rejects_bad_k_max(self, k_max):
        with pytest.raises(ParameterError):
            complete_monotonicity_check(k_max, SampleGrid(1, 2, 3))


class TestRefineCounterexample:
    def test_synthetic_linear_margin(self):
        found = refine_counterexample(lambda x: x - 2, ("1", "3"))
        assert isinstance(found, Counterexample)
        assert abs(found.x - 2) <= mpf("5e-10")
        assert found.margin < 0
        assert found.margin > mpf("-1e-9")
        lo, hi = found.bracket
        assert lo <= found.x <= hi
        assert hi - lo <= mpf("3e-10")

    def test_synthetic_reversed_orientation(self):
        found = refine_counterexample(lambda x: 2 - x, ("1", "3"))
        assert abs(found.x - 2) <= mpf("5e-10")
        assert found.margin < 0

    def test_bound_case_crossing(self):
        case = _case("B06", n=40, exploratory=True)
        found = refine_counterexample(case, ("0.05", "1"))
        crossing = mpf(B06_N40_CROSSING)
        assert abs(found.x - crossing) <= mpf("1e-9") * crossing
        assert found.margin < 0

    def test_rejects_same_sign_endpoints(self):
        with pytest.raises(BracketError):
            refine_counterexample(lambda x: x + 1, ("1", "3"))

    def test_rejects_uncertified_endpoint(self):
        with pytest.raises(BracketError):
            refine_counterexample(lambda x: x - 1, ("1", "3"))

    def test_rejects_bad_bracket(self):
        with pytest.raises(ParameterError):
            refine_counterexample(lambda x: x - 2, ("3", "1"))
        with pytest.raises(ParameterError):
            refine_counterexample(lambda x: x - 2, ("-1", "3"))

    def test_rejects_bad_target(self):
        with pytest.raises(ParameterError):
            refine_counterexample("B01", ("1", "3"))


class TestEmission:
    def test_report_round_trips_to_json(self):
        report = sweep(make_cases("B19")[0], SampleGrid("0.1", "10", 12))
        payload = report_to_dict(report)
        assert payload["case"]["name"] == "B19.log-mean-half-window.L"
        assert payload["samples"] == 12
        assert payload["counterexamples"] == []
        assert payload["errors"] == []
        assert mpf(payload["min_margin"]) > 0
        encoded = json.dumps(payload, sort_keys=True)
        again = json.dumps(report_to_dict(sweep(make_cases("B19")[0], SampleGrid("0.1", "10", 12))), sort_keys=True)
        assert encoded == again

    def test_report_serializes_counterexamples(self):
        case = _case("B06", n=40, exploratory=True)
        payload = report_to_dict(sweep(case, SampleGrid("0.02", "1", 10)))
        assert payload["case"]["exploratory"] is True
        entries = payload["counterexamples"]
        assert entries
        for entry in entries:
            assert mpf(entry["margin"]) < 0
            assert entry["bracket"] is None or len(entry["bracket"]) == 2

    def test_structural_report_has_no_case(self):
        payload = report_to_dict(chain_check(3, SampleGrid("0.5", "5", 5)))
        assert payload["case"] is None
        assert payload["samples"] == 10

    def test_margin_csv_layout(self):
        buf = io.StringIO()
        rows = write_margin_csv(buf, make_cases("B19"), SampleGrid(1, 2, 5, "linear"))
        assert rows == 10
        lines = buf.getvalue().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 11
        first = lines[1].split(",")
        assert first[0] == "B19.log-mean-half-window.L"
        assert first[1] == "" and first[2] == ""
        assert first[-1] == "true"

    def test_margin_csv_skips_out_of_domain_rows(self):
        buf = io.StringIO()
        rows = write_margin_csv(buf, make_cases("B15", k=1), SampleGrid("0.001", "0.004", 4))
        assert rows == 4  # two of four points sit below the validity floor
        body = buf.getvalue().splitlines()[1:]
        assert all(line.split(",")[2] == "1" for line in body)
