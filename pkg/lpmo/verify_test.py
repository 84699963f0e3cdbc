from __future__ import print_function, division

import json

import numpy as np

from pytest                 import raises
from pytest                 import approx
from pytest                 import mark

from . config     import ConfigError
from . config     import parse_suite
from . config     import get_defaults
from . output     import Writer
from . output     import make_table
from . verify     import CheckSpec
from . verify     import HypothesisViolation
from . verify     import fit_slope
from . verify     import summarize
from . verify     import judge
from . verify     import run_check
from . verify     import run_suite
from . verify     import worker_count

small = {"cells_per_radius": 8}


def tables(*checks):
    return parse_suite(json.dumps({"checks": list(checks)}))


def only(**check):
    return tables(check)[0]


def test_judge():
    metrics = {"max_ratio": 0.5, "failed_fraction": 0.}
    assert judge(metrics, {"max_ratio": 1.})
    assert not judge(metrics, {"max_ratio": 0.1})
    assert not judge(metrics, {"stability": 2.})
    assert not judge({"max_ratio": np.nan, "failed_fraction": 0.}, {"max_ratio": 1.})
    assert not judge({"max_ratio": 0., "failed_fraction": 0.3}, {})


def test_fit_slope_of_power_law():
    x = np.array([64., 128., 256., 512.])
    slope, _ = fit_slope(x, 3*x**-2.45)
    assert slope == approx(-2.45, abs=1e-8)


def test_summarize_tail_stability():
    rows = [("r=1", 1., "t", 1., 2., np.nan, 2., True),
            ("r=2", 2., "t", 1., 3., np.nan, 3., True),
            ("r=1", 1., "t", 10., 1., np.nan, 1., True),
            ("r=2", 2., "t", 10., 1., np.nan, 1., True)]
    metrics = summarize("tail", make_table("tail", rows))
    assert metrics["stability"] == approx(1.5)
    assert metrics["max_ratio"] == 3.
    assert metrics["failed_fraction"] == 0.


def test_auto_beta_is_inside_window():
    spec = CheckSpec.from_config(only(check="decay_area"))
    assert spec.params.beta == approx(0.45)
    assert spec.operator == "area"
    gstar = CheckSpec.from_config(only(check="decay_gstar", params={"lam": 2.3}))
    assert gstar.params.beta == approx(0.9*0.3*2/3)


def test_beta_outside_window():
    with raises(HypothesisViolation) as error:
        CheckSpec.from_config(only(check="decay_area", params={"beta": 0.9}))
    assert "decay_area_0" in str(error.value)


def test_weak_atom_bound_needs_critical_p():
    with raises(HypothesisViolation):
        CheckSpec.from_config(only(check="weak_atom_bound_area", phi={"p": 0.9}))
    spec = CheckSpec.from_config(only(check="weak_atom_bound_area"))
    assert spec.phi.p == approx(2/(2 + spec.params.beta))


def test_atom_bound_needs_p_above_critical():
    with raises(HypothesisViolation):
        CheckSpec.from_config(only(check="atom_bound_area", phi={"p": 0.5}))


@mark.parametrize("change field".split(),
                  (({"bogus": 1}, "bogus"),
                   ({"quad": {"rel_tol": 1e-3, "typo": 1}}, "quad"),
                   ({"kernel": "harmonic9"}, "kernel"),
                   ({"phi": {"family": "unknown"}}, "phi"),
                   ({"params": {"rho": 1.5, "gamma": 1}}, "params"),
                   ({"tolerances": {"max_ratio": "big"}}, "tolerances")))
def test_invalid_fields(change, field):
    table = dict(only(check="aq"), **change)
    with raises(ConfigError) as error:
        CheckSpec.from_config(table)
    assert 'field "%s"' % field in str(error.value)


def test_cancellation_check_passes():
    report = run_check(only(check="cancellation", options={"kernels": ["harmonic1", "harmonic3"]}))
    assert report.passed
    assert len(report.table) == 2
    assert report.metrics["max_ratio"] <= 1e-8


def test_tail_check_is_stable_in_radius():
    report = run_check(only(check="tail"))
    assert report.passed
    assert report.metrics["stability"] == approx(1., rel=1e-6)


def test_superposition_check():
    report = run_check(only(check="superposition", quad=small))
    assert report.passed
    assert report.metrics["single_ratio"] <= 1.
    zero = report.table[report.table["case"] == "zero"]
    assert np.all(zero["ratio"] == 0)


def test_weak_norm_sufficiency_check():
    report = run_check(only(check="weak_norm_sufficiency", quad=small))
    assert report.passed
    assert report.tolerances["max_ratio"] == approx(1.)
    assert np.all(report.table["ratio"] <= 1 + 1e-9)


def test_empty_suite_passes(tmp_path):
    code, reports = run_suite([], Writer(str(tmp_path)), max_workers=1)
    assert code == 0
    assert reports == []
    with open(str(tmp_path / "summary.json")) as f:
        assert json.load(f)["passed"] is True


def test_failing_tolerance_is_named(tmp_path):
    suite = tables({"check": "superposition", "quad": small, "name": "tight",
                    "tolerances": {"single_ratio": 0.5}},
                   {"check": "cancellation", "options": {"kernels": ["harmonic1"]}})
    code, reports = run_suite(suite, Writer(str(tmp_path)), max_workers=1)
    assert code == 1
    assert [report.passed for report in reports] == [False, True]
    with open(str(tmp_path / "summary.json")) as f:
        assert json.load(f)["failed"] == ["tight"]
    assert (tmp_path / "tight.csv").exists()


def test_suite_is_validated_before_running(tmp_path):
    suite = tables({"check": "cancellation"}, {"check": "decay_area", "params": {"beta": 2.}})
    with raises(HypothesisViolation):
        run_suite(suite, Writer(str(tmp_path)), max_workers=1)
    assert not (tmp_path / "cancellation_0.csv").exists()


def test_worker_count(monkeypatch):
    monkeypatch.setenv("LPMO_MAX_WORKERS", "3")
    assert worker_count(10) == 3
    assert worker_count(2) == 2
    assert worker_count(0) == 1
    assert worker_count(10, max_workers=5) == 5


coarse = {"cells_per_radius": 8, "angular_nodes": 16, "radial_order": 4, "partial_nodes": 8}


def test_summarize_atom_bound_stability_spans_eta():
    rows = [("r=1", 1., "eta", 0.1, 1., np.nan, 1., True),
            ("r=1", 1., "eta", 10., 3., np.nan, 3., True),
            ("r=2", 2., "eta", 0.1, 1., np.nan, 1., True),
            ("r=2", 2., "eta", 10., 3., np.nan, 3., True)]
    metrics = summarize("atom_bound_area", make_table("atom_bound_area", rows))
    assert metrics["stability"] == approx(3.)
    assert metrics["eta_stability"] == approx(3.)
    assert not judge(metrics, {"stability": 2.})


def test_aq_check_finds_flip():
    report = run_check(only(check="aq"))
    assert report.passed
    flip = report.table[report.table["case"] == "flip"]
    assert len(flip) == 1
    assert flip["point"][0] == approx(1.25)
    assert report.metrics["flip_error"] <= 0.05 + 1e-9
    assert report.tolerances["flip_error"] == approx(0.05)


def test_aq_check_constant_weight_flips_at_one():
    report = run_check(only(check="aq", phi={"weight_exponent": 0.}))
    assert report.passed
    flip = report.table[report.table["case"] == "flip"]
    assert flip["value"][0] == 1.
    assert report.metrics["flip_error"] == 0.


def test_dilation_check():
    report = run_check(only(check="dilation", options={"lambdas": [2., 4.], "ts": [1.]}))
    assert report.error is None
    assert len(report.table) == 4
    assert report.passed
    assert report.metrics["max_ratio"] <= 1e3


def test_kernel_difference_check():
    report = run_check(only(check="kernel_difference",
                            options={"kernels": ["harmonic1"], "n_samples": 5000}))
    assert report.passed
    assert list(report.table["param"]) == [5000., 10000.]
    assert 1. <= report.metrics["stability"] <= 1.2


def test_decay_check_is_judged_on_slope():
    report = run_check(only(check="decay_area", quad=coarse, options={"ray": [64., 128., 256.]}))
    assert report.error is None
    assert len(report.table) == 3
    assert report.tolerances["slope"] == approx(-2.45 + 0.1)
    assert report.metrics["slope"] < 0
    assert report.passed == judge(report.metrics, report.tolerances)


def test_region_breakdown_check():
    report = run_check(only(check="region_breakdown", quad=coarse, options={"ray": [64., 256.]}))
    assert report.passed
    assert len(report.table) == 2*(1 + 3) + 2*(1 + 4)
    assert report.metrics["partition"] <= 1e-6


def test_atom_bound_check_is_stable_in_eta():
    report = run_check(only(check="atom_bound_area", quad=coarse,
                            options={"radii": [1.], "etas": 3, "angular_points": 8}))
    assert report.error is None
    assert len(report.table) == 3
    assert report.metrics["eta_stability"] == approx(1., rel=1e-6)
    assert report.passed


def test_weak_atom_bound_argmax_must_stay_below_one():
    report = run_check(only(check="weak_atom_bound_area", quad=coarse,
                            options={"radii": [1.], "etas": 2, "angular_points": 8, "levels": 8}))
    assert report.error is None
    bound = report.tolerances["argmax_fraction"]
    assert bound < 1
    assert judge({"argmax_fraction": bound, "failed_fraction": 0.}, {"argmax_fraction": bound})
    assert not judge({"argmax_fraction": 1., "failed_fraction": 0.}, {"argmax_fraction": bound})
    assert report.metrics["eta_stability"] == approx(1., rel=1e-6)


def test_oracle_check_uses_quadrature_tolerance():
    configurations = [{"quantity": "inner_F", "point": [3., 0.], "t": 4.},
                      {"quantity": "area", "point": [80., 0.]}]
    report = run_check(only(check="oracle_equivalence", options={"configurations": configurations}))
    assert report.error is None
    table = report.table
    allowed = np.maximum(2e-4*np.abs(table["point"]), 1e-7)
    assert np.allclose(table["ratio"], np.abs(table["value"] - table["point"])/allowed)
    assert report.passed == (report.metrics["max_ratio"] <= 1.)
    defaults = get_defaults("oracle_equivalence")["options"]["configurations"]
    far = [item["quantity"] for item in defaults if item["point"] == [80., 0.]]
    assert sorted(far) == ["area", "gstar"]


def test_suite_output_is_deterministic(tmp_path):
    def suite():
        return tables({"check": "aq"},
                      {"check": "kernel_difference",
                       "options": {"kernels": ["holder:0.5"], "n_samples": 2000}},
                      {"check": "superposition", "quad": small})
    run_suite(suite(), Writer(str(tmp_path / "one")), max_workers=1)
    run_suite(suite(), Writer(str(tmp_path / "two")), max_workers=2)
    for name in ("aq_0", "kernel_difference_1", "superposition_2"):
        first = (tmp_path / "one" / (name + ".csv")).read_bytes()
        second = (tmp_path / "two" / (name + ".csv")).read_bytes()
        assert first == second
